#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = dlra_trt::parse_config(text) {
            let again = dlra_trt::parse_config(&cfg.to_text()).expect("printed config must parse");
            assert_eq!(again, cfg);
        }
    }
});
