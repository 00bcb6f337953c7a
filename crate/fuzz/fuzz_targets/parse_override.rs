#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(pair) = dlra_trt::config::parse_override(text) {
            let _ = dlra_trt::config::parse_config_with("", &[pair]);
        }
    }
});
