#![no_main]

use std::path::Path;

use dlra_trt::io::{history_from_csv, history_to_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(h) = history_from_csv(text, Path::new("fuzz")) {
            let _ = history_from_csv(&history_to_csv(&h), Path::new("fuzz")).unwrap();
        }
    }
});
