#![no_main]

use std::path::Path;

use dlra_trt::io::Snapshot2d;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = Snapshot2d::from_csv(text, Path::new("fuzz"));
    }
});
