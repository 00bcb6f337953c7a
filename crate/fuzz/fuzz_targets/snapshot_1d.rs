#![no_main]

use std::path::Path;

use dlra_trt::io::Snapshot1d;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(snap) = Snapshot1d::from_csv(text, Path::new("fuzz")) {
            let csv = snap.to_csv().unwrap();
            let _ = Snapshot1d::from_csv(&csv, Path::new("fuzz")).unwrap();
        }
    }
});
