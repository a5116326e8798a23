#![no_main]

use kpforge_core::fixtures::football;
use kpforge_core::pipeline::{read_dataset, verify_record};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(records) = read_dataset(text) else { return };
    let g = football();
    for r in &records {
        let _ = r.task();
        let _ = verify_record(&g, r);
    }
});
