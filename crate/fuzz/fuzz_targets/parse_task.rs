#![no_main]

use kpforge_core::lang::{parse_task, parse_term, Syntax};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_task(text);
        let _ = parse_term(text, Syntax::Dsl);
    }
});
