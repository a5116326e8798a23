#![no_main]

use kpforge_core::lang::{parse_task, print_task};
use libfuzzer_sys::fuzz_target;

// Anything that parses must print to text that parses back to the same task.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(task) = parse_task(text) else { return };
    let printed = print_task(&task);
    let again = parse_task(&printed).unwrap_or_else(|e| panic!("reparse failed: {e}\n{printed}"));
    assert_eq!(again, task, "{printed}");
    assert_eq!(print_task(&again), printed);
});
