#![no_main]

use kpforge_core::lang::{parse_term, Syntax, TaskJson};
use kpforge_core::FormalTask;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_term(text, Syntax::Json);
    if let Ok(json) = serde_json::from_str::<TaskJson>(text) {
        if let Ok(task) = json.to_task() {
            let back = TaskJson::from_task(&task).to_task().expect("re-encoded task decodes");
            assert!(back.same_structure(&task));
        }
    }
    let _ = serde_json::from_str::<FormalTask>(text);
});
