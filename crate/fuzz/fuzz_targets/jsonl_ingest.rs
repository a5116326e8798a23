#![no_main]

use kpforge_core::KnowledgeGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = KnowledgeGraph::from_jsonl_str(text) {
        assert!(g.index_consistent());
    }
});
