#![no_main]

use kpforge_core::{GraphBuilder, KnowledgeGraph};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(g) = KnowledgeGraph::from_tsv_str(text) {
        assert!(g.index_consistent());
        let again = KnowledgeGraph::from_tsv_str(&g.to_tsv()).expect("exported TSV reloads");
        assert_eq!(again.triples(), g.triples());
    }
    let mut b = GraphBuilder::new();
    let _ = b.read_types_tsv(data);
});
