mod common;

use std::collections::BTreeSet;

use common::naive_kp;
use kpforge_core::synthetic::{random_graph, GraphSpec};
use kpforge_core::{EntitySet, Format, KnowledgeGraph, Triple};
use proptest::prelude::*;

fn graph(seed: u64) -> KnowledgeGraph {
    random_graph(GraphSpec { entities: 40, relations: 4, triples: 150, types: 3 }, seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn neighbors_match_linear_scan(seed in any::<u64>()) {
        let g = graph(seed);
        for e in g.entities().iter().take(15) {
            for r in g.relations() {
                let single: EntitySet = [e.clone()].into();
                prop_assert_eq!(g.neighbors(r.as_str(), e.as_str()), naive_kp(&g, r.as_str(), &single));
            }
        }
    }

    #[test]
    fn facts_about_match_full_scan(seed in any::<u64>()) {
        let g = graph(seed);
        for e in g.entities().iter().take(15) {
            let expected: BTreeSet<Triple> =
                g.triples().iter().filter(|t| t.subject == *e || t.object == *e).cloned().collect();
            prop_assert_eq!(g.facts_about(e.as_str()), expected);
        }
    }

    #[test]
    fn indexes_stay_consistent(seed in any::<u64>()) {
        prop_assert!(graph(seed).index_consistent());
    }

    #[test]
    fn reingesting_serialized_graph_is_identity(seed in any::<u64>()) {
        let g = graph(seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.tsv");
        std::fs::write(&path, g.to_tsv()).unwrap();
        let once = KnowledgeGraph::ingest(&path, Format::Tsv).unwrap();
        let doubled = format!("{}{}", g.to_tsv(), g.to_tsv());
        let twice = KnowledgeGraph::from_tsv_str(&doubled).unwrap();
        prop_assert_eq!(once.triples(), g.triples());
        prop_assert_eq!(twice.triples(), g.triples());
    }

    #[test]
    fn walks_follow_edges(seed in any::<u64>(), steps in 1usize..12) {
        let g = graph(seed);
        let start = g.entities().iter().next().unwrap().clone();
        let walk = g.random_walk(start.as_str(), steps, seed).unwrap();
        prop_assert!(walk.len() <= steps + 1);
        for pair in walk.windows(2) {
            prop_assert!(g.adjacent(pair[0].as_str()).contains(&pair[1]));
        }
        prop_assert_eq!(walk, g.random_walk(start.as_str(), steps, seed).unwrap());
    }
}
