//! Bundled football fixture: a small graph of East German clubs, players and
//! years, with the two-hop player question over it.

use crate::lang::{parse_task, FormalTask};
use crate::store::{EntityId, EntitySet, GraphBuilder, KnowledgeGraph};

pub const FOOTBALL_TSV: &str = include_str!("../fixtures/football.tsv");
pub const FOOTBALL_TYPES_TSV: &str = include_str!("../fixtures/football.types.tsv");
pub const EQ10_TASK: &str = include_str!("../fixtures/eq10.task");
/// Golden answer of [`EQ10_TASK`], one entity per line.
pub const EQ10_ANSWER: &str = include_str!("../fixtures/eq10.answer");

/// The football graph with entity types.
pub fn football() -> KnowledgeGraph {
    let mut b = GraphBuilder::new();
    b.read_tsv(FOOTBALL_TSV.as_bytes()).expect("bundled fixture parses");
    b.read_types_tsv(FOOTBALL_TYPES_TSV.as_bytes()).expect("bundled types parse");
    b.build()
}

/// Players of the 1966-founded East German team who played in 2004 or 2005
/// and were born in the 1990s.
pub fn eq10_task() -> FormalTask {
    parse_task(EQ10_TASK.trim()).expect("bundled task parses")
}

pub fn eq10_answer() -> EntitySet {
    EQ10_ANSWER
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| EntityId::new(l).expect("golden names are valid"))
        .collect()
}
