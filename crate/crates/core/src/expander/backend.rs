use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{merge_union, Constant};
use crate::store::{EntityId, KnowledgeGraph, RelationId, Triple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("nothing to merge")]
    EmptyMerge,
    #[error("backend request failed: {0}")]
    Transport(String),
    #[error("backend returned an unusable response: {0}")]
    BadResponse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub queries: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter_year: Option<i32>,
}

/// One way to constrain the new variable: the projection through `relation`
/// of the union of `sources` (one source constant per element of the
/// constant being replaced).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proposal {
    pub relation: RelationId,
    pub sources: Vec<Constant>,
}

#[derive(Debug, Clone, Copy)]
pub struct ProposalRequest<'a> {
    pub constant: &'a Constant,
    pub facts: &'a [Triple],
    pub goal: &'a str,
    pub seed: u64,
}

/// Knowledge access for the expander agent.
pub trait ExpanderBackend {
    /// Facts mentioning the queried entities.
    fn search(&self, request: &SearchRequest) -> Result<Vec<Triple>, BackendError>;

    /// Merges per-source constants into one (R-union).
    fn summarize(&self, sources: &[Constant], goal: &str) -> Result<Constant, BackendError>;

    /// Candidate constraints, most preferred first.
    fn propose(&self, request: ProposalRequest<'_>) -> Result<Vec<Proposal>, BackendError>;
}

/// Reproducible backend answering every tool call from the local graph.
#[derive(Debug, Clone, Copy)]
pub struct DeterministicKb<'g> {
    graph: &'g KnowledgeGraph,
}

impl<'g> DeterministicKb<'g> {
    pub fn new(graph: &'g KnowledgeGraph) -> Self {
        Self { graph }
    }

    pub fn graph(&self) -> &'g KnowledgeGraph {
        self.graph
    }
}

impl ExpanderBackend for DeterministicKb<'_> {
    /// `filter_year` has no meaning for a static graph and is ignored.
    fn search(&self, request: &SearchRequest) -> Result<Vec<Triple>, BackendError> {
        let mut out = BTreeSet::new();
        for q in &request.queries {
            out.extend(self.graph.facts_iter(q).cloned());
        }
        Ok(out.into_iter().collect())
    }

    fn summarize(&self, sources: &[Constant], _goal: &str) -> Result<Constant, BackendError> {
        merge_union(sources).map_err(|_| BackendError::EmptyMerge)
    }

    fn propose(&self, request: ProposalRequest<'_>) -> Result<Vec<Proposal>, BackendError> {
        Ok(propose_from_facts(request))
    }
}

/// Builds proposals from raw facts. For a single entity every fact is one
/// proposal; for a set, each relation shared by all elements yields one
/// proposal with a seeded choice of partner per element. The result is
/// shuffled with the request seed.
pub fn propose_from_facts(request: ProposalRequest<'_>) -> Vec<Proposal> {
    let mut rng = ChaCha8Rng::seed_from_u64(request.seed);
    let elements = request.constant.elements();
    // element -> relation -> partners
    let mut partners: BTreeMap<&EntityId, BTreeMap<&RelationId, BTreeSet<&EntityId>>> = BTreeMap::new();
    for t in request.facts {
        for e in elements {
            if let Some(other) = t.other_end(e.as_str()) {
                partners.entry(e).or_default().entry(&t.relation).or_default().insert(other);
            }
        }
    }
    let mut proposals = Vec::new();
    if let Some(e) = request.constant.single() {
        if let Some(by_rel) = partners.get(e) {
            for (r, others) in by_rel {
                for o in others {
                    proposals.push(Proposal { relation: (*r).clone(), sources: vec![Constant::singleton((*o).clone())] });
                }
            }
        }
    } else {
        let mut shared: Option<BTreeSet<&RelationId>> = None;
        for e in elements {
            let rels: BTreeSet<&RelationId> = partners.get(e).map(|m| m.keys().copied().collect()).unwrap_or_default();
            shared = Some(match shared {
                None => rels,
                Some(prev) => prev.intersection(&rels).copied().collect(),
            });
        }
        for r in shared.unwrap_or_default() {
            let sources = elements
                .iter()
                .map(|e| {
                    let options: Vec<&&EntityId> = partners[e][r].iter().collect();
                    Constant::singleton((**options[rng.gen_range(0..options.len())]).clone())
                })
                .collect();
            proposals.push(Proposal { relation: r.clone(), sources });
        }
    }
    proposals.shuffle(&mut rng);
    proposals
}
