//! The expander: replaces a leaf constant `C` with a fresh variable pinned by
//! a validated sub-question whose answer is `C`, so the deepened task keeps
//! the same answer.
//!
//! Each expansion runs a small tool loop (search for facts about `C`,
//! summarize per-element constants into one under R-union, validate the
//! growing sub-question, answer) and leaves a full trace in its
//! [`ExpansionRecord`]. [`expand_task`] drives repeated expansions under one
//! of three strategies:
//!
//! * [`Strategy::LayerWise`]: every round expands every leaf constant once.
//!   A round is committed only if all of its expansions succeed, so each
//!   committed round pushes every constant exactly one hop further out and
//!   never leaves a constant beside the target.
//! * [`Strategy::Sequential`]: every round expands only the deepest constant,
//!   growing a single chain.
//! * [`Strategy::Random`]: every round expands a random constant and may add
//!   a constant-to-constant decoration.

mod backend;
#[cfg(feature = "remote")]
pub mod remote;

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use backend::{
    propose_from_facts, BackendError, DeterministicKb, ExpanderBackend, Proposal, ProposalRequest, SearchRequest,
};

use crate::eval::eval_kp;
use crate::lang::{print_task, Constant, Decoration, FormalTask, TaskError, Term, TripletExpr};
use crate::store::{EntityId, EntitySet, KnowledgeGraph};
use crate::taskgraph::{ConstantNodeId, TaskGraph, TaskGraphError};
use crate::validate::{check_consistency, check_preservation, check_triviality, Uniqueness, Verdict};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    LayerWise,
    Sequential,
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::LayerWise, Strategy::Sequential, Strategy::Random];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::LayerWise => "layerwise",
            Strategy::Sequential => "sequential",
            Strategy::Random => "random",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "layerwise" => Ok(Strategy::LayerWise),
            "sequential" => Ok(Strategy::Sequential),
            "random" => Ok(Strategy::Random),
            _ => Err(format!("unknown strategy {s:?} (expected layerwise, sequential or random)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub strategy: Strategy,
    pub layers: usize,
    /// Inclusive `(min, max)` number of triplets per sub-question.
    pub facts_per_subquestion: (usize, usize),
    pub uniqueness: Uniqueness,
    pub rng_seed: u64,
    /// Allow replacing multi-element constants; each element contributes a
    /// partner to a merged constant per relation.
    pub expand_sets: bool,
    /// Chance per round that the random strategy adds a decoration.
    pub redundancy_probability: f64,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::LayerWise,
            layers: 2,
            facts_per_subquestion: (2, 4),
            uniqueness: Uniqueness::StrictSingleton,
            rng_seed: 0,
            expand_sets: false,
            redundancy_probability: 0.5,
        }
    }
}

impl ExpansionConfig {
    pub fn validate(&self) -> Result<(), ExpandError> {
        let (min, max) = self.facts_per_subquestion;
        if self.layers == 0 {
            return Err(ExpandError::Config("layers must be at least 1".into()));
        }
        if min == 0 || max < min {
            return Err(ExpandError::Config(format!("facts per sub-question range {min}..={max} is invalid")));
        }
        if !(0.0..=1.0).contains(&self.redundancy_probability) {
            return Err(ExpandError::Config("redundancy probability must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ExpandError {
    #[error("{0} is not an expandable leaf constant of the task")]
    NotALeafConstant(ConstantNodeId),
    #[error("invalid expansion config: {0}")]
    Config(String),
    #[error(transparent)]
    Graph(#[from] TaskGraphError),
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// A tool invocation of the expander agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToolAction {
    Search {
        queries: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        filter_year: Option<i32>,
    },
    Summarize { sources: Vec<String>, goal: String },
    Validate { candidate: String },
    Answer { sub_question: String },
}

/// One thought/action/observation cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub thought: String,
    pub action: ToolAction,
    pub observation: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub step_index: usize,
    pub round: usize,
    pub chosen_constant: ConstantNodeId,
    pub constant: Vec<EntityId>,
    pub trace: Vec<ToolCall>,
    /// The sub-question, with the fresh variable as its target.
    pub sub_question: Option<FormalTask>,
    pub verdicts: Vec<Verdict>,
    pub succeeded: bool,
    /// Set when the expansion itself succeeded but its layer-wise round was
    /// abandoned because a sibling expansion failed.
    #[serde(default)]
    pub rolled_back: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl ExpansionRecord {
    /// Whether the expansion is part of the final task.
    pub fn applied(&self) -> bool {
        self.succeeded && !self.rolled_back
    }

    /// Checks the trace shape of a successful record: at least one search
    /// and one validation, then a single closing answer.
    pub fn trace_well_formed(&self) -> bool {
        let answers = self.trace.iter().filter(|c| matches!(c.action, ToolAction::Answer { .. })).count();
        if !self.succeeded {
            return answers == 0;
        }
        let ends_with_answer = matches!(self.trace.last().map(|c| &c.action), Some(ToolAction::Answer { .. }));
        let searches = self.trace.iter().filter(|c| matches!(c.action, ToolAction::Search { .. })).count();
        let validates = self.trace.iter().filter(|c| matches!(c.action, ToolAction::Validate { .. })).count();
        answers == 1 && ends_with_answer && searches >= 1 && validates >= 1
    }
}

/// A constant-to-constant decoration added by the random strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecorationEvent {
    pub round: usize,
    pub anchor: usize,
    pub relation: String,
    pub object: EntityId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionOutcome {
    pub task: FormalTask,
    pub records: Vec<ExpansionRecord>,
    pub decorations: Vec<DecorationEvent>,
    /// Rounds whose expansions were applied.
    pub rounds_completed: usize,
}

/// Mixes a base seed with round and ordinal (splitmix64 finalizer).
pub fn derive_seed(base: u64, a: u64, b: u64) -> u64 {
    let mut z = base ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct StepContext {
    step_index: usize,
    round: usize,
    ordinal: usize,
}

fn names(set: &EntitySet) -> Vec<String> {
    set.iter().map(|e| e.to_string()).collect()
}

/// Expands the constant `id` of `task` once, using round 1, ordinal 0 for
/// naming and seeding.
pub fn expand_constant(
    g: &KnowledgeGraph,
    task: &FormalTask,
    id: ConstantNodeId,
    backend: &dyn ExpanderBackend,
    cfg: &ExpansionConfig,
) -> Result<(ExpansionRecord, FormalTask), ExpandError> {
    cfg.validate()?;
    expand_step(g, task, id, backend, cfg, StepContext { step_index: 0, round: 1, ordinal: 0 })
}

fn failed(
    ctx: &StepContext,
    id: ConstantNodeId,
    constant: &Constant,
    trace: Vec<ToolCall>,
    verdicts: Vec<Verdict>,
    reason: impl Into<String>,
) -> ExpansionRecord {
    ExpansionRecord {
        step_index: ctx.step_index,
        round: ctx.round,
        chosen_constant: id,
        constant: constant.elements().iter().cloned().collect(),
        trace,
        sub_question: None,
        verdicts,
        succeeded: false,
        rolled_back: false,
        failure: Some(reason.into()),
    }
}

fn expand_step(
    g: &KnowledgeGraph,
    task: &FormalTask,
    id: ConstantNodeId,
    backend: &dyn ExpanderBackend,
    cfg: &ExpansionConfig,
    ctx: StepContext,
) -> Result<(ExpansionRecord, FormalTask), ExpandError> {
    let ConstantNodeId::Triplet(index) = id else {
        return Err(ExpandError::NotALeafConstant(id));
    };
    let constant = match task.triplets().get(index).map(|t| &t.object) {
        Some(Term::Constant(c)) => c.clone(),
        _ => return Err(ExpandError::NotALeafConstant(id)),
    };
    let unchanged = |record| Ok((record, task.clone()));
    if !constant.is_singleton() && !cfg.expand_sets {
        return unchanged(failed(&ctx, id, &constant, vec![], vec![], "multi-element constants are not expanded"));
    }
    let var = task.fresh_variable(&format!("X{}_{}", ctx.round, ctx.ordinal));
    let goal = format!(
        "find facts that identify {{{}}} as the unique answer for V@{var}",
        names(constant.elements()).join(", ")
    );
    let mut trace = Vec::new();

    let request = SearchRequest { queries: names(constant.elements()), filter_year: None };
    let facts = match backend.search(&request) {
        Ok(f) => f,
        Err(e) => {
            return unchanged(failed(&ctx, id, &constant, trace, vec![], format!("search failed: {e}")));
        }
    };
    trace.push(ToolCall {
        thought: format!("I need facts about {}.", request.queries.join(", ")),
        action: ToolAction::Search { queries: request.queries.clone(), filter_year: request.filter_year },
        observation: json!(facts.iter().map(|t| [t.subject.as_str(), t.relation.as_str(), t.object.as_str()]).collect::<Vec<_>>()),
    });
    if facts.is_empty() {
        return unchanged(failed(&ctx, id, &constant, trace, vec![], "no facts about the constant"));
    }

    let seed = derive_seed(cfg.rng_seed, ctx.round as u64, ctx.ordinal as u64);
    let proposals = match backend.propose(ProposalRequest { constant: &constant, facts: &facts, goal: &goal, seed }) {
        Ok(p) => p,
        Err(e) => return unchanged(failed(&ctx, id, &constant, trace, vec![], format!("proposal failed: {e}"))),
    };

    let (min, max) = cfg.facts_per_subquestion;
    let mut chosen: Vec<TripletExpr> = Vec::new();
    let mut current: Option<EntitySet> = None;
    let mut last_verdicts = Vec::new();
    let mut accepted = None;
    for proposal in proposals {
        if chosen.len() >= max {
            break;
        }
        let merged = if proposal.sources.len() > 1 {
            let result = backend.summarize(&proposal.sources, &goal);
            trace.push(ToolCall {
                thought: format!("Merge the {} partners reached through {}.", proposal.sources.len(), proposal.relation),
                action: ToolAction::Summarize {
                    sources: proposal.sources.iter().map(|c| crate::lang::constant_string(c, crate::lang::Syntax::Json)).collect(),
                    goal: goal.clone(),
                },
                observation: match &result {
                    Ok(c) => json!(names(c.elements())),
                    Err(e) => json!({ "error": e.to_string() }),
                },
            });
            match result {
                Ok(c) => c,
                Err(_) => continue,
            }
        } else if let Some(c) = proposal.sources.into_iter().next() {
            c
        } else {
            continue;
        };
        let triplet = TripletExpr::new(var.clone(), proposal.relation, merged);
        if chosen.contains(&triplet) {
            continue;
        }
        let projected = eval_kp(g, triplet.relation.as_str(), triplet.object.as_constant().expect("constant").elements());
        let next: EntitySet = match &current {
            None => projected,
            Some(prev) => prev.intersection(&projected).cloned().collect(),
        };
        if !next.is_superset(constant.elements()) {
            continue;
        }
        let pinned_before = current.as_ref().is_some_and(|c| c == constant.elements());
        let shrinks = current.as_ref().map_or(true, |prev| next.len() < prev.len());
        if !(shrinks || (pinned_before && chosen.len() < min)) {
            continue;
        }
        chosen.push(triplet);
        current = Some(next);

        let sub = FormalTask::new(var.clone(), chosen.clone())?;
        let consistency = check_consistency(g, &sub, &constant, cfg.uniqueness);
        let triviality = check_triviality(g, &sub);
        let ok = consistency.passed && triviality.passed && chosen.len() >= min;
        trace.push(ToolCall {
            thought: format!("Check whether the {} constraints single out the constant.", chosen.len()),
            action: ToolAction::Validate { candidate: print_task(&sub) },
            observation: json!({
                "consistency": consistency.passed,
                "triviality": triviality.passed,
                "detail": [consistency.detail.clone(), triviality.detail.clone()],
            }),
        });
        last_verdicts = vec![consistency, triviality];
        if ok {
            accepted = Some(sub);
            break;
        }
    }

    let Some(sub) = accepted else {
        let reason = if chosen.is_empty() {
            "no usable proposal"
        } else {
            "could not pin the constant within the fact budget"
        };
        return unchanged(failed(&ctx, id, &constant, trace, last_verdicts, reason));
    };

    let updated = task.splice(index, &var, chosen)?;
    let preservation = check_preservation(g, task, &updated);
    let mut verdicts = last_verdicts;
    let preserved = preservation.passed;
    verdicts.push(preservation);
    if !preserved {
        return unchanged(failed(&ctx, id, &constant, trace, verdicts, "expansion changed the task answer"));
    }
    trace.push(ToolCall {
        thought: format!("V@{var} is pinned; splice the sub-question into the task."),
        action: ToolAction::Answer { sub_question: print_task(&sub) },
        observation: json!(print_task(&updated)),
    });
    let record = ExpansionRecord {
        step_index: ctx.step_index,
        round: ctx.round,
        chosen_constant: id,
        constant: constant.elements().iter().cloned().collect(),
        trace,
        sub_question: Some(sub),
        verdicts,
        succeeded: true,
        rolled_back: false,
        failure: None,
    };
    Ok((record, updated))
}

/// Triplet constants of `task`, deepest first.
fn frontier(task: &FormalTask) -> Result<Vec<ConstantNodeId>, ExpandError> {
    Ok(TaskGraph::build(task)?
        .leaf_constants()
        .into_iter()
        .filter(|id| matches!(id, ConstantNodeId::Triplet(_)))
        .collect())
}

/// Runs `cfg.layers` rounds of expansion under `cfg.strategy`.
pub fn expand_task(
    g: &KnowledgeGraph,
    task: &FormalTask,
    backend: &dyn ExpanderBackend,
    cfg: &ExpansionConfig,
) -> Result<ExpansionOutcome, ExpandError> {
    cfg.validate()?;
    TaskGraph::build(task)?;
    let mut current = task.clone();
    let mut records: Vec<ExpansionRecord> = Vec::new();
    let mut decorations = Vec::new();
    let mut rounds_completed = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    for round in 1..=cfg.layers {
        let leaves = frontier(&current)?;
        if leaves.is_empty() {
            break;
        }
        match cfg.strategy {
            Strategy::LayerWise => {
                let mut working = current.clone();
                let first = records.len();
                let mut all_ok = true;
                for (ordinal, id) in leaves.into_iter().enumerate() {
                    let ctx = StepContext { step_index: records.len(), round, ordinal };
                    let (record, next) = expand_step(g, &working, id, backend, cfg, ctx)?;
                    all_ok &= record.succeeded;
                    working = next;
                    records.push(record);
                    if !all_ok {
                        break;
                    }
                }
                if all_ok {
                    current = working;
                    rounds_completed += 1;
                } else {
                    for r in &mut records[first..] {
                        r.rolled_back = r.succeeded;
                    }
                    break;
                }
            }
            Strategy::Sequential => {
                let mut progressed = false;
                for (ordinal, id) in leaves.into_iter().enumerate() {
                    let ctx = StepContext { step_index: records.len(), round, ordinal };
                    let (record, next) = expand_step(g, &current, id, backend, cfg, ctx)?;
                    let ok = record.succeeded;
                    records.push(record);
                    if ok {
                        current = next;
                        progressed = true;
                        break;
                    }
                }
                if !progressed {
                    break;
                }
                rounds_completed += 1;
            }
            Strategy::Random => {
                let pick = leaves[rng.gen_range(0..leaves.len())];
                let ctx = StepContext { step_index: records.len(), round, ordinal: 0 };
                let (record, next) = expand_step(g, &current, pick, backend, cfg, ctx)?;
                let ok = record.succeeded;
                if ok {
                    current = next;
                    rounds_completed += 1;
                }
                records.push(record);
                if rng.gen_bool(cfg.redundancy_probability) {
                    if let Some((next, event)) = decorate(g, &current, round, &mut rng)? {
                        current = next;
                        decorations.push(event);
                    }
                }
            }
        }
    }
    Ok(ExpansionOutcome { task: current, records, decorations, rounds_completed })
}

/// Attaches a true fact about a random constant to that constant.
fn decorate(
    g: &KnowledgeGraph,
    task: &FormalTask,
    round: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Option<(FormalTask, DecorationEvent)>, ExpandError> {
    let anchors: Vec<usize> = task
        .triplets()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.object.as_constant().is_some())
        .map(|(i, _)| i)
        .collect();
    if anchors.is_empty() {
        return Ok(None);
    }
    let anchor = anchors[rng.gen_range(0..anchors.len())];
    let constant = task.triplets()[anchor].object.as_constant().expect("filtered to constants");
    let elements: Vec<&EntityId> = constant.elements().iter().collect();
    let element = elements[rng.gen_range(0..elements.len())];
    let facts: Vec<_> = g.facts_iter(element.as_str()).collect();
    if facts.is_empty() {
        return Ok(None);
    }
    let fact = facts[rng.gen_range(0..facts.len())];
    let other = fact.other_end(element.as_str()).expect("incident fact").clone();
    let decoration = Decoration { anchor, relation: fact.relation.clone(), object: Constant::singleton(other.clone()) };
    let event = DecorationEvent { round, anchor, relation: fact.relation.to_string(), object: other };
    Ok(Some((task.push_decoration(decoration)?, event)))
}
