use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::eval::{answer, eval_kp, resolve, EvalError};
use crate::lang::{constant_string, FormalTask, Syntax, Term, Variable};
use crate::store::{EntityId, EntitySet, KnowledgeGraph};

/// Identical actions allowed in one trajectory before it counts as
/// repetitive.
pub const MAX_IDENTICAL_ACTIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverAction {
    Search { queries: Vec<String> },
    Visit { entities: Vec<String>, goal: String },
    Answer { answer: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStep {
    pub thought: String,
    pub action: SolverAction,
    pub observation: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryVerdicts {
    pub correct: bool,
    pub clean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub task_id: String,
    pub steps: Vec<SolverStep>,
    pub final_answer: EntitySet,
    pub verdicts: TrajectoryVerdicts,
}

fn names(set: &EntitySet) -> Vec<String> {
    set.iter().map(ToString::to_string).collect()
}

fn describe(term: &Term) -> String {
    match term {
        Term::Constant(c) => constant_string(c, Syntax::Json),
        Term::Variable(v) => format!("V@{v}"),
    }
}

/// Deterministic ReAct-style solver. Variables are resolved dependencies
/// first; each triplet is one Search, and a variable with several
/// constraints is checked with one Visit over its candidates.
pub fn solve(g: &KnowledgeGraph, t: &FormalTask, task_id: &str) -> Result<Trajectory, EvalError> {
    let order = t.topological_order()?;
    let mut bound: BTreeMap<Variable, EntitySet> = BTreeMap::new();
    let mut steps = Vec::new();
    for var in &order {
        let triplets: Vec<_> = t.triplets_of(var).map(|(_, x)| x).collect();
        let mut candidates: Option<EntitySet> = None;
        for x in &triplets {
            let found = eval_kp(g, x.relation.as_str(), resolve(&x.object, &bound));
            steps.push(SolverStep {
                thought: format!("V@{var} must be linked by {} to {}.", x.relation, describe(&x.object)),
                action: SolverAction::Search { queries: vec![format!("{} {}", x.relation, describe(&x.object))] },
                observation: json!({ "results": names(&found) }),
            });
            candidates = Some(match candidates {
                None => found,
                Some(prev) => prev.intersection(&found).cloned().collect(),
            });
        }
        let value = candidates.unwrap_or_default();
        if triplets.len() >= 2 && !value.is_empty() {
            let relations: BTreeSet<&str> = triplets.iter().map(|x| x.relation.as_str()).collect();
            let pages: BTreeMap<String, Vec<[String; 3]>> = value
                .iter()
                .map(|e| {
                    let facts = g
                        .facts_iter(e.as_str())
                        .filter(|f| relations.contains(f.relation.as_str()))
                        .map(|f| [f.subject.to_string(), f.relation.to_string(), f.object.to_string()])
                        .collect();
                    (e.to_string(), facts)
                })
                .collect();
            steps.push(SolverStep {
                thought: format!("Confirm which candidates for V@{var} meet all {} constraints.", triplets.len()),
                action: SolverAction::Visit {
                    entities: names(&value),
                    goal: format!("check the constraints on V@{var}"),
                },
                observation: json!({ "pages": pages }),
            });
        }
        bound.insert(var.clone(), value);
    }
    let final_answer = bound.remove(t.target()).unwrap_or_default();
    steps.push(SolverStep {
        thought: format!("V@{} is resolved.", t.target()),
        action: SolverAction::Answer { answer: names(&final_answer) },
        observation: json!({ "answer": names(&final_answer) }),
    });
    let oracle = answer(g, t)?;
    let mut trajectory = Trajectory {
        task_id: task_id.to_string(),
        steps,
        verdicts: TrajectoryVerdicts { correct: !final_answer.is_empty() && final_answer == oracle, clean: false },
        final_answer,
    };
    trajectory.verdicts.clean = is_grounded(&trajectory) && !is_repetitive(&trajectory);
    Ok(trajectory)
}

fn surfaced_by(observation: &Value, out: &mut BTreeSet<String>) {
    if let Some(results) = observation.get("results").and_then(Value::as_array) {
        out.extend(results.iter().filter_map(Value::as_str).map(str::to_string));
    }
    if let Some(pages) = observation.get("pages").and_then(Value::as_object) {
        for (entity, facts) in pages {
            out.insert(entity.clone());
            for fact in facts.as_array().into_iter().flatten() {
                for part in fact.as_array().into_iter().flatten() {
                    if let Some(s) = part.as_str() {
                        out.insert(s.to_string());
                    }
                }
            }
        }
    }
}

/// Every visited entity was surfaced by an earlier observation.
pub fn is_grounded(t: &Trajectory) -> bool {
    let mut seen = BTreeSet::new();
    for step in &t.steps {
        if let SolverAction::Visit { entities, .. } = &step.action {
            if !entities.iter().all(|e| seen.contains(e)) {
                return false;
            }
        }
        surfaced_by(&step.observation, &mut seen);
    }
    true
}

/// Some action repeats more than [`MAX_IDENTICAL_ACTIONS`] times.
pub fn is_repetitive(t: &Trajectory) -> bool {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for step in &t.steps {
        let key = serde_json::to_string(&step.action).expect("actions serialize");
        let n = counts.entry(key).or_default();
        *n += 1;
        if *n > MAX_IDENTICAL_ACTIONS {
            return true;
        }
    }
    false
}

fn is_correct(g: &KnowledgeGraph, task: &FormalTask, t: &Trajectory) -> bool {
    let answers: Vec<&Vec<String>> = t
        .steps
        .iter()
        .filter_map(|s| match &s.action {
            SolverAction::Answer { answer } => Some(answer),
            _ => None,
        })
        .collect();
    let final_is_answer = matches!(t.steps.last().map(|s| &s.action), Some(SolverAction::Answer { .. }));
    let stated: Option<EntitySet> = answers
        .first()
        .and_then(|a| a.iter().map(|n| EntityId::new(n).ok()).collect::<Option<EntitySet>>());
    let oracle = answer(g, task).ok();
    answers.len() == 1
        && final_is_answer
        && stated.as_ref() == Some(&t.final_answer)
        && !t.final_answer.is_empty()
        && oracle.as_ref() == Some(&t.final_answer)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryDrops {
    pub incorrect: usize,
    pub ungrounded: usize,
    pub repetitive: usize,
}

impl TrajectoryDrops {
    pub fn total(&self) -> usize {
        self.incorrect + self.ungrounded + self.repetitive
    }
}

/// Why a trajectory would be dropped, checked in order: correctness against
/// the oracle, then visit provenance, then repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryDrop {
    Incorrect,
    Ungrounded,
    Repetitive,
}

pub fn screen_trajectory(g: &KnowledgeGraph, task: &FormalTask, t: &Trajectory) -> Option<TrajectoryDrop> {
    if !is_correct(g, task, t) {
        Some(TrajectoryDrop::Incorrect)
    } else if !is_grounded(t) {
        Some(TrajectoryDrop::Ungrounded)
    } else if is_repetitive(t) {
        Some(TrajectoryDrop::Repetitive)
    } else {
        None
    }
}

/// Keeps correct, grounded, non-repetitive trajectories. Each dropped
/// trajectory is tallied under exactly one reason.
pub fn filter_trajectories<'a>(
    g: &KnowledgeGraph,
    items: impl IntoIterator<Item = (&'a FormalTask, Trajectory)>,
) -> (Vec<Trajectory>, TrajectoryDrops) {
    let mut kept = Vec::new();
    let mut drops = TrajectoryDrops::default();
    for (task, t) in items {
        match screen_trajectory(g, task, &t) {
            None => kept.push(t),
            Some(TrajectoryDrop::Incorrect) => drops.incorrect += 1,
            Some(TrajectoryDrop::Ungrounded) => drops.ungrounded += 1,
            Some(TrajectoryDrop::Repetitive) => drops.repetitive += 1,
        }
    }
    (kept, drops)
}
