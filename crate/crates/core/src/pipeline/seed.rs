use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::answer;
use crate::expander::derive_seed;
use crate::lang::{Constant, FormalTask, TripletExpr, Variable};
use crate::store::{EntityId, KnowledgeGraph, RelationId};
use crate::validate::{check_degeneracy, is_trivial, DEFAULT_CARDINALITY_CAP};

/// Retry budget per seed before reporting a sparse region.
pub const SEED_ATTEMPTS: usize = 20;

/// Which entity on the walk becomes the answer the seed is built around.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPick {
    /// The walk's final entity.
    #[default]
    Last,
    /// A uniformly chosen entity on the walk.
    Uniform,
    /// The walk entity with the most facts.
    MaxDegree,
}

impl std::str::FromStr for TargetPick {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "last" => Ok(TargetPick::Last),
            "uniform" | "random" => Ok(TargetPick::Uniform),
            "max_degree" => Ok(TargetPick::MaxDegree),
            _ => Err(format!("unknown target pick {s:?} (expected last, uniform or max_degree)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub walk_steps: usize,
    pub target_pick: TargetPick,
    /// Inclusive `(min, max)` number of constraints on the target.
    pub constraint_count: (usize, usize),
    pub rng_seed: u64,
}

impl Default for SeedSpec {
    fn default() -> Self {
        Self { walk_steps: 4, target_pick: TargetPick::Last, constraint_count: (2, 3), rng_seed: 0 }
    }
}

impl SeedSpec {
    pub fn validate(&self) -> Result<(), SeedError> {
        let (min, max) = self.constraint_count;
        if self.walk_steps < 2 {
            return Err(SeedError::InvalidSpec("walk_steps must be at least 2".into()));
        }
        if min < 2 || max < min {
            return Err(SeedError::InvalidSpec(format!("constraint count {min}..={max} is invalid (min must be at least 2)")));
        }
        Ok(())
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self.clone() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("invalid seed spec: {0}")]
    InvalidSpec(String),
    #[error("graph is empty")]
    EmptyGraph,
    #[error("no usable seed after {attempts} attempts: the walked region is too sparse")]
    Sparse { attempts: usize },
    #[error("unknown entity {0}")]
    UnknownEntity(String),
}

/// Builds a seed around an entity: `count` distinct facts about `entity`
/// become constant constraints on the target. Returns `None` when the entity
/// has too few facts or the result fails the triviality or degeneracy screen.
pub fn seed_for_entity(
    g: &KnowledgeGraph,
    entity: &str,
    count: (usize, usize),
    rng: &mut impl Rng,
) -> Option<FormalTask> {
    let mut constraints: Vec<(RelationId, EntityId)> = g
        .facts_iter(entity)
        .filter_map(|t| t.other_end(entity).map(|o| (t.relation.clone(), o.clone())))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if constraints.len() < count.0 {
        return None;
    }
    constraints.shuffle(rng);
    let k = rng.gen_range(count.0..=count.1.min(constraints.len()));
    let target = Variable::new("T").expect("identifier");
    let triplets = constraints
        .into_iter()
        .take(k)
        .map(|(r, o)| TripletExpr::new(target.clone(), r, Constant::singleton(o)))
        .collect();
    let mut task = FormalTask::new(target, triplets).ok()?;
    if is_trivial(&task) || !check_degeneracy(g, &task, DEFAULT_CARDINALITY_CAP).passed {
        return None;
    }
    let expected = answer(g, &task).ok()?;
    task.set_expected_answer(Some(expected));
    Some(task)
}

/// Generates a seed task from a random walk.
pub fn generate_seed(g: &KnowledgeGraph, spec: &SeedSpec) -> Result<FormalTask, SeedError> {
    spec.validate()?;
    if g.is_empty() {
        return Err(SeedError::EmptyGraph);
    }
    let starts: Vec<&EntityId> = g.entities().iter().filter(|e| g.degree(e.as_str()) > 0).collect();
    if starts.is_empty() {
        return Err(SeedError::Sparse { attempts: 0 });
    }
    for attempt in 0..SEED_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, attempt as u64, 0x5eed));
        let start = starts[rng.gen_range(0..starts.len())];
        let walk = g.random_walk_with(start.as_str(), spec.walk_steps, &mut rng).expect("start is known, steps > 0");
        let picked = match spec.target_pick {
            TargetPick::Last => walk.last(),
            TargetPick::Uniform => walk.get(rng.gen_range(0..walk.len())),
            TargetPick::MaxDegree => walk.iter().max_by_key(|e| (g.degree(e.as_str()), std::cmp::Reverse(*e))),
        }
        .expect("walk is never empty");
        if let Some(task) = seed_for_entity(g, picked.as_str(), spec.constraint_count, &mut rng) {
            return Ok(task);
        }
    }
    Err(SeedError::Sparse { attempts: SEED_ATTEMPTS })
}
