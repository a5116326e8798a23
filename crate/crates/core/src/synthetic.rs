//! Seeded generators for synthetic graphs, tasks and expressions.
//!
//! Tasks are tree-shaped: every non-target variable appears as an object
//! exactly once. Most are grounded in an actual path through the graph so
//! their answers are usually non-empty.

use rand::seq::IteratorRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::lang::{Constant, FormalTask, KpExpr, Term, TripletExpr, Variable};
use crate::store::{EntityId, EntitySet, GraphBuilder, KnowledgeGraph, RelationId, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphSpec {
    pub entities: usize,
    pub relations: usize,
    pub triples: usize,
    /// Number of entity types, assigned round-robin. Zero leaves the graph
    /// untyped.
    pub types: usize,
}

impl GraphSpec {
    /// `triples` facts over `triples / 3` entities and 24 relations.
    pub fn sized(triples: usize) -> Self {
        Self { entities: (triples / 3).max(2), relations: 24, triples, types: 6 }
    }
}

pub fn entity_name(i: usize) -> String {
    format!("e{i}")
}

pub fn relation_name(i: usize) -> String {
    format!("r{i}")
}

/// Random graph in which every entity heads at least two facts (when the
/// triple budget allows), so most entities can be pinned by an intersection.
pub fn random_graph(spec: GraphSpec, seed: u64) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.entities.max(2);
    let k = spec.relations.max(1);
    let entities: Vec<EntityId> = (0..n).map(|i| EntityId::new(&entity_name(i)).expect("ascii name")).collect();
    let relations: Vec<RelationId> = (0..k).map(|i| RelationId::new(&relation_name(i)).expect("ascii name")).collect();
    let mut b = GraphBuilder::new();
    for (i, e) in entities.iter().enumerate() {
        b.add_entity(e.clone());
        if spec.types > 0 {
            b.add_type(e.clone(), format!("t{}", i % spec.types));
        }
    }
    let mut added = 0;
    let random_fact = |rng: &mut ChaCha8Rng, subject: usize| {
        let mut object = rng.gen_range(0..n - 1);
        if object >= subject {
            object += 1;
        }
        let r = &relations[rng.gen_range(0..k)];
        Triple::new(entities[subject].clone(), r.clone(), entities[object].clone())
    };
    'outer: for _ in 0..2 {
        for s in 0..n {
            if added >= spec.triples {
                break 'outer;
            }
            if b.add_triple(random_fact(&mut rng, s)) {
                added += 1;
            }
        }
    }
    let mut attempts = 0;
    while added < spec.triples && attempts < spec.triples * 20 {
        attempts += 1;
        let s = rng.gen_range(0..n);
        if b.add_triple(random_fact(&mut rng, s)) {
            added += 1;
        }
    }
    b.build()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskShape {
    pub max_variables: usize,
    pub max_triplets: usize,
    /// Largest constant, in elements.
    pub max_constant: usize,
    /// Probability that a triplet follows an actual fact of the witness.
    pub grounded: f64,
}

impl Default for TaskShape {
    fn default() -> Self {
        Self { max_variables: 4, max_triplets: 8, max_constant: 3, grounded: 0.85 }
    }
}

fn random_constant(g: &KnowledgeGraph, rng: &mut impl Rng, must: Option<&EntityId>, max: usize) -> Constant {
    let mut set = EntitySet::new();
    if let Some(e) = must {
        set.insert(e.clone());
    }
    let extra = rng.gen_range(0..max.max(1));
    for _ in 0..extra {
        if let Some(e) = g.entities().iter().choose(rng) {
            set.insert(e.clone());
        }
    }
    if set.is_empty() {
        set.insert(g.entities().iter().choose(rng).cloned().unwrap_or_else(|| EntityId::new("e0").expect("ascii")));
    }
    Constant::new(set).expect("non-empty")
}

fn random_relation(g: &KnowledgeGraph, rng: &mut impl Rng) -> RelationId {
    g.relations().iter().choose(rng).cloned().unwrap_or_else(|| RelationId::new("r0").expect("ascii"))
}

/// A random tree-shaped task over the names of `g`.
pub fn random_task(g: &KnowledgeGraph, rng: &mut impl Rng, shape: TaskShape) -> FormalTask {
    let max_vars = shape.max_variables.max(1);
    let max_triplets = shape.max_triplets.max(1);
    let target = Variable::new("T").expect("identifier");
    // (variable, witness entity)
    let mut open: Vec<(Variable, Option<EntityId>)> = vec![(target.clone(), g.entities().iter().choose(rng).cloned())];
    let mut triplets = Vec::new();
    let mut var_count = 1;
    let mut i = 0;
    while i < open.len() {
        let (var, witness) = open[i].clone();
        i += 1;
        let budget = max_triplets - triplets.len() - (open.len() - i);
        if budget == 0 {
            break;
        }
        let count = rng.gen_range(1..=budget.min(3));
        for _ in 0..count {
            if triplets.len() >= max_triplets - (open.len() - i) {
                break;
            }
            let fact = witness
                .as_ref()
                .filter(|_| rng.gen_bool(shape.grounded))
                .and_then(|w| g.facts_iter(w.as_str()).choose(rng).map(|t| (t.relation.clone(), t.other_end(w.as_str()).cloned())));
            let (relation, partner) = match fact {
                Some((r, p)) => (r, p),
                None => (random_relation(g, rng), None),
            };
            let can_nest = var_count < max_vars && triplets.len() + (open.len() - i) + 1 < max_triplets;
            let object = if can_nest && rng.gen_bool(0.4) {
                var_count += 1;
                let v = Variable::new(&format!("V{var_count}")).expect("identifier");
                open.push((v.clone(), partner.or_else(|| g.entities().iter().choose(rng).cloned())));
                Term::Variable(v)
            } else {
                Term::Constant(random_constant(g, rng, partner.as_ref(), shape.max_constant))
            };
            triplets.push(TripletExpr { subject: var.clone(), relation, object });
        }
    }
    // Any variable opened but never constrained gets one constant triplet.
    let constrained: std::collections::BTreeSet<Variable> = triplets.iter().map(|t: &TripletExpr| t.subject.clone()).collect();
    for (v, w) in &open {
        if !constrained.contains(v) {
            let relation = random_relation(g, rng);
            let object = Term::Constant(random_constant(g, rng, w.as_ref(), shape.max_constant));
            triplets.push(TripletExpr { subject: v.clone(), relation, object });
        }
    }
    FormalTask::new(target, triplets).expect("generated tasks are well-formed")
}

/// A random expression of depth at most `depth`. Unions are always over
/// same-relation projections of constants, so every generated expression
/// flattens.
pub fn random_expr(g: &KnowledgeGraph, rng: &mut impl Rng, depth: usize) -> KpExpr {
    let mut names = 0;
    let relation = random_relation(g, rng);
    let child = expr_node(g, rng, depth.saturating_sub(1), &mut names);
    KpExpr::projection(relation, child)
}

fn expr_node(g: &KnowledgeGraph, rng: &mut impl Rng, depth: usize, names: &mut usize) -> KpExpr {
    if depth == 0 {
        return KpExpr::Constant(random_constant(g, rng, None, 3));
    }
    match rng.gen_range(0..5) {
        0 => KpExpr::Constant(random_constant(g, rng, None, 3)),
        1 => {
            let r = random_relation(g, rng);
            let child = expr_node(g, rng, depth - 1, names);
            KpExpr::projection(r, child)
        }
        2 => {
            let n = rng.gen_range(2..=3);
            KpExpr::Intersection(
                (0..n)
                    .map(|_| {
                        let r = random_relation(g, rng);
                        KpExpr::projection(r, expr_node(g, rng, depth - 1, names))
                    })
                    .collect(),
            )
        }
        3 => {
            let r = random_relation(g, rng);
            let n = rng.gen_range(2..=3);
            KpExpr::Union(
                (0..n).map(|_| KpExpr::projection(r.clone(), KpExpr::Constant(random_constant(g, rng, None, 2)))).collect(),
            )
        }
        _ => {
            *names += 1;
            let name = Variable::new(&format!("N{names}")).expect("identifier");
            let r = random_relation(g, rng);
            let body = KpExpr::projection(r, expr_node(g, rng, depth - 1, names));
            KpExpr::named(name, body)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_has_requested_size() {
        let g = random_graph(GraphSpec::sized(3000), 1);
        assert_eq!(g.num_triples(), 3000);
        assert!(g.index_consistent());
        assert_eq!(g, random_graph(GraphSpec::sized(3000), 1));
    }

    #[test]
    fn tasks_respect_shape() {
        let g = random_graph(GraphSpec { entities: 30, relations: 4, triples: 90, types: 2 }, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let t = random_task(&g, &mut rng, TaskShape::default());
            assert!(t.variables().len() <= 4);
            assert!(t.triplets().len() <= 8, "{t}");
            let objects = t.triplets().iter().filter(|x| x.object.as_variable().is_some()).count();
            assert_eq!(objects, t.variables().len() - 1);
        }
    }
}
