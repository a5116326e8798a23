//! Reference implementations used as test oracles. They read only the raw
//! triple list of a graph, never its indexes.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use kpforge_core::{EntityId, EntitySet, FormalTask, KnowledgeGraph, Term, TripletExpr, Variable};

/// Linear-scan knowledge projection.
pub fn naive_kp(g: &KnowledgeGraph, relation: &str, sources: &EntitySet) -> EntitySet {
    let mut out = EntitySet::new();
    for t in g.triples() {
        if t.relation.as_str() != relation {
            continue;
        }
        if sources.contains(&t.object) {
            out.insert(t.subject.clone());
        }
        if sources.contains(&t.subject) {
            out.insert(t.object.clone());
        }
    }
    out
}

struct Facts(HashSet<(String, String, String)>);

impl Facts {
    fn new(g: &KnowledgeGraph) -> Self {
        Facts(
            g.triples()
                .iter()
                .map(|t| (t.subject.to_string(), t.relation.to_string(), t.object.to_string()))
                .collect(),
        )
    }

    fn linked(&self, a: &str, r: &str, b: &str) -> bool {
        self.0.contains(&(a.to_string(), r.to_string(), b.to_string()))
            || self.0.contains(&(b.to_string(), r.to_string(), a.to_string()))
    }
}

fn satisfied(facts: &Facts, t: &TripletExpr, assignment: &BTreeMap<Variable, EntityId>) -> Option<bool> {
    let subject = assignment.get(&t.subject)?;
    match &t.object {
        Term::Constant(c) => {
            Some(c.elements().iter().any(|e| facts.linked(subject.as_str(), t.relation.as_str(), e.as_str())))
        }
        Term::Variable(v) => {
            let object = assignment.get(v)?;
            Some(facts.linked(subject.as_str(), t.relation.as_str(), object.as_str()))
        }
    }
}

/// Assignment enumeration: the set of target values over all assignments of
/// entities to variables that satisfy every triplet. Uses backtracking, with
/// each triplet checked as soon as its variables are assigned.
pub fn enumerate_answer(g: &KnowledgeGraph, task: &FormalTask) -> EntitySet {
    let facts = Facts::new(g);
    let mut order: Vec<Variable> = vec![task.target().clone()];
    for t in task.triplets() {
        for v in [Some(&t.subject), t.object.as_variable()].into_iter().flatten() {
            if !order.contains(v) {
                order.push(v.clone());
            }
        }
    }
    let domain: Vec<EntityId> = g.entities().iter().cloned().collect();
    let mut found = EntitySet::new();
    let mut assignment = BTreeMap::new();
    search(&facts, task, &order, &domain, 0, &mut assignment, &mut found);
    found
}

fn search(
    facts: &Facts,
    task: &FormalTask,
    order: &[Variable],
    domain: &[EntityId],
    depth: usize,
    assignment: &mut BTreeMap<Variable, EntityId>,
    found: &mut EntitySet,
) -> bool {
    if depth == order.len() {
        found.insert(assignment[task.target()].clone());
        return true;
    }
    let var = &order[depth];
    let mut any = false;
    for e in domain {
        if depth == 0 && found.contains(e) {
            continue;
        }
        assignment.insert(var.clone(), e.clone());
        let consistent = task.triplets().iter().all(|t| satisfied(facts, t, assignment).unwrap_or(true));
        if consistent && search(facts, task, order, domain, depth + 1, assignment, found) {
            any = true;
            if depth > 0 {
                // One witness is enough for the target value being tried.
                assignment.remove(var);
                return true;
            }
        }
        assignment.remove(var);
    }
    any
}

/// The part of `task` reachable from `var`, with `var` as the target.
pub fn subtask(task: &FormalTask, var: &Variable) -> FormalTask {
    let mut keep = BTreeSet::new();
    let mut stack = vec![var.clone()];
    let mut seen = BTreeSet::new();
    while let Some(v) = stack.pop() {
        if !seen.insert(v.clone()) {
            continue;
        }
        for (i, t) in task.triplets().iter().enumerate() {
            if t.subject == v {
                keep.insert(i);
                if let Term::Variable(o) = &t.object {
                    stack.push(o.clone());
                }
            }
        }
    }
    let triplets = keep.into_iter().map(|i| task.triplets()[i].clone()).collect();
    FormalTask::new(var.clone(), triplets).expect("a reachable part of a well-formed task is well-formed")
}

pub fn set(names: &[&str]) -> EntitySet {
    names.iter().map(|n| EntityId::new(n).unwrap()).collect()
}
