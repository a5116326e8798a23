//! Exact set semantics for tasks.
//!
//! Each variable is bound to the intersection of the projections named by
//! its triplets; variable objects resolve to their already computed
//! bindings, so variables are evaluated dependencies-first.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::lang::{FormalTask, KpExpr, TaskError, Term, Variable};
use crate::store::{EntitySet, KnowledgeGraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// Knowledge projection of a set: every entity related by `relation`, in
/// either direction, to some member of `sources`.
pub fn eval_kp(g: &KnowledgeGraph, relation: &str, sources: &EntitySet) -> EntitySet {
    let mut out = EntitySet::new();
    for v in sources {
        g.extend_neighbors(relation, v.as_str(), &mut out);
    }
    out
}

/// Variable bindings produced by [`evaluate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Binding(BTreeMap<Variable, EntitySet>);

impl Binding {
    pub fn get(&self, var: &Variable) -> Option<&EntitySet> {
        self.0.get(var)
    }

    pub fn get_str(&self, name: &str) -> Option<&EntitySet> {
        self.0.iter().find(|(v, _)| v.as_str() == name).map(|(_, s)| s)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &EntitySet)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Variables bound to the empty set.
    pub fn empty_variables(&self) -> Vec<&Variable> {
        self.0.iter().filter(|(_, s)| s.is_empty()).map(|(v, _)| v).collect()
    }
}

pub(crate) fn resolve<'a>(term: &'a Term, bound: &'a BTreeMap<Variable, EntitySet>) -> &'a EntitySet {
    match term {
        Term::Constant(c) => c.elements(),
        Term::Variable(v) => bound.get(v).expect("dependencies are evaluated first"),
    }
}

/// Evaluates every variable of `task` over `g`.
pub fn evaluate(g: &KnowledgeGraph, task: &FormalTask) -> Result<Binding, EvalError> {
    let order = task.topological_order()?;
    let mut bound: BTreeMap<Variable, EntitySet> = BTreeMap::new();
    for var in order {
        let value = evaluate_variable(g, task, &var, &bound);
        bound.insert(var, value);
    }
    Ok(Binding(bound))
}

fn evaluate_variable(
    g: &KnowledgeGraph,
    task: &FormalTask,
    var: &Variable,
    bound: &BTreeMap<Variable, EntitySet>,
) -> EntitySet {
    let mut acc: Option<EntitySet> = None;
    for (_, t) in task.triplets_of(var) {
        let projected = eval_kp(g, t.relation.as_str(), resolve(&t.object, bound));
        acc = Some(match acc {
            None => projected,
            Some(prev) => prev.intersection(&projected).cloned().collect(),
        });
        if acc.as_ref().is_some_and(EntitySet::is_empty) {
            break;
        }
    }
    acc.unwrap_or_default()
}

/// The target variable's binding.
pub fn answer(g: &KnowledgeGraph, task: &FormalTask) -> Result<EntitySet, EvalError> {
    let mut binding = evaluate(g, task)?;
    Ok(binding.0.remove(task.target()).unwrap_or_default())
}

/// Direct recursive evaluation of an expression tree.
pub fn evaluate_expr(g: &KnowledgeGraph, expr: &KpExpr) -> EntitySet {
    match expr {
        KpExpr::Constant(c) => c.elements().clone(),
        KpExpr::Named { body, .. } => evaluate_expr(g, body),
        KpExpr::Projection { relation, child } => eval_kp(g, relation.as_str(), &evaluate_expr(g, child)),
        KpExpr::Intersection(children) => {
            let mut iter = children.iter().map(|c| evaluate_expr(g, c));
            let first = iter.next().unwrap_or_default();
            iter.fold(first, |acc, s| acc.intersection(&s).cloned().collect())
        }
        KpExpr::Union(children) => children.iter().flat_map(|c| evaluate_expr(g, c)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_task;
    use crate::store::EntityId;

    const EQ1: &str = "Berliner_FC_Dynamo\tfoundIn\t1966\nBerliner_FC_Dynamo\tisA\tEast_German_football_team\n\
                       1._FC_Union_Berlin\tfoundIn\t1966\n";

    fn set(names: &[&str]) -> EntitySet {
        names.iter().map(|n| EntityId::new(n).unwrap()).collect()
    }

    #[test]
    fn kp_of_empty_set_is_empty() {
        let g = KnowledgeGraph::from_tsv_str(EQ1).unwrap();
        assert!(eval_kp(&g, "foundIn", &EntitySet::new()).is_empty());
    }

    #[test]
    fn intersection_pins_team() {
        let g = KnowledgeGraph::from_tsv_str(EQ1).unwrap();
        let founded = eval_kp(&g, "foundIn", &set(&["1966"]));
        assert_eq!(founded, set(&["1._FC_Union_Berlin", "Berliner_FC_Dynamo"]));
        let t = parse_task("?X : [V@X, foundIn, C@{1966}], [V@X, isA, C@{East_German_football_team}]").unwrap();
        assert_eq!(answer(&g, &t).unwrap(), set(&["Berliner_FC_Dynamo"]));
    }

    #[test]
    fn empty_graph_answers_nothing() {
        let g = KnowledgeGraph::default();
        let t = parse_task("?T : [V@T, r, C@{a}]").unwrap();
        assert!(answer(&g, &t).unwrap().is_empty());
        let b = evaluate(&g, &t).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.empty_variables().len(), 1);
    }

    #[test]
    fn nested_variable_resolution() {
        let g = KnowledgeGraph::from_tsv_str(
            "p1\tplayIn\tBerliner_FC_Dynamo\np2\tplayIn\t1._FC_Union_Berlin\n\
             Berliner_FC_Dynamo\tfoundIn\t1966\nBerliner_FC_Dynamo\tisA\tEast_German_football_team\n",
        )
        .unwrap();
        let t = parse_task(
            "?T : [V@T, playIn, V@X], [V@X, foundIn, C@{1966}], [V@X, isA, C@{East_German_football_team}]",
        )
        .unwrap();
        let b = evaluate(&g, &t).unwrap();
        assert_eq!(b.get_str("X").unwrap(), &set(&["Berliner_FC_Dynamo"]));
        assert_eq!(b.get_str("T").unwrap(), &set(&["p1"]));
    }
}
