//! Flattening of nested projection expressions into triplet lists.
//!
//! `R1(R2(S))` becomes `[V@X, r1, V@Y], [V@Y, r2, S]`: every projection over a
//! non-constant argument introduces a fresh variable. Intersections become
//! sibling triplets on one variable, and a union of same-relation projections
//! over constants collapses into one projection over the merged constant.

use std::collections::BTreeSet;

use thiserror::Error;

use super::{merge_union, Constant, FormalTask, TaskError, Term, TripletExpr, Variable};
use crate::store::RelationId;

/// A nested set expression over knowledge projections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KpExpr {
    Constant(Constant),
    /// Binds the set computed by `body` to a named variable.
    Named { name: Variable, body: Box<KpExpr> },
    Projection { relation: RelationId, child: Box<KpExpr> },
    Intersection(Vec<KpExpr>),
    Union(Vec<KpExpr>),
}

impl KpExpr {
    pub fn projection(relation: RelationId, child: KpExpr) -> Self {
        KpExpr::Projection { relation, child: Box::new(child) }
    }

    pub fn named(name: Variable, body: KpExpr) -> Self {
        KpExpr::Named { name, body: Box::new(body) }
    }

    fn collect_names<'a>(&'a self, out: &mut Vec<&'a Variable>) {
        match self {
            KpExpr::Constant(_) => {}
            KpExpr::Named { name, body } => {
                out.push(name);
                body.collect_names(out);
            }
            KpExpr::Projection { child, .. } => child.collect_names(out),
            KpExpr::Intersection(cs) | KpExpr::Union(cs) => cs.iter().for_each(|c| c.collect_names(out)),
        }
    }

    /// Variable names bound inside the expression.
    pub fn names(&self) -> Vec<&Variable> {
        let mut out = Vec::new();
        self.collect_names(&mut out);
        out
    }

    /// The merged constant if this expression is a constant or a union of
    /// constants.
    pub fn as_constant_set(&self) -> Option<Constant> {
        match self {
            KpExpr::Constant(c) => Some(c.clone()),
            KpExpr::Union(cs) if !cs.is_empty() => {
                let parts: Option<Vec<Constant>> = cs.iter().map(KpExpr::as_constant_set).collect();
                merge_union(&parts?).ok()
            }
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FlattenError {
    #[error("union mixes relations {}", .0.join(", "))]
    MixedRelations(Vec<String>),
    #[error("union operands must be projections over constant sets")]
    UnsupportedUnion,
    #[error("a constant cannot directly constrain a variable; wrap it in a projection")]
    ConstantConstraint,
    #[error("empty intersection")]
    EmptyIntersection,
    #[error("empty union")]
    EmptyUnion,
    #[error("variable name {0} is bound more than once")]
    DuplicateName(String),
    #[error(transparent)]
    Task(#[from] TaskError),
}

/// Flattens `expr` into a task whose target variable is `target`.
pub fn flatten(expr: &KpExpr, target: &str) -> Result<FormalTask, FlattenError> {
    let target = Variable::new(target)?;
    let mut used = BTreeSet::new();
    used.insert(target.as_str().to_string());
    for name in expr.names() {
        if !used.insert(name.as_str().to_string()) {
            return Err(FlattenError::DuplicateName(name.as_str().to_string()));
        }
    }
    let mut f = Flattener { triplets: Vec::new(), used, next: 0 };
    f.constrain(&target, expr)?;
    Ok(FormalTask::new(target, f.triplets)?)
}

struct Flattener {
    triplets: Vec<TripletExpr>,
    used: BTreeSet<String>,
    next: usize,
}

impl Flattener {
    fn fresh(&mut self) -> Variable {
        loop {
            self.next += 1;
            let name = format!("Y{}", self.next);
            if self.used.insert(name.clone()) {
                return Variable::new(&name).expect("generated identifier");
            }
        }
    }

    fn constrain(&mut self, var: &Variable, expr: &KpExpr) -> Result<(), FlattenError> {
        match expr {
            KpExpr::Projection { relation, child } => {
                // Reserve the slot so a parent triplet precedes its children.
                let slot = self.triplets.len();
                self.triplets.push(TripletExpr { subject: var.clone(), relation: relation.clone(), object: Term::Variable(var.clone()) });
                let object = self.object_term(child)?;
                self.triplets[slot].object = object;
                Ok(())
            }
            KpExpr::Intersection(children) => {
                if children.is_empty() {
                    return Err(FlattenError::EmptyIntersection);
                }
                children.iter().try_for_each(|c| self.constrain(var, c))
            }
            KpExpr::Union(children) => {
                let (relation, constant) = union_of_projections(children)?;
                self.triplets.push(TripletExpr { subject: var.clone(), relation, object: Term::Constant(constant) });
                Ok(())
            }
            KpExpr::Named { body, .. } => self.constrain(var, body),
            KpExpr::Constant(_) => Err(FlattenError::ConstantConstraint),
        }
    }

    fn object_term(&mut self, child: &KpExpr) -> Result<Term, FlattenError> {
        if let Some(c) = child.as_constant_set() {
            return Ok(Term::Constant(c));
        }
        match child {
            KpExpr::Named { name, body } => {
                self.constrain(name, body)?;
                Ok(Term::Variable(name.clone()))
            }
            KpExpr::Union(cs) if cs.is_empty() => Err(FlattenError::EmptyUnion),
            _ => {
                let var = self.fresh();
                self.constrain(&var, child)?;
                Ok(Term::Variable(var))
            }
        }
    }
}

/// Applies R-union: every operand must be `R(constant set)` for one shared
/// relation `R`, possibly nested in further unions.
fn union_of_projections(children: &[KpExpr]) -> Result<(RelationId, Constant), FlattenError> {
    if children.is_empty() {
        return Err(FlattenError::EmptyUnion);
    }
    let mut parts: Vec<(RelationId, Constant)> = Vec::new();
    for c in children {
        match c {
            KpExpr::Projection { relation, child } => {
                let constant = child.as_constant_set().ok_or(FlattenError::UnsupportedUnion)?;
                parts.push((relation.clone(), constant));
            }
            KpExpr::Union(inner) => parts.push(union_of_projections(inner)?),
            KpExpr::Named { body, .. } => match body.as_ref() {
                KpExpr::Union(inner) => parts.push(union_of_projections(inner)?),
                other => parts.push(union_of_projections(std::slice::from_ref(other))?),
            },
            KpExpr::Constant(_) => return Err(FlattenError::ConstantConstraint),
            KpExpr::Intersection(_) => return Err(FlattenError::UnsupportedUnion),
        }
    }
    let relations: BTreeSet<&RelationId> = parts.iter().map(|(r, _)| r).collect();
    if relations.len() > 1 {
        return Err(FlattenError::MixedRelations(relations.into_iter().map(ToString::to_string).collect()));
    }
    let relation = parts[0].0.clone();
    let merged = merge_union(parts.iter().map(|(_, c)| c))?;
    Ok((relation, merged))
}
