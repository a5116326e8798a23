//! The knowledge-projection task language.
//!
//! A [`FormalTask`] is a target variable plus an ordered list of
//! `[V@X, relation, term]` triplets. Every triplet constrains its subject
//! variable to the projection of `term` through `relation`; all triplets that
//! share a subject are intersected. Objects are either constants (explicit
//! entity sets, already merged under R-union) or other variables, which is how
//! nested projections are flattened into a list.
//!
//! Tasks may also carry *decorations*: facts that relate the constant of one
//! triplet to another constant. They never constrain evaluation and exist to
//! model redundant structure in generated questions.

mod flatten;
mod json;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::store::{EntityId, EntitySet, NameError, RelationId};

pub use flatten::{flatten, FlattenError, KpExpr};
pub use json::{TaskJson, TermJsonError};
pub use parse::{parse_task, parse_term, ParseError, Syntax};
pub use print::print_task;
pub(crate) use print::constant_string;

/// A named variable. Names match `[A-Za-z][A-Za-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: &str) -> Result<Self, TaskError> {
        if is_identifier(name) {
            Ok(Self(name.to_string()))
        } else {
            Err(TaskError::BadVariableName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V@{}", self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A non-empty explicit entity set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constant(EntitySet);

impl Constant {
    pub fn new(elements: EntitySet) -> Result<Self, TaskError> {
        if elements.is_empty() {
            Err(TaskError::EmptyConstant)
        } else {
            Ok(Self(elements))
        }
    }

    pub fn singleton(entity: EntityId) -> Self {
        Self([entity].into())
    }

    /// Builds a constant from raw names.
    pub fn of<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Self, TaskError> {
        let set = names
            .into_iter()
            .map(EntityId::new)
            .collect::<Result<EntitySet, NameError>>()
            .map_err(TaskError::Name)?;
        Self::new(set)
    }

    pub fn elements(&self) -> &EntitySet {
        &self.0
    }

    pub fn into_elements(self) -> EntitySet {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.0.len() == 1
    }

    pub fn single(&self) -> Option<&EntityId> {
        if self.is_singleton() {
            self.0.iter().next()
        } else {
            None
        }
    }
}

/// Merges constants under R-union: `R(S1) ∪ R(S2) = R(S1 ∪ S2)`, so a union
/// of same-relation projections over constants is a single projection over
/// the merged set.
pub fn merge_union<'a>(constants: impl IntoIterator<Item = &'a Constant>) -> Result<Constant, TaskError> {
    let mut merged = EntitySet::new();
    for c in constants {
        merged.extend(c.0.iter().cloned());
    }
    Constant::new(merged)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Constant(Constant),
    Variable(Variable),
}

impl Term {
    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            Term::Constant(_) => None,
        }
    }

    pub fn as_constant(&self) -> Option<&Constant> {
        match self {
            Term::Constant(c) => Some(c),
            Term::Variable(_) => None,
        }
    }
}

impl From<Constant> for Term {
    fn from(c: Constant) -> Self {
        Term::Constant(c)
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Variable(v)
    }
}

/// `[subject, relation, object]`: the subject is constrained to the
/// projection of the object through the relation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TripletExpr {
    pub subject: Variable,
    pub relation: RelationId,
    pub object: Term,
}

impl TripletExpr {
    pub fn new(subject: Variable, relation: RelationId, object: impl Into<Term>) -> Self {
        Self { subject, relation, object: object.into() }
    }
}

/// A constant-to-constant fact attached to the constant object of the
/// triplet at `anchor`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decoration {
    pub anchor: usize,
    pub relation: RelationId,
    pub object: Constant,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TaskError {
    #[error("a task needs at least one triplet")]
    NoTriplets,
    #[error("invalid variable name {0:?}")]
    BadVariableName(String),
    #[error(transparent)]
    Name(NameError),
    #[error("constant has an empty element set")]
    EmptyConstant,
    #[error("target V@{0} is not the subject of any triplet")]
    TargetNotSubject(String),
    #[error("variable V@{0} is used as an object but never defined as a subject")]
    UndefinedVariable(String),
    #[error("cyclic variable dependencies among {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("decoration {index} anchors triplet {anchor}, which has no constant object")]
    BadDecorationAnchor { index: usize, anchor: usize },
}

/// A well-formed task: the target heads at least one triplet, every object
/// variable is defined, and variable dependencies are acyclic.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(into = "TaskJson", try_from = "TaskJson")]
pub struct FormalTask {
    target: Variable,
    triplets: Vec<TripletExpr>,
    decorations: Vec<Decoration>,
    expected_answer: Option<EntitySet>,
}

impl FormalTask {
    pub fn new(target: Variable, triplets: Vec<TripletExpr>) -> Result<Self, TaskError> {
        Self::with_decorations(target, triplets, Vec::new())
    }

    pub fn with_decorations(
        target: Variable,
        triplets: Vec<TripletExpr>,
        decorations: Vec<Decoration>,
    ) -> Result<Self, TaskError> {
        let task = Self { target, triplets, decorations, expected_answer: None };
        task.check()?;
        Ok(task)
    }

    fn check(&self) -> Result<(), TaskError> {
        if self.triplets.is_empty() {
            return Err(TaskError::NoTriplets);
        }
        let subjects: BTreeSet<&Variable> = self.triplets.iter().map(|t| &t.subject).collect();
        if !subjects.contains(&self.target) {
            return Err(TaskError::TargetNotSubject(self.target.0.clone()));
        }
        for t in &self.triplets {
            if let Term::Variable(v) = &t.object {
                if !subjects.contains(v) {
                    return Err(TaskError::UndefinedVariable(v.0.clone()));
                }
            }
        }
        for (index, d) in self.decorations.iter().enumerate() {
            let ok = self.triplets.get(d.anchor).is_some_and(|t| t.object.as_constant().is_some());
            if !ok {
                return Err(TaskError::BadDecorationAnchor { index, anchor: d.anchor });
            }
        }
        self.topological_order().map(|_| ())
    }

    pub fn target(&self) -> &Variable {
        &self.target
    }

    pub fn triplets(&self) -> &[TripletExpr] {
        &self.triplets
    }

    pub fn decorations(&self) -> &[Decoration] {
        &self.decorations
    }

    pub fn expected_answer(&self) -> Option<&EntitySet> {
        self.expected_answer.as_ref()
    }

    pub fn set_expected_answer(&mut self, answer: Option<EntitySet>) {
        self.expected_answer = answer;
    }

    pub fn with_expected_answer(mut self, answer: EntitySet) -> Self {
        self.expected_answer = Some(answer);
        self
    }

    /// Equality ignoring `expected_answer`.
    pub fn same_structure(&self, other: &FormalTask) -> bool {
        self.target == other.target && self.triplets == other.triplets && self.decorations == other.decorations
    }

    /// Distinct variables, in order of first appearance as a subject.
    pub fn variables(&self) -> Vec<&Variable> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in &self.triplets {
            if seen.insert(&t.subject) {
                out.push(&t.subject);
            }
        }
        out
    }

    /// Triplets whose subject is `var`, in list order.
    pub fn triplets_of<'a>(&'a self, var: &'a Variable) -> impl Iterator<Item = (usize, &'a TripletExpr)> + 'a {
        self.triplets.iter().enumerate().filter(move |(_, t)| &t.subject == var)
    }

    /// Variables ordered so that every variable comes after all variables it
    /// depends on. Ties are broken by name.
    pub fn topological_order(&self) -> Result<Vec<Variable>, TaskError> {
        let mut deps: BTreeMap<&Variable, BTreeSet<&Variable>> = BTreeMap::new();
        for t in &self.triplets {
            let entry = deps.entry(&t.subject).or_default();
            if let Term::Variable(v) = &t.object {
                entry.insert(v);
            }
        }
        let mut dependents: BTreeMap<&Variable, Vec<&Variable>> = BTreeMap::new();
        let mut pending: BTreeMap<&Variable, usize> = BTreeMap::new();
        for (&v, ds) in &deps {
            pending.insert(v, ds.len());
            for &d in ds {
                dependents.entry(d).or_default().push(v);
            }
        }
        let mut ready: BTreeSet<&Variable> = pending.iter().filter(|(_, &n)| n == 0).map(|(&v, _)| v).collect();
        let mut order = Vec::with_capacity(deps.len());
        while let Some(v) = ready.pop_first() {
            order.push(v.clone());
            for &w in dependents.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                let n = pending.get_mut(w).expect("dependent is a subject");
                *n -= 1;
                if *n == 0 {
                    ready.insert(w);
                }
            }
        }
        if order.len() < deps.len() {
            // Drop stuck variables that merely depend on a cycle.
            let mut stuck: BTreeSet<&Variable> = pending.iter().filter(|(_, &n)| n > 0).map(|(&v, _)| v).collect();
            loop {
                let leaves: Vec<&Variable> = stuck
                    .iter()
                    .copied()
                    .filter(|v| !dependents.get(v).is_some_and(|ws| ws.iter().any(|w| stuck.contains(w))))
                    .collect();
                if leaves.is_empty() {
                    break;
                }
                for v in leaves {
                    stuck.remove(v);
                }
            }
            return Err(TaskError::Cycle(stuck.into_iter().map(|v| v.0.clone()).collect()));
        }
        Ok(order)
    }

    /// A variable name not yet used in this task, built from `stem`.
    pub fn fresh_variable(&self, stem: &str) -> Variable {
        let used: BTreeSet<&str> = self.variables().into_iter().map(Variable::as_str).collect();
        if !used.contains(stem) {
            return Variable::new(stem).expect("stem is an identifier");
        }
        (1..)
            .map(|i| format!("{stem}_{i}"))
            .find(|name| !used.contains(name.as_str()))
            .map(|name| Variable::new(&name).expect("suffixing keeps identifiers valid"))
            .expect("unbounded search")
    }

    /// Replaces the constant object of triplet `index` with `var` and appends
    /// `new_triplets`. Decorations on that triplet become ordinary triplets of
    /// `var`: they are facts about the replaced constant.
    pub(crate) fn splice(
        &self,
        index: usize,
        var: &Variable,
        mut new_triplets: Vec<TripletExpr>,
    ) -> Result<FormalTask, TaskError> {
        let mut triplets = self.triplets.clone();
        triplets[index].object = Term::Variable(var.clone());
        let mut decorations = Vec::new();
        for d in &self.decorations {
            if d.anchor == index {
                new_triplets.push(TripletExpr::new(var.clone(), d.relation.clone(), d.object.clone()));
            } else {
                decorations.push(d.clone());
            }
        }
        triplets.extend(new_triplets);
        let mut out = FormalTask::with_decorations(self.target.clone(), triplets, decorations)?;
        out.expected_answer = self.expected_answer.clone();
        Ok(out)
    }

    pub(crate) fn push_decoration(&self, decoration: Decoration) -> Result<FormalTask, TaskError> {
        let mut decorations = self.decorations.clone();
        decorations.push(decoration);
        let mut out = FormalTask::with_decorations(self.target.clone(), self.triplets.clone(), decorations)?;
        out.expected_answer = self.expected_answer.clone();
        Ok(out)
    }

    /// The task with its triplets reordered by `perm` (a permutation of
    /// indices). Decoration anchors follow their triplets.
    pub fn permuted(&self, perm: &[usize]) -> Result<FormalTask, TaskError> {
        assert_eq!(perm.len(), self.triplets.len(), "permutation length");
        let triplets = perm.iter().map(|&i| self.triplets[i].clone()).collect();
        let mut new_pos = vec![0; perm.len()];
        for (pos, &i) in perm.iter().enumerate() {
            new_pos[i] = pos;
        }
        let decorations = self
            .decorations
            .iter()
            .map(|d| Decoration { anchor: new_pos[d.anchor], ..d.clone() })
            .collect();
        FormalTask::with_decorations(self.target.clone(), triplets, decorations)
    }
}

impl fmt::Display for FormalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_task(self))
    }
}

impl std::str::FromStr for FormalTask {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_task(s)
    }
}
