//! Validation checks shared by the expander and the dataset filters.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::eval::{answer, evaluate};
use crate::lang::{Constant, FormalTask};
use crate::store::{EntitySet, KnowledgeGraph};

/// Largest target answer a finished task may have.
pub const DEFAULT_CARDINALITY_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Consistency,
    Triviality,
    AnswerPreservation,
    Degeneracy,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Consistency => "consistency",
            Check::Triviality => "triviality",
            Check::AnswerPreservation => "answer_preservation",
            Check::Degeneracy => "degeneracy",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn pass(check: Check, detail: impl Into<String>) -> Self {
        Self { check, passed: true, detail: detail.into() }
    }

    fn fail(check: Check, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        debug_assert!(!detail.is_empty());
        Self { check, passed: false, detail }
    }
}

/// How strictly a sub-question must identify the constant it replaces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    /// The sub-question's answer must equal the constant's element set.
    #[default]
    StrictSingleton,
    /// Every answer must share a type tag with every constant element.
    TypeOnly,
}

impl std::str::FromStr for Uniqueness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" | "strict_singleton" => Ok(Uniqueness::StrictSingleton),
            "type_only" | "type-only" => Ok(Uniqueness::TypeOnly),
            other => Err(format!("unknown uniqueness mode {other:?}")),
        }
    }
}

fn well_formed_answer(g: &KnowledgeGraph, t: &FormalTask) -> EntitySet {
    answer(g, t).expect("FormalTask values are acyclic")
}

fn show(set: &EntitySet) -> String {
    let mut names: Vec<&str> = set.iter().map(|e| e.as_str()).take(6).collect();
    if set.len() > 6 {
        names.push("...");
    }
    format!("{{{}}}", names.join(", "))
}

pub fn check_consistency(g: &KnowledgeGraph, sub: &FormalTask, c: &Constant, mode: Uniqueness) -> Verdict {
    let got = well_formed_answer(g, sub);
    match mode {
        Uniqueness::StrictSingleton => {
            if &got == c.elements() {
                Verdict::pass(Check::Consistency, format!("answer equals {}", show(c.elements())))
            } else {
                Verdict::fail(Check::Consistency, format!("answer {} differs from {}", show(&got), show(c.elements())))
            }
        }
        Uniqueness::TypeOnly => {
            if got.is_empty() {
                return Verdict::fail(Check::Consistency, "sub-question has no answer");
            }
            if !g.has_types() {
                return Verdict::pass(Check::Consistency, "no entity types declared; type check is vacuous");
            }
            let empty = BTreeSet::new();
            let types = |e: &str| g.types_of(e).unwrap_or(&empty);
            for a in &got {
                for e in c.elements() {
                    if types(a.as_str()).is_disjoint(types(e.as_str())) {
                        return Verdict::fail(Check::Consistency, format!("{a} shares no type with {e}"));
                    }
                }
            }
            Verdict::pass(Check::Consistency, format!("all {} answers share a type with the constant", got.len()))
        }
    }
}

/// Structural triviality: a sub-question with a single variable and a single
/// distinct triplet is answerable by one projection.
pub fn is_trivial(sub: &FormalTask) -> bool {
    let distinct: BTreeSet<_> = sub.triplets().iter().collect();
    sub.variables().len() == 1 && distinct.len() == 1
}

pub fn check_triviality(_g: &KnowledgeGraph, sub: &FormalTask) -> Verdict {
    if is_trivial(sub) {
        Verdict::fail(Check::Triviality, "answerable by a single projection")
    } else {
        Verdict::pass(
            Check::Triviality,
            format!("{} variables, {} triplets", sub.variables().len(), sub.triplets().len()),
        )
    }
}

pub fn check_preservation(g: &KnowledgeGraph, before: &FormalTask, after: &FormalTask) -> Verdict {
    let a = well_formed_answer(g, before);
    let b = well_formed_answer(g, after);
    if a == b {
        Verdict::pass(Check::AnswerPreservation, format!("answer unchanged ({} entities)", a.len()))
    } else {
        Verdict::fail(Check::AnswerPreservation, format!("answer changed from {} to {}", show(&a), show(&b)))
    }
}

/// Fails when any variable is bound to the empty set or the target answer
/// has more than `cap` members.
pub fn check_degeneracy(g: &KnowledgeGraph, t: &FormalTask, cap: usize) -> Verdict {
    let binding = evaluate(g, t).expect("FormalTask values are acyclic");
    let empty = binding.empty_variables();
    if !empty.is_empty() {
        let names: Vec<String> = empty.iter().map(|v| format!("V@{v}")).collect();
        return Verdict::fail(Check::Degeneracy, format!("empty binding for {}", names.join(", ")));
    }
    let n = binding.get(t.target()).map_or(0, EntitySet::len);
    if n > cap {
        return Verdict::fail(Check::Degeneracy, format!("answer has {n} entities, above the cap of {cap}"));
    }
    Verdict::pass(Check::Degeneracy, format!("answer has {n} entities"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_task;

    fn graph() -> KnowledgeGraph {
        KnowledgeGraph::from_tsv_str(
            "Berliner_FC_Dynamo\tfoundIn\t1966\nBerliner_FC_Dynamo\tisA\tEast_German_football_team\n\
             1._FC_Union_Berlin\tfoundIn\t1966\n",
        )
        .unwrap()
    }

    fn team() -> FormalTask {
        parse_task("?X : [V@X, foundIn, C@{1966}], [V@X, isA, C@{East_German_football_team}]").unwrap()
    }

    #[test]
    fn strict_consistency() {
        let g = graph();
        let c = Constant::of(["Berliner_FC_Dynamo"]).unwrap();
        assert!(check_consistency(&g, &team(), &c, Uniqueness::StrictSingleton).passed);
        let loose = parse_task("?X : [V@X, foundIn, C@{1966}]").unwrap();
        let v = check_consistency(&g, &loose, &c, Uniqueness::StrictSingleton);
        assert!(!v.passed && !v.detail.is_empty());
        let none = parse_task("?X : [V@X, foundIn, C@{1800}]").unwrap();
        assert!(!check_consistency(&g, &none, &c, Uniqueness::StrictSingleton).passed);
    }

    #[test]
    fn type_only_consistency() {
        let mut b = crate::store::GraphBuilder::new();
        b.read_tsv(graph().to_tsv().as_bytes()).unwrap();
        let untyped = b.build();
        let c = Constant::of(["Berliner_FC_Dynamo"]).unwrap();
        let loose = parse_task("?X : [V@X, foundIn, C@{1966}]").unwrap();
        let v = check_consistency(&untyped, &loose, &c, Uniqueness::TypeOnly);
        assert!(v.passed && v.detail.contains("vacuous"));

        let mut b = crate::store::GraphBuilder::new();
        b.read_tsv(graph().to_tsv().as_bytes()).unwrap();
        b.read_types_tsv("Berliner_FC_Dynamo\tClub\n1._FC_Union_Berlin\tClub\n".as_bytes()).unwrap();
        let typed = b.build();
        assert!(check_consistency(&typed, &loose, &c, Uniqueness::TypeOnly).passed);
        let years = parse_task("?X : [V@X, foundIn, C@{Berliner_FC_Dynamo}]").unwrap();
        assert!(!check_consistency(&typed, &years, &c, Uniqueness::TypeOnly).passed);
    }

    #[test]
    fn triviality() {
        let g = graph();
        assert!(!check_triviality(&g, &parse_task("?X : [V@X, foundIn, C@{1966}]").unwrap()).passed);
        assert!(!check_triviality(&g, &parse_task("?X : [V@X, foundIn, C@{1966}], [V@X, foundIn, C@{1966}]").unwrap())
            .passed);
        assert!(check_triviality(&g, &team()).passed);
    }

    #[test]
    fn preservation() {
        let g = graph();
        assert!(check_preservation(&g, &team(), &team()).passed);
        let dropped = parse_task("?X : [V@X, foundIn, C@{1966}]").unwrap();
        assert!(!check_preservation(&g, &team(), &dropped).passed);
    }

    #[test]
    fn degeneracy() {
        let g = graph();
        assert!(check_degeneracy(&g, &team(), DEFAULT_CARDINALITY_CAP).passed);
        let v = check_degeneracy(&KnowledgeGraph::default(), &team(), DEFAULT_CARDINALITY_CAP);
        assert!(!v.passed);
        assert!(v.detail.contains("V@X"));
        let loose = parse_task("?X : [V@X, foundIn, C@{1966}]").unwrap();
        assert!(!check_degeneracy(&g, &loose, 1).passed);
        assert!(check_degeneracy(&g, &loose, 2).passed);
    }
}
