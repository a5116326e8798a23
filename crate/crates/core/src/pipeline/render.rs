//! Template-based English rendering of tasks.

use std::collections::BTreeSet;

use crate::lang::{Constant, FormalTask, Term, Variable};

const PREPOSITIONS: [&str; 9] = ["in", "at", "of", "to", "by", "on", "for", "from", "with"];

fn words(relation: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut current = String::new();
    for ch in relation.chars() {
        if ch == '_' || ch == '-' || ch == ' ' {
            if !current.is_empty() {
                out.push(std::mem::take(&mut current));
            }
        } else if ch.is_uppercase() && !current.is_empty() {
            out.push(std::mem::take(&mut current));
            current.extend(ch.to_lowercase());
        } else {
            current.extend(ch.to_lowercase());
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Verb phrase for "subject <phrase> object".
pub fn relation_phrase(relation: &str) -> String {
    match relation {
        "foundIn" => "was founded in".into(),
        "isA" => "is".into(),
        "playIn" => "played for".into(),
        "playAt" => "played in".into(),
        "bornIn" => "was born in".into(),
        "basedIn" => "is based in".into(),
        "locatedIn" => "is located in".into(),
        _ => {
            let w = words(relation);
            if w.is_empty() {
                return relation.to_string();
            }
            let joined = w.join(" ");
            match w.first().map(String::as_str) {
                Some("is" | "was" | "has" | "had") => joined,
                _ if w.iter().any(|x| PREPOSITIONS.contains(&x.as_str())) => format!("is {joined}"),
                _ => format!("has {joined}"),
            }
        }
    }
}

fn article(phrase: &str) -> &'static str {
    match phrase.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn entity_text(name: &str) -> String {
    name.replace('_', " ")
}

fn integer_run(c: &Constant) -> Option<(i64, i64)> {
    if c.len() < 3 {
        return None;
    }
    let mut values: Vec<i64> = Vec::with_capacity(c.len());
    for e in c.elements() {
        let s = e.as_str();
        if s.len() > 1 && s.starts_with('0') {
            return None;
        }
        values.push(s.parse().ok()?);
    }
    values.sort_unstable();
    values.windows(2).all(|w| w[1] == w[0] + 1).then(|| (values[0], *values.last().expect("non-empty")))
}

pub fn constant_text(c: &Constant) -> String {
    if let Some((lo, hi)) = integer_run(c) {
        return format!("between {lo} and {hi}");
    }
    let parts: Vec<String> = c.elements().iter().map(|e| entity_text(e.as_str())).collect();
    match parts.as_slice() {
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {last}", init.join(", ")),
        [] => String::new(),
    }
}

fn object_text(relation: &str, object: String) -> String {
    // "is" needs an article before a noun phrase.
    if relation == "isA" {
        format!("{} {object}", article(&object))
    } else {
        object
    }
}

fn clause(relation: &str, object: String) -> String {
    let phrase = relation_phrase(relation);
    // "was born in between 1990 and 1999" reads better without the preposition.
    let phrase = match object.starts_with("between ") {
        true => phrase.strip_suffix(" in").or_else(|| phrase.strip_suffix(" at")).unwrap_or(&phrase).to_string(),
        false => phrase,
    };
    format!("{phrase} {}", object_text(relation, object))
}

struct Renderer<'t> {
    task: &'t FormalTask,
    described: BTreeSet<&'t Variable>,
}

impl<'t> Renderer<'t> {
    fn clauses(&mut self, var: &'t Variable) -> Vec<String> {
        let mut out = Vec::new();
        for (index, t) in self.task.triplets_of(var) {
            let object = match &t.object {
                Term::Constant(c) => {
                    let mut text = constant_text(c);
                    let notes: Vec<String> = self
                        .task
                        .decorations()
                        .iter()
                        .filter(|d| d.anchor == index)
                        .map(|d| clause(d.relation.as_str(), constant_text(&d.object)))
                        .collect();
                    if !notes.is_empty() {
                        text = format!("{text} (which {})", notes.join(" and "));
                    }
                    text
                }
                Term::Variable(v) => self.variable(v),
            };
            out.push(clause(t.relation.as_str(), object));
        }
        out
    }

    fn variable(&mut self, v: &'t Variable) -> String {
        if !self.described.insert(v) {
            return format!("the same thing {v}");
        }
        let clauses = self.clauses(v);
        format!("a thing that {}", clauses.join(" and "))
    }
}

/// Renders `t` as a question. Deterministic; every well-formed task renders.
pub fn render(t: &FormalTask) -> String {
    let mut r = Renderer { task: t, described: BTreeSet::new() };
    r.described.insert(t.target());
    let clauses = r.clauses(t.target());
    match clauses.as_slice() {
        [one] => format!("Which entities {one}?"),
        [init @ .., last] => format!("Which entities {}, and {last}?", init.join(", ")),
        [] => "Which entities?".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::eq10_task;
    use crate::lang::parse_task;

    #[test]
    fn eq10_phrasing() {
        let q = render(&eq10_task());
        assert!(q.contains("founded in 1966"), "{q}");
        assert!(q.contains("East German football team"), "{q}");
        assert!(q.contains("was born between 1990 and 1999"), "{q}");
        assert!(q.contains("2004 or 2005"), "{q}");
    }

    #[test]
    fn single_clause() {
        let q = render(&parse_task("?T : [V@T, foundIn, C@{1966}]").unwrap());
        assert_eq!(q, "Which entities was founded in 1966?");
    }

    #[test]
    fn fallback_phrases() {
        assert_eq!(relation_phrase("partOfSeason"), "is part of season");
        assert_eq!(relation_phrase("inDecade"), "is in decade");
        assert_eq!(relation_phrase("hasCapital"), "has capital");
        assert_eq!(relation_phrase("r3"), "has r3");
    }

    #[test]
    fn decorations_are_mentioned() {
        let q = render(&parse_task("?T : [V@T, playIn, C@{Berliner_FC_Dynamo}] ; [#0, basedIn, C@{Berlin}]").unwrap());
        assert!(q.contains("Berliner FC Dynamo (which is based in Berlin)"), "{q}");
    }
}
