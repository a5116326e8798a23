//! Canonical printer. Triplets keep their list order; constant elements are
//! printed in sorted order, with contiguous integer runs of three or more
//! written as `lo..hi`.

use std::fmt::Write;

use super::parse::{is_delimiter, Syntax};
use super::{Constant, FormalTask, Term};

pub fn print_task(task: &FormalTask) -> String {
    let mut out = format!("?{} : ", task.target());
    for (i, t) in task.triplets().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(
            out,
            "[V@{}, {}, {}]",
            t.subject,
            escape_name(t.relation.as_str(), Syntax::Dsl),
            term_string(&t.object, Syntax::Dsl)
        );
    }
    for (i, d) in task.decorations().iter().enumerate() {
        out.push_str(if i == 0 { " ; " } else { ", " });
        let _ = write!(
            out,
            "[#{}, {}, {}]",
            d.anchor,
            escape_name(d.relation.as_str(), Syntax::Dsl),
            constant_string(&d.object, Syntax::Dsl)
        );
    }
    out
}

pub(crate) fn term_string(term: &Term, syntax: Syntax) -> String {
    match term {
        Term::Variable(v) => format!("V@{v}"),
        Term::Constant(c) => constant_string(c, syntax),
    }
}

pub(crate) fn constant_string(c: &Constant, syntax: Syntax) -> String {
    if let Some((lo, hi)) = integer_run(c) {
        return format!("C@{{{lo}..{hi}}}");
    }
    let mut out = String::from("C@{");
    for (i, e) in c.elements().iter().enumerate() {
        if i > 0 {
            out.push('|');
        }
        let escaped = escape_name(e.as_str(), syntax);
        if c.is_singleton() && e.as_str().contains("..") {
            // Keep a lone name such as `1..3` from reading back as a range.
            out.push_str(&escaped.replacen("..", "\\..", 1));
        } else {
            out.push_str(&escaped);
        }
    }
    out.push('}');
    out
}

/// The bounds of `c` if it is exactly a run of three or more consecutive
/// canonically written integers.
fn integer_run(c: &Constant) -> Option<(u64, u64)> {
    if c.len() < 3 {
        return None;
    }
    let mut nums = Vec::with_capacity(c.len());
    for e in c.elements() {
        let s = e.as_str();
        if !s.bytes().all(|b| b.is_ascii_digit()) || (s.len() > 1 && s.starts_with('0')) {
            return None;
        }
        nums.push(s.parse::<u64>().ok()?);
    }
    nums.sort_unstable();
    let (lo, hi) = (nums[0], *nums.last().expect("non-empty"));
    (hi - lo + 1 == nums.len() as u64).then_some((lo, hi))
}

/// Backslash-escapes characters that would otherwise end a name. In JSON
/// syntax inner spaces are literal; only leading and trailing whitespace is
/// escaped.
pub(crate) fn escape_name(name: &str, syntax: Syntax) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::with_capacity(name.len());
    for (i, &c) in chars.iter().enumerate() {
        let needs = match syntax {
            Syntax::Dsl => is_delimiter(c),
            Syntax::Json => {
                if c.is_whitespace() {
                    i == 0 || i + 1 == chars.len()
                } else {
                    is_delimiter(c)
                }
            }
        };
        if needs {
            out.push('\\');
        }
        out.push(c);
    }
    out
}
