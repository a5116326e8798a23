//! Recursive-descent parser for the task DSL.
//!
//! ```text
//! task       := "?" IDENT ":" triplet ("," triplet)* (";" decoration ("," decoration)*)?
//! triplet    := "[" var "," NAME "," term "]"
//! decoration := "[" "#" INT "," NAME "," const "]"
//! var        := "V@" IDENT
//! term       := var | const
//! const      := "C@{" element ("|" element)* "}" | "C@{" INT ".." INT "}"
//! ```
//!
//! Whitespace between tokens is ignored. A backslash escapes the next
//! character inside names, so any valid entity or relation name can be
//! written.

use thiserror::Error;

use super::{Constant, Decoration, FormalTask, TaskError, Term, TripletExpr, Variable};
use crate::store::{EntityId, EntitySet, RelationId};

/// Longest integer range accepted by the `a..b` sugar.
pub const MAX_RANGE_LEN: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error(transparent)]
    Task(#[from] TaskError),
}

impl ParseError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            ParseError::Syntax { line, column, .. } => Some((*line, *column)),
            ParseError::Task(_) => None,
        }
    }
}

/// Whether whitespace inside constant elements is part of the name. The
/// JSON carrier form allows it; the plain DSL does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Syntax {
    Dsl,
    Json,
}

pub fn parse_task(text: &str) -> Result<FormalTask, ParseError> {
    let mut p = Parser::new(text, Syntax::Dsl);
    let task = p.task()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(task)
}

/// Parses a single term (`V@X` or `C@{...}`).
pub fn parse_term(text: &str, syntax: Syntax) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, syntax);
    p.skip_ws();
    let term = p.term()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(term)
}

pub(crate) fn parse_variable_term(text: &str) -> Result<Variable, ParseError> {
    let mut p = Parser::new(text, Syntax::Json);
    p.skip_ws();
    let v = p.var()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

pub(crate) fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, ',' | '[' | ']' | '{' | '}' | '|' | '\\')
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    syntax: Syntax,
}

/// A raw element read from inside braces.
struct Element {
    text: String,
    escaped: bool,
    line: usize,
    column: usize,
}

impl Parser {
    fn new(text: &str, syntax: Syntax) -> Self {
        Self { chars: text.chars().collect(), pos: 0, line: 1, column: 1, syntax }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line: self.line, column: self.column, message: message.into() }
    }

    fn error_at(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { line, column, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.bump();
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(found) if found == c => {
                self.bump();
                Ok(())
            }
            Some(found) => Err(self.error(format!("expected {c:?}, found {found:?}"))),
            None => Err(self.error(format!("expected {c:?}, found end of input"))),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_str(&mut self, s: &str) -> Result<(), ParseError> {
        for c in s.chars() {
            match self.peek() {
                Some(found) if found == c => {
                    self.bump();
                }
                _ => return Err(self.error(format!("expected {s:?}"))),
            }
        }
        Ok(())
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let mut out = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() => {}
            _ => return Err(self.error("expected an identifier")),
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn task(&mut self) -> Result<FormalTask, ParseError> {
        self.expect('?')?;
        self.skip_ws();
        let target = Variable::new(&self.ident()?)?;
        self.expect(':')?;
        let mut triplets = vec![self.triplet()?];
        while self.eat(',') {
            triplets.push(self.triplet()?);
        }
        let mut decorations = Vec::new();
        if self.eat(';') {
            decorations.push(self.decoration()?);
            while self.eat(',') {
                decorations.push(self.decoration()?);
            }
        }
        Ok(FormalTask::with_decorations(target, triplets, decorations)?)
    }

    fn triplet(&mut self) -> Result<TripletExpr, ParseError> {
        self.expect('[')?;
        self.skip_ws();
        let subject = self.var()?;
        self.expect(',')?;
        let relation = self.relation()?;
        self.expect(',')?;
        self.skip_ws();
        let object = self.term()?;
        self.expect(']')?;
        Ok(TripletExpr { subject, relation, object })
    }

    fn decoration(&mut self) -> Result<Decoration, ParseError> {
        self.expect('[')?;
        self.expect('#')?;
        let (line, column) = (self.line, self.column);
        let mut digits = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            digits.push(c);
            self.bump();
        }
        let anchor: usize =
            digits.parse().map_err(|_| Self::error_at(line, column, "expected a triplet index after '#'"))?;
        self.expect(',')?;
        let relation = self.relation()?;
        self.expect(',')?;
        self.skip_ws();
        let object = match self.term()? {
            Term::Constant(c) => c,
            Term::Variable(_) => return Err(self.error("decoration objects must be constants")),
        };
        self.expect(']')?;
        Ok(Decoration { anchor, relation, object })
    }

    fn var(&mut self) -> Result<Variable, ParseError> {
        self.expect_str("V@")?;
        Ok(Variable::new(&self.ident()?)?)
    }

    fn relation(&mut self) -> Result<RelationId, ParseError> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(esc) => out.push(esc),
                    None => return Err(self.error("dangling escape")),
                }
            } else if is_delimiter(c) {
                break;
            } else {
                out.push(c);
                self.bump();
            }
        }
        if out.is_empty() {
            return Err(Self::error_at(line, column, "expected a relation name"));
        }
        RelationId::new(&out).map_err(|e| Self::error_at(line, column, e.to_string()))
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match (self.peek(), self.chars.get(self.pos + 1)) {
            (Some('V'), Some('@')) => Ok(Term::Variable(self.var()?)),
            (Some('C'), Some('@')) => Ok(Term::Constant(self.constant()?)),
            _ => Err(self.error("expected a term (V@name or C@{...})")),
        }
    }

    fn constant(&mut self) -> Result<Constant, ParseError> {
        self.expect_str("C@{")?;
        let mut elements = vec![self.element()?];
        loop {
            self.skip_ws();
            match self.peek() {
                Some('|') => {
                    self.bump();
                    elements.push(self.element()?);
                }
                Some('}') => {
                    self.bump();
                    break;
                }
                Some(c) => return Err(self.error(format!("expected '|' or '}}', found {c:?}"))),
                None => return Err(self.error("unterminated constant")),
            }
        }
        if elements.len() == 1 && !elements[0].escaped {
            if let Some((lo, hi)) = elements[0].text.split_once("..") {
                let el = &elements[0];
                return expand_range(lo, hi).map_err(|m| Self::error_at(el.line, el.column, m));
            }
        }
        let mut set = EntitySet::new();
        for el in elements {
            let id = EntityId::new(&el.text).map_err(|e| Self::error_at(el.line, el.column, e.to_string()))?;
            set.insert(id);
        }
        Ok(Constant::new(set)?)
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        self.skip_ws();
        let (line, column) = (self.line, self.column);
        let mut text = String::new();
        let mut escaped = false;
        // Length of `text` up to the last escaped or non-space character, so
        // trailing unescaped spaces can be trimmed in JSON syntax.
        let mut keep = 0;
        while let Some(c) = self.peek() {
            if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(esc) => text.push(esc),
                    None => return Err(self.error("dangling escape")),
                }
                escaped = true;
                keep = text.len();
            } else if c == '|' || c == '}' || c == '{' || (self.syntax == Syntax::Dsl && c.is_whitespace()) {
                break;
            } else {
                text.push(c);
                self.bump();
                if !c.is_whitespace() {
                    keep = text.len();
                }
            }
        }
        text.truncate(keep);
        if text.is_empty() {
            return Err(Self::error_at(line, column, "empty constant element"));
        }
        Ok(Element { text, escaped, line, column })
    }
}

fn parse_int(s: &str) -> Result<u64, String> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("range bound {s:?} is not an integer"));
    }
    if s.len() > 1 && s.starts_with('0') {
        return Err(format!("range bound {s:?} has a leading zero"));
    }
    s.parse().map_err(|_| format!("range bound {s:?} is too large"))
}

fn expand_range(lo: &str, hi: &str) -> Result<Constant, String> {
    let lo = parse_int(lo)?;
    let hi = parse_int(hi)?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    if hi - lo >= MAX_RANGE_LEN {
        return Err(format!("range {lo}..{hi} exceeds {MAX_RANGE_LEN} elements"));
    }
    let set = (lo..=hi).map(|n| EntityId::new(&n.to_string()).expect("digits are valid names")).collect();
    Constant::new(set).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQ10: &str = "?T : [V@T, playIn, V@X], [V@T, playAt, C@{2004|2005}], [V@T, bornIn, C@{1990..1999}], \
                        [V@X, foundIn, C@{1966}], [V@X, isA, C@{East_German_football_team}]";

    #[test]
    fn parses_eq10_task() {
        let t = parse_task(EQ10).unwrap();
        assert_eq!(t.target().as_str(), "T");
        assert_eq!(t.triplets().len(), 5);
        let born = t.triplets()[2].object.as_constant().unwrap();
        assert_eq!(born.len(), 10);
        assert!(born.elements().contains("1995"));
        assert_eq!(t.triplets()[1].object.as_constant().unwrap().len(), 2);
        assert_eq!(t.triplets()[0].object.as_variable().unwrap().as_str(), "X");
    }

    #[test]
    fn parses_minimal_task() {
        let t = parse_task("?T : [V@T, r, C@{a}]").unwrap();
        assert_eq!(t.triplets().len(), 1);
        let t2 = parse_task("?T:[V@T,r,C@{a}]").unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn rejects_cycles_and_free_variables() {
        assert!(matches!(parse_task("?T : [V@T, r, V@T]"), Err(ParseError::Task(TaskError::Cycle(_)))));
        assert!(matches!(
            parse_task("?T : [V@T, r, V@Y]"),
            Err(ParseError::Task(TaskError::UndefinedVariable(_)))
        ));
        assert!(matches!(
            parse_task("?T : [V@X, r, C@{a}]"),
            Err(ParseError::Task(TaskError::TargetNotSubject(_)))
        ));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_task("?T : [V@T, r, C@{}]").unwrap_err();
        assert_eq!(err.position(), Some((1, 18)));
        let err = parse_task("?T :\n  [V@T r, C@{a}]").unwrap_err();
        assert_eq!(err.position().unwrap().0, 2);
        assert!(parse_task("?T : [V@T, r, C@{a}] extra").is_err());
        assert!(parse_task("?T : [V@T, r, C@{9..1}]").is_err());
        assert!(parse_task("?T : [V@T, r, C@{01..3}]").is_err());
        assert!(parse_task("?T : [V@T, r, C@{1..1000000}]").is_err());
        assert!(parse_task("?T : [C@{a}, r, C@{a}]").is_err());
        assert!(parse_task("").is_err());
    }

    #[test]
    fn escapes_and_json_spaces() {
        let t = parse_task(r"?T : [V@T, r, C@{East\ German\ team|a\|b}]");
        // '|' is never a legal name character, even escaped.
        assert!(t.is_err());
        let t = parse_task(r"?T : [V@T, r, C@{East\ German\ team}]").unwrap();
        assert!(t.triplets()[0].object.as_constant().unwrap().elements().contains("East German team"));
        let term = parse_term("C@{ East German football team | 1966 }", Syntax::Json).unwrap();
        let c = term.as_constant().unwrap();
        assert!(c.elements().contains("East German football team"));
        assert!(c.elements().contains("1966"));
        assert!(parse_term("C@{East German}", Syntax::Dsl).is_err());
    }

    #[test]
    fn escaped_range_is_a_name() {
        let t = parse_task(r"?T : [V@T, r, C@{1\..3}]").unwrap();
        let c = t.triplets()[0].object.as_constant().unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.elements().contains("1..3"));
    }

    #[test]
    fn decorations() {
        let t = parse_task("?T : [V@T, r, C@{a}] ; [#0, basedIn, C@{Berlin}]").unwrap();
        assert_eq!(t.decorations().len(), 1);
        assert!(parse_task("?T : [V@T, r, C@{a}] ; [#3, basedIn, C@{Berlin}]").is_err());
        assert!(parse_task("?T : [V@T, r, V@X], [V@X, r, C@{a}] ; [#0, s, C@{b}]").is_err());
    }
}
