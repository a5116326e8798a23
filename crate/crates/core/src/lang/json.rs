//! JSON carrier form of a task. Subjects and objects use the DSL term
//! encoding, except that constant elements may contain literal spaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::parse::{parse_term, parse_variable_term, ParseError, Syntax};
use super::print::{constant_string, term_string};
use super::{Decoration, FormalTask, TaskError, Term, TripletExpr, Variable};
use crate::store::{EntitySet, RelationId};

#[derive(Debug, Error)]
pub enum TermJsonError {
    #[error("triplet {index}: {source}")]
    Term { index: usize, source: ParseError },
    #[error("decoration {index}: {source}")]
    Decoration { index: usize, source: ParseError },
    #[error("invalid relation {0:?}")]
    Relation(String),
    #[error(transparent)]
    Task(#[from] TaskError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskJson {
    pub target: String,
    pub triplets: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decorations: Vec<(usize, String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer: Option<EntitySet>,
}

impl TaskJson {
    pub fn from_task(task: &FormalTask) -> Self {
        Self {
            target: task.target().to_string(),
            triplets: task
                .triplets()
                .iter()
                .map(|t| {
                    [format!("V@{}", t.subject), t.relation.to_string(), term_string(&t.object, Syntax::Json)]
                })
                .collect(),
            decorations: task
                .decorations()
                .iter()
                .map(|d| (d.anchor, d.relation.to_string(), constant_string(&d.object, Syntax::Json)))
                .collect(),
            answer: task.expected_answer().cloned(),
        }
    }

    pub fn to_task(&self) -> Result<FormalTask, TermJsonError> {
        let target = Variable::new(&self.target)?;
        let mut triplets = Vec::with_capacity(self.triplets.len());
        for (index, [s, r, o]) in self.triplets.iter().enumerate() {
            let subject = parse_variable_term(s).map_err(|source| TermJsonError::Term { index, source })?;
            let relation = RelationId::new(r).map_err(|_| TermJsonError::Relation(r.clone()))?;
            let object = parse_term(o, Syntax::Json).map_err(|source| TermJsonError::Term { index, source })?;
            triplets.push(TripletExpr { subject, relation, object });
        }
        let mut decorations = Vec::with_capacity(self.decorations.len());
        for (index, (anchor, r, o)) in self.decorations.iter().enumerate() {
            let relation = RelationId::new(r).map_err(|_| TermJsonError::Relation(r.clone()))?;
            let object = match parse_term(o, Syntax::Json) {
                Ok(Term::Constant(c)) => c,
                Ok(Term::Variable(_)) => {
                    return Err(TermJsonError::Decoration {
                        index,
                        source: ParseError::Syntax { line: 1, column: 1, message: "expected a constant".into() },
                    })
                }
                Err(source) => return Err(TermJsonError::Decoration { index, source }),
            };
            decorations.push(Decoration { anchor: *anchor, relation, object });
        }
        let mut task = FormalTask::with_decorations(target, triplets, decorations)?;
        task.set_expected_answer(self.answer.clone());
        Ok(task)
    }
}

impl From<FormalTask> for TaskJson {
    fn from(task: FormalTask) -> Self {
        TaskJson::from_task(&task)
    }
}

impl TryFrom<TaskJson> for FormalTask {
    type Error = TermJsonError;

    fn try_from(value: TaskJson) -> Result<Self, Self::Error> {
        value.to_task()
    }
}
