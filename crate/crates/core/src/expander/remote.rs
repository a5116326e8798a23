//! HTTP backend delegating proposal generation to an external model.
//!
//! Wire contract (JSON over `POST`):
//!
//! ```text
//! request:  {"constant": "C@{...}", "facts": [{"s": .., "r": .., "o": ..}], "goal": "..."}
//! response: {"triplets": [["V@X", "relation", "C@{...}"], ...]}
//! ```
//!
//! Search and summarize run against the local graph; search honours
//! `filter_year` by dropping facts that mention a later year.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, DeterministicKb, ExpanderBackend, Proposal, ProposalRequest, SearchRequest};
use crate::lang::{parse_term, Constant, Syntax, Term};
use crate::store::{KnowledgeGraph, RelationId, Triple};

/// Environment variable holding the model endpoint URL.
pub const MODEL_URL_ENV: &str = "KPFORGE_MODEL_URL";

#[derive(Debug, Serialize, Deserialize)]
pub struct ProposeRequestBody {
    pub constant: String,
    pub facts: Vec<Triple>,
    pub goal: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProposeResponseBody {
    pub triplets: Vec<[String; 3]>,
}

#[derive(Debug, Clone)]
pub struct RemoteModel<'g> {
    endpoint: String,
    timeout: Duration,
    local: DeterministicKb<'g>,
}

impl<'g> RemoteModel<'g> {
    pub fn new(graph: &'g KnowledgeGraph, endpoint: impl Into<String>) -> Self {
        Self { endpoint: endpoint.into(), timeout: Duration::from_secs(30), local: DeterministicKb::new(graph) }
    }

    /// Reads the endpoint from [`MODEL_URL_ENV`].
    pub fn from_env(graph: &'g KnowledgeGraph) -> Option<Self> {
        std::env::var(MODEL_URL_ENV).ok().filter(|s| !s.is_empty()).map(|url| Self::new(graph, url))
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

fn year_of(name: &str) -> Option<i32> {
    if name.len() <= 4 && !name.is_empty() && name.bytes().all(|b| b.is_ascii_digit()) {
        name.parse().ok()
    } else {
        None
    }
}

impl ExpanderBackend for RemoteModel<'_> {
    fn search(&self, request: &SearchRequest) -> Result<Vec<Triple>, BackendError> {
        let mut facts = self.local.search(request)?;
        if let Some(limit) = request.filter_year {
            facts.retain(|t| {
                [&t.subject, &t.object].iter().all(|e| year_of(e.as_str()).map_or(true, |y| y <= limit))
            });
        }
        Ok(facts)
    }

    fn summarize(&self, sources: &[Constant], goal: &str) -> Result<Constant, BackendError> {
        self.local.summarize(sources, goal)
    }

    fn propose(&self, request: ProposalRequest<'_>) -> Result<Vec<Proposal>, BackendError> {
        let body = ProposeRequestBody {
            constant: crate::lang::constant_string(request.constant, Syntax::Json),
            facts: request.facts.to_vec(),
            goal: request.goal.to_string(),
        };
        let config =
            ureq::Agent::config_builder().timeout_global(Some(self.timeout)).http_status_as_error(false).build();
        let agent = ureq::Agent::new_with_config(config);
        let mut response =
            agent.post(&self.endpoint).send_json(&body).map_err(|e| BackendError::Transport(e.to_string()))?;
        if response.status() != 200 {
            return Err(BackendError::Transport(format!("status {}", response.status())));
        }
        let parsed: ProposeResponseBody =
            response.body_mut().read_json().map_err(|e| BackendError::BadResponse(e.to_string()))?;
        parsed
            .triplets
            .iter()
            .map(|[_, r, o]| {
                let relation = RelationId::new(r).map_err(|e| BackendError::BadResponse(e.to_string()))?;
                match parse_term(o, Syntax::Json) {
                    Ok(Term::Constant(c)) => Ok(Proposal { relation, sources: vec![c] }),
                    Ok(Term::Variable(_)) => Err(BackendError::BadResponse(format!("{o}: expected a constant"))),
                    Err(e) => Err(BackendError::BadResponse(e.to_string())),
                }
            })
            .collect()
    }
}
