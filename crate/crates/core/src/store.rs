//! In-memory triple store.
//!
//! A [`KnowledgeGraph`] holds the entity universe, optional per-entity type
//! tags and a set of `(subject, relation, object)` triples. Triples are
//! indexed by `(relation, subject)` and `(relation, object)` so that a
//! knowledge projection over a single entity is two map lookups. The graph is
//! immutable once built; use [`GraphBuilder`] to assemble one.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Characters that may never appear in entity or relation names.
pub const FORBIDDEN_NAME_CHARS: [char; 4] = ['\t', '\n', '\r', '|'];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error("name is empty")]
    Empty,
    #[error("name {name:?} contains forbidden character {ch:?}")]
    ForbiddenChar { name: String, ch: char },
}

fn check_name(name: &str) -> Result<(), NameError> {
    if name.is_empty() {
        return Err(NameError::Empty);
    }
    if let Some(ch) = name.chars().find(|c| FORBIDDEN_NAME_CHARS.contains(c)) {
        return Err(NameError::ForbiddenChar { name: name.to_string(), ch });
    }
    Ok(())
}

macro_rules! name_type {
    ($(#[$meta:meta])* $ty:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $ty(Arc<str>);

        impl $ty {
            pub fn new(name: &str) -> Result<Self, NameError> {
                check_name(name)?;
                Ok(Self(Arc::from(name)))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Debug for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(&*self.0, f)
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl Borrow<str> for $ty {
            fn borrow(&self) -> &str {
                &self.0
            }
        }

        impl AsRef<str> for $ty {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<&str> for $ty {
            type Error = NameError;

            fn try_from(value: &str) -> Result<Self, Self::Error> {
                Self::new(value)
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                Self::new(&s).map_err(serde::de::Error::custom)
            }
        }
    };
}

name_type!(
    /// Canonical, case-sensitive entity name.
    EntityId
);
name_type!(
    /// Relation label.
    RelationId
);

/// Ordered set of entities. Ordering is lexicographic on the name, which keeps
/// every printed or serialized set byte-stable.
pub type EntitySet = BTreeSet<EntityId>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    #[serde(rename = "s")]
    pub subject: EntityId,
    #[serde(rename = "r")]
    pub relation: RelationId,
    #[serde(rename = "o")]
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: EntityId, relation: RelationId, object: EntityId) -> Self {
        Self { subject, relation, object }
    }

    /// Builds a triple from raw names, validating each one.
    pub fn parse(subject: &str, relation: &str, object: &str) -> Result<Self, NameError> {
        Ok(Self::new(EntityId::new(subject)?, RelationId::new(relation)?, EntityId::new(object)?))
    }

    /// The endpoint opposite to `entity`, if `entity` takes part in this triple.
    pub fn other_end(&self, entity: &str) -> Option<&EntityId> {
        if self.subject.as_str() == entity {
            Some(&self.object)
        } else if self.object.as_str() == entity {
            Some(&self.subject)
        } else {
            None
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

/// Accepted on-disk triple formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Tsv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsv" => Ok(Format::Tsv),
            "jsonl" => Ok(Format::Jsonl),
            other => Err(format!("unknown graph format {other:?} (expected tsv or jsonl)")),
        }
    }
}

impl Format {
    /// Guesses the format from a file extension, defaulting to TSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => Format::Jsonl,
            _ => Format::Tsv,
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: {source}")]
    InvalidName { line: usize, source: NameError },
    #[error("entity {0:?} is not in the graph")]
    UnknownEntity(String),
    #[error("random walk needs at least one step")]
    ZeroSteps,
}

type PairIndex = HashMap<RelationId, HashMap<EntityId, EntitySet>>;

/// Immutable knowledge graph.
#[derive(Clone, Default)]
pub struct KnowledgeGraph {
    entities: EntitySet,
    entity_types: BTreeMap<EntityId, BTreeSet<String>>,
    triples: BTreeSet<Triple>,
    relations: BTreeSet<RelationId>,
    // (relation, subject) -> objects
    by_subject: PairIndex,
    // (relation, object) -> subjects
    by_object: PairIndex,
    // entity -> triples mentioning it
    incident: HashMap<EntityId, BTreeSet<Triple>>,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities
            && self.entity_types == other.entity_types
            && self.triples == other.triples
    }
}

impl Eq for KnowledgeGraph {}

impl fmt::Debug for KnowledgeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KnowledgeGraph")
            .field("entities", &self.entities.len())
            .field("relations", &self.relations.len())
            .field("triples", &self.triples.len())
            .finish()
    }
}

impl KnowledgeGraph {
    /// Reads a graph from `path` in the given format.
    pub fn ingest(path: impl AsRef<Path>, format: Format) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new();
        builder.read_file(path, format)?;
        Ok(builder.build())
    }

    pub fn from_tsv_str(text: &str) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new();
        builder.read_tsv(text.as_bytes())?;
        Ok(builder.build())
    }

    pub fn from_jsonl_str(text: &str) -> Result<Self, GraphError> {
        let mut builder = GraphBuilder::new();
        builder.read_jsonl(text.as_bytes())?;
        Ok(builder.build())
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut builder = GraphBuilder::new();
        for t in triples {
            builder.add_triple(t);
        }
        builder.build()
    }

    pub fn entities(&self) -> &EntitySet {
        &self.entities
    }

    pub fn relations(&self) -> &BTreeSet<RelationId> {
        &self.relations
    }

    pub fn triples(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn entity_types(&self) -> &BTreeMap<EntityId, BTreeSet<String>> {
        &self.entity_types
    }

    /// Type tags of `entity`; empty when none were declared.
    pub fn types_of(&self, entity: &str) -> Option<&BTreeSet<String>> {
        self.entity_types.get(entity)
    }

    pub fn has_types(&self) -> bool {
        self.entity_types.values().any(|t| !t.is_empty())
    }

    pub fn contains_entity(&self, entity: &str) -> bool {
        self.entities.contains(entity)
    }

    /// Looks up the stored entity id for a name.
    pub fn entity(&self, name: &str) -> Option<&EntityId> {
        self.entities.get(name)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_triples(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Entities related to `entity` by `relation` in either direction: the
    /// knowledge projection of the singleton `{entity}`.
    pub fn neighbors(&self, relation: &str, entity: &str) -> EntitySet {
        let mut out = EntitySet::new();
        self.extend_neighbors(relation, entity, &mut out);
        out
    }

    /// Adds the projection of `{entity}` under `relation` to `out`.
    pub fn extend_neighbors(&self, relation: &str, entity: &str, out: &mut EntitySet) {
        for index in [&self.by_subject, &self.by_object] {
            if let Some(hits) = index.get(relation).and_then(|m| m.get(entity)) {
                out.extend(hits.iter().cloned());
            }
        }
    }

    /// Objects `o` with `(subject, relation, o)` stored.
    pub fn objects_of(&self, relation: &str, subject: &str) -> Option<&EntitySet> {
        self.by_subject.get(relation).and_then(|m| m.get(subject))
    }

    /// Subjects `s` with `(s, relation, object)` stored.
    pub fn subjects_of(&self, relation: &str, object: &str) -> Option<&EntitySet> {
        self.by_object.get(relation).and_then(|m| m.get(object))
    }

    pub fn contains_triple(&self, subject: &str, relation: &str, object: &str) -> bool {
        self.objects_of(relation, subject).is_some_and(|objs| objs.contains(object))
    }

    /// Every triple in which `entity` is the subject or the object.
    pub fn facts_about(&self, entity: &str) -> BTreeSet<Triple> {
        self.incident.get(entity).cloned().unwrap_or_default()
    }

    /// Borrowing variant of [`facts_about`](Self::facts_about).
    pub fn facts_iter<'a>(&'a self, entity: &str) -> impl Iterator<Item = &'a Triple> + 'a {
        self.incident.get(entity).into_iter().flat_map(|s| s.iter())
    }

    pub fn degree(&self, entity: &str) -> usize {
        self.incident.get(entity).map_or(0, BTreeSet::len)
    }

    /// Distinct entities sharing at least one triple with `entity`, excluding
    /// `entity` itself.
    pub fn adjacent(&self, entity: &str) -> EntitySet {
        self.facts_iter(entity)
            .filter_map(|t| t.other_end(entity))
            .filter(|e| e.as_str() != entity)
            .cloned()
            .collect()
    }

    /// Seeded random walk. Each step moves to a uniformly chosen distinct
    /// neighbour; the walk stops early at an entity with no neighbours.
    pub fn random_walk(&self, start: &str, steps: usize, rng_seed: u64) -> Result<Vec<EntityId>, GraphError> {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        self.random_walk_with(start, steps, &mut rng)
    }

    pub fn random_walk_with<R: Rng + ?Sized>(
        &self,
        start: &str,
        steps: usize,
        rng: &mut R,
    ) -> Result<Vec<EntityId>, GraphError> {
        if steps == 0 {
            return Err(GraphError::ZeroSteps);
        }
        let start = self.entity(start).ok_or_else(|| GraphError::UnknownEntity(start.to_string()))?;
        let mut path = vec![start.clone()];
        for _ in 0..steps {
            let current = path.last().expect("path is never empty");
            let next: Vec<EntityId> = self.adjacent(current.as_str()).into_iter().collect();
            if next.is_empty() {
                break;
            }
            let pick = rng.gen_range(0..next.len());
            path.push(next[pick].clone());
        }
        Ok(path)
    }

    /// Serializes the graph back to TSV: type declarations are not included.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(&format!("{}\t{}\t{}\n", t.subject, t.relation, t.object));
        }
        out
    }

    /// Type declarations as `entity<TAB>type` lines.
    pub fn types_to_tsv(&self) -> String {
        let mut out = String::new();
        for (e, types) in &self.entity_types {
            for ty in types {
                out.push_str(&format!("{e}\t{ty}\n"));
            }
        }
        out
    }

    /// Checks that the two pair indexes and the incidence index agree exactly
    /// with the stored triple set.
    pub fn index_consistent(&self) -> bool {
        let mut from_subject = BTreeSet::new();
        for (r, m) in &self.by_subject {
            for (s, objs) in m {
                for o in objs {
                    from_subject.insert(Triple::new(s.clone(), r.clone(), o.clone()));
                }
            }
        }
        let mut from_object = BTreeSet::new();
        for (r, m) in &self.by_object {
            for (o, subs) in m {
                for s in subs {
                    from_object.insert(Triple::new(s.clone(), r.clone(), o.clone()));
                }
            }
        }
        let mut from_incident = BTreeSet::new();
        for (e, ts) in &self.incident {
            for t in ts {
                if t.subject != *e && t.object != *e {
                    return false;
                }
                from_incident.insert(t.clone());
            }
        }
        let entities_ok = self
            .triples
            .iter()
            .all(|t| self.entities.contains(&t.subject) && self.entities.contains(&t.object));
        from_subject == self.triples && from_object == self.triples && from_incident == self.triples && entities_ok
    }
}

/// Single-writer builder for [`KnowledgeGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    graph: KnowledgeGraph,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonLine {
    Triple { s: String, r: String, o: String },
    Types { entity: String, #[serde(default)] types: Vec<String> },
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_entity(&mut self, entity: EntityId) -> &mut Self {
        self.graph.entities.insert(entity);
        self
    }

    pub fn add_type(&mut self, entity: EntityId, ty: impl Into<String>) -> &mut Self {
        self.graph.entities.insert(entity.clone());
        self.graph.entity_types.entry(entity).or_default().insert(ty.into());
        self
    }

    /// Inserts a triple. Returns `false` if it was already present.
    pub fn add_triple(&mut self, t: Triple) -> bool {
        let g = &mut self.graph;
        if g.triples.contains(&t) {
            return false;
        }
        g.entities.insert(t.subject.clone());
        g.entities.insert(t.object.clone());
        g.relations.insert(t.relation.clone());
        g.by_subject
            .entry(t.relation.clone())
            .or_default()
            .entry(t.subject.clone())
            .or_default()
            .insert(t.object.clone());
        g.by_object
            .entry(t.relation.clone())
            .or_default()
            .entry(t.object.clone())
            .or_default()
            .insert(t.subject.clone());
        g.incident.entry(t.subject.clone()).or_default().insert(t.clone());
        g.incident.entry(t.object.clone()).or_default().insert(t.clone());
        g.triples.insert(t);
        true
    }

    pub fn read_file(&mut self, path: impl AsRef<Path>, format: Format) -> Result<&mut Self, GraphError> {
        let file = std::fs::File::open(path)?;
        let reader = std::io::BufReader::new(file);
        match format {
            Format::Tsv => self.read_tsv(reader),
            Format::Jsonl => self.read_jsonl(reader),
        }
    }

    /// Reads `subject<TAB>relation<TAB>object` lines. Blank lines and lines
    /// starting with `#` are skipped.
    pub fn read_tsv(&mut self, reader: impl BufRead) -> Result<&mut Self, GraphError> {
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(GraphError::Malformed {
                    line: line_no,
                    reason: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let t = Triple::parse(fields[0], fields[1], fields[2])
                .map_err(|source| GraphError::InvalidName { line: line_no, source })?;
            self.add_triple(t);
        }
        Ok(self)
    }

    /// Reads `entity<TAB>type` declarations.
    pub fn read_types_tsv(&mut self, reader: impl BufRead) -> Result<&mut Self, GraphError> {
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 2 {
                return Err(GraphError::Malformed {
                    line: line_no,
                    reason: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            if fields[1].is_empty() {
                return Err(GraphError::Malformed { line: line_no, reason: "empty type name".into() });
            }
            let e = EntityId::new(fields[0]).map_err(|source| GraphError::InvalidName { line: line_no, source })?;
            self.add_type(e, fields[1]);
        }
        Ok(self)
    }

    pub fn read_types_file(&mut self, path: impl AsRef<Path>) -> Result<&mut Self, GraphError> {
        let file = std::fs::File::open(path)?;
        self.read_types_tsv(std::io::BufReader::new(file))
    }

    /// Reads JSON lines holding either `{"s","r","o"}` triples or
    /// `{"entity","types"}` declarations.
    pub fn read_jsonl(&mut self, reader: impl BufRead) -> Result<&mut Self, GraphError> {
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: JsonLine = serde_json::from_str(&line).map_err(|e| GraphError::Malformed {
                line: line_no,
                reason: format!("expected a triple or type object: {e}"),
            })?;
            let invalid = |source| GraphError::InvalidName { line: line_no, source };
            match parsed {
                JsonLine::Triple { s, r, o } => {
                    let t = Triple::parse(&s, &r, &o).map_err(invalid)?;
                    self.add_triple(t);
                }
                JsonLine::Types { entity, types } => {
                    let e = EntityId::new(&entity).map_err(invalid)?;
                    self.add_entity(e.clone());
                    for ty in types {
                        if ty.is_empty() {
                            return Err(GraphError::Malformed { line: line_no, reason: "empty type name".into() });
                        }
                        self.add_type(e.clone(), ty);
                    }
                }
            }
        }
        Ok(self)
    }

    pub fn build(self) -> KnowledgeGraph {
        self.graph
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EQ1: &str = "Berliner_FC_Dynamo\tfoundIn\t1966\nBerliner_FC_Dynamo\tisA\tEast_German_football_team\n";

    fn e(s: &str) -> EntityId {
        EntityId::new(s).unwrap()
    }

    #[test]
    fn ingest_eq1_lines() {
        let g = KnowledgeGraph::from_tsv_str(EQ1).unwrap();
        assert_eq!(g.num_triples(), 2);
        assert_eq!(g.num_entities(), 3);
        assert!(g.index_consistent());
    }

    #[test]
    fn ingest_empty() {
        let g = KnowledgeGraph::from_tsv_str("").unwrap();
        assert_eq!(g.num_triples(), 0);
        assert_eq!(g.num_entities(), 0);
    }

    #[test]
    fn duplicate_lines_collapse() {
        let text = format!("# comment\n{EQ1}{EQ1}\n");
        let g = KnowledgeGraph::from_tsv_str(&text).unwrap();
        assert_eq!(g.num_triples(), 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = KnowledgeGraph::from_tsv_str("a\tr\tb\nbad line\n").unwrap_err();
        match err {
            GraphError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = KnowledgeGraph::from_tsv_str("a\tr\tb|c\n").unwrap_err();
        assert!(matches!(err, GraphError::InvalidName { line: 1, .. }), "{err:?}");
        let err = KnowledgeGraph::from_tsv_str("a\t\tb\n").unwrap_err();
        assert!(matches!(err, GraphError::InvalidName { line: 1, source: NameError::Empty }));
    }

    #[test]
    fn jsonl_triples_and_types() {
        let text = r#"{"s": "Berliner_FC_Dynamo", "r": "foundIn", "o": "1966"}
{"entity": "Berliner_FC_Dynamo", "types": ["FootballClub"]}
{"entity": "Lonely", "types": []}
"#;
        let g = KnowledgeGraph::from_jsonl_str(text).unwrap();
        assert_eq!(g.num_triples(), 1);
        assert_eq!(g.num_entities(), 3);
        assert!(g.types_of("Berliner_FC_Dynamo").unwrap().contains("FootballClub"));
        assert!(g.facts_about("Lonely").is_empty());
        assert!(KnowledgeGraph::from_jsonl_str("{\"s\": 1}\n").is_err());
    }

    #[test]
    fn types_tsv() {
        let mut b = GraphBuilder::new();
        b.read_tsv(EQ1.as_bytes()).unwrap();
        b.read_types_tsv("Berliner_FC_Dynamo\tFootballClub\n1966\tYear\n".as_bytes()).unwrap();
        let g = b.build();
        assert!(g.has_types());
        assert_eq!(g.types_of("1966").unwrap().iter().next().unwrap(), "Year");
        assert!(GraphBuilder::new().read_types_tsv("x\n".as_bytes()).is_err());
    }

    #[test]
    fn neighbors_is_symmetric_projection() {
        let g = KnowledgeGraph::from_tsv_str(EQ1).unwrap();
        assert_eq!(g.neighbors("foundIn", "1966"), [e("Berliner_FC_Dynamo")].into());
        assert_eq!(g.neighbors("foundIn", "Berliner_FC_Dynamo"), [e("1966")].into());
        assert!(g.neighbors("foundIn", "nowhere").is_empty());
        assert!(g.neighbors("noSuchRelation", "1966").is_empty());
    }

    #[test]
    fn facts_about_entity() {
        let g = KnowledgeGraph::from_tsv_str(EQ1).unwrap();
        assert_eq!(g.facts_about("Berliner_FC_Dynamo").len(), 2);
        assert_eq!(g.facts_about("1966").len(), 1);
    }

    #[test]
    fn random_walk_edge_cases() {
        let mut b = GraphBuilder::new();
        b.read_tsv(EQ1.as_bytes()).unwrap();
        b.add_entity(e("Isolated"));
        let g = b.build();
        assert_eq!(g.random_walk("Isolated", 5, 1).unwrap(), vec![e("Isolated")]);
        assert!(matches!(g.random_walk("Missing", 5, 1), Err(GraphError::UnknownEntity(_))));
        assert!(matches!(g.random_walk("1966", 0, 1), Err(GraphError::ZeroSteps)));
        let a = g.random_walk("1966", 10, 99).unwrap();
        let b = g.random_walk("1966", 10, 99).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 11);
    }

    #[test]
    fn name_validation() {
        assert!(EntityId::new("").is_err());
        assert!(EntityId::new("a\tb").is_err());
        assert!(EntityId::new("a|b").is_err());
        assert!(RelationId::new("x\ny").is_err());
        assert!(EntityId::new("East German football team").is_ok());
    }

    #[test]
    fn tsv_roundtrip() {
        let g = KnowledgeGraph::from_tsv_str(EQ1).unwrap();
        assert_eq!(KnowledgeGraph::from_tsv_str(&g.to_tsv()).unwrap(), g);
    }
}
