use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::render::render;
use super::seed::{generate_seed, SeedError, SeedSpec};
use super::solve::{screen_trajectory, solve, Trajectory, TrajectoryDrop};
use crate::eval::{answer, EvalError};
use crate::expander::{derive_seed, expand_task, DeterministicKb, ExpandError, ExpansionConfig, ExpansionRecord, Strategy};
use crate::lang::{FormalTask, TaskJson, TermJsonError};
use crate::store::{EntitySet, KnowledgeGraph};
use crate::taskgraph::{StructureMetrics, TaskGraph};
use crate::validate::{check_degeneracy, check_preservation, check_triviality, DEFAULT_CARDINALITY_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub rng_seed: u64,
    pub strategy: Strategy,
    pub layers: usize,
    /// The seed task before expansion, in DSL form.
    pub seed_task: String,
}

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub target: String,
    pub triplets: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decorations: Vec<(usize, String, String)>,
    pub question: String,
    pub answer: EntitySet,
    pub metrics: StructureMetrics,
    pub expansion: Vec<ExpansionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Trajectory>,
    pub provenance: Provenance,
}

impl DatasetRecord {
    pub fn task(&self) -> Result<FormalTask, TermJsonError> {
        TaskJson {
            target: self.target.clone(),
            triplets: self.triplets.clone(),
            decorations: self.decorations.clone(),
            answer: Some(self.answer.clone()),
        }
        .to_task()
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("record {id}: {source}")]
    Task { id: String, source: TermJsonError },
    #[error("record {id}: {source}")]
    Eval { id: String, source: EvalError },
    #[error("record {id}: stored answer {stored:?} differs from evaluated answer {evaluated:?}")]
    AnswerMismatch { id: String, stored: Vec<String>, evaluated: Vec<String> },
}

/// Re-evaluates a record's task and compares against its stored answer.
pub fn verify_record(g: &KnowledgeGraph, record: &DatasetRecord) -> Result<(), VerifyError> {
    let task = record.task().map_err(|source| VerifyError::Task { id: record.id.clone(), source })?;
    let evaluated = answer(g, &task).map_err(|source| VerifyError::Eval { id: record.id.clone(), source })?;
    if evaluated != record.answer {
        return Err(VerifyError::AnswerMismatch {
            id: record.id.clone(),
            stored: record.answer.iter().map(ToString::to_string).collect(),
            evaluated: evaluated.iter().map(ToString::to_string).collect(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    SeedSparse,
    NoExpansion,
    Preservation,
    Degeneracy,
    Triviality,
    TrajectoryIncorrect,
    TrajectoryUngrounded,
    TrajectoryRepetitive,
}

impl From<TrajectoryDrop> for DropReason {
    fn from(d: TrajectoryDrop) -> Self {
        match d {
            TrajectoryDrop::Incorrect => DropReason::TrajectoryIncorrect,
            TrajectoryDrop::Ungrounded => DropReason::TrajectoryUngrounded,
            TrajectoryDrop::Repetitive => DropReason::TrajectoryRepetitive,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub generated: usize,
    pub kept: usize,
    pub dropped: BTreeMap<DropReason, usize>,
}

impl SynthesisSummary {
    pub fn dropped_total(&self) -> usize {
        self.dropped.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub seed: SeedSpec,
    pub expansion: ExpansionConfig,
    pub n_tasks: usize,
    /// Base seed; every task derives its own seeds from it and its index.
    pub rng_seed: u64,
    pub attach_trajectory: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthesisOutput {
    pub records: Vec<DatasetRecord>,
    pub summary: SynthesisSummary,
}

/// Generates, expands, validates, renders and solves one task.
pub fn synthesize_one(g: &KnowledgeGraph, spec: &SynthesisSpec, index: usize) -> Result<DatasetRecord, DropReason> {
    let seed_spec = spec.seed.with_seed(derive_seed(spec.rng_seed, index as u64, 1));
    let seed = generate_seed(g, &seed_spec).map_err(|_| DropReason::SeedSparse)?;
    let cfg = ExpansionConfig { rng_seed: derive_seed(spec.rng_seed, index as u64, 2), ..spec.expansion.clone() };
    let backend = DeterministicKb::new(g);
    let outcome = expand_task(g, &seed, &backend, &cfg).map_err(|_| DropReason::NoExpansion)?;
    if outcome.rounds_completed == 0 {
        return Err(DropReason::NoExpansion);
    }
    let task = outcome.task;
    if !check_preservation(g, &seed, &task).passed {
        return Err(DropReason::Preservation);
    }
    if !check_degeneracy(g, &task, DEFAULT_CARDINALITY_CAP).passed {
        return Err(DropReason::Degeneracy);
    }
    if !check_triviality(g, &task).passed {
        return Err(DropReason::Triviality);
    }
    let id = format!("kp-{index:06}");
    let final_answer = answer(g, &task).map_err(|_| DropReason::Degeneracy)?;
    let trajectory = solve(g, &task, &id).map_err(|_| DropReason::TrajectoryIncorrect)?;
    if let Some(drop) = screen_trajectory(g, &task, &trajectory) {
        return Err(drop.into());
    }
    let metrics = TaskGraph::build(&task).map_err(|_| DropReason::Degeneracy)?.metrics();
    let json = TaskJson::from_task(&task);
    Ok(DatasetRecord {
        id,
        target: json.target,
        triplets: json.triplets,
        decorations: json.decorations,
        question: render(&task),
        answer: final_answer,
        metrics,
        expansion: outcome.records,
        trajectory: spec.attach_trajectory.then_some(trajectory),
        provenance: Provenance {
            rng_seed: spec.rng_seed,
            strategy: cfg.strategy,
            layers: cfg.layers,
            seed_task: seed.to_string(),
        },
    })
}

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error(transparent)]
    Expand(#[from] ExpandError),
}

/// Runs the pipeline for `spec.n_tasks` tasks on `jobs` worker threads.
/// Output order and content do not depend on `jobs`.
pub fn run_synthesis(g: &KnowledgeGraph, spec: &SynthesisSpec, jobs: usize) -> Result<SynthesisOutput, SynthesisError> {
    spec.seed.validate()?;
    spec.expansion.validate()?;
    let n = spec.n_tasks;
    let jobs = jobs.clamp(1, n.max(1));
    let results: Vec<Result<DatasetRecord, DropReason>> = if jobs == 1 {
        (0..n).map(|i| synthesize_one(g, spec, i)).collect()
    } else {
        let mut slots: Vec<Option<Result<DatasetRecord, DropReason>>> = (0..n).map(|_| None).collect();
        std::thread::scope(|scope| {
            let chunk = n.div_ceil(jobs);
            for (c, part) in slots.chunks_mut(chunk).enumerate() {
                scope.spawn(move || {
                    for (offset, slot) in part.iter_mut().enumerate() {
                        *slot = Some(synthesize_one(g, spec, c * chunk + offset));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("every slot is filled")).collect()
    };
    let mut out = SynthesisOutput::default();
    out.summary.generated = n;
    for r in results {
        match r {
            Ok(record) => out.records.push(record),
            Err(reason) => *out.summary.dropped.entry(reason).or_default() += 1,
        }
    }
    out.summary.kept = out.records.len();
    Ok(out)
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".partial");
    path.with_file_name(name)
}

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// removing the temporary file if anything fails.
pub fn write_atomically(path: &Path, contents: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> io::Result<()> {
    let tmp = temp_path(path);
    let result = (|| {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        contents(&mut w)?;
        w.flush()?;
        drop(w);
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_jsonl(out: &mut dyn Write, records: &[DatasetRecord]) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_dataset(path: &Path, records: &[DatasetRecord]) -> io::Result<()> {
    write_atomically(path, |w| write_jsonl(w, records))
}

pub fn read_dataset(text: &str) -> Result<Vec<DatasetRecord>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::football;

    fn spec(n: usize) -> SynthesisSpec {
        SynthesisSpec {
            seed: SeedSpec::default(),
            expansion: ExpansionConfig { layers: 2, ..Default::default() },
            n_tasks: n,
            rng_seed: 7,
            attach_trajectory: true,
        }
    }

    #[test]
    fn empty_run_has_valid_summary() {
        let out = run_synthesis(&football(), &spec(0), 1).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.summary, SynthesisSummary { generated: 0, kept: 0, dropped: BTreeMap::new() });
    }

    #[test]
    fn records_verify_and_tally() {
        let g = football();
        let out = run_synthesis(&g, &spec(12), 1).unwrap();
        assert_eq!(out.summary.kept + out.summary.dropped_total(), 12);
        for r in &out.records {
            verify_record(&g, r).unwrap();
            assert_eq!(r.metrics.constant_constant_edges, 0);
            assert_eq!(r.metrics.shortcut_count, 0);
        }
        let parallel = run_synthesis(&g, &spec(12), 3).unwrap();
        assert_eq!(parallel, out);
    }

    #[test]
    fn dataset_round_trips_through_jsonl() {
        let g = football();
        let out = run_synthesis(&g, &spec(4), 1).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&mut buf, &out.records).unwrap();
        let back = read_dataset(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, out.records);
    }

    #[test]
    fn tampered_record_fails_verification() {
        let g = football();
        let out = run_synthesis(&g, &spec(6), 1).unwrap();
        let mut r = out.records.first().expect("at least one record").clone();
        r.answer.insert(crate::store::EntityId::new("Hamburg").unwrap());
        assert!(matches!(verify_record(&g, &r), Err(VerifyError::AnswerMismatch { .. })));
    }

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        let err = write_atomically(&path, |_| Err(io::Error::other("boom")));
        assert!(err.is_err());
        assert!(!path.exists());
        assert!(!temp_path(&path).exists());
        write_dataset(&path, &[]).unwrap();
        assert!(path.exists());
    }
}
