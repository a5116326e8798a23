//! End-to-end orchestration: seeds from random walks, expansion, validation,
//! rendering, solving and dataset emission.

mod compare;
mod render;
mod seed;
mod solve;
mod synth;

pub use compare::{compare_strategies, ComparisonReport, RunMetrics, StrategyReport};
pub use render::{constant_text, relation_phrase, render};
pub use seed::{generate_seed, seed_for_entity, SeedError, SeedSpec, TargetPick, SEED_ATTEMPTS};
pub use solve::{
    filter_trajectories, is_grounded, is_repetitive, screen_trajectory, solve, SolverAction, SolverStep, Trajectory,
    TrajectoryDrop, TrajectoryDrops, TrajectoryVerdicts, MAX_IDENTICAL_ACTIONS,
};
pub use synth::{
    read_dataset, run_synthesis, synthesize_one, verify_record, write_atomically, write_dataset, write_jsonl,
    DatasetRecord, DropReason, Provenance, SynthesisError, SynthesisOutput, SynthesisSpec, SynthesisSummary,
    VerifyError,
};
