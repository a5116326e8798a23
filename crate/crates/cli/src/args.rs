use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use kpforge_core::expander::Strategy;
use kpforge_core::pipeline::TargetPick;
use kpforge_core::validate::Uniqueness;

/// Seed used when `--seed` is not given, so bare invocations are reproducible.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Parser)]
#[command(name = "kpforge", version, about = "Build, evaluate and deepen knowledge-projection tasks over a triple store")]
pub struct Cli {
    /// Output format for results written to stdout or --out.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load triple files and report their size; --out writes the merged graph as TSV.
    Ingest(IngestArgs),
    /// Generate a seed task from a random walk.
    Seed(SeedArgs),
    /// Deepen a task by replacing constants with validated sub-questions.
    Expand(ExpandArgs),
    /// Evaluate a task and print its answer.
    Eval(EvalArgs),
    /// Run the validator checks on a task.
    Validate(ValidateArgs),
    /// Solve a task step by step and print the trajectory.
    Solve(EvalArgs),
    /// Synthesize a dataset of expanded, validated and solved tasks.
    Synth(SynthArgs),
    /// Compare the structure produced by each expansion strategy.
    Compare(CompareArgs),
    /// Render a task as an English question.
    Render(TaskOnlyArgs),
    /// Export the task graph in Graphviz DOT format.
    ExportDot(TaskOnlyArgs),
}

impl Command {
    /// Files the command reads and files it writes.
    pub fn paths(&self) -> (Vec<&Path>, Vec<&Path>) {
        let (mut inputs, mut outputs): (Vec<&Path>, Vec<&Path>) = (Vec::new(), Vec::new());
        let (graph, task, out) = match self {
            Command::Ingest(a) => (Some(&a.graph), None, &a.out),
            Command::Seed(a) => (Some(&a.graph), None, &a.out),
            Command::Expand(a) => (Some(&a.graph), Some(&a.task), &a.out),
            Command::Eval(a) | Command::Solve(a) => (Some(&a.graph), Some(&a.task), &a.out),
            Command::Validate(a) => {
                inputs.extend(a.before.as_deref());
                (Some(&a.graph), Some(&a.task), &a.out)
            }
            Command::Synth(a) => {
                outputs.extend(a.summary.as_deref());
                (Some(&a.graph), None, &a.out)
            }
            Command::Compare(a) => (Some(&a.graph), None, &a.out),
            Command::Render(a) | Command::ExportDot(a) => (None, Some(&a.task), &a.out),
        };
        if let Some(g) = graph {
            inputs.extend(g.graph.iter().map(PathBuf::as_path));
            inputs.extend(g.types.as_deref());
        }
        inputs.extend(task.and_then(|t| t.task.as_deref()));
        outputs.extend(out.out.as_deref());
        (inputs, outputs)
    }
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Triple file (.tsv or .jsonl); repeat to merge several files.
    #[arg(long, required = true, num_args = 1)]
    pub graph: Vec<PathBuf>,
    /// Entity type file: one `entity<TAB>type` pair per line.
    #[arg(long)]
    pub types: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct TaskInput {
    /// File holding a task in DSL or JSON form.
    #[arg(long)]
    pub task: Option<PathBuf>,
    /// Task given inline in DSL form.
    #[arg(long)]
    pub dsl: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutArg {
    /// Write results to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// Random seed.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SeedShape {
    /// Steps of the random walk a seed is drawn from (at least 2).
    #[arg(long, default_value_t = 4)]
    pub walk_steps: usize,
    /// Fewest constraints on the seed's target (at least 2).
    #[arg(long, default_value_t = 2)]
    pub min_constraints: usize,
    /// Most constraints on the seed's target.
    #[arg(long, default_value_t = 3)]
    pub max_constraints: usize,
    /// Which walked entity the seed is built around.
    #[arg(long, value_enum, default_value_t = PickArg::Last)]
    pub target_pick: PickArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PickArg {
    Last,
    Uniform,
    MaxDegree,
}

impl From<PickArg> for TargetPick {
    fn from(p: PickArg) -> Self {
        match p {
            PickArg::Last => TargetPick::Last,
            PickArg::Uniform => TargetPick::Uniform,
            PickArg::MaxDegree => TargetPick::MaxDegree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Layerwise,
    Sequential,
    Random,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Layerwise => Strategy::LayerWise,
            StrategyArg::Sequential => Strategy::Sequential,
            StrategyArg::Random => Strategy::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Strict,
    TypeOnly,
}

impl From<ModeArg> for Uniqueness {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Strict => Uniqueness::StrictSingleton,
            ModeArg::TypeOnly => Uniqueness::TypeOnly,
        }
    }
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    /// Expansion strategy.
    #[arg(long, value_enum, default_value_t = StrategyArg::Layerwise)]
    pub strategy: StrategyArg,
    /// Number of expansion rounds.
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Uniqueness check for sub-questions: strict requires the exact constant.
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    pub mode: ModeArg,
    /// Fewest triplets per sub-question.
    #[arg(long, default_value_t = 2)]
    pub min_facts: usize,
    /// Most triplets per sub-question.
    #[arg(long, default_value_t = 4)]
    pub max_facts: usize,
    /// Also expand constants with several elements.
    #[arg(long)]
    pub expand_sets: bool,
    /// Chance per round that the random strategy adds a redundant fact.
    #[arg(long, default_value_t = 0.5)]
    pub redundancy: f64,
    /// Ask the model at $KPFORGE_MODEL_URL for proposals instead of the local graph.
    #[arg(long)]
    pub remote: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SeedArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub shape: SeedShape,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub task: TaskInput,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub expansion: ExpansionArgs,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub task: TaskInput,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub task: TaskInput,
    /// Earlier version of the task; checks that the answer is unchanged.
    #[arg(long)]
    pub before: Option<PathBuf>,
    /// Constant the task should pin, e.g. `C@{Berliner_FC_Dynamo}`; checks consistency.
    #[arg(long)]
    pub constant: Option<String>,
    /// Uniqueness check used with --constant.
    #[arg(long, value_enum, default_value_t = ModeArg::Strict)]
    pub mode: ModeArg,
    /// Largest answer accepted by the degeneracy check.
    #[arg(long, default_value_t = kpforge_core::validate::DEFAULT_CARDINALITY_CAP)]
    pub cap: usize,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Number of tasks to attempt.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub shape: SeedShape,
    #[command(flatten)]
    pub expansion: ExpansionArgs,
    /// Worker threads; the output does not depend on this.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Leave solver trajectories out of the records.
    #[arg(long)]
    pub no_trajectory: bool,
    /// Write the generated/kept/dropped summary to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Number of seeds to expand under each strategy.
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    /// Number of expansion rounds.
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[command(flatten)]
    pub shape: SeedShape,
    /// Leave per-run metrics out of the report.
    #[arg(long)]
    pub brief: bool,
    #[command(flatten)]
    pub out: OutArg,
}

#[derive(Debug, Args)]
pub struct TaskOnlyArgs {
    #[command(flatten)]
    pub task: TaskInput,
    #[command(flatten)]
    pub out: OutArg,
}
