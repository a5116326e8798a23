mod args;

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use kpforge_core::expander::{expand_task, DeterministicKb, ExpanderBackend, ExpansionConfig};
use kpforge_core::lang::{parse_task, parse_term, Syntax, TaskJson};
use kpforge_core::pipeline::{
    compare_strategies, generate_seed, render, run_synthesis, solve, write_atomically, write_jsonl, SeedSpec,
    SynthesisSpec,
};
use kpforge_core::validate::{check_consistency, check_degeneracy, check_preservation, check_triviality, Verdict};
use kpforge_core::{evaluate, FormalTask, Format, GraphBuilder, KnowledgeGraph, TaskGraph};
use serde::Serialize;

use args::{Cli, Command, ExpansionArgs, GraphArgs, OutArg, OutputFormat, SeedShape, TaskInput};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(1)
        }
    }
}

/// The error and its causes, skipping causes whose text is already included.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg = format!("{msg}: {text}");
        }
    }
    msg
}

/// Runs one subcommand. `Ok(false)` means the command completed but a check failed.
fn run(cli: &Cli) -> Result<bool> {
    let fmt = cli.format;
    refuse_overwriting_inputs(&cli.command)?;
    match &cli.command {
        Command::Ingest(a) => {
            let g = load_graph(&a.graph)?;
            #[derive(Serialize)]
            struct Stats {
                entities: usize,
                relations: usize,
                triples: usize,
                typed_entities: usize,
            }
            let stats = Stats {
                entities: g.num_entities(),
                relations: g.relations().len(),
                triples: g.num_triples(),
                typed_entities: g.entity_types().len(),
            };
            match &a.out.out {
                Some(path) => {
                    write_atomically(path, |w| w.write_all(g.to_tsv().as_bytes()))
                        .with_context(|| format!("writing {}", path.display()))?;
                    eprintln!("wrote {} triples to {}", stats.triples, path.display());
                }
                None => emit_value(fmt, &stats, None, || {
                    format!(
                        "entities\t{}\nrelations\t{}\ntriples\t{}\ntyped_entities\t{}\n",
                        stats.entities, stats.relations, stats.triples, stats.typed_entities
                    )
                })?,
            }
            Ok(true)
        }
        Command::Seed(a) => {
            let g = load_graph(&a.graph)?;
            let spec = seed_spec(&a.shape, a.seed.seed);
            let t = generate_seed(&g, &spec)?;
            emit_task(fmt, &t, &a.out)?;
            Ok(true)
        }
        Command::Expand(a) => {
            let g = load_graph(&a.graph)?;
            let t = read_task(&a.task)?;
            let cfg = expansion_config(&a.expansion, a.seed.seed);
            let out = with_backend(&g, a.expansion.remote, |b| Ok(expand_task(&g, &t, b, &cfg)?))?;
            let applied = out.records.iter().filter(|r| r.applied()).count();
            eprintln!("{} of {} rounds completed, {applied} expansions applied", out.rounds_completed, cfg.layers);
            #[derive(Serialize)]
            struct Expanded<'a> {
                task: TaskJson,
                rounds_completed: usize,
                records: &'a [kpforge_core::expander::ExpansionRecord],
                decorations: &'a [kpforge_core::expander::DecorationEvent],
            }
            let body = Expanded {
                task: TaskJson::from_task(&out.task),
                rounds_completed: out.rounds_completed,
                records: &out.records,
                decorations: &out.decorations,
            };
            emit_value(fmt, &body, a.out.out.as_deref(), || format!("{}\n", out.task))?;
            Ok(true)
        }
        Command::Eval(a) => {
            let g = load_graph(&a.graph)?;
            let t = read_task(&a.task)?;
            let binding = evaluate(&g, &t)?;
            let answer = binding.get(t.target()).cloned().unwrap_or_default();
            #[derive(Serialize)]
            struct Evaluated<'a> {
                answer: &'a kpforge_core::EntitySet,
                bindings: std::collections::BTreeMap<String, &'a kpforge_core::EntitySet>,
            }
            let body = Evaluated {
                answer: &answer,
                bindings: binding.iter().map(|(v, s)| (v.to_string(), s)).collect(),
            };
            emit_value(fmt, &body, a.out.out.as_deref(), || {
                answer.iter().map(|e| format!("{}\n", e.as_str())).collect()
            })?;
            if let Some(expected) = t.expected_answer() {
                if expected != &answer {
                    eprintln!("answer differs from the one stored with the task");
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Command::Validate(a) => {
            let g = load_graph(&a.graph)?;
            let t = read_task(&a.task)?;
            let mut verdicts = vec![check_degeneracy(&g, &t, a.cap), check_triviality(&g, &t)];
            if let Some(before) = &a.before {
                let before = read_task_file(before)?;
                verdicts.push(check_preservation(&g, &before, &t));
            }
            if let Some(c) = &a.constant {
                let term = parse_term(c, Syntax::Dsl).with_context(|| format!("parsing constant {c:?}"))?;
                let Some(c) = term.as_constant() else { bail!("{c:?} is not a constant") };
                verdicts.push(check_consistency(&g, &t, c, a.mode.into()));
            }
            emit_value(fmt, &verdicts, a.out.out.as_deref(), || verdict_lines(&verdicts))?;
            Ok(verdicts.iter().all(|v| v.passed))
        }
        Command::Solve(a) => {
            let g = load_graph(&a.graph)?;
            let t = read_task(&a.task)?;
            let tr = solve(&g, &t, "task")?;
            emit_value(fmt, &tr, a.out.out.as_deref(), || {
                let mut s = String::new();
                for (i, step) in tr.steps.iter().enumerate() {
                    s.push_str(&format!("{}\t{}\t{}\n", i + 1, step.thought, serde_json::to_string(&step.action).unwrap_or_default()));
                }
                let names: Vec<&str> = tr.final_answer.iter().map(|e| e.as_str()).collect();
                s.push_str(&format!("answer\t{}\n", names.join(", ")));
                s
            })?;
            Ok(tr.verdicts.correct && tr.verdicts.clean)
        }
        Command::Synth(a) => {
            if a.expansion.remote {
                bail!("synth uses the local graph backend; --remote is only supported by expand");
            }
            let g = load_graph(&a.graph)?;
            let spec = SynthesisSpec {
                seed: seed_spec(&a.shape, a.seed.seed),
                expansion: expansion_config(&a.expansion, a.seed.seed),
                n_tasks: a.n,
                rng_seed: a.seed.seed,
                attach_trajectory: !a.no_trajectory,
            };
            let out = run_synthesis(&g, &spec, a.jobs.max(1))?;
            match &a.out.out {
                Some(path) => write_atomically(path, |w| write_jsonl(w, &out.records))
                    .with_context(|| format!("writing {}", path.display()))?,
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    write_jsonl(&mut lock, &out.records)?;
                    lock.flush()?;
                }
            }
            let summary = serde_json::to_string_pretty(&out.summary)?;
            match &a.summary {
                Some(path) => write_atomically(path, |w| writeln!(w, "{summary}"))
                    .with_context(|| format!("writing {}", path.display()))?,
                None if fmt == OutputFormat::Json => eprintln!("{summary}"),
                None => {
                    eprintln!("generated {}, kept {}", out.summary.generated, out.summary.kept);
                    for (reason, n) in &out.summary.dropped {
                        eprintln!("dropped {n}: {reason:?}");
                    }
                }
            }
            Ok(true)
        }
        Command::Compare(a) => {
            let g = load_graph(&a.graph)?;
            let base = ExpansionConfig { layers: a.layers, rng_seed: a.seed.seed, ..Default::default() };
            let mut report = compare_strategies(&g, &seed_spec(&a.shape, a.seed.seed), &base, a.n)?;
            if a.brief {
                for s in &mut report.strategies {
                    s.records.clear();
                }
            }
            emit_value(fmt, &report, a.out.out.as_deref(), || {
                let mut s = format!(
                    "layers {}, seeds {}/{}\nstrategy\truns\tcc_edges\tshortcuts\tmean_cc\tmean_shortcuts\n",
                    report.layers, report.seeds_generated, report.seeds_requested
                );
                for r in &report.strategies {
                    s.push_str(&format!(
                        "{}\t{}\t{}\t{}\t{:.3}\t{:.3}\n",
                        r.strategy,
                        r.runs,
                        r.total_constant_constant_edges,
                        r.total_shortcut_count,
                        r.mean_constant_constant_edges,
                        r.mean_shortcut_count
                    ));
                }
                s
            })?;
            if !report.layerwise_clean() {
                eprintln!("layer-wise expansion produced redundant edges or shortcuts");
                return Ok(false);
            }
            Ok(true)
        }
        Command::Render(a) => {
            let t = read_task(&a.task)?;
            let q = render(&t);
            emit_value(fmt, &serde_json::json!({ "question": q }), a.out.out.as_deref(), || format!("{q}\n"))?;
            Ok(true)
        }
        Command::ExportDot(a) => {
            let t = read_task(&a.task)?;
            let dot = TaskGraph::build(&t)?.to_dot();
            emit_text(&dot, a.out.out.as_deref())?;
            Ok(true)
        }
    }
}

fn refuse_overwriting_inputs(command: &Command) -> Result<()> {
    let (inputs, outputs) = command.paths();
    let same = |a: &Path, b: &Path| match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    };
    for out in &outputs {
        if let Some(input) = inputs.iter().find(|i| same(i, out)) {
            bail!("refusing to overwrite input file {}", input.display());
        }
    }
    Ok(())
}

fn load_graph(a: &GraphArgs) -> Result<KnowledgeGraph> {
    let mut b = GraphBuilder::new();
    for path in &a.graph {
        b.read_file(path, Format::from_path(path)).with_context(|| format!("reading graph {}", path.display()))?;
    }
    if let Some(types) = &a.types {
        b.read_types_file(types).with_context(|| format!("reading types {}", types.display()))?;
    }
    Ok(b.build())
}

fn read_task(input: &TaskInput) -> Result<FormalTask> {
    match (&input.task, &input.dsl) {
        (Some(path), _) => read_task_file(path),
        (None, Some(text)) => parse_task(text).context("parsing --dsl"),
        (None, None) => bail!("one of --task or --dsl is required"),
    }
}

/// Reads a task file; JSON if the first non-blank character is `{`, DSL otherwise.
fn read_task_file(path: &Path) -> Result<FormalTask> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str::<FormalTask>(&text).map_err(anyhow::Error::from)
    } else {
        parse_task(&text).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("parsing task {}", path.display()))
}

fn seed_spec(shape: &SeedShape, seed: u64) -> SeedSpec {
    SeedSpec {
        walk_steps: shape.walk_steps,
        target_pick: shape.target_pick.into(),
        constraint_count: (shape.min_constraints, shape.max_constraints),
        rng_seed: seed,
    }
}

fn expansion_config(a: &ExpansionArgs, seed: u64) -> ExpansionConfig {
    ExpansionConfig {
        strategy: a.strategy.into(),
        layers: a.layers,
        facts_per_subquestion: (a.min_facts, a.max_facts),
        uniqueness: a.mode.into(),
        rng_seed: seed,
        expand_sets: a.expand_sets,
        redundancy_probability: a.redundancy,
    }
}

fn with_backend<T>(
    g: &KnowledgeGraph,
    remote: bool,
    f: impl FnOnce(&dyn ExpanderBackend) -> Result<T>,
) -> Result<T> {
    if remote {
        let env = kpforge_core::expander::remote::MODEL_URL_ENV;
        let Some(model) = kpforge_core::expander::remote::RemoteModel::from_env(g) else {
            bail!("--remote needs ${env} to point at a model endpoint");
        };
        f(&model)
    } else {
        f(&DeterministicKb::new(g))
    }
}

fn verdict_lines(verdicts: &[Verdict]) -> String {
    verdicts
        .iter()
        .map(|v| format!("{}\t{:?}\t{}\n", if v.passed { "PASS" } else { "FAIL" }, v.check, v.detail))
        .collect()
}

fn emit_task(fmt: OutputFormat, t: &FormalTask, out: &OutArg) -> Result<()> {
    emit_value(fmt, &TaskJson::from_task(t), out.out.as_deref(), || format!("{t}\n"))
}

fn emit_value<T: Serialize>(fmt: OutputFormat, value: &T, out: Option<&Path>, text: impl FnOnce() -> String) -> Result<()> {
    let body = match fmt {
        OutputFormat::Json => format!("{}\n", serde_json::to_string_pretty(value)?),
        OutputFormat::Text => text(),
    };
    emit_text(&body, out)
}

fn emit_text(body: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            write_atomically(path, |w| w.write_all(body.as_bytes())).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}
