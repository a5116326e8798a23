use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::seed::{generate_seed, SeedSpec};
use super::synth::SynthesisError;
use crate::expander::{derive_seed, expand_task, DeterministicKb, ExpansionConfig, Strategy};
use crate::store::KnowledgeGraph;
use crate::taskgraph::{StructureMetrics, TaskGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed_index: usize,
    pub rounds_completed: usize,
    pub metrics: StructureMetrics,
    /// Depth of every constant node.
    pub constant_depths: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub strategy: Strategy,
    pub runs: usize,
    pub mean_constant_constant_edges: f64,
    pub mean_shortcut_count: f64,
    /// Number of constant nodes at each depth, over all runs.
    pub depth_histogram: BTreeMap<usize, usize>,
    pub total_constant_constant_edges: usize,
    pub total_shortcut_count: usize,
    pub records: Vec<RunMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub layers: usize,
    pub seeds_requested: usize,
    pub seeds_generated: usize,
    pub strategies: Vec<StrategyReport>,
}

impl ComparisonReport {
    pub fn strategy(&self, s: Strategy) -> Option<&StrategyReport> {
        self.strategies.iter().find(|r| r.strategy == s)
    }

    /// Layer-wise runs have neither redundant edges nor shortcuts.
    pub fn layerwise_clean(&self) -> bool {
        self.strategy(Strategy::LayerWise)
            .map_or(true, |r| r.total_constant_constant_edges == 0 && r.total_shortcut_count == 0)
    }
}

fn summarize(strategy: Strategy, records: Vec<RunMetrics>) -> StrategyReport {
    let runs = records.len();
    let total_cc: usize = records.iter().map(|r| r.metrics.constant_constant_edges).sum();
    let total_sc: usize = records.iter().map(|r| r.metrics.shortcut_count).sum();
    let mut depth_histogram = BTreeMap::new();
    for d in records.iter().flat_map(|r| &r.constant_depths) {
        *depth_histogram.entry(*d).or_default() += 1;
    }
    let mean = |total: usize| if runs == 0 { 0.0 } else { total as f64 / runs as f64 };
    StrategyReport {
        strategy,
        runs,
        mean_constant_constant_edges: mean(total_cc),
        mean_shortcut_count: mean(total_sc),
        depth_histogram,
        total_constant_constant_edges: total_cc,
        total_shortcut_count: total_sc,
        records,
    }
}

/// Expands the same `n` seeds under every strategy at depth `layers` and
/// reports structure metrics. Seeds that cannot be generated are skipped.
pub fn compare_strategies(
    g: &KnowledgeGraph,
    seed_spec: &SeedSpec,
    base: &ExpansionConfig,
    n: usize,
) -> Result<ComparisonReport, SynthesisError> {
    seed_spec.validate()?;
    base.validate()?;
    let backend = DeterministicKb::new(g);
    let seeds: Vec<(usize, _)> = (0..n)
        .filter_map(|i| {
            generate_seed(g, &seed_spec.with_seed(derive_seed(seed_spec.rng_seed, i as u64, 1))).ok().map(|t| (i, t))
        })
        .collect();
    let mut strategies = Vec::new();
    for strategy in Strategy::ALL {
        let mut records = Vec::with_capacity(seeds.len());
        for (i, seed) in &seeds {
            let cfg = ExpansionConfig { strategy, rng_seed: derive_seed(base.rng_seed, *i as u64, 2), ..base.clone() };
            let outcome = expand_task(g, seed, &backend, &cfg)?;
            let graph = TaskGraph::build(&outcome.task).map_err(crate::expander::ExpandError::from)?;
            let constant_depths = graph
                .nodes()
                .iter()
                .enumerate()
                .filter(|(_, node)| node.is_constant())
                .map(|(idx, _)| graph.depth(idx))
                .collect();
            records.push(RunMetrics {
                seed_index: *i,
                rounds_completed: outcome.rounds_completed,
                metrics: graph.metrics(),
                constant_depths,
            });
        }
        strategies.push(summarize(strategy, records));
    }
    Ok(ComparisonReport { layers: base.layers, seeds_requested: n, seeds_generated: seeds.len(), strategies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::football;

    #[test]
    fn empty_report() {
        let r = compare_strategies(&football(), &SeedSpec::default(), &ExpansionConfig::default(), 0).unwrap();
        assert_eq!(r.seeds_generated, 0);
        assert!(r.strategies.iter().all(|s| s.runs == 0 && s.depth_histogram.is_empty()));
        assert!(r.layerwise_clean());
    }

    #[test]
    fn totals_match_records() {
        let cfg = ExpansionConfig { layers: 3, ..Default::default() };
        let r = compare_strategies(&football(), &SeedSpec::default(), &cfg, 10).unwrap();
        assert!(r.layerwise_clean());
        for s in &r.strategies {
            let cc: usize = s.records.iter().map(|x| x.metrics.constant_constant_edges).sum();
            assert_eq!(cc, s.total_constant_constant_edges);
            let depths: usize = s.records.iter().map(|x| x.constant_depths.len()).sum();
            assert_eq!(depths, s.depth_histogram.values().sum::<usize>());
        }
    }
}
