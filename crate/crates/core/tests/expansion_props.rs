use kpforge_core::expander::{expand_task, DeterministicKb, ExpansionConfig, Strategy};
use kpforge_core::pipeline::{generate_seed, SeedSpec};
use kpforge_core::synthetic::{random_graph, GraphSpec};
use kpforge_core::validate::Check;
use kpforge_core::{answer, evaluate, KnowledgeGraph, TaskGraph};

fn graph() -> KnowledgeGraph {
    random_graph(GraphSpec::sized(3000), 42)
}

#[test]
fn every_strategy_preserves_answers() {
    let g = graph();
    let kb = DeterministicKb::new(&g);
    let mut applied = 0;
    for seed in 0..100u64 {
        let t = generate_seed(&g, &SeedSpec::default().with_seed(seed)).unwrap();
        for strategy in Strategy::ALL {
            let cfg = ExpansionConfig { strategy, layers: 3, rng_seed: seed, ..Default::default() };
            let out = expand_task(&g, &t, &kb, &cfg).unwrap();
            assert_eq!(answer(&g, &out.task).unwrap(), answer(&g, &t).unwrap(), "{strategy} seed {seed}");
            for r in out.records.iter().filter(|r| r.succeeded) {
                applied += 1;
                assert!(r.trace_well_formed());
                assert!(r.verdicts.iter().all(|v| v.passed));
                assert!(r.verdicts.iter().any(|v| v.check == Check::AnswerPreservation));
                let sub = r.sub_question.as_ref().unwrap();
                let pinned = evaluate(&g, sub).unwrap();
                let expected: kpforge_core::EntitySet = r.constant.iter().cloned().collect();
                assert_eq!(pinned.get(sub.target()).unwrap(), &expected);
            }
        }
    }
    assert!(applied > 300, "only {applied} expansions applied");
}

#[test]
fn layerwise_rounds_keep_structure_clean() {
    let g = graph();
    let kb = DeterministicKb::new(&g);
    for seed in 0..100u64 {
        let t = generate_seed(&g, &SeedSpec::default().with_seed(seed)).unwrap();
        let d0 = TaskGraph::build(&t).unwrap().metrics().min_constant_depth;
        for layers in 1..=3 {
            let cfg = ExpansionConfig { layers, rng_seed: seed, ..Default::default() };
            let out = expand_task(&g, &t, &kb, &cfg).unwrap();
            let m = TaskGraph::build(&out.task).unwrap().metrics();
            assert_eq!(m.constant_constant_edges, 0);
            assert_eq!(m.shortcut_count, 0);
            assert_eq!(m.min_constant_depth, d0 + out.rounds_completed, "seed {seed}, {layers} layers");
        }
    }
}

#[test]
fn fewer_layers_is_a_prefix() {
    let g = graph();
    let kb = DeterministicKb::new(&g);
    for seed in 0..20u64 {
        let t = generate_seed(&g, &SeedSpec::default().with_seed(seed)).unwrap();
        for strategy in Strategy::ALL {
            let three = expand_task(&g, &t, &kb, &ExpansionConfig { strategy, layers: 3, rng_seed: seed, ..Default::default() }).unwrap();
            let two = expand_task(&g, &t, &kb, &ExpansionConfig { strategy, layers: 2, rng_seed: seed, ..Default::default() }).unwrap();
            assert!(three.records.starts_with(&two.records[..]) || two.records.len() > three.records.len());
        }
    }
}

#[test]
fn expansion_is_deterministic() {
    let g = graph();
    let kb = DeterministicKb::new(&g);
    for seed in 0..20u64 {
        let t = generate_seed(&g, &SeedSpec::default().with_seed(seed)).unwrap();
        for strategy in Strategy::ALL {
            let cfg = ExpansionConfig { strategy, layers: 3, rng_seed: seed, ..Default::default() };
            let a = expand_task(&g, &t, &kb, &cfg).unwrap();
            let b = expand_task(&g, &t, &kb, &cfg).unwrap();
            assert_eq!(a.task.to_string(), b.task.to_string());
            assert_eq!(serde_json::to_string(&a.records).unwrap(), serde_json::to_string(&b.records).unwrap());
        }
    }
}

#[test]
fn other_strategies_show_their_pathologies() {
    let g = graph();
    let kb = DeterministicKb::new(&g);
    let (mut shortcuts, mut redundant) = (0, 0);
    for seed in 0..30u64 {
        let t = generate_seed(&g, &SeedSpec::default().with_seed(seed)).unwrap();
        let seq = expand_task(&g, &t, &kb, &ExpansionConfig { strategy: Strategy::Sequential, layers: 3, rng_seed: seed, ..Default::default() }).unwrap();
        shortcuts += TaskGraph::build(&seq.task).unwrap().metrics().shortcut_count;
        let rnd = expand_task(&g, &t, &kb, &ExpansionConfig { strategy: Strategy::Random, layers: 3, rng_seed: seed, ..Default::default() }).unwrap();
        redundant += TaskGraph::build(&rnd.task).unwrap().metrics().constant_constant_edges;
    }
    assert!(shortcuts > 0);
    assert!(redundant > 0);
}
