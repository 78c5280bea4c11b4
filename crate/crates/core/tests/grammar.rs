use motifwalk::fixtures::{block_corpus, toy_annotations};
use motifwalk::fragment::{heuristic_segment, Segmented};
use motifwalk::grammar::*;
use motifwalk::isomorph::has_substruct_match;
use motifwalk::molgraph::write_smiles;
use motifwalk::motifgraph::MotifGraph;
use motifwalk::pipeline::build;
use motifwalk::walks::{dfs_walk, WalkDag};

fn corpus() -> (MotifGraph, Vec<WalkDag>) {
    let mut segs: Vec<Segmented> = toy_annotations().iter().map(|a| a.resolve().unwrap()).collect();
    for (i, m) in block_corpus(6, 5, 3).iter().enumerate() {
        segs.push(heuristic_segment(&format!("b{i}"), m).unwrap());
    }
    let built = build(&segs);
    let walks = built.walks.into_iter().map(Result::unwrap).collect();
    (built.graph, walks)
}

#[test]
fn training_halves_the_loss_under_both_strategies() {
    let (g, walks) = corpus();
    for strategy in [Strategy::Forcing, Strategy::Split] {
        for update in [UpdateMode::Step, UpdateMode::Trajectory] {
            let r = train(&g, &walks, &TrainConfig { strategy, update, ..Default::default() }).unwrap();
            let (first, last) = (r.epoch_loss[0], *r.epoch_loss.last().unwrap());
            assert!(last < 0.5 * first, "{strategy:?} {update:?}: {first} -> {last}");
        }
    }
}

#[test]
fn training_is_deterministic() {
    let (g, walks) = corpus();
    let cfg = TrainConfig { epochs: 5, seed: 9, ..Default::default() };
    let a = train(&g, &walks, &cfg).unwrap();
    let b = train(&g, &walks, &cfg).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.epoch_loss, b.epoch_loss);
}

#[test]
fn generation_is_valid_and_deterministic() {
    let (g, walks) = corpus();
    let params = train(&g, &walks, &TrainConfig { epochs: 20, ..Default::default() }).unwrap().params;
    for seed in 0..30 {
        let cfg = GenerateConfig { seed, ..Default::default() };
        let a = generate(&params, &g, &cfg).unwrap();
        assert!(a.valid, "seed {seed}");
        assert_eq!(a, generate(&params, &g, &cfg).unwrap());
        let smiles = write_smiles(&a.molecule).unwrap();
        assert!(!smiles.is_empty());
        for (_, p) in &a.moves {
            assert!((0.0..=1.0 + 1e-12).contains(p));
        }
    }
}

#[test]
fn start_motif_is_contained() {
    let (g, walks) = corpus();
    let params = train(&g, &walks, &TrainConfig { epochs: 10, ..Default::default() }).unwrap().params;
    let id = g.motifs[0].id.clone();
    let pattern = g.motifs[0].black_graph().graph;
    for seed in 0..20 {
        let gen =
            generate(&params, &g, &GenerateConfig { seed, start: Some(id.clone()), ..Default::default() }).unwrap();
        assert!(has_substruct_match(&gen.molecule, &pattern));
    }
}

#[test]
fn loop_back_closes_or_fails_cleanly() {
    let (g, walks) = corpus();
    let params = train(&g, &walks, &TrainConfig { epochs: 10, ..Default::default() }).unwrap().params;
    for seed in 0..20 {
        let gen = generate(&params, &g, &GenerateConfig { seed, loop_back: true, ..Default::default() }).unwrap();
        if gen.moves.last().is_some_and(|m| m.0 == Move::Close) {
            assert!(gen.valid);
        }
    }
}

#[test]
fn training_walks_replay_with_probabilities() {
    let (g, walks) = corpus();
    let params = train(&g, &walks, &TrainConfig { epochs: 10, ..Default::default() }).unwrap().params;
    for w in &walks {
        let repr = walk_probabilities(&params, &g, w).unwrap();
        assert_eq!(repr.nodes.len(), dfs_walk(w).len());
        assert_eq!(repr.probabilities.len(), repr.nodes.len() - 1);
        assert!(repr.probabilities.iter().all(|p| (0.0..=1.0 + 1e-12).contains(p)));
    }
}

#[test]
fn hard_rules_replay_and_round_trip() {
    let (g, walks) = corpus();
    let params = train(&g, &walks, &TrainConfig::default()).unwrap().params;
    let rules = extract_hard_rules(&params, &g, &RuleConfig::default()).unwrap();
    assert!(!rules.is_empty());
    for rule in &rules {
        let p = replay_rule(&params, &g, rule).unwrap_or_else(|e| panic!("{} => {}: {e}", rule.lhs, rule.rhs));
        assert!((p - 1.0).abs() <= 1e-9);
        let dag = motifwalk::walks::parse_walk(&g, &rule.lhs).unwrap();
        assert_eq!(motifwalk::walks::print_walk(&g, &dag), rule.lhs);
        let line = serde_json::to_string(rule).unwrap();
        assert_eq!(&serde_json::from_str::<HardRule>(&line).unwrap(), rule);
    }
}

#[test]
fn params_round_trip_through_json() {
    let (g, walks) = corpus();
    let params = train(&g, &walks, &TrainConfig { epochs: 2, ..Default::default() }).unwrap().params;
    let text = serde_json::to_string(&params).unwrap();
    assert!(text.contains("\"W_adj\""));
    let back: GrammarParams = serde_json::from_str(&text).unwrap();
    assert_eq!(back, params);
    back.check_graph(&g).unwrap();
    let mut wrong = back.clone();
    wrong.b.pop();
    assert!(matches!(wrong.check_graph(&g), Err(motifwalk::error::GrammarError::Dimension { .. })));
}
