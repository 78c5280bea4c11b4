//! Generation metrics and the bag-of-motifs property predictor.

mod gbt;
mod metrics;

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::isomorph::has_substruct_match;
use crate::molgraph::{
    canonical_form, morgan_fingerprint, parse_smiles, validate_valence, Fingerprint, MolecularGraph,
};
use crate::motifgraph::MotifGraph;
use crate::walks::WalkDag;

pub use gbt::{Gbt, GbtConfig, Task};
pub use metrics::{
    accuracy, auc, evaluate_predictions, mae, r2, run_protocol, PredictionMetrics, ProtocolReport, SeedResult,
};

/// Fingerprint radius used throughout.
pub const FINGERPRINT_RADIUS: usize = 2;

/// Default membership patterns: thiophene and alkyl halides.
pub const DEFAULT_MEMBERSHIP: [&str; 3] = ["c1ccsc1", "ClC", "BrCC"];

/// A count and its share of the generated total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: usize,
    pub fraction: f64,
}

impl Rate {
    fn of(count: usize, total: usize) -> Self {
        Rate { count, fraction: count as f64 / total as f64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationReport {
    pub total: usize,
    pub valid: Rate,
    pub unique: Rate,
    pub novel: Rate,
    /// Mean pairwise `1 - Tanimoto`.
    pub diversity: f64,
    /// Retrosynthesis score; not computed.
    pub rs: Option<f64>,
    pub membership: Rate,
}

/// Parses membership patterns given as SMILES.
pub fn membership_patterns(smiles: &[impl AsRef<str>]) -> Result<Vec<MolecularGraph>, crate::error::MolError> {
    smiles.iter().map(|s| parse_smiles(s.as_ref())).collect()
}

/// Mean of `1 - Tanimoto` over unordered pairs; zero for fewer than two.
pub fn diversity(fps: &[Fingerprint]) -> f64 {
    let n = fps.len();
    if n < 2 {
        return 0.0;
    }
    let total: f64 =
        (0..n).into_par_iter().map(|i| fps[i + 1..].iter().map(|b| 1.0 - fps[i].tanimoto(b)).sum::<f64>()).sum();
    total / (n * (n - 1) / 2) as f64
}

/// Scores generated molecules against the training set.
pub fn evaluate_generations(
    generated: &[MolecularGraph],
    training: &[MolecularGraph],
    patterns: &[MolecularGraph],
) -> Result<GenerationReport, EvalError> {
    let total = generated.len();
    if total == 0 {
        return Err(EvalError::Empty);
    }
    let canon: Vec<String> = generated.par_iter().map(canonical_form).collect();
    let known: HashSet<String> = training.par_iter().map(canonical_form).collect();
    let valid = generated.par_iter().filter(|m| validate_valence(m).is_empty()).count();
    let unique = canon.iter().collect::<HashSet<_>>().len();
    let novel = canon.iter().filter(|c| !known.contains(*c)).count();
    let member = generated.par_iter().filter(|m| patterns.iter().any(|p| has_substruct_match(m, p))).count();
    let fps: Vec<Fingerprint> = generated.par_iter().map(|m| morgan_fingerprint(m, FINGERPRINT_RADIUS)).collect();
    Ok(GenerationReport {
        total,
        valid: Rate::of(valid, total),
        unique: Rate::of(unique, total),
        novel: Rate::of(novel, total),
        diversity: diversity(&fps),
        rs: None,
        membership: Rate::of(member, total),
    })
}

/// Motif occurrence counts of a walk plus the molecule fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct MotifFeatures {
    /// Per base motif; duplicates count toward their base.
    pub counts: Vec<f64>,
    pub fp: Fingerprint,
}

impl MotifFeatures {
    /// `[counts | fingerprint bits]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.counts.clone();
        v.extend(self.fp.to_features());
        v
    }
}

pub fn bag_of_motifs(dag: &WalkDag, m: &MolecularGraph, g: &MotifGraph) -> MotifFeatures {
    MotifFeatures {
        counts: dag.motif_counts(g.num_motifs()).into_iter().map(|c| c as f64).collect(),
        fp: morgan_fingerprint(m, FINGERPRINT_RADIUS),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motifgraph::{Motif, MotifRef};
    use crate::walks::WalkNode;

    fn mols(smiles: &[&str]) -> Vec<MolecularGraph> {
        smiles.iter().map(|s| parse_smiles(s).unwrap()).collect()
    }

    #[test]
    fn replayed_training_set_is_not_novel() {
        let train = mols(&["CCO", "c1ccccc1", "CC(=O)O"]);
        let r = evaluate_generations(&train, &train, &[]).unwrap();
        assert_eq!(r.novel.count, 0);
        assert_eq!(r.valid.fraction, 1.0);
        assert_eq!(r.unique.count, 3);
        // Different SMILES of the same molecule are not novel either.
        let r = evaluate_generations(&mols(&["OCC"]), &train, &[]).unwrap();
        assert_eq!(r.novel.count, 0);
    }

    #[test]
    fn copies_have_no_diversity() {
        let gen = mols(&["c1ccsc1C"; 5]);
        let r = evaluate_generations(&gen, &[], &[]).unwrap();
        assert_eq!(r.unique.fraction, 1.0 / 5.0);
        assert_eq!(r.diversity, 0.0);
        assert_eq!(r.novel.count, 5);
        assert!(evaluate_generations(&[], &[], &[]).is_err());
    }

    #[test]
    fn diversity_bounds_and_duplicates() {
        let gen = mols(&["CCO", "c1ccccc1", "CC(=O)O", "ClCCBr"]);
        let fps: Vec<Fingerprint> = gen.iter().map(|m| morgan_fingerprint(m, 2)).collect();
        let d = diversity(&fps);
        assert!((0.0..=1.0).contains(&d) && d > 0.0);
        let mut more = fps.clone();
        more.push(fps[0].clone());
        assert!(diversity(&more) <= d);
        for a in &fps {
            assert_eq!(a.tanimoto(a), 1.0);
            for b in &fps {
                assert_eq!(a.tanimoto(b), b.tanimoto(a));
            }
        }
    }

    #[test]
    fn membership_uses_substructures() {
        let patterns = membership_patterns(&["c1ccsc1"]).unwrap();
        let r = evaluate_generations(&mols(&["Cc1ccsc1", "CCO"]), &[], &patterns).unwrap();
        assert_eq!(r.membership, Rate { count: 1, fraction: 0.5 });
        let halides = membership_patterns(&DEFAULT_MEMBERSHIP).unwrap();
        let r = evaluate_generations(&mols(&["CCCl", "CCBr", "CC"]), &[], &halides).unwrap();
        assert_eq!(r.membership.count, 2);
    }

    #[test]
    fn report_serializes_rs_as_null() {
        let r = evaluate_generations(&mols(&["CC"]), &[], &[]).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert!(v["rs"].is_null());
    }

    #[test]
    fn motif_counts_merge_duplicates() {
        let motif = |id: &str| Motif { id: id.into(), graph: parse_smiles("CC").unwrap(), red_groups: vec![vec![1]] };
        let g = MotifGraph {
            motifs: vec![motif("G1"), motif("G2")],
            edges: Vec::new(),
            duplicates: vec![1, 0],
            incomplete: false,
        };
        let node = |base, copy, parent: Option<usize>, children: Vec<usize>| WalkNode {
            motif: MotifRef { base, copy },
            main: true,
            parent,
            edge: None,
            back_edge: None,
            children,
            fragment: None,
        };
        let dag = WalkDag {
            nodes: vec![node(0, 0, None, vec![1]), node(1, 0, Some(0), vec![2]), node(0, 1, Some(1), vec![])],
        };
        let m = parse_smiles("CCCC").unwrap();
        let f = bag_of_motifs(&dag, &m, &g);
        assert_eq!(f.counts, vec![2.0, 1.0]);
        assert_eq!(f.to_vec().len(), 2 + crate::molgraph::FINGERPRINT_BITS);
    }
}
