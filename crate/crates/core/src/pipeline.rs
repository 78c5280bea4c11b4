//! End-to-end stages: segmented molecules to an augmented motif graph and
//! walk corpus.

use serde::{Deserialize, Serialize};

use crate::assembly::{Assembly, Check};
use crate::error::WalkError;
use crate::fragment::Segmented;
use crate::motifgraph::{build_motif_graph, dedupe_motifs, locate_occurrences, MotifGraph, Occurrence};
use crate::walks::{dfs_walk, extract_walks, form_fragment_graph, max_motif_counts, print_walk, traverse_dag, WalkDag};

/// Motif graph and walks of a segmented dataset.
#[derive(Debug, Clone)]
pub struct Built {
    pub graph: MotifGraph,
    /// Per molecule, per fragment.
    pub occurrences: Vec<Vec<Occurrence>>,
    /// Per molecule.
    pub walks: Vec<Result<WalkDag, WalkError>>,
}

/// Deduplicates motifs, builds the motif graph, extracts walks and adds the
/// duplicates the walks need.
pub fn build(segmented: &[Segmented]) -> Built {
    let vocab = dedupe_motifs(segmented);
    let mut graph = build_motif_graph(vocab.motifs);
    let walks = extract_walks(&graph, segmented, &vocab.occurrences);
    let ok: Vec<WalkDag> = walks.iter().filter_map(|w| w.as_ref().ok().cloned()).collect();
    graph.augment(&max_motif_counts(&ok, graph.num_motifs()));
    Built { graph, occurrences: vocab.occurrences, walks }
}

/// Walks of new molecules on an existing graph. Fragments must match motifs
/// of `g`; no duplicates are added.
pub fn extract_on(g: &MotifGraph, segmented: &[Segmented]) -> Vec<Result<WalkDag, WalkError>> {
    use rayon::prelude::*;
    locate_occurrences(&g.motifs, segmented)
        .into_par_iter()
        .zip(segmented.par_iter())
        .map(|(occ, seg)| traverse_dag(&form_fragment_graph(g, seg, &occ?)?))
        .collect()
}

/// Replays a walk in its open Euler order: each node is attached through its
/// edge when first visited. Unresolved edges take the first feasible one.
pub fn replay_walk(g: &MotifGraph, dag: &WalkDag) -> Result<Assembly, WalkError> {
    let order = dfs_walk(dag);
    let mut seen = vec![false; dag.len()];
    let mut sub = WalkDag { nodes: Vec::with_capacity(dag.len()) };
    let mut index = vec![usize::MAX; dag.len()];
    for &x in &order {
        if std::mem::replace(&mut seen[x], true) {
            continue;
        }
        let mut node = dag.nodes[x].clone();
        node.parent = node.parent.map(|p| index[p]);
        node.children.clear();
        index[x] = sub.nodes.len();
        sub.nodes.push(node);
    }
    crate::assembly::replay(g, &sub, Check::Capacity)
}

/// One line of a walk corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub molecule_id: String,
    pub smiles: String,
    pub walk: String,
    pub dag: WalkDag,
}

impl WalkRecord {
    pub fn new(g: &MotifGraph, seg: &Segmented, dag: WalkDag) -> Self {
        WalkRecord {
            molecule_id: seg.molecule_id.clone(),
            smiles: crate::molgraph::write_smiles(&seg.molecule).unwrap_or_default(),
            walk: print_walk(g, &dag),
            dag,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{block_corpus, expert_rows, toy_annotations};
    use crate::fragment::heuristic_segment;
    use crate::isomorph::are_isomorphic;

    fn round_trip(segmented: &[Segmented]) {
        let built = build(segmented);
        for (seg, w) in segmented.iter().zip(&built.walks) {
            let dag = w.as_ref().unwrap_or_else(|e| panic!("{}: {e}", seg.molecule_id));
            assert_eq!(dag.len(), seg.fragmentation.fragments.len());
            let asm = replay_walk(&built.graph, dag).unwrap_or_else(|e| panic!("{}: {e}", seg.molecule_id));
            assert!(are_isomorphic(&asm.molecule, &seg.molecule), "{}", seg.molecule_id);
        }
        for e in 0..built.graph.edges.len() {
            assert!(built.graph.verify_edge(e));
        }
    }

    #[test]
    fn expert_rows_round_trip() {
        let segs: Vec<Segmented> = expert_rows().iter().map(|a| a.resolve().unwrap()).collect();
        round_trip(&segs);
        let built = build(&segs);
        assert_eq!(built.walks[0].as_ref().unwrap().len(), 6);
    }

    #[test]
    fn toy_and_block_corpus_round_trip() {
        let mut segs: Vec<Segmented> = toy_annotations().iter().map(|a| a.resolve().unwrap()).collect();
        for (i, m) in block_corpus(60, 7, 11).iter().enumerate() {
            segs.push(heuristic_segment(&format!("block_{i}"), m).unwrap());
        }
        round_trip(&segs);
    }

    #[test]
    fn walks_on_an_existing_graph_match_the_build() {
        let mut segs: Vec<Segmented> = toy_annotations().iter().map(|a| a.resolve().unwrap()).collect();
        for (i, m) in block_corpus(20, 5, 4).iter().enumerate() {
            segs.push(heuristic_segment(&format!("block_{i}"), m).unwrap());
        }
        let built = build(&segs);
        assert_eq!(extract_on(&built.graph, &segs), built.walks);
        let stranger = heuristic_segment("x", &crate::molgraph::parse_smiles("C1CCNCC1CCCCCC").unwrap()).unwrap();
        assert!(matches!(extract_on(&built.graph, &[stranger])[0], Err(WalkError::NoMotif { .. })));
    }
}
