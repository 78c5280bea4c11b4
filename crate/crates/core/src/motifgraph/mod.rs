//! Motif vocabulary and the directed multigraph of certified attachments.
//!
//! A motif is a molecular graph whose atoms split into black core atoms and
//! indexed red context groups. An edge `u -> v` with contexts `(l1, l2)`
//! records that `v` can attach to `u`: red group `l1` of `u` matches black
//! atoms `b2` of `v`, red group `l2` of `v` matches black atoms `b1` of `u`,
//! and a role-preserving isomorphism `psi` joins the two sides.

mod build;
mod io;

use serde::{Deserialize, Serialize};

use crate::molgraph::{BondOrder, MolecularGraph};

pub use build::{
    build_motif_graph, dedupe_motifs, enumerate_certificates, locate_occurrences, match_motif_pair, Certificate,
    Occurrence, Vocabulary,
};
pub use io::{load_motif_graph, save_motif_graph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Motif {
    pub id: String,
    pub graph: MolecularGraph,
    /// Local atom indices, each group sorted.
    pub red_groups: Vec<Vec<usize>>,
}

impl Motif {
    /// Union of all red groups, sorted.
    pub fn red_atoms(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.red_groups.iter().flatten().copied().collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Atoms outside every red group, sorted.
    pub fn black_atoms(&self) -> Vec<usize> {
        let red = self.red_atoms();
        (0..self.graph.num_atoms()).filter(|a| red.binary_search(a).is_err()).collect()
    }

    pub fn is_black(&self, atom: usize) -> bool {
        !self.red_groups.iter().any(|g| g.binary_search(&atom).is_ok())
    }

    /// Graph of the black atoms only, with their parent indices.
    pub fn black_graph(&self) -> crate::molgraph::Subgraph {
        self.graph.induced_subgraph(&self.black_atoms()).expect("black atoms are valid")
    }
}

/// Attachment bond created when `v` attaches to `u`: a black atom of `v`,
/// the black atom of `u` it bonds to, and the bond order.
pub type AttachBond = (usize, usize, BondOrder);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotifEdge {
    pub u: usize,
    pub v: usize,
    pub l1: usize,
    pub l2: usize,
    /// Black atoms of `u` matching red group `l2` of `v`, sorted.
    pub b1: Vec<usize>,
    /// Black atoms of `v` matching red group `l1` of `u`, sorted.
    pub b2: Vec<usize>,
    /// Bonds formed by the attachment, sorted.
    pub attach: Vec<AttachBond>,
    /// Witness `psi` as `(u atom, v atom)` pairs over `red l1 of u ∪ b1`.
    pub map: Vec<(usize, usize)>,
}

impl MotifEdge {
    /// Identity used for deduplication and ordering.
    pub fn key(&self) -> EdgeKey<'_> {
        (self.u, self.v, self.l1, self.l2, &self.b1, &self.b2, &self.attach)
    }
}

pub type EdgeKey<'a> = (usize, usize, usize, usize, &'a [usize], &'a [usize], &'a [AttachBond]);

/// A node of the augmented graph: a base motif and a copy number (0 = base).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MotifRef {
    pub base: usize,
    pub copy: usize,
}

impl MotifRef {
    pub fn base(base: usize) -> Self {
        MotifRef { base, copy: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotifGraph {
    pub motifs: Vec<Motif>,
    /// Sorted by [`MotifEdge::key`].
    pub edges: Vec<MotifEdge>,
    /// Number of duplicates per base motif.
    pub duplicates: Vec<usize>,
    /// Some isomorphism enumeration hit its cap.
    pub incomplete: bool,
}

impl MotifGraph {
    pub fn num_motifs(&self) -> usize {
        self.motifs.len()
    }

    /// Nodes of the augmented graph: bases first, then duplicates grouped by base.
    pub fn num_nodes(&self) -> usize {
        self.motifs.len() + self.duplicates.iter().sum::<usize>()
    }

    pub fn node_index(&self, r: MotifRef) -> Option<usize> {
        if r.base >= self.motifs.len() || r.copy > self.duplicates[r.base] {
            return None;
        }
        if r.copy == 0 {
            return Some(r.base);
        }
        Some(self.motifs.len() + self.duplicates[..r.base].iter().sum::<usize>() + r.copy - 1)
    }

    pub fn node_ref(&self, index: usize) -> MotifRef {
        if index < self.motifs.len() {
            return MotifRef::base(index);
        }
        let mut rest = index - self.motifs.len();
        for (base, &k) in self.duplicates.iter().enumerate() {
            if rest < k {
                return MotifRef { base, copy: rest + 1 };
            }
            rest -= k;
        }
        panic!("node index {index} out of range")
    }

    pub fn node_name(&self, r: MotifRef) -> String {
        let id = &self.motifs[r.base].id;
        if r.copy == 0 {
            id.clone()
        } else {
            format!("{id}:{}", r.copy)
        }
    }

    pub fn motif_index(&self, id: &str) -> Option<usize> {
        self.motifs.iter().position(|m| m.id == id)
    }

    /// Edges `u -> v` between base motifs.
    pub fn edges_between(&self, u: usize, v: usize) -> &[MotifEdge] {
        let lo = self.edges.partition_point(|e| (e.u, e.v) < (u, v));
        let hi = self.edges.partition_point(|e| (e.u, e.v) <= (u, v));
        &self.edges[lo..hi]
    }

    pub fn find_edge(&self, key: EdgeKey<'_>) -> Option<usize> {
        self.edges.binary_search_by(|e| e.key().cmp(&key)).ok()
    }

    /// Distinct out-neighbours of every augmented node, sorted. Every copy of
    /// `u` connects to every copy of `v` whenever a base edge `u -> v` exists.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.motifs.len();
        let mut base_adj = vec![Vec::new(); n];
        for e in &self.edges {
            if base_adj[e.u].last() != Some(&e.v) {
                base_adj[e.u].push(e.v);
            }
        }
        (0..self.num_nodes())
            .map(|i| {
                let r = self.node_ref(i);
                let mut out: Vec<usize> = base_adj[r.base]
                    .iter()
                    .flat_map(|&v| (0..=self.duplicates[v]).map(move |c| MotifRef { base: v, copy: c }))
                    .map(|t| self.node_index(t).expect("copy exists"))
                    .collect();
                out.sort_unstable();
                out
            })
            .collect()
    }

    /// Number of edges leaving base motif `u` (counting parallel edges).
    pub fn out_edge_count(&self, u: usize) -> usize {
        self.edges.iter().filter(|e| e.u == u).count()
    }

    pub fn in_edge_count(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.v == v).count()
    }

    /// Adds duplicates so that base `v` has `max_counts[v] - 1` copies.
    /// Existing duplicates are never removed.
    pub fn augment(&mut self, max_counts: &[usize]) {
        for (v, &k) in max_counts.iter().enumerate().take(self.motifs.len()) {
            self.duplicates[v] = self.duplicates[v].max(k.saturating_sub(1));
        }
    }

    /// Re-checks every certificate condition for edge `index`.
    pub fn verify_edge(&self, index: usize) -> bool {
        build::verify_edge(&self.motifs, &self.edges[index])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn motif(smiles: &str, red: Vec<Vec<usize>>, id: &str) -> Motif {
        Motif { id: id.into(), graph: parse_smiles(smiles).unwrap(), red_groups: red }
    }

    #[test]
    fn node_indexing_round_trips() {
        let mut g = MotifGraph {
            motifs: vec![motif("CC", vec![vec![1]], "G0"), motif("CO", vec![vec![0]], "G1")],
            edges: Vec::new(),
            duplicates: vec![0, 0],
            incomplete: false,
        };
        g.augment(&[3, 2]);
        assert_eq!(g.duplicates, vec![2, 1]);
        assert_eq!(g.num_nodes(), 5);
        for i in 0..g.num_nodes() {
            assert_eq!(g.node_index(g.node_ref(i)), Some(i));
        }
        assert_eq!(g.node_name(MotifRef { base: 1, copy: 1 }), "G1:1");
        assert_eq!(g.node_index(MotifRef { base: 1, copy: 2 }), None);
    }

    #[test]
    fn black_and_red_atoms() {
        let m = motif("CCCO", vec![vec![0], vec![2, 3]], "G0");
        assert_eq!(m.red_atoms(), vec![0, 2, 3]);
        assert_eq!(m.black_atoms(), vec![1]);
        assert!(m.is_black(1));
        assert!(!m.is_black(3));
    }
}
