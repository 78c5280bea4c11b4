//! Molecules as rooted walk DAGs over the motif graph.

mod linearize;
mod notation;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::WalkError;
use crate::fragment::Segmented;
use crate::molgraph::BondOrder;
use crate::motifgraph::{MotifGraph, MotifRef, Occurrence};

pub use linearize::{augment_data, dfs_walk, euler_linearize, AugmentMode, DEFAULT_PERMUTATION_CAP};
pub use notation::{parse_walk, parse_walk_syntax, print_walk, WalkStep};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkNode {
    pub motif: MotifRef,
    pub main: bool,
    pub parent: Option<usize>,
    /// Motif-graph edge from the parent's motif to this one.
    pub edge: Option<usize>,
    /// Motif-graph edge from this motif back to the parent's.
    pub back_edge: Option<usize>,
    /// Ordered: side chains first, then the main continuation.
    pub children: Vec<usize>,
    /// Source fragment when extracted from a molecule.
    pub fragment: Option<usize>,
}

/// Rooted tree over motif instances; node 0 is the root and nodes are stored
/// in pre-order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkDag {
    pub nodes: Vec<WalkNode>,
}

impl WalkDag {
    pub fn root(&self) -> usize {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Uses per base motif.
    pub fn motif_counts(&self, num_motifs: usize) -> Vec<usize> {
        let mut counts = vec![0; num_motifs];
        for n in &self.nodes {
            counts[n.motif.base] += 1;
        }
        counts
    }

    /// Main-chain nodes from the root.
    pub fn main_chain(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = (!self.nodes.is_empty()).then_some(0);
        while let Some(c) = cur {
            out.push(c);
            cur = self.nodes[c].children.iter().copied().find(|&k| self.nodes[k].main);
        }
        out
    }

    fn sort_key(&self, i: usize) -> (bool, (usize, usize), usize) {
        let n = &self.nodes[i];
        (n.main, (n.motif.base, n.fragment.unwrap_or(usize::MAX)), i)
    }

    /// Sorts children by (main, motif, fragment) and renumbers nodes in
    /// pre-order; the k-th occurrence of a base motif becomes copy k.
    pub fn canonicalize(&mut self) {
        for i in 0..self.nodes.len() {
            let mut kids = std::mem::take(&mut self.nodes[i].children);
            kids.sort_by_key(|&k| self.sort_key(k));
            self.nodes[i].children = kids;
        }
        self.renumber();
    }

    /// Renumbers nodes in pre-order and reassigns copy numbers, keeping the
    /// child order.
    pub(crate) fn renumber(&mut self) {
        if self.nodes.is_empty() {
            return;
        }
        let root = (0..self.nodes.len()).find(|&i| self.nodes[i].parent.is_none()).unwrap_or(0);
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            order.push(x);
            stack.extend(self.nodes[x].children.iter().rev());
        }
        let mut new_index = vec![0; self.nodes.len()];
        for (k, &old) in order.iter().enumerate() {
            new_index[old] = k;
        }
        let mut seen = std::collections::HashMap::new();
        self.nodes = order
            .iter()
            .map(|&old| {
                let mut n = self.nodes[old].clone();
                n.parent = n.parent.map(|p| new_index[p]);
                n.children = n.children.iter().map(|&c| new_index[c]).collect();
                let copy = seen.entry(n.motif.base).or_insert(0usize);
                n.motif.copy = *copy;
                *copy += 1;
                n
            })
            .collect();
    }
}

/// Undirected graph of a molecule's fragments with the certified motif edges
/// realizing each cut.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentGraph {
    /// Base motif of each fragment.
    pub motifs: Vec<usize>,
    /// `(j1, j2, edge j1 -> j2, edge j2 -> j1)` with `j1 < j2`.
    pub edges: Vec<(usize, usize, usize, usize)>,
}

fn edge_between(g: &MotifGraph, seg: &Segmented, occ: &[Occurrence], j1: usize, j2: usize) -> Result<usize, WalkError> {
    let missing = WalkError::NoMatchingEdge { from: j1, to: j2 };
    let (ou, ov) = (&occ[j1], &occ[j2]);
    let l1 = ou.red_group_for(j2).ok_or(missing.clone())?;
    let l2 = ov.red_group_for(j1).ok_or(missing.clone())?;
    let frag = &seg.fragmentation;
    let local = |o: &Occurrence, atoms: &[usize]| -> Option<Vec<usize>> {
        let mut out: Vec<usize> = atoms.iter().map(|&a| o.local(a)).collect::<Option<_>>()?;
        out.sort_unstable();
        Some(out)
    };
    let b1 = frag.context(j2, j1).and_then(|c| local(ou, c)).ok_or(missing.clone())?;
    let b2 = frag.context(j1, j2).and_then(|c| local(ov, c)).ok_or(missing.clone())?;
    let mv = &g.motifs[ov.motif];
    let red = &mv.red_groups[l2];
    let mut attach: Vec<(usize, usize, BondOrder)> = Vec::new();
    for b in mv.graph.bonds() {
        for (x, y) in [(b.a, b.b), (b.b, b.a)] {
            if mv.is_black(x) && red.binary_search(&y).is_ok() {
                let u_atom = ou.local(ov.atoms[y]).ok_or(missing.clone())?;
                attach.push((x, u_atom, b.order));
            }
        }
    }
    attach.sort_unstable();
    g.find_edge((ou.motif, ov.motif, l1, l2, &b1, &b2, &attach)).ok_or(missing)
}

/// Resolves every cut of a segmented molecule to its motif-graph edges.
pub fn form_fragment_graph(
    g: &MotifGraph,
    seg: &Segmented,
    occurrences: &[Occurrence],
) -> Result<FragmentGraph, WalkError> {
    let edges = seg
        .fragmentation
        .adjacent_pairs()
        .into_iter()
        .map(|(j1, j2)| {
            Ok((j1, j2, edge_between(g, seg, occurrences, j1, j2)?, edge_between(g, seg, occurrences, j2, j1)?))
        })
        .collect::<Result<Vec<_>, WalkError>>()?;
    Ok(FragmentGraph { motifs: occurrences.iter().map(|o| o.motif).collect(), edges })
}

fn bfs_parents(adj: &[Vec<usize>], src: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    seen[src] = true;
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    parent
}

/// Canonical walk DAG of a fragment graph: the main chain is the longest
/// shortest path (ties to the lexicographically smallest sequence of
/// (motif, fragment) keys), rooted at its first node.
pub fn traverse_dag(fg: &FragmentGraph) -> Result<WalkDag, WalkError> {
    let n = fg.motifs.len();
    if n == 0 {
        return Err(WalkError::Disconnected);
    }
    let key = |j: usize| (fg.motifs[j], j);
    let mut edges = fg.edges.clone();
    let extra = (edges.len() + 1).saturating_sub(n);
    let build_adj = |edges: &[(usize, usize, usize, usize)]| {
        let mut adj = vec![Vec::new(); n];
        for &(a, b, _, _) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_by_key(|&j| key(j));
        }
        adj
    };
    let connected = |adj: &[Vec<usize>]| bfs_parents(adj, 0).iter().enumerate().all(|(j, p)| j == 0 || p.is_some());
    if !connected(&build_adj(&edges)) {
        return Err(WalkError::Disconnected);
    }
    if extra > 1 {
        return Err(WalkError::Cyclic { extra });
    }
    if extra == 1 {
        // Drop the cycle edge whose endpoint pair is largest.
        let drop = (0..edges.len())
            .filter(|&k| {
                let rest: Vec<_> = edges.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, e)| *e).collect();
                connected(&build_adj(&rest))
            })
            .max_by_key(|&k| {
                let (a, b) = (key(edges[k].0), key(edges[k].1));
                (a.max(b), a.min(b))
            })
            .expect("a cycle has removable edges");
        edges.remove(drop);
    }
    let adj = build_adj(&edges);
    let mut best: Option<Vec<usize>> = None;
    for src in 0..n {
        let parents = bfs_parents(&adj, src);
        for dest in 0..n {
            if dest != src && parents[dest].is_none() {
                continue;
            }
            let mut path = vec![dest];
            let mut cur = dest;
            while let Some(p) = parents[cur] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            let better = match &best {
                None => true,
                Some(b) => {
                    path.len() > b.len()
                        || (path.len() == b.len() && path.iter().map(|&j| key(j)).lt(b.iter().map(|&j| key(j))))
                }
            };
            if better {
                best = Some(path);
            }
        }
    }
    let main_path = best.expect("at least one node");
    let mut on_main = vec![false; n];
    for &j in &main_path {
        on_main[j] = true;
    }
    let src = main_path[0];
    let parents = bfs_parents(&adj, src);
    let lookup = |a: usize, b: usize| -> (usize, usize) {
        let &(x, _, fwd, back) = edges.iter().find(|e| (e.0, e.1) == (a.min(b), a.max(b))).expect("tree edge exists");
        if x == a {
            (fwd, back)
        } else {
            (back, fwd)
        }
    };
    let mut nodes: Vec<WalkNode> = (0..n)
        .map(|j| {
            let (edge, back_edge) = match parents[j] {
                Some(p) => {
                    let (e, b) = lookup(p, j);
                    (Some(e), Some(b))
                }
                None => (None, None),
            };
            WalkNode {
                motif: MotifRef::base(fg.motifs[j]),
                main: on_main[j],
                parent: parents[j],
                edge,
                back_edge,
                children: Vec::new(),
                fragment: Some(j),
            }
        })
        .collect();
    for (j, parent) in parents.iter().enumerate() {
        if let Some(p) = *parent {
            nodes[p].children.push(j);
        }
    }
    let mut dag = WalkDag { nodes };
    dag.canonicalize();
    Ok(dag)
}

/// Extracts the walk DAG of every molecule; failures are reported per
/// molecule.
pub fn extract_walks(
    g: &MotifGraph,
    segmented: &[Segmented],
    occurrences: &[Vec<Occurrence>],
) -> Vec<Result<WalkDag, WalkError>> {
    use rayon::prelude::*;
    segmented
        .par_iter()
        .zip(occurrences.par_iter())
        .map(|(seg, occ)| traverse_dag(&form_fragment_graph(g, seg, occ)?))
        .collect()
}

/// Largest per-walk count of every base motif.
pub fn max_motif_counts(dags: &[WalkDag], num_motifs: usize) -> Vec<usize> {
    let mut out = vec![0; num_motifs];
    for d in dags {
        for (o, c) in out.iter_mut().zip(d.motif_counts(num_motifs)) {
            *o = (*o).max(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fg(motifs: Vec<usize>, pairs: &[(usize, usize)]) -> FragmentGraph {
        FragmentGraph { motifs, edges: pairs.iter().map(|&(a, b)| (a, b, 0, 0)).collect() }
    }

    #[test]
    fn path_is_all_main() {
        let dag = traverse_dag(&fg(vec![0, 1, 2], &[(0, 1), (1, 2)])).unwrap();
        assert!(dag.nodes.iter().all(|n| n.main));
        assert_eq!(dag.nodes[0].motif.base, 0);
        assert_eq!(dag.main_chain(), vec![0, 1, 2]);
    }

    #[test]
    fn star_has_one_side_chain() {
        // Center 0 with leaves 1, 2, 3 (motifs 5, 6, 7, 8).
        let dag = traverse_dag(&fg(vec![5, 6, 7, 8], &[(0, 1), (0, 2), (0, 3)])).unwrap();
        // Diameter 1-0-2 is lexicographically smallest among length-3 paths.
        let names: Vec<usize> = dag.main_chain().iter().map(|&i| dag.nodes[i].motif.base).collect();
        assert_eq!(names, vec![6, 5, 7]);
        let center = &dag.nodes[1];
        assert_eq!(center.children.len(), 2);
        assert!(!dag.nodes[center.children[0]].main);
        assert_eq!(dag.nodes[center.children[0]].motif.base, 8);
    }

    #[test]
    fn tie_prefers_smaller_canonical_root() {
        let dag = traverse_dag(&fg(vec![3, 1], &[(0, 1)])).unwrap();
        assert_eq!(dag.nodes[0].motif.base, 1);
    }

    #[test]
    fn repeated_motifs_get_copies() {
        let dag = traverse_dag(&fg(vec![4, 4, 4], &[(0, 1), (1, 2)])).unwrap();
        let copies: Vec<usize> = dag.nodes.iter().map(|n| n.motif.copy).collect();
        assert_eq!(copies, vec![0, 1, 2]);
    }

    #[test]
    fn single_cycle_drops_one_edge() {
        let dag = traverse_dag(&fg(vec![0, 1, 2], &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert_eq!(dag.len(), 3);
        assert_eq!(dag.main_chain().len(), 3);
        let err = traverse_dag(&fg(vec![0, 1, 2, 3], &[(0, 1), (1, 2), (0, 2), (2, 3), (0, 3)])).unwrap_err();
        assert_eq!(err, WalkError::Cyclic { extra: 2 });
        assert_eq!(traverse_dag(&fg(vec![0, 1], &[])).unwrap_err(), WalkError::Disconnected);
    }
}
