use std::collections::{BTreeSet, VecDeque};

use super::{canonical_order, MolecularGraph};

/// Per bond, whether removing it disconnects its endpoints.
pub fn bridges(g: &MolecularGraph) -> Vec<bool> {
    let n = g.num_atoms();
    let mut is_bridge = vec![false; g.num_bonds()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (atom, bond used to reach it, next incident position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&(v, via, pos)) = stack.last() {
            if let Some(&(w, bi)) = g.incident(v).get(pos) {
                stack.last_mut().expect("non-empty").2 += 1;
                if bi == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, bi, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Per bond, whether it lies on a cycle.
pub fn ring_bonds(g: &MolecularGraph) -> Vec<bool> {
    bridges(g).into_iter().map(|b| !b).collect()
}

/// Per atom, whether it lies on a cycle.
pub fn ring_atoms(g: &MolecularGraph) -> Vec<bool> {
    let mut out = vec![false; g.num_atoms()];
    for (bond, on_ring) in g.bonds().iter().zip(ring_bonds(g)) {
        if on_ring {
            out[bond.a] = true;
            out[bond.b] = true;
        }
    }
    out
}

/// Shortest path from `from` to `to` that does not use bond `skip`.
fn shortest_path_avoiding(g: &MolecularGraph, from: usize, to: usize, skip: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; g.num_atoms()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            return Some(path);
        }
        let mut next: Vec<(usize, usize)> = g.incident(v).to_vec();
        next.sort_unstable();
        for (w, bi) in next {
            if bi != skip && prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    None
}

/// The smallest cycle through every ring bond, deduplicated. Each ring is a
/// sorted atom list; rings are ordered by size, then atoms.
pub fn smallest_rings(g: &MolecularGraph) -> Vec<Vec<usize>> {
    let mut set = BTreeSet::new();
    for (bi, on_ring) in ring_bonds(g).into_iter().enumerate() {
        if !on_ring {
            continue;
        }
        let bond = g.bonds()[bi];
        if let Some(mut ring) = shortest_path_avoiding(g, bond.a, bond.b, bi) {
            ring.sort_unstable();
            set.insert((ring.len(), ring));
        }
    }
    set.into_iter().map(|(_, r)| r).collect()
}

/// Smallest ring from [`smallest_rings`] that contains every atom of `atoms`.
/// Ties go to the ring whose sorted canonical ranks are smallest, so the
/// choice does not depend on input numbering.
pub fn smallest_ring_containing(g: &MolecularGraph, atoms: &[usize]) -> Option<Vec<usize>> {
    let candidates: Vec<Vec<usize>> =
        smallest_rings(g).into_iter().filter(|r| atoms.iter().all(|a| r.binary_search(a).is_ok())).collect();
    let best_len = candidates.iter().map(Vec::len).min()?;
    let order = canonical_order(g);
    let mut rank = vec![0; g.num_atoms()];
    for (k, &a) in order.iter().enumerate() {
        rank[a] = k;
    }
    candidates.into_iter().filter(|r| r.len() == best_len).min_by_key(|r| {
        let mut key: Vec<usize> = r.iter().map(|&a| rank[a]).collect();
        key.sort_unstable();
        key
    })
}
