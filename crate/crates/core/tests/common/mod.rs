//! Brute-force oracles shared by integration tests.
#![allow(dead_code)]

use motifwalk::molgraph::{BondOrder, MolecularGraph};

/// Whether `a` and `b` stay connected once bond `skip` is removed.
fn connected_without(m: &MolecularGraph, skip: usize, a: usize, b: usize) -> bool {
    let mut seen = vec![false; m.num_atoms()];
    let mut stack = vec![a];
    seen[a] = true;
    while let Some(x) = stack.pop() {
        if x == b {
            return true;
        }
        for (i, bond) in m.bonds().iter().enumerate() {
            if i == skip || (bond.a != x && bond.b != x) {
                continue;
            }
            let y = bond.other(x);
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    false
}

/// Independent scan of every bond against the two cut conditions.
pub fn brute_force_cuts(m: &MolecularGraph) -> Vec<(usize, usize)> {
    let cyclic: Vec<bool> = m.bonds().iter().enumerate().map(|(i, b)| connected_without(m, i, b.a, b.b)).collect();
    let in_ring = |x: usize| m.bonds().iter().enumerate().any(|(i, b)| cyclic[i] && (b.a == x || b.b == x));
    let mut out = Vec::new();
    for (i, b) in m.bonds().iter().enumerate() {
        if cyclic[i] || b.order != BondOrder::Single {
            continue;
        }
        let two_rings = in_ring(b.a) && in_ring(b.b);
        let ring_and_branch = (in_ring(b.a) && !in_ring(b.b) && m.degree(b.b) > 1)
            || (in_ring(b.b) && !in_ring(b.a) && m.degree(b.a) > 1);
        if two_rings || ring_and_branch {
            out.push((b.a.min(b.b), b.a.max(b.b)));
        }
    }
    out.sort_unstable();
    out
}

/// Every induced label- and bond-preserving injection of `pattern` into
/// `target`, found by enumerating all injections. Sorted.
pub fn brute_force_embeddings(target: &MolecularGraph, pattern: &MolecularGraph) -> Vec<Vec<usize>> {
    fn rec(p: &MolecularGraph, t: &MolecularGraph, f: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if f.len() == p.num_atoms() {
            let n = f.len();
            let ok = (0..n).all(|i| p.atom(i).label() == t.atom(f[i]).label())
                && (0..n).all(|i| (0..n).all(|j| i == j || p.bond_between(i, j) == t.bond_between(f[i], f[j])));
            if ok {
                out.push(f.clone());
            }
            return;
        }
        for x in 0..t.num_atoms() {
            if !used[x] {
                used[x] = true;
                f.push(x);
                rec(p, t, f, used, out);
                f.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(pattern, target, &mut Vec::new(), &mut vec![false; target.num_atoms()], &mut out);
    out.sort();
    out
}
