use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{AttachBond, Motif, MotifEdge, MotifGraph};
use crate::error::WalkError;
use crate::fragment::Segmented;
use crate::isomorph::Matcher;
use crate::molgraph::{canonical_form, MolecularGraph};

/// One fragment of one molecule, expressed through its motif.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occurrence {
    pub motif: usize,
    /// Parent atom of every motif atom.
    pub atoms: Vec<usize>,
    /// `(neighbour fragment, red group index)`, sorted by neighbour.
    pub red_of: Vec<(usize, usize)>,
}

impl Occurrence {
    pub fn red_group_for(&self, neighbor: usize) -> Option<usize> {
        self.red_of.iter().find(|&&(n, _)| n == neighbor).map(|&(_, l)| l)
    }

    /// Motif atom standing for parent atom `atom`.
    pub fn local(&self, atom: usize) -> Option<usize> {
        self.atoms.iter().position(|&a| a == atom)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vocabulary {
    pub motifs: Vec<Motif>,
    /// Per molecule, per fragment.
    pub occurrences: Vec<Vec<Occurrence>>,
}

/// Fragment `j` plus its contexts as a motif candidate; returns the motif,
/// the parent atoms of its local atoms and the neighbour of each red group.
fn fragment_motif(seg: &Segmented, j: usize) -> (Motif, Vec<usize>, Vec<usize>) {
    let frag = &seg.fragmentation;
    let mut atoms = frag.fragments[j].atoms.clone();
    let contexts: Vec<_> = frag.contexts_of(j).collect();
    for c in &contexts {
        atoms.extend_from_slice(&c.atoms);
    }
    atoms.sort_unstable();
    atoms.dedup();
    let sub = seg.molecule.induced_subgraph(&atoms).expect("fragment atoms are valid");
    let red_groups = contexts
        .iter()
        .map(|c| {
            let mut g: Vec<usize> =
                c.atoms.iter().map(|a| atoms.binary_search(a).expect("context inside motif")).collect();
            g.sort_unstable();
            g
        })
        .collect();
    let neighbors = contexts.iter().map(|c| c.to).collect();
    (Motif { id: String::new(), graph: sub.graph, red_groups }, sub.mapping, neighbors)
}

/// Isomorphism `a -> b` that maps black atoms to black atoms and the red
/// family of `a` onto that of `b`. Returns the atom map and, per red group
/// of `a`, the matching red group of `b`.
pub(crate) fn attributed_isomorphism(a: &Motif, b: &Motif) -> Option<(Vec<usize>, Vec<usize>)> {
    if a.graph.num_atoms() != b.graph.num_atoms()
        || a.graph.num_bonds() != b.graph.num_bonds()
        || a.red_groups.len() != b.red_groups.len()
    {
        return None;
    }
    let matcher =
        Matcher::new(&a.graph, &b.graph).cap(usize::MAX).atom_predicate(|p, t| a.is_black(p) == b.is_black(t));
    for f in matcher.iter() {
        let mut used = vec![false; b.red_groups.len()];
        let mut assignment = Vec::with_capacity(a.red_groups.len());
        for group in &a.red_groups {
            let mut image: Vec<usize> = group.iter().map(|&x| f.get(x)).collect();
            image.sort_unstable();
            match (0..b.red_groups.len()).find(|&l| !used[l] && b.red_groups[l] == image) {
                Some(l) => {
                    used[l] = true;
                    assignment.push(l);
                }
                None => break,
            }
        }
        if assignment.len() == a.red_groups.len() {
            return Some((f.0, assignment));
        }
    }
    None
}

type DedupeKey = (String, usize, Vec<usize>);

fn dedupe_key(m: &Motif) -> DedupeKey {
    let mut sizes: Vec<usize> = m.red_groups.iter().map(Vec::len).collect();
    sizes.sort_unstable();
    (canonical_form(&m.graph), m.black_atoms().len(), sizes)
}

/// Collapses fragments whose motif candidates are isomorphic as attributed
/// graphs. Motif ids are `G0, G1, ...` in first-seen order.
pub fn dedupe_motifs(segmented: &[Segmented]) -> Vocabulary {
    let mut vocab = Vocabulary::default();
    let mut buckets: HashMap<DedupeKey, Vec<usize>> = HashMap::new();
    for seg in segmented {
        let mut occ = Vec::with_capacity(seg.fragmentation.fragments.len());
        for j in 0..seg.fragmentation.fragments.len() {
            let (cand, parent, neighbors) = fragment_motif(seg, j);
            let key = dedupe_key(&cand);
            let bucket = buckets.entry(key).or_default();
            let found = bucket.iter().find_map(|&k| attributed_isomorphism(&cand, &vocab.motifs[k]).map(|r| (k, r)));
            let occurrence = match found {
                Some((k, (f, groups))) => matched_occurrence(k, &f, groups, &parent, &neighbors),
                None => {
                    let k = vocab.motifs.len();
                    bucket.push(k);
                    let mut red_of: Vec<(usize, usize)> = neighbors.iter().copied().zip(0..).collect();
                    red_of.sort_unstable();
                    vocab.motifs.push(Motif { id: format!("G{k}"), ..cand });
                    Occurrence { motif: k, atoms: parent, red_of }
                }
            };
            occ.push(occurrence);
        }
        vocab.occurrences.push(occ);
    }
    vocab
}

fn matched_occurrence(k: usize, f: &[usize], groups: Vec<usize>, parent: &[usize], neighbors: &[usize]) -> Occurrence {
    let mut atoms = vec![0; parent.len()];
    for (local, &image) in f.iter().enumerate() {
        atoms[image] = parent[local];
    }
    let mut red_of: Vec<(usize, usize)> = neighbors.iter().copied().zip(groups).collect();
    red_of.sort_unstable();
    Occurrence { motif: k, atoms, red_of }
}

/// Expresses every fragment of every molecule through an existing motif
/// vocabulary. A molecule fails if one of its fragments has no motif.
pub fn locate_occurrences(motifs: &[Motif], segmented: &[Segmented]) -> Vec<Result<Vec<Occurrence>, WalkError>> {
    let mut buckets: HashMap<DedupeKey, Vec<usize>> = HashMap::new();
    for (k, m) in motifs.iter().enumerate() {
        buckets.entry(dedupe_key(m)).or_default().push(k);
    }
    segmented
        .par_iter()
        .map(|seg| {
            (0..seg.fragmentation.fragments.len())
                .map(|j| {
                    let (cand, parent, neighbors) = fragment_motif(seg, j);
                    buckets
                        .get(&dedupe_key(&cand))
                        .into_iter()
                        .flatten()
                        .find_map(|&k| attributed_isomorphism(&cand, &motifs[k]).map(|r| (k, r)))
                        .map(|(k, (f, groups))| matched_occurrence(k, &f, groups, &parent, &neighbors))
                        .ok_or(WalkError::NoMotif { fragment: j })
                })
                .collect()
        })
        .collect()
}

/// Distinct image sets of `pattern` inside `target`, restricted to `within`.
fn image_sets(pattern: &MolecularGraph, target: &MolecularGraph, within: &[usize]) -> (Vec<Vec<usize>>, bool) {
    let found = Matcher::new(pattern, target).within(within).collect();
    let mut sets: Vec<Vec<usize>> = found
        .maps
        .into_iter()
        .map(|m| {
            let mut s = m.0;
            s.sort_unstable();
            s
        })
        .collect();
    sets.sort();
    sets.dedup();
    (sets, found.truncated)
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = [a, b].concat();
    out.sort_unstable();
    out.dedup();
    out
}

/// Bonds created by attaching `v` through red group `l2`, given `psi` as
/// `(u atom, v atom)` pairs.
fn attach_bonds(v: &Motif, l2: usize, psi: &[(usize, usize)]) -> Vec<AttachBond> {
    let red = &v.red_groups[l2];
    let inverse: HashMap<usize, usize> = psi.iter().map(|&(x, y)| (y, x)).collect();
    let mut out: Vec<AttachBond> = v
        .graph
        .bonds()
        .iter()
        .filter_map(|b| {
            let (x, y) = if red.binary_search(&b.b).is_ok() { (b.a, b.b) } else { (b.b, b.a) };
            (v.is_black(x) && red.binary_search(&y).is_ok()).then(|| (x, inverse[&y], b.order))
        })
        .collect();
    out.sort_unstable();
    out
}

/// All role-preserving isomorphisms from `u[red l1 ∪ b1]` onto
/// `v[b2 ∪ red l2]`, as `(u atom, v atom)` pairs.
fn joint_isomorphisms(
    u: &Motif,
    v: &Motif,
    r1: &[usize],
    b1: &[usize],
    b2: &[usize],
    r2: &[usize],
) -> (Vec<Vec<(usize, usize)>>, bool) {
    let left = u.graph.induced_subgraph(&union(r1, b1)).expect("motif atoms are valid");
    let right = union(b2, r2);
    let in_r1: Vec<bool> = left.mapping.iter().map(|a| r1.binary_search(a).is_ok()).collect();
    let found = Matcher::new(&left.graph, &v.graph)
        .within(&right)
        .atom_predicate(|p, t| in_r1[p] == b2.binary_search(&t).is_ok())
        .collect();
    let maps = found.maps.into_iter().map(|m| left.mapping.iter().copied().zip(m.0).collect::<Vec<_>>()).collect();
    (maps, found.truncated)
}

/// Certified edges `u -> v` between two motifs (both may be the same).
/// The flag reports that some enumeration hit its cap.
pub fn match_motif_pair(motifs: &[Motif], u: usize, v: usize) -> (Vec<MotifEdge>, bool) {
    let (mu, mv) = (&motifs[u], &motifs[v]);
    let (u_black, v_black) = (mu.black_atoms(), mv.black_atoms());
    let mut truncated = false;
    let mut edges = Vec::new();
    for (l1, r1) in mu.red_groups.iter().enumerate() {
        let p1 = mu.graph.induced_subgraph(r1).expect("red atoms are valid").graph;
        let (b2_all, t) = image_sets(&p1, &mv.graph, &v_black);
        truncated |= t;
        for (l2, r2) in mv.red_groups.iter().enumerate() {
            let p2 = mv.graph.induced_subgraph(r2).expect("red atoms are valid").graph;
            let (b1_all, t) = image_sets(&p2, &mu.graph, &u_black);
            truncated |= t;
            let conn_b1: Vec<&Vec<usize>> =
                b1_all.iter().filter(|b1| mu.graph.is_connected_subset(&union(r1, b1))).collect();
            let conn_b2: Vec<&Vec<usize>> =
                b2_all.iter().filter(|b2| mv.graph.is_connected_subset(&union(b2, r2))).collect();
            for b1 in &conn_b1 {
                for b2 in &conn_b2 {
                    let (psis, t) = joint_isomorphisms(mu, mv, r1, b1, b2, r2);
                    truncated |= t;
                    let mut by_key: BTreeMap<Vec<AttachBond>, Vec<(usize, usize)>> = BTreeMap::new();
                    for psi in psis {
                        by_key.entry(attach_bonds(mv, l2, &psi)).or_insert(psi);
                    }
                    for (attach, map) in by_key {
                        edges.push(MotifEdge { u, v, l1, l2, b1: (*b1).clone(), b2: (*b2).clone(), attach, map });
                    }
                }
            }
        }
    }
    edges.sort_by(|a, b| a.key().cmp(&b.key()));
    (edges, truncated)
}

/// Matches every ordered pair of motifs, self-pairs included.
pub fn build_motif_graph(motifs: Vec<Motif>) -> MotifGraph {
    let n = motifs.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).collect();
    let results: Vec<(Vec<MotifEdge>, bool)> =
        pairs.par_iter().map(|&(u, v)| match_motif_pair(&motifs, u, v)).collect();
    let incomplete = results.iter().any(|(_, t)| *t);
    let edges: Vec<MotifEdge> = results.into_iter().flat_map(|(e, _)| e).collect();
    MotifGraph { duplicates: vec![0; n], motifs, edges, incomplete }
}

fn is_subset_of_black(m: &Motif, atoms: &[usize]) -> bool {
    atoms.windows(2).all(|w| w[0] < w[1]) && atoms.iter().all(|&a| a < m.graph.num_atoms() && m.is_black(a))
}

/// Re-checks an edge against its motifs.
pub(crate) fn verify_edge(motifs: &[Motif], e: &MotifEdge) -> bool {
    let (Some(mu), Some(mv)) = (motifs.get(e.u), motifs.get(e.v)) else {
        return false;
    };
    let (Some(r1), Some(r2)) = (mu.red_groups.get(e.l1), mv.red_groups.get(e.l2)) else {
        return false;
    };
    if !is_subset_of_black(mu, &e.b1) || !is_subset_of_black(mv, &e.b2) {
        return false;
    }
    if e.b1.len() != r2.len() || e.b2.len() != r1.len() {
        return false;
    }
    let left = union(r1, &e.b1);
    if !mu.graph.is_connected_subset(&left) {
        return false;
    }
    let mut sources: Vec<usize> = e.map.iter().map(|p| p.0).collect();
    let mut targets: Vec<usize> = e.map.iter().map(|p| p.1).collect();
    sources.sort_unstable();
    targets.sort_unstable();
    if sources != left || targets != union(&e.b2, r2) {
        return false;
    }
    let roles_ok = e.map.iter().all(|&(x, y)| r1.binary_search(&x).is_ok() == e.b2.binary_search(&y).is_ok());
    let preserved = e.map.iter().enumerate().all(|(i, &(x, y))| {
        mu.graph.atom(x).label() == mv.graph.atom(y).label()
            && e.map[..i].iter().all(|&(x2, y2)| mu.graph.bond_between(x, x2) == mv.graph.bond_between(y, y2))
    });
    roles_ok && preserved && attach_bonds(mv, e.l2, &e.map) == e.attach
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out: Vec<Vec<usize>> = subsets(&items[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    out.extend(subsets(&items[1..], k));
    out
}

/// Exhaustive reference: every `(l1, l2, b1, b2, attach)` for which some
/// role-preserving bijection satisfies all certificate conditions. Only
/// practical for small motifs.
/// Edge identity without endpoints: `(l1, l2, b1, b2, attach)`.
pub type Certificate = (usize, usize, Vec<usize>, Vec<usize>, Vec<AttachBond>);

pub fn enumerate_certificates(u: &Motif, v: &Motif) -> Vec<Certificate> {
    let (u_black, v_black) = (u.black_atoms(), v.black_atoms());
    let mut out = Vec::new();
    for (l1, r1) in u.red_groups.iter().enumerate() {
        for (l2, r2) in v.red_groups.iter().enumerate() {
            for b1 in subsets(&u_black, r2.len()) {
                let left = union(r1, &b1);
                if !u.graph.is_connected_subset(&left) {
                    continue;
                }
                for b2 in subsets(&v_black, r1.len()) {
                    let mut keys = Vec::new();
                    for img_r1 in permutations(&b2) {
                        for img_b1 in permutations(r2) {
                            let psi: Vec<(usize, usize)> = r1
                                .iter()
                                .copied()
                                .zip(img_r1.iter().copied())
                                .chain(b1.iter().copied().zip(img_b1.iter().copied()))
                                .collect();
                            let edge = MotifEdge {
                                u: 0,
                                v: 1,
                                l1,
                                l2,
                                b1: b1.clone(),
                                b2: b2.clone(),
                                attach: attach_bonds(v, l2, &psi),
                                map: psi,
                            };
                            if verify_edge(&[u.clone(), v.clone()], &edge) {
                                keys.push(edge.attach);
                            }
                        }
                    }
                    keys.sort();
                    keys.dedup();
                    out.extend(keys.into_iter().map(|k| (l1, l2, b1.clone(), b2.clone(), k)));
                }
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn motif(smiles: &str, red: Vec<Vec<usize>>) -> Motif {
        Motif { id: String::new(), graph: parse_smiles(smiles).unwrap(), red_groups: red }
    }

    fn keys(edges: &[MotifEdge]) -> Vec<Certificate> {
        let mut k: Vec<_> = edges.iter().map(|e| (e.l1, e.l2, e.b1.clone(), e.b2.clone(), e.attach.clone())).collect();
        k.sort();
        k
    }

    #[test]
    fn carbon_chain_self_edge() {
        // Black C with one red C neighbour.
        let m = motif("CC", vec![vec![1]]);
        let (edges, truncated) = match_motif_pair(std::slice::from_ref(&m), 0, 0);
        assert!(!truncated);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].b1, vec![0]);
        assert_eq!(edges[0].b2, vec![0]);
        assert!(verify_edge(&[m], &edges[0]));
    }

    #[test]
    fn incompatible_elements_have_no_edges() {
        let ring = motif("C1CCCCC1", vec![vec![0]]);
        let chain = motif("OOO", vec![vec![2]]);
        let motifs = [ring.clone(), chain.clone()];
        assert!(match_motif_pair(&motifs, 0, 1).0.is_empty());
        assert!(match_motif_pair(&motifs, 1, 0).0.is_empty());
        assert!(enumerate_certificates(&ring, &chain).is_empty());
        assert!(enumerate_certificates(&chain, &ring).is_empty());
    }

    #[test]
    fn builder_matches_exhaustive_oracle() {
        let motifs = vec![
            motif("CCO", vec![vec![2]]),
            motif("OCC", vec![vec![1, 2]]),
            motif("c1ccccc1C", vec![vec![6]]),
            motif("CC(C)C", vec![vec![0], vec![3]]),
            motif("CC=O", vec![vec![0]]),
        ];
        for u in 0..motifs.len() {
            for v in 0..motifs.len() {
                let (edges, _) = match_motif_pair(&motifs, u, v);
                assert_eq!(keys(&edges), enumerate_certificates(&motifs[u], &motifs[v]), "{u}->{v}");
                for e in &edges {
                    assert!(verify_edge(&motifs, e));
                }
            }
        }
    }

    #[test]
    fn ring_automorphisms_collapse() {
        // Ring core with a red methyl carbon; methyl core with a red ring.
        let ring = motif("Cc1ccccc1", vec![vec![0]]);
        let methyl = motif("Cc1ccccc1", vec![vec![1, 2, 3, 4, 5, 6]]);
        let (edges, _) = match_motif_pair(&[ring, methyl], 0, 1);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].b1, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(edges[0].b2, vec![0]);
        assert_eq!(edges[0].attach, vec![(0, 1, crate::molgraph::BondOrder::Single)]);
    }

    #[test]
    fn dedupe_collapses_identical_fragments() {
        use crate::fragment::{break_bonds, infer_context, RuleKind, Segmented};
        let m = parse_smiles("s1cccc1-c1cccs1").unwrap();
        let f = infer_context(break_bonds(&m, &[(4, 5)]).unwrap(), &m, RuleKind::Hopv).unwrap();
        let seg = Segmented { molecule_id: "t".into(), molecule: m, fragmentation: f };
        let vocab = dedupe_motifs(&[seg]);
        assert_eq!(vocab.motifs.len(), 1);
        assert_eq!(vocab.motifs[0].id, "G0");
        assert_eq!(vocab.occurrences[0].len(), 2);
        assert_eq!(vocab.occurrences[0][1].motif, 0);
    }

    #[test]
    fn dedupe_separates_different_red_groups() {
        let a = motif("CCO", vec![vec![2]]);
        let b = motif("CCO", vec![vec![0]]);
        assert!(attributed_isomorphism(&a, &b).is_none());
        let c = motif("OCC", vec![vec![0]]);
        assert!(attributed_isomorphism(&a, &c).is_some());
    }
}
