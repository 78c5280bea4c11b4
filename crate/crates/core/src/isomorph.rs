//! Induced subgraph isomorphism over molecular graphs.
//!
//! Atoms match on element and aromatic flag, bonds on exact order. Every
//! embedding is node-induced: pattern non-bonds must map to target non-bonds.

use serde::{Deserialize, Serialize};

use crate::molgraph::MolecularGraph;

pub const DEFAULT_MATCH_CAP: usize = 10_000;

/// Injective map from pattern atoms to target atoms: `map[p] = t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AtomMap(pub Vec<usize>);

impl AtomMap {
    pub fn identity(n: usize) -> Self {
        AtomMap((0..n).collect())
    }

    pub fn get(&self, pattern_atom: usize) -> usize {
        self.0[pattern_atom]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `outer ∘ self`: maps `p` to `outer[self[p]]`.
    pub fn then(&self, outer: &AtomMap) -> AtomMap {
        AtomMap(self.0.iter().map(|&t| outer.0[t]).collect())
    }

    /// Checks label, bond and non-bond preservation.
    pub fn verify(&self, pattern: &MolecularGraph, target: &MolecularGraph) -> bool {
        let m = &self.0;
        if m.len() != pattern.num_atoms() || m.iter().any(|&t| t >= target.num_atoms()) {
            return false;
        }
        let mut seen = vec![false; target.num_atoms()];
        for &t in m {
            if std::mem::replace(&mut seen[t], true) {
                return false;
            }
        }
        (0..m.len()).all(|i| {
            pattern.atom(i).label() == target.atom(m[i]).label()
                && (0..i).all(|j| pattern.bond_between(i, j) == target.bond_between(m[i], m[j]))
        })
    }
}

/// Result of a capped enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matches {
    /// Sorted lexicographically by mapped target indices.
    pub maps: Vec<AtomMap>,
    /// The cap was reached; further matches may exist.
    pub truncated: bool,
}

type AtomPredicate<'a> = Box<dyn Fn(usize, usize) -> bool + Send + Sync + 'a>;

/// Configurable matcher between a pattern and a target.
pub struct Matcher<'a> {
    pattern: &'a MolecularGraph,
    target: &'a MolecularGraph,
    allowed: Option<Vec<bool>>,
    predicate: Option<AtomPredicate<'a>>,
    cap: usize,
}

impl<'a> Matcher<'a> {
    pub fn new(pattern: &'a MolecularGraph, target: &'a MolecularGraph) -> Self {
        Matcher { pattern, target, allowed: None, predicate: None, cap: DEFAULT_MATCH_CAP }
    }

    /// Restricts images to the given target atoms.
    pub fn within(mut self, atoms: &[usize]) -> Self {
        let mut allowed = vec![false; self.target.num_atoms()];
        for &a in atoms {
            if a < allowed.len() {
                allowed[a] = true;
            }
        }
        self.allowed = Some(allowed);
        self
    }

    /// Extra atom compatibility test `(pattern atom, target atom)`.
    pub fn atom_predicate(mut self, f: impl Fn(usize, usize) -> bool + Send + Sync + 'a) -> Self {
        self.predicate = Some(Box::new(f));
        self
    }

    pub fn cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    /// Lazy stream in search order.
    pub fn iter(self) -> Embeddings<'a> {
        Embeddings::new(self)
    }

    /// All matches up to the cap, sorted.
    pub fn collect(self) -> Matches {
        let cap = self.cap;
        let mut it = Embeddings::new(self);
        let mut maps: Vec<AtomMap> = it.by_ref().take(cap).collect();
        let truncated = maps.len() == cap && it.next().is_some();
        maps.sort();
        Matches { maps, truncated }
    }

    pub fn first(self) -> Option<AtomMap> {
        Embeddings::new(self).next()
    }
}

/// Depth-first embedding enumerator with an explicit stack.
pub struct Embeddings<'a> {
    m: Matcher<'a>,
    /// Pattern atoms in matching order.
    order: Vec<usize>,
    /// For each depth, an earlier-matched neighbour whose image bounds the candidates.
    anchor: Vec<Option<usize>>,
    map: Vec<usize>,
    used: Vec<bool>,
    /// (candidates, next position, current assignment) per depth.
    stack: Vec<(Vec<usize>, usize, Option<usize>)>,
    started: bool,
}

impl<'a> Embeddings<'a> {
    fn new(m: Matcher<'a>) -> Self {
        let (p, t) = (m.pattern, m.target);
        let freq: Vec<usize> = (0..p.num_atoms())
            .map(|i| {
                (0..t.num_atoms())
                    .filter(|&j| t.atom(j).label() == p.atom(i).label() && t.degree(j) >= p.degree(i))
                    .count()
            })
            .collect();
        let n = p.num_atoms();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut anchor = Vec::with_capacity(n);
        let mut links = vec![0usize; n];
        for _ in 0..n {
            // Most links to placed atoms, then rarest class, then highest degree.
            let next = (0..n)
                .filter(|&i| !placed[i])
                .min_by_key(|&i| (std::cmp::Reverse(links[i]), freq[i], std::cmp::Reverse(p.degree(i)), i))
                .expect("unplaced atom remains");
            anchor.push(order.iter().copied().find(|&q| p.bond_between(next, q).is_some()));
            placed[next] = true;
            order.push(next);
            for nb in p.neighbors(next) {
                links[nb] += 1;
            }
        }
        Embeddings {
            order,
            anchor,
            map: vec![usize::MAX; n],
            used: vec![false; t.num_atoms()],
            stack: Vec::new(),
            started: false,
            m,
        }
    }

    fn candidates(&self, depth: usize) -> Vec<usize> {
        match self.anchor[depth] {
            Some(q) => {
                let mut c: Vec<usize> = self.m.target.neighbors(self.map[q]).collect();
                c.sort_unstable();
                c
            }
            None => (0..self.m.target.num_atoms()).collect(),
        }
    }

    fn feasible(&self, depth: usize, t: usize) -> bool {
        let (p, g) = (self.m.pattern, self.m.target);
        let a = self.order[depth];
        if self.used[t] || p.atom(a).label() != g.atom(t).label() || g.degree(t) < p.degree(a) {
            return false;
        }
        if self.m.allowed.as_ref().is_some_and(|al| !al[t]) {
            return false;
        }
        if self.m.predicate.as_ref().is_some_and(|f| !f(a, t)) {
            return false;
        }
        self.order[..depth].iter().all(|&q| p.bond_between(a, q) == g.bond_between(t, self.map[q]))
    }
}

impl Iterator for Embeddings<'_> {
    type Item = AtomMap;

    fn next(&mut self) -> Option<AtomMap> {
        let n = self.order.len();
        if n == 0 || n > self.m.target.num_atoms() {
            return None;
        }
        if !self.started {
            self.started = true;
            let c = self.candidates(0);
            self.stack.push((c, 0, None));
        }
        while let Some(depth) = self.stack.len().checked_sub(1) {
            if let Some(t) = self.stack[depth].2.take() {
                self.used[t] = false;
                self.map[self.order[depth]] = usize::MAX;
            }
            let mut chosen = None;
            while self.stack[depth].1 < self.stack[depth].0.len() {
                let t = self.stack[depth].0[self.stack[depth].1];
                self.stack[depth].1 += 1;
                if self.feasible(depth, t) {
                    chosen = Some(t);
                    break;
                }
            }
            match chosen {
                Some(t) => {
                    self.used[t] = true;
                    self.map[self.order[depth]] = t;
                    self.stack[depth].2 = Some(t);
                    if depth + 1 == n {
                        return Some(AtomMap(self.map.clone()));
                    }
                    let c = self.candidates(depth + 1);
                    self.stack.push((c, 0, None));
                }
                None => {
                    self.stack.pop();
                }
            }
        }
        None
    }
}

/// All induced embeddings of `pattern` into `target`, capped at
/// [`DEFAULT_MATCH_CAP`].
pub fn substruct_matches(target: &MolecularGraph, pattern: &MolecularGraph) -> Matches {
    Matcher::new(pattern, target).collect()
}

pub fn has_substruct_match(target: &MolecularGraph, pattern: &MolecularGraph) -> bool {
    Matcher::new(pattern, target).first().is_some()
}

/// A label- and bond-order-preserving bijection exists.
pub fn are_isomorphic(a: &MolecularGraph, b: &MolecularGraph) -> bool {
    a.num_atoms() == b.num_atoms()
        && a.num_bonds() == b.num_bonds()
        && (a.is_empty() || Matcher::new(a, b).first().is_some())
}

/// Symmetry-equivalent variants of a match into `target`.
///
/// Yields `σ ∘ seed` for every automorphism `σ` of `target`, in search
/// order. Variants are not deduplicated, so the stream always has
/// `|Aut(target)|` elements unless restricted with [`SeedVariants::within`].
pub struct SeedVariants<'a> {
    seed: AtomMap,
    autos: Embeddings<'a>,
    allowed: Option<Vec<bool>>,
}

impl SeedVariants<'_> {
    /// Keeps only variants whose image lies inside `atoms`.
    pub fn within(mut self, atoms: &[usize]) -> Self {
        let mut allowed = vec![false; self.autos.m.target.num_atoms()];
        for &a in atoms {
            if a < allowed.len() {
                allowed[a] = true;
            }
        }
        self.allowed = Some(allowed);
        self
    }
}

impl Iterator for SeedVariants<'_> {
    type Item = AtomMap;

    fn next(&mut self) -> Option<AtomMap> {
        loop {
            let sigma = self.autos.next()?;
            let variant = self.seed.then(&sigma);
            if self.allowed.as_ref().is_none_or(|al| variant.0.iter().all(|&t| al[t])) {
                return Some(variant);
            }
        }
    }
}

/// Lazy stream of the symmetry-equivalent variants of `seed`.
///
/// Panics if `seed` maps outside `target`.
pub fn isomorphisms_iter<'a>(target: &'a MolecularGraph, seed: &AtomMap) -> SeedVariants<'a> {
    assert!(seed.0.iter().all(|&t| t < target.num_atoms()), "seed maps outside the target");
    SeedVariants { seed: seed.clone(), autos: Matcher::new(target, target).cap(usize::MAX).iter(), allowed: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{parse_smiles, Atom, BondOrder, Element};
    use proptest::prelude::*;

    fn all_injections(k: usize, n: usize) -> Vec<Vec<usize>> {
        fn rec(k: usize, n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for t in 0..n {
                if !used[t] {
                    used[t] = true;
                    cur.push(t);
                    rec(k, n, cur, used, out);
                    cur.pop();
                    used[t] = false;
                }
            }
        }
        let mut out = Vec::new();
        rec(k, n, &mut Vec::new(), &mut vec![false; n], &mut out);
        out
    }

    /// Brute-force oracle over every injection.
    fn brute_matches(target: &MolecularGraph, pattern: &MolecularGraph) -> Vec<AtomMap> {
        let mut out: Vec<AtomMap> = all_injections(pattern.num_atoms(), target.num_atoms())
            .into_iter()
            .map(AtomMap)
            .filter(|m| m.verify(pattern, target))
            .collect();
        out.sort();
        out
    }

    #[test]
    fn single_carbon_in_ethanol() {
        let ethanol = parse_smiles("CCO").unwrap();
        let c = parse_smiles("C").unwrap();
        let m = substruct_matches(&ethanol, &c);
        assert_eq!(m.maps, vec![AtomMap(vec![0]), AtomMap(vec![1])]);
        assert!(!m.truncated);
    }

    #[test]
    fn benzene_automorphisms() {
        let b = parse_smiles("c1ccccc1").unwrap();
        let m = substruct_matches(&b, &b);
        assert_eq!(m.maps.len(), 12);
        assert_eq!(m.maps, brute_matches(&b, &b));
    }

    #[test]
    fn thiophene_not_in_ethanol() {
        let t = parse_smiles("c1ccsc1").unwrap();
        assert!(substruct_matches(&parse_smiles("CCO").unwrap(), &t).maps.is_empty());
    }

    #[test]
    fn induced_semantics() {
        // A 3-chain is not an induced subgraph of a triangle.
        let chain = parse_smiles("CCC").unwrap();
        let ring = parse_smiles("C1CC1").unwrap();
        assert!(substruct_matches(&ring, &chain).maps.is_empty());
    }

    #[test]
    fn aromatic_bonds_only_match_aromatic() {
        let mut g = MolecularGraph::new();
        g.add_atom(Atom::aromatic(Element::C));
        g.add_atom(Atom::aromatic(Element::C));
        g.add_bond(0, 1, BondOrder::Single).unwrap();
        let benzene = parse_smiles("c1ccccc1").unwrap();
        assert!(substruct_matches(&benzene, &g).maps.is_empty());
    }

    #[test]
    fn cap_truncates() {
        let b = parse_smiles("c1ccccc1").unwrap();
        let m = Matcher::new(&b, &b).cap(5).collect();
        assert_eq!(m.maps.len(), 5);
        assert!(m.truncated);
        let m = Matcher::new(&b, &b).cap(12).collect();
        assert!(!m.truncated);
    }

    #[test]
    fn within_restricts_images() {
        let g = parse_smiles("CCCC").unwrap();
        let c = parse_smiles("C").unwrap();
        let m = Matcher::new(&c, &g).within(&[1, 3]).collect();
        assert_eq!(m.maps, vec![AtomMap(vec![1]), AtomMap(vec![3])]);
    }

    #[test]
    fn isomorphism_basics() {
        let e = parse_smiles("CCO").unwrap();
        assert!(are_isomorphic(&e, &e));
        assert!(are_isomorphic(&e, &parse_smiles("OCC").unwrap()));
        assert!(!are_isomorphic(&e, &parse_smiles("CCC").unwrap()));
        assert!(!are_isomorphic(&e, &parse_smiles("CCCO").unwrap()));
    }

    #[test]
    fn seed_variants() {
        let b = parse_smiles("c1ccccc1").unwrap();
        let full: Vec<AtomMap> = isomorphisms_iter(&b, &AtomMap::identity(6)).collect();
        let mut sorted = full.clone();
        sorted.sort();
        assert_eq!(sorted, brute_matches(&b, &b));
        let one: Vec<AtomMap> = isomorphisms_iter(&b, &AtomMap(vec![0])).collect();
        assert_eq!(one.len(), 12);
        let mut distinct = one.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 6);
        assert_eq!(isomorphisms_iter(&b, &AtomMap(vec![0])).within(&[]).count(), 0);
        assert_eq!(isomorphisms_iter(&b, &AtomMap(vec![0])).within(&[2]).count(), 2);
    }

    fn arb_graph(max_atoms: usize) -> impl Strategy<Value = MolecularGraph> {
        (1..=max_atoms)
            .prop_flat_map(|n| {
                let pairs = n * (n - 1) / 2;
                (
                    proptest::collection::vec(0usize..3, n),
                    proptest::collection::vec(prop_oneof![4 => Just(0u8), 3 => Just(1u8), 1 => Just(2u8)], pairs),
                )
            })
            .prop_map(|(labels, edges)| {
                let elems = [Element::C, Element::N, Element::O];
                let mut g = MolecularGraph::new();
                for l in &labels {
                    g.add_atom(Atom::new(elems[*l]));
                }
                let n = labels.len();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        match edges[k] {
                            1 => {
                                g.add_bond(i, j, BondOrder::Single).unwrap();
                            }
                            2 => {
                                g.add_bond(i, j, BondOrder::Double).unwrap();
                            }
                            _ => {}
                        }
                        k += 1;
                    }
                }
                g
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn matches_agree_with_brute_force(p in arb_graph(4), t in arb_graph(7)) {
            let fast = substruct_matches(&t, &p);
            prop_assert_eq!(&fast.maps, &brute_matches(&t, &p));
            for m in &fast.maps {
                prop_assert!(m.verify(&p, &t));
            }
        }

        #[test]
        fn isomorphism_agrees_with_brute_force(a in arb_graph(6), b in arb_graph(6)) {
            let brute = a.num_atoms() == b.num_atoms() && !brute_matches(&b, &a).is_empty();
            prop_assert_eq!(are_isomorphic(&a, &b), brute);
            prop_assert_eq!(are_isomorphic(&a, &b), are_isomorphic(&b, &a));
        }

        #[test]
        fn relabeled_graph_is_isomorphic(a in arb_graph(7), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut perm: Vec<usize> = (0..a.num_atoms()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(are_isomorphic(&a, &a.permuted(&perm)));
        }
    }
}
