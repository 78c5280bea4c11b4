//! Heavy-atom molecular graphs.
//!
//! Hydrogens are never materialized: unbracketed atoms carry an implicit
//! hydrogen count derived from their valence, bracket atoms carry the count
//! they were written with. Graphs need not be connected.

mod canon;
mod fingerprint;
mod rings;
mod smiles;
mod valence;

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::MolError;

pub use canon::{canonical_form, canonical_order};
pub use fingerprint::{morgan_fingerprint, Fingerprint, FINGERPRINT_BITS};
pub use rings::{bridges, ring_atoms, ring_bonds, smallest_ring_containing, smallest_rings};
pub use smiles::{parse_smiles, write_smiles};
pub use valence::{kekulize, validate_valence, ValenceViolation, ViolationKind};

/// Supported chemical elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Element {
    B,
    C,
    N,
    O,
    P,
    S,
    F,
    Cl,
    Br,
    I,
}

impl Element {
    pub const ALL: [Element; 10] = [
        Element::B,
        Element::C,
        Element::N,
        Element::O,
        Element::P,
        Element::S,
        Element::F,
        Element::Cl,
        Element::Br,
        Element::I,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::P => "P",
            Element::S => "S",
            Element::F => "F",
            Element::Cl => "Cl",
            Element::Br => "Br",
            Element::I => "I",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Element::ALL.into_iter().find(|e| e.symbol() == s)
    }

    /// Allowed valences in ascending order; the last one is the maximum.
    pub fn valences(self) -> &'static [u8] {
        match self {
            Element::B => &[3],
            Element::C => &[4],
            Element::N => &[3],
            Element::O => &[2],
            Element::P => &[3, 5],
            Element::S => &[2, 4, 6],
            Element::F | Element::Cl | Element::Br | Element::I => &[1],
        }
    }

    pub fn max_valence(self) -> u8 {
        *self.valences().last().unwrap()
    }

    /// Elements that may be written in lowercase aromatic form.
    pub fn can_be_aromatic(self) -> bool {
        matches!(self, Element::B | Element::C | Element::N | Element::O | Element::P | Element::S)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub aromatic: bool,
    /// Hydrogen count fixed by a bracket atom; `None` means implicit.
    pub hydrogens: Option<u8>,
}

impl Atom {
    pub fn new(element: Element) -> Self {
        Atom { element, aromatic: false, hydrogens: None }
    }

    pub fn aromatic(element: Element) -> Self {
        Atom { element, aromatic: true, hydrogens: None }
    }

    /// Label used by isomorphism checks.
    pub fn label(&self) -> (Element, bool) {
        (self.element, self.aromatic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Numeric order; aromatic counts 1.5.
    pub fn value(self) -> f64 {
        match self {
            BondOrder::Single => 1.0,
            BondOrder::Double => 2.0,
            BondOrder::Triple => 3.0,
            BondOrder::Aromatic => 1.5,
        }
    }

    pub fn from_value(v: f64) -> Option<BondOrder> {
        match v {
            1.0 => Some(BondOrder::Single),
            2.0 => Some(BondOrder::Double),
            3.0 => Some(BondOrder::Triple),
            1.5 => Some(BondOrder::Aromatic),
            _ => None,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if self.a == atom {
            self.b
        } else {
            self.a
        }
    }
}

/// Attributed undirected graph of heavy atoms and bonds.
#[derive(Debug, Clone, Default)]
pub struct MolecularGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// (neighbor, bond index) per atom.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for MolecularGraph {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && self.bonds == other.bonds
    }
}

impl MolecularGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_atom(&mut self, atom: Atom) -> usize {
        self.atoms.push(atom);
        self.adjacency.push(Vec::new());
        self.atoms.len() - 1
    }

    pub fn add_bond(&mut self, a: usize, b: usize, order: BondOrder) -> Result<usize, MolError> {
        let len = self.atoms.len();
        for index in [a, b] {
            if index >= len {
                return Err(MolError::AtomOutOfRange { index, len });
            }
        }
        if a == b {
            return Err(MolError::InvalidBond { a, b, reason: "self bond" });
        }
        if self.bond_between(a, b).is_some() {
            return Err(MolError::InvalidBond { a, b, reason: "parallel bond" });
        }
        let index = self.bonds.len();
        self.bonds.push(Bond { a, b, order });
        self.adjacency[a].push((b, index));
        self.adjacency[b].push((a, index));
        Ok(index)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_mut(&mut self, i: usize) -> &mut Atom {
        &mut self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().map(|&(n, _)| n)
    }

    /// (neighbor, bond index) pairs of atom `i`.
    pub fn incident(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<BondOrder> {
        self.adjacency.get(a)?.iter().find(|&&(n, _)| n == b).map(|&(_, bi)| self.bonds[bi].order)
    }

    pub fn bond_index(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency.get(a)?.iter().find(|&&(n, _)| n == b).map(|&(_, bi)| bi)
    }

    /// Sum of explicit bond orders with aromatic bonds counted as one.
    pub(crate) fn sigma_valence(&self, i: usize) -> u32 {
        self.adjacency[i]
            .iter()
            .map(|&(_, bi)| match self.bonds[bi].order {
                BondOrder::Single | BondOrder::Aromatic => 1,
                BondOrder::Double => 2,
                BondOrder::Triple => 3,
            })
            .sum()
    }

    /// Node-induced subgraph; atoms keep the order of `atoms` after sorting
    /// and deduplication.
    pub fn induced_subgraph(&self, atoms: &[usize]) -> Result<Subgraph, MolError> {
        let mut keep: Vec<usize> = atoms.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let len = self.atoms.len();
        if let Some(&index) = keep.iter().find(|&&i| i >= len) {
            return Err(MolError::AtomOutOfRange { index, len });
        }
        let mut local = vec![usize::MAX; len];
        let mut graph = MolecularGraph::new();
        for (li, &gi) in keep.iter().enumerate() {
            local[gi] = li;
            graph.add_atom(self.atoms[gi]);
        }
        for bond in &self.bonds {
            let (la, lb) = (local[bond.a], local[bond.b]);
            if la != usize::MAX && lb != usize::MAX {
                graph.add_bond(la, lb, bond.order).expect("induced bonds are valid");
            }
        }
        Ok(Subgraph { graph, mapping: keep })
    }

    /// Empty graphs are not connected.
    pub fn is_connected(&self) -> bool {
        !self.atoms.is_empty() && self.components().len() == 1
    }

    /// Connected components, each sorted, ordered by their smallest atom.
    pub fn components(&self) -> Vec<Vec<usize>> {
        components_where(self, |_| true)
    }

    /// Subset `atoms` induces a connected subgraph.
    pub fn is_connected_subset(&self, atoms: &[usize]) -> bool {
        let mut uniq = atoms.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        let Some(&first) = uniq.first() else {
            return false;
        };
        let mut inside = vec![false; self.atoms.len()];
        for &a in &uniq {
            inside[a] = true;
        }
        let mut seen = vec![false; self.atoms.len()];
        let mut stack = vec![first];
        seen[first] = true;
        let mut count = 1;
        while let Some(a) = stack.pop() {
            for n in self.neighbors(a) {
                if inside[n] && !seen[n] {
                    seen[n] = true;
                    count += 1;
                    stack.push(n);
                }
            }
        }
        count == uniq.len()
    }

    /// Relabel atoms: new atom `k` is old atom `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> MolecularGraph {
        let mut inverse = vec![0; order.len()];
        for (k, &old) in order.iter().enumerate() {
            inverse[old] = k;
        }
        let mut g = MolecularGraph::new();
        for &old in order {
            g.add_atom(self.atoms[old]);
        }
        for bond in &self.bonds {
            g.add_bond(inverse[bond.a], inverse[bond.b], bond.order).expect("permutation keeps bonds valid");
        }
        g
    }

    pub fn is_valence_valid(&self) -> bool {
        validate_valence(self).is_empty()
    }

    /// Total hydrogens (explicit bracket count or implicit) for each atom.
    pub fn hydrogen_counts(&self) -> Vec<u8> {
        valence::hydrogen_counts(self)
    }
}

pub(crate) fn components_where(g: &MolecularGraph, keep_bond: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let n = g.num_atoms();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            for &(nb, bi) in g.incident(a) {
                if comp[nb] == usize::MAX && keep_bond(bi) {
                    comp[nb] = id;
                    members.push(nb);
                    stack.push(nb);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Induced subgraph together with its mapping back to the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgraph {
    pub graph: MolecularGraph,
    /// `mapping[local] = parent atom index`.
    pub mapping: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct AtomJson {
    element: Element,
    aromatic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hydrogens: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    atoms: Vec<AtomJson>,
    bonds: Vec<(usize, usize, f64)>,
}

impl Serialize for MolecularGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GraphJson {
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomJson { element: a.element, aromatic: a.aromatic, hydrogens: a.hydrogens })
                .collect(),
            bonds: self.bonds.iter().map(|b| (b.a, b.b, b.order.value())).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MolecularGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = GraphJson::deserialize(deserializer)?;
        let mut g = MolecularGraph::new();
        for a in raw.atoms {
            g.add_atom(Atom { element: a.element, aromatic: a.aromatic, hydrogens: a.hydrogens });
        }
        for (a, b, order) in raw.bonds {
            let order =
                BondOrder::from_value(order).ok_or_else(|| D::Error::custom(format!("bad bond order {order}")))?;
            g.add_bond(a, b, order).map_err(D::Error::custom)?;
        }
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_subgraph_of_ethanol() {
        let g = parse_smiles("CCO").unwrap();
        let sub = g.induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(sub.graph.num_atoms(), 2);
        assert_eq!(sub.graph.num_bonds(), 1);
        assert_eq!(sub.mapping, vec![0, 1]);
        assert_eq!(g.induced_subgraph(&[0, 1, 2]).unwrap().graph, g);
        assert!(g.induced_subgraph(&[]).unwrap().graph.is_empty());
        assert!(matches!(g.induced_subgraph(&[3]), Err(MolError::AtomOutOfRange { index: 3, .. })));
    }

    #[test]
    fn connectivity() {
        let mut g = MolecularGraph::new();
        assert!(!g.is_connected());
        g.add_atom(Atom::new(Element::C));
        assert!(g.is_connected());
        g.add_atom(Atom::new(Element::C));
        assert!(!g.is_connected());
        assert!(parse_smiles("c1ccccc1").unwrap().is_connected());
        assert!(!parse_smiles("C.C").unwrap().is_connected());
    }

    #[test]
    fn connected_subset() {
        let g = parse_smiles("CCCC").unwrap();
        assert!(g.is_connected_subset(&[1, 2]));
        assert!(!g.is_connected_subset(&[0, 2]));
        assert!(!g.is_connected_subset(&[]));
    }

    #[test]
    fn rejects_parallel_and_self_bonds() {
        let mut g = MolecularGraph::new();
        g.add_atom(Atom::new(Element::C));
        g.add_atom(Atom::new(Element::C));
        g.add_bond(0, 1, BondOrder::Single).unwrap();
        assert!(g.add_bond(1, 0, BondOrder::Double).is_err());
        assert!(g.add_bond(0, 0, BondOrder::Single).is_err());
        assert!(g.add_bond(0, 5, BondOrder::Single).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = parse_smiles("c1ccsc1C(=O)[NH2]").unwrap();
        let text = serde_json::to_string(&g).unwrap();
        let back: MolecularGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
    }
}
