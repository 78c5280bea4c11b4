use std::collections::BTreeMap;

use super::{validate_valence, Atom, BondOrder, Element, MolecularGraph};
use crate::error::MolError;

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    graph: MolecularGraph,
    /// Ring label -> (atom, bond symbol given at opening, offset).
    open_rings: BTreeMap<u32, (usize, Option<BondOrder>, usize)>,
}

fn syntax(offset: usize, message: impl Into<String>) -> MolError {
    MolError::Syntax { offset, message: message.into() }
}

fn unsupported(offset: usize, feature: &str) -> MolError {
    MolError::Unsupported { offset, feature: feature.to_string() }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<MolecularGraph, MolError> {
        // Previous atom in the current chain; one saved entry per open branch.
        let mut prev: Option<usize> = None;
        let mut branches: Vec<(Option<usize>, usize)> = Vec::new();
        let mut pending: Option<(BondOrder, usize)> = None;
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    if prev.is_none() {
                        return Err(syntax(start, "branch without a preceding atom"));
                    }
                    if pending.is_some() {
                        return Err(syntax(start, "bond symbol before branch"));
                    }
                    if self.text.get(start + 1) == Some(&b')') {
                        return Err(syntax(start, "empty branch"));
                    }
                    branches.push((prev, start));
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(syntax(start, "dangling bond before `)`"));
                    }
                    let (saved, _) = branches.pop().ok_or_else(|| syntax(start, "unmatched `)`"))?;
                    prev = saved;
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() || prev.is_none() {
                        return Err(syntax(start, "misplaced `.`"));
                    }
                    if !branches.is_empty() {
                        return Err(syntax(start, "`.` inside a branch"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' => {
                    if pending.is_some() {
                        return Err(syntax(start, "two consecutive bond symbols"));
                    }
                    if prev.is_none() {
                        return Err(syntax(start, "bond symbol without a preceding atom"));
                    }
                    let order = match c {
                        b'-' => BondOrder::Single,
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        _ => BondOrder::Aromatic,
                    };
                    pending = Some((order, start));
                    self.pos += 1;
                }
                b'/' | b'\\' => return Err(unsupported(start, "directional bond")),
                b'@' => return Err(unsupported(start, "stereochemistry")),
                b'+' => return Err(unsupported(start, "charge")),
                b'*' => return Err(unsupported(start, "wildcard atom")),
                b'0'..=b'9' | b'%' => {
                    let atom = prev.ok_or_else(|| syntax(start, "ring closure without a preceding atom"))?;
                    let label = self.ring_label()?;
                    self.ring_closure(atom, label, pending.take(), start)?;
                }
                _ => {
                    let atom = self.atom()?;
                    let idx = self.graph.add_atom(atom);
                    if let Some(p) = prev {
                        let order = match pending.take() {
                            Some((o, _)) => o,
                            None => self.implicit_order(p, idx),
                        };
                        self.graph.add_bond(p, idx, order)?;
                    }
                    prev = Some(idx);
                }
            }
        }
        if let Some((_, offset)) = pending {
            return Err(syntax(offset, "dangling bond at end of input"));
        }
        if let Some(&(_, offset)) = branches.last() {
            return Err(syntax(offset, "unclosed branch"));
        }
        if let Some((_, &(_, _, offset))) = self.open_rings.iter().next() {
            return Err(syntax(offset, "unclosed ring"));
        }
        if self.graph.is_empty() {
            return Err(syntax(0, "empty input"));
        }
        Ok(self.graph)
    }

    fn implicit_order(&self, a: usize, b: usize) -> BondOrder {
        if self.graph.atom(a).aromatic && self.graph.atom(b).aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn ring_label(&mut self) -> Result<u32, MolError> {
        let start = self.pos;
        if self.peek() == Some(b'%') {
            let digits = self.text.get(start + 1..start + 3).unwrap_or(&[]);
            if digits.len() != 2 || !digits.iter().all(u8::is_ascii_digit) {
                return Err(syntax(start, "`%` must be followed by two digits"));
            }
            self.pos += 3;
            Ok(((digits[0] - b'0') * 10 + (digits[1] - b'0')) as u32)
        } else {
            self.pos += 1;
            Ok((self.text[start] - b'0') as u32)
        }
    }

    fn ring_closure(
        &mut self,
        atom: usize,
        label: u32,
        bond: Option<(BondOrder, usize)>,
        offset: usize,
    ) -> Result<(), MolError> {
        match self.open_rings.remove(&label) {
            None => {
                self.open_rings.insert(label, (atom, bond.map(|b| b.0), offset));
                Ok(())
            }
            Some((other, opening, _)) => {
                if other == atom {
                    return Err(syntax(offset, "ring closure to the same atom"));
                }
                let order = match (opening, bond.map(|b| b.0)) {
                    (Some(a), Some(b)) if a != b => return Err(syntax(offset, "conflicting ring-closure bonds")),
                    (Some(o), _) | (None, Some(o)) => o,
                    (None, None) => self.implicit_order(other, atom),
                };
                self.graph.add_bond(other, atom, order).map_err(|_| syntax(offset, "duplicate ring-closure bond"))?;
                Ok(())
            }
        }
    }

    fn atom(&mut self) -> Result<Atom, MolError> {
        let start = self.pos;
        let c = self.text[start];
        if c == b'[' {
            return self.bracket_atom();
        }
        let next = self.text.get(start + 1).copied();
        let (element, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => (Element::Cl, false, 2),
            (b'B', Some(b'r')) => (Element::Br, false, 2),
            (b'B', _) => (Element::B, false, 1),
            (b'C', _) => (Element::C, false, 1),
            (b'N', _) => (Element::N, false, 1),
            (b'O', _) => (Element::O, false, 1),
            (b'P', _) => (Element::P, false, 1),
            (b'S', _) => (Element::S, false, 1),
            (b'F', _) => (Element::F, false, 1),
            (b'I', _) => (Element::I, false, 1),
            (b'b', _) => (Element::B, true, 1),
            (b'c', _) => (Element::C, true, 1),
            (b'n', _) => (Element::N, true, 1),
            (b'o', _) => (Element::O, true, 1),
            (b'p', _) => (Element::P, true, 1),
            (b's', _) => (Element::S, true, 1),
            (c, _) if c.is_ascii_alphabetic() => {
                let symbol = (c as char).to_string();
                return Err(MolError::UnsupportedElement { offset: start, symbol });
            }
            _ => return Err(syntax(start, format!("unexpected character `{}`", c as char))),
        };
        self.pos += len;
        Ok(Atom { element, aromatic, hydrogens: None })
    }

    fn bracket_atom(&mut self) -> Result<Atom, MolError> {
        let open = self.pos;
        self.pos += 1;
        if self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(unsupported(self.pos, "isotope"));
        }
        let sym_start = self.pos;
        let first = self.peek().ok_or_else(|| syntax(open, "unterminated bracket atom"))?;
        if first == b'*' {
            return Err(unsupported(sym_start, "wildcard atom"));
        }
        if !first.is_ascii_alphabetic() {
            return Err(syntax(sym_start, "expected element symbol"));
        }
        let aromatic = first.is_ascii_lowercase();
        let mut end = sym_start + 1;
        if let Some(&second) = self.text.get(end) {
            let two = [first, second];
            if second.is_ascii_lowercase() && (!aromatic || is_aromatic_two_letter(&two)) {
                end += 1;
            }
        }
        let symbol = std::str::from_utf8(&self.text[sym_start..end]).unwrap_or("").to_string();
        let mut canonical = symbol.clone();
        if aromatic {
            canonical[..1].make_ascii_uppercase();
        }
        let element = Element::from_symbol(&canonical)
            .filter(|e| !aromatic || e.can_be_aromatic())
            .ok_or(MolError::UnsupportedElement { offset: sym_start, symbol })?;
        self.pos = end;
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'@') {
            return Err(unsupported(self.pos, "stereochemistry"));
        }
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = 1;
            if let Some(d) = self.peek().filter(u8::is_ascii_digit) {
                hydrogens = d - b'0';
                self.pos += 1;
            }
        }
        match self.peek() {
            Some(b']') => {
                self.pos += 1;
                Ok(Atom { element, aromatic, hydrogens: Some(hydrogens) })
            }
            Some(b'+') | Some(b'-') => Err(unsupported(self.pos, "charge")),
            Some(b':') => Err(unsupported(self.pos, "atom class")),
            Some(b'@') => Err(unsupported(self.pos, "stereochemistry")),
            Some(_) => Err(syntax(self.pos, "unexpected character in bracket atom")),
            None => Err(syntax(open, "unterminated bracket atom")),
        }
    }
}

/// Two-letter aromatic symbols of standard SMILES; recognized only to be
/// rejected as unsupported elements.
fn is_aromatic_two_letter(s: &[u8; 2]) -> bool {
    matches!(s, b"se" | b"as" | b"te")
}

/// Parses the supported SMILES subset and checks valence.
pub fn parse_smiles(text: &str) -> Result<MolecularGraph, MolError> {
    let parser = Parser { text: text.as_bytes(), pos: 0, graph: MolecularGraph::new(), open_rings: BTreeMap::new() };
    let graph = parser.parse()?;
    if let Some(v) = validate_valence(&graph).first() {
        return Err(MolError::Valence { atom: v.atom });
    }
    Ok(graph)
}

fn atom_text(atom: &Atom) -> String {
    let mut symbol = atom.element.symbol().to_string();
    if atom.aromatic {
        symbol.make_ascii_lowercase();
    }
    match atom.hydrogens {
        None => symbol,
        Some(0) => format!("[{symbol}]"),
        Some(1) => format!("[{symbol}H]"),
        Some(h) => format!("[{symbol}H{h}]"),
    }
}

fn bond_text(g: &MolecularGraph, a: usize, b: usize, order: BondOrder) -> &'static str {
    let both_aromatic = g.atom(a).aromatic && g.atom(b).aromatic;
    match order {
        BondOrder::Single if both_aromatic => "-",
        BondOrder::Single => "",
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic if both_aromatic => "",
        BondOrder::Aromatic => ":",
    }
}

fn ring_text(label: usize) -> String {
    if label < 10 {
        label.to_string()
    } else {
        format!("%{label:02}")
    }
}

struct Writer<'a> {
    g: &'a MolecularGraph,
    /// DFS tree children per atom, in visiting order.
    children: Vec<Vec<usize>>,
    /// Ring-closure partners per atom.
    closures: Vec<Vec<usize>>,
    /// Open ring label per closure bond index.
    open: BTreeMap<usize, usize>,
    labels_in_use: Vec<bool>,
    out: String,
}

impl Writer<'_> {
    fn build_tree(&mut self, root: usize, visited: &mut [bool]) {
        // Iterative DFS; neighbors in ascending index order.
        visited[root] = true;
        let mut stack = vec![(root, usize::MAX, 0usize)];
        let mut seen_bond = vec![false; self.g.num_bonds()];
        while let Some(&(v, parent, pos)) = stack.last() {
            let mut nbrs: Vec<(usize, usize)> = self.g.incident(v).to_vec();
            nbrs.sort_unstable();
            if let Some(&(w, bi)) = nbrs.get(pos) {
                stack.last_mut().expect("non-empty").2 += 1;
                if w == parent || seen_bond[bi] {
                    continue;
                }
                seen_bond[bi] = true;
                if visited[w] {
                    self.closures[v].push(w);
                    self.closures[w].push(v);
                } else {
                    visited[w] = true;
                    self.children[v].push(w);
                    stack.push((w, v, 0));
                }
            } else {
                stack.pop();
            }
        }
    }

    fn emit(&mut self, v: usize, emitted: &mut [bool]) {
        self.out.push_str(&atom_text(self.g.atom(v)));
        emitted[v] = true;
        let mut partners = self.closures[v].clone();
        partners.sort_unstable();
        let mut freed = Vec::new();
        for &w in &partners {
            let bi = self.g.bond_index(v, w).expect("closure bond exists");
            if emitted[w] {
                let label = self.open.remove(&bi).expect("ring opened earlier");
                self.out.push_str(&ring_text(label));
                freed.push(label);
            } else {
                let label =
                    self.labels_in_use.iter().skip(1).position(|&u| !u).map_or(self.labels_in_use.len(), |p| p + 1);
                if label >= self.labels_in_use.len() {
                    self.labels_in_use.resize(label + 1, false);
                }
                self.labels_in_use[label] = true;
                self.open.insert(bi, label);
                let order = self.g.bonds()[bi].order;
                self.out.push_str(bond_text(self.g, v, w, order));
                self.out.push_str(&ring_text(label));
            }
        }
        for label in freed {
            self.labels_in_use[label] = false;
        }
        let children = self.children[v].clone();
        for (k, &w) in children.iter().enumerate() {
            let last = k + 1 == children.len();
            if !last {
                self.out.push('(');
            }
            let order = self.g.bond_between(v, w).expect("tree bond exists");
            self.out.push_str(bond_text(self.g, v, w, order));
            self.emit(w, emitted);
            if !last {
                self.out.push(')');
            }
        }
    }
}

/// Writes SMILES for a connected graph, starting at atom 0 and visiting
/// neighbors in index order.
pub fn write_smiles(g: &MolecularGraph) -> Result<String, MolError> {
    if !g.is_connected() {
        return Err(MolError::Disconnected);
    }
    Ok(write_component(g, 0))
}

pub(crate) fn write_component(g: &MolecularGraph, root: usize) -> String {
    let n = g.num_atoms();
    let mut w = Writer {
        g,
        children: vec![Vec::new(); n],
        closures: vec![Vec::new(); n],
        open: BTreeMap::new(),
        labels_in_use: vec![true],
        out: String::new(),
    };
    let mut visited = vec![false; n];
    w.build_tree(root, &mut visited);
    let mut emitted = vec![false; n];
    w.emit(root, &mut emitted);
    w.out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ethanol() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(g.num_atoms(), 3);
        assert_eq!(g.num_bonds(), 2);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Single));
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.num_atoms(), 6);
        assert!(g.atoms().iter().all(|a| a.aromatic));
        assert_eq!(g.num_bonds(), 6);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn unsupported_inputs() {
        assert!(matches!(parse_smiles("C(=O)(O)[Fe]"), Err(MolError::UnsupportedElement { offset: 9, .. })));
        assert!(matches!(parse_smiles("C[N+](C)C"), Err(MolError::Unsupported { .. })));
        assert!(matches!(parse_smiles("[13C]"), Err(MolError::Unsupported { .. })));
        assert!(matches!(parse_smiles("C[C@H](N)O"), Err(MolError::Unsupported { .. })));
        assert!(matches!(parse_smiles("F/C=C/F"), Err(MolError::Unsupported { .. })));
        assert!(matches!(parse_smiles("C*"), Err(MolError::Unsupported { .. })));
        assert!(matches!(parse_smiles("[se]1cccc1"), Err(MolError::UnsupportedElement { .. })));
        assert!(matches!(parse_smiles("CX"), Err(MolError::UnsupportedElement { offset: 1, .. })));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        assert_eq!(parse_smiles("C1CC").unwrap_err(), MolError::Syntax { offset: 1, message: "unclosed ring".into() });
        assert!(matches!(parse_smiles("C(C"), Err(MolError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_smiles("CC)"), Err(MolError::Syntax { offset: 2, .. })));
        assert!(matches!(parse_smiles("=C"), Err(MolError::Syntax { offset: 0, .. })));
        assert!(matches!(parse_smiles("C="), Err(MolError::Syntax { offset: 1, .. })));
        assert!(matches!(parse_smiles(""), Err(MolError::Syntax { .. })));
        assert!(matches!(parse_smiles("C()C"), Err(MolError::Syntax { .. })));
        assert!(matches!(parse_smiles("C11"), Err(MolError::Syntax { .. })));
    }

    #[test]
    fn valence_errors() {
        assert_eq!(parse_smiles("C(C)(C)(C)(C)C").unwrap_err(), MolError::Valence { atom: 0 });
        assert!(matches!(parse_smiles("FF(F)"), Err(MolError::Valence { atom: 1 })));
        assert!(parse_smiles("OS(=O)(=O)O").is_ok());
        assert!(parse_smiles("P(=O)(O)(O)O").is_ok());
    }

    #[test]
    fn ring_labels_and_bonds() {
        let g = parse_smiles("C%12CCCCC%12").unwrap();
        assert_eq!(g.num_bonds(), 6);
        let g = parse_smiles("C=1CCCCC1").unwrap();
        assert_eq!(g.bond_between(0, 5), Some(BondOrder::Double));
        assert!(parse_smiles("C=1CCCCC#1").is_err());
        let g = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(g.bond_between(5, 6), Some(BondOrder::Single));
        assert_eq!(g.num_atoms(), 12);
    }

    #[test]
    fn brackets_and_halogens() {
        let g = parse_smiles("c1cc[nH]c1").unwrap();
        assert_eq!(g.atom(3).hydrogens, Some(1));
        assert!(g.atom(3).aromatic);
        let g = parse_smiles("ClCBr").unwrap();
        assert_eq!(g.atom(0).element, Element::Cl);
        assert_eq!(g.atom(2).element, Element::Br);
        let g = parse_smiles("[NH2]C").unwrap();
        assert_eq!(g.atom(0).hydrogens, Some(2));
        let g = parse_smiles("C.C").unwrap();
        assert_eq!(g.num_bonds(), 0);
    }

    #[test]
    fn writer_round_trips() {
        for s in [
            "CCO",
            "c1ccccc1",
            "c1ccc2ccccc2c1",
            "c1ccccc1-c1ccccc1",
            "CC(=O)Oc1ccccc1C(=O)O",
            "C1CC2CCC1C2",
            "c1cc[nH]c1",
            "ClC=CBr",
            "C#N",
            "C12C3C4C1C5C2C3C45",
        ] {
            let g = parse_smiles(s).unwrap();
            let w = write_smiles(&g).unwrap();
            let back = parse_smiles(&w).unwrap();
            assert_eq!(back.num_atoms(), g.num_atoms(), "{s} -> {w}");
            assert!(crate::isomorph::are_isomorphic(&g, &back), "{s} -> {w}");
        }
    }

    #[test]
    fn writer_rejects_disconnected() {
        let g = parse_smiles("C.C").unwrap();
        assert_eq!(write_smiles(&g), Err(MolError::Disconnected));
    }
}
