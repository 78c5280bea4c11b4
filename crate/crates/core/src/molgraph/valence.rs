use super::{ring_atoms, BondOrder, Element, MolecularGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Bond-order sum (plus bracket hydrogens) above the element maximum.
    Exceeded { used: u32, max: u32 },
    /// Aromatic atom that is not part of any ring.
    AromaticOutsideRing,
    /// The aromatic system containing this atom admits no Kekulé structure.
    NoKekule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValenceViolation {
    pub atom: usize,
    pub kind: ViolationKind,
}

fn smallest_valence_at_least(element: Element, used: u32) -> Option<u32> {
    element.valences().iter().map(|&v| v as u32).find(|&v| v >= used)
}

/// Aromatic atom must receive one double bond in a Kekulé structure.
fn needs_double(g: &MolecularGraph, i: usize) -> bool {
    let atom = g.atom(i);
    if !atom.aromatic || !matches!(atom.element, Element::B | Element::C | Element::N | Element::P) {
        return false;
    }
    let has_pi =
        g.incident(i).iter().any(|&(_, bi)| matches!(g.bonds()[bi].order, BondOrder::Double | BondOrder::Triple));
    if has_pi {
        return false;
    }
    let used = g.sigma_valence(i) + atom.hydrogens.unwrap_or(0) as u32;
    match smallest_valence_at_least(atom.element, used) {
        Some(v) => v > used,
        None => false,
    }
}

/// Assigns one double bond to every aromatic atom that needs one, using only
/// aromatic bonds. Returns, per atom, whether it received a double bond, or
/// `Err(atoms)` listing the needing atoms of the systems that cannot be
/// kekulized.
pub fn kekulize(g: &MolecularGraph) -> Result<Vec<bool>, Vec<usize>> {
    let n = g.num_atoms();
    let needs: Vec<bool> = (0..n).map(|i| needs_double(g, i)).collect();
    let mut matched = vec![false; n];
    let mut failed = Vec::new();
    // Per connected aromatic system.
    let systems = super::components_where(g, |bi| g.bonds()[bi].order == BondOrder::Aromatic);
    for system in systems {
        let members: Vec<usize> = system.into_iter().filter(|&a| needs[a]).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() % 2 == 1 || !match_system(g, &needs, &mut matched, members.len()) {
            failed.extend(members.iter().copied());
            for &a in &members {
                matched[a] = false;
            }
        }
    }
    if failed.is_empty() {
        Ok(matched)
    } else {
        failed.sort_unstable();
        Err(failed)
    }
}

fn candidates(g: &MolecularGraph, needs: &[bool], matched: &[bool], a: usize) -> Vec<usize> {
    g.incident(a)
        .iter()
        .filter(|&&(nb, bi)| g.bonds()[bi].order == BondOrder::Aromatic && needs[nb] && !matched[nb])
        .map(|&(nb, _)| nb)
        .collect()
}

/// Backtracking perfect matching over the needing atoms; always expands the
/// unmatched atom with the fewest options.
fn match_system(g: &MolecularGraph, needs: &[bool], matched: &mut [bool], remaining: usize) -> bool {
    if remaining == 0 {
        return true;
    }
    let mut best: Option<(usize, Vec<usize>)> = None;
    for a in 0..g.num_atoms() {
        if !needs[a] || matched[a] {
            continue;
        }
        let c = candidates(g, needs, matched, a);
        if c.is_empty() {
            return false;
        }
        if best.as_ref().is_none_or(|(_, bc)| c.len() < bc.len()) {
            best = Some((a, c));
        }
    }
    let Some((a, options)) = best else {
        return true;
    };
    matched[a] = true;
    for b in options {
        matched[b] = true;
        if match_system(g, needs, matched, remaining - 2) {
            return true;
        }
        matched[b] = false;
    }
    matched[a] = false;
    false
}

fn used_valence(g: &MolecularGraph, i: usize, double: bool) -> u32 {
    g.sigma_valence(i) + double as u32 + g.atom(i).hydrogens.unwrap_or(0) as u32
}

/// Lists every valence problem in `g`; an empty list means the graph is valid.
///
/// Aromatic atoms are charged one extra unit when a Kekulé structure gives
/// them a double bond.
pub fn validate_valence(g: &MolecularGraph) -> Vec<ValenceViolation> {
    let mut out = Vec::new();
    let doubles = match kekulize(g) {
        Ok(d) => d,
        Err(atoms) => {
            out.extend(atoms.into_iter().map(|atom| ValenceViolation { atom, kind: ViolationKind::NoKekule }));
            vec![false; g.num_atoms()]
        }
    };
    let in_ring = ring_atoms(g);
    for i in 0..g.num_atoms() {
        let atom = g.atom(i);
        let used = used_valence(g, i, doubles[i]);
        let max = atom.element.max_valence() as u32;
        if used > max {
            out.push(ValenceViolation { atom: i, kind: ViolationKind::Exceeded { used, max } });
        }
        if atom.aromatic && !in_ring[i] {
            out.push(ValenceViolation { atom: i, kind: ViolationKind::AromaticOutsideRing });
        }
    }
    out.sort_by_key(|v| v.atom);
    out
}

pub(crate) fn hydrogen_counts(g: &MolecularGraph) -> Vec<u8> {
    let doubles = kekulize(g).unwrap_or_else(|_| vec![false; g.num_atoms()]);
    (0..g.num_atoms())
        .map(|i| {
            let atom = g.atom(i);
            if let Some(h) = atom.hydrogens {
                return h;
            }
            let used = used_valence(g, i, doubles[i]);
            smallest_valence_at_least(atom.element, used).map_or(0, |v| (v - used) as u8)
        })
        .collect()
}
