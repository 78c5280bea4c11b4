//! Fragmentation of molecules and inference of attachment contexts.

use serde::{Deserialize, Serialize};

use crate::error::FragmentError;
use crate::molgraph::{parse_smiles, ring_atoms, ring_bonds, smallest_ring_containing, BondOrder, MolecularGraph};

/// How contexts between neighbouring fragments are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    /// Single-atom fragments take the neighbour's ring, larger fragments
    /// take the directly bonded neighbour atoms.
    #[default]
    Hopv,
    /// Same rule as `Hopv`.
    Ptc,
    /// Contexts must be supplied as red groups.
    Annotated,
    /// Same rule as `Hopv`, applied to heuristic cuts.
    Heuristic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragment {
    /// Parent atom indices, sorted.
    pub atoms: Vec<usize>,
    pub graph: MolecularGraph,
}

/// Context of fragment `from` inside its neighbour `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context {
    pub from: usize,
    pub to: usize,
    /// Parent atom indices, sorted; a subset of fragment `to`.
    pub atoms: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fragmentation {
    /// Ordered by smallest parent atom.
    pub fragments: Vec<Fragment>,
    /// Severed bonds as sorted 0-based parent atom pairs.
    pub cut_bonds: Vec<(usize, usize)>,
    /// Sorted by `(from, to)`.
    pub contexts: Vec<Context>,
}

impl Fragmentation {
    /// Fragment index of every parent atom.
    pub fn fragment_of(&self) -> Vec<usize> {
        let n = self.fragments.iter().map(|f| f.atoms.len()).sum();
        let mut out = vec![usize::MAX; n];
        for (j, f) in self.fragments.iter().enumerate() {
            for &a in &f.atoms {
                out[a] = j;
            }
        }
        out
    }

    /// Neighbouring fragment pairs `(j1, j2)` with `j1 < j2`, sorted.
    pub fn adjacent_pairs(&self) -> Vec<(usize, usize)> {
        let of = self.fragment_of();
        let mut pairs: Vec<(usize, usize)> = self
            .cut_bonds
            .iter()
            .filter_map(|&(a, b)| {
                let (x, y) = (of[a], of[b]);
                (x != y).then(|| (x.min(y), x.max(y)))
            })
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    pub fn neighbors(&self, j: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .adjacent_pairs()
            .into_iter()
            .filter_map(|(a, b)| {
                if a == j {
                    Some(b)
                } else if b == j {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn context(&self, from: usize, to: usize) -> Option<&[usize]> {
        self.contexts.iter().find(|c| c.from == from && c.to == to).map(|c| c.atoms.as_slice())
    }

    /// Contexts of fragment `j`, ordered by neighbour.
    pub fn contexts_of(&self, j: usize) -> impl Iterator<Item = &Context> {
        self.contexts.iter().filter(move |c| c.from == j)
    }
}

/// Splits `m` into the connected components left after deleting `bonds`
/// (0-based atom pairs). Contexts are left empty.
pub fn break_bonds(m: &MolecularGraph, bonds: &[(usize, usize)]) -> Result<Fragmentation, FragmentError> {
    let mut cut = vec![false; m.num_bonds()];
    let mut cut_bonds = Vec::with_capacity(bonds.len());
    for &(a, b) in bonds {
        let bi = m.bond_index(a, b).ok_or(FragmentError::MissingBond { a, b })?;
        cut[bi] = true;
        cut_bonds.push((a.min(b), a.max(b)));
    }
    cut_bonds.sort_unstable();
    cut_bonds.dedup();
    let fragments = crate::molgraph::components_where(m, |bi| !cut[bi])
        .into_iter()
        .map(|atoms| {
            let graph = m.induced_subgraph(&atoms).expect("component atoms are valid").graph;
            Fragment { atoms, graph }
        })
        .collect();
    Ok(Fragmentation { fragments, cut_bonds, contexts: Vec::new() })
}

/// Acyclic single bonds that join two ring atoms, or a ring atom to a
/// non-ring atom of degree greater than one. Sorted 0-based pairs.
pub fn heuristic_fragment(m: &MolecularGraph) -> Vec<(usize, usize)> {
    let in_ring = ring_atoms(m);
    let on_ring = ring_bonds(m);
    let mut out: Vec<(usize, usize)> = m
        .bonds()
        .iter()
        .enumerate()
        .filter(|&(bi, b)| {
            if on_ring[bi] || b.order != BondOrder::Single {
                return false;
            }
            match (in_ring[b.a], in_ring[b.b]) {
                (true, true) => true,
                (true, false) => m.degree(b.b) > 1,
                (false, true) => m.degree(b.a) > 1,
                (false, false) => false,
            }
        })
        .map(|(_, b)| (b.a.min(b.b), b.a.max(b.b)))
        .collect();
    out.sort_unstable();
    out
}

fn check_context(
    parent: &MolecularGraph,
    frag: &Fragmentation,
    from: usize,
    to: usize,
    atoms: &[usize],
) -> Result<(), FragmentError> {
    if atoms.is_empty() {
        return Err(FragmentError::EmptyContext { from, to });
    }
    let target = &frag.fragments[to].atoms;
    if atoms.iter().any(|a| target.binary_search(a).is_err()) {
        return Err(FragmentError::Inconsistent {
            molecule: String::new(),
            reason: format!("context of fragment {from} leaves fragment {to}"),
        });
    }
    let mut joint = frag.fragments[from].atoms.clone();
    joint.extend_from_slice(atoms);
    if !parent.is_connected_subset(&joint) {
        return Err(FragmentError::Inconsistent {
            molecule: String::new(),
            reason: format!("fragment {from} and its context in {to} are not connected"),
        });
    }
    Ok(())
}

/// Fills contexts for every neighbouring fragment pair using `rule`.
pub fn infer_context(
    mut frag: Fragmentation,
    parent: &MolecularGraph,
    rule: RuleKind,
) -> Result<Fragmentation, FragmentError> {
    if rule == RuleKind::Annotated {
        return Err(FragmentError::Inconsistent {
            molecule: String::new(),
            reason: "annotated rule requires explicit red groups".into(),
        });
    }
    let of = frag.fragment_of();
    let mut contexts = Vec::new();
    for (a, b) in frag.adjacent_pairs() {
        for (from, to) in [(a, b), (b, a)] {
            let mut attach: Vec<usize> = frag
                .cut_bonds
                .iter()
                .filter_map(|&(x, y)| match (of[x], of[y]) {
                    (fx, fy) if fx == from && fy == to => Some(y),
                    (fx, fy) if fy == from && fx == to => Some(x),
                    _ => None,
                })
                .collect();
            attach.sort_unstable();
            attach.dedup();
            let atoms = if frag.fragments[from].atoms.len() == 1 {
                ring_context(&frag.fragments[to], &attach).unwrap_or(attach)
            } else {
                attach
            };
            check_context(parent, &frag, from, to, &atoms)?;
            contexts.push(Context { from, to, atoms });
        }
    }
    contexts.sort_by_key(|c| (c.from, c.to));
    frag.contexts = contexts;
    Ok(frag)
}

/// Smallest ring of the neighbour fragment containing every attachment atom.
fn ring_context(neighbor: &Fragment, attach: &[usize]) -> Option<Vec<usize>> {
    let local: Vec<usize> = attach.iter().map(|a| neighbor.atoms.binary_search(a).ok()).collect::<Option<_>>()?;
    let ring = smallest_ring_containing(&neighbor.graph, &local)?;
    let mut atoms: Vec<usize> = ring.into_iter().map(|l| neighbor.atoms[l]).collect();
    atoms.sort_unstable();
    Some(atoms)
}

/// One annotated molecule. Atom indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub molecule_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smiles: Option<String>,
    /// Explicit graph; takes precedence over `smiles` and fixes atom numbering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<MolecularGraph>,
    pub bonds_to_break: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub black_groups: Option<Vec<Vec<usize>>>,
    /// `red_groups[i]` holds the contexts of `black_groups[i]` inside all of
    /// its neighbours.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub red_groups: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub rule: RuleKind,
}

/// Annotated molecule after fragmentation and context resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmented {
    pub molecule_id: String,
    pub molecule: MolecularGraph,
    pub fragmentation: Fragmentation,
}

fn zero_based(molecule: &str, index: usize) -> Result<usize, FragmentError> {
    index.checked_sub(1).ok_or_else(|| FragmentError::Inconsistent {
        molecule: molecule.to_string(),
        reason: "atom indices are 1-based".into(),
    })
}

impl Annotation {
    fn inconsistent(&self, reason: impl Into<String>) -> FragmentError {
        FragmentError::Inconsistent { molecule: self.molecule_id.clone(), reason: reason.into() }
    }

    fn groups_zero_based(&self, groups: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, FragmentError> {
        groups
            .iter()
            .map(|g| {
                let mut out = g.iter().map(|&a| zero_based(&self.molecule_id, a)).collect::<Result<Vec<_>, _>>()?;
                out.sort_unstable();
                Ok(out)
            })
            .collect()
    }

    pub fn molecule(&self) -> Result<MolecularGraph, FragmentError> {
        match (&self.graph, &self.smiles) {
            (Some(g), _) => {
                if let Some(v) = crate::molgraph::validate_valence(g).first() {
                    return Err(crate::error::MolError::Valence { atom: v.atom }.into());
                }
                Ok(g.clone())
            }
            (None, Some(s)) => Ok(parse_smiles(s)?),
            (None, None) => Err(self.inconsistent("neither `graph` nor `smiles` given")),
        }
    }

    /// Fragments the molecule and attaches contexts, preferring annotated
    /// red groups over the rule.
    pub fn resolve(&self) -> Result<Segmented, FragmentError> {
        let molecule = self.molecule()?;
        let bonds = self
            .bonds_to_break
            .iter()
            .map(|&[a, b]| Ok((zero_based(&self.molecule_id, a)?, zero_based(&self.molecule_id, b)?)))
            .collect::<Result<Vec<_>, FragmentError>>()?;
        let frag = break_bonds(&molecule, &bonds)?;
        let black = match &self.black_groups {
            Some(groups) => Some(self.check_black_groups(&frag, groups)?),
            None => None,
        };
        let fragmentation = match (&self.red_groups, black) {
            (Some(red), Some(black)) => self.apply_red_groups(frag, &molecule, red, &black)?,
            (Some(_), None) => return Err(self.inconsistent("red groups need black groups for pairing")),
            (None, _) => infer_context(frag, &molecule, self.rule).map_err(|e| self.tag(e))?,
        };
        Ok(Segmented { molecule_id: self.molecule_id.clone(), molecule, fragmentation })
    }

    fn tag(&self, e: FragmentError) -> FragmentError {
        match e {
            FragmentError::Inconsistent { reason, .. } => self.inconsistent(reason),
            other => other,
        }
    }

    /// Maps each black group to its fragment index.
    fn check_black_groups(&self, frag: &Fragmentation, groups: &[Vec<usize>]) -> Result<Vec<usize>, FragmentError> {
        let groups = self.groups_zero_based(groups)?;
        if groups.len() != frag.fragments.len() {
            return Err(self.inconsistent(format!(
                "{} black groups but cutting yields {} fragments",
                groups.len(),
                frag.fragments.len()
            )));
        }
        let mut used = vec![false; frag.fragments.len()];
        groups
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let j = frag
                    .fragments
                    .iter()
                    .position(|f| &f.atoms == g)
                    .ok_or_else(|| self.inconsistent(format!("black group {} is not a fragment", i + 1)))?;
                if std::mem::replace(&mut used[j], true) {
                    return Err(self.inconsistent(format!("black group {} repeats a fragment", i + 1)));
                }
                Ok(j)
            })
            .collect()
    }

    fn apply_red_groups(
        &self,
        mut frag: Fragmentation,
        molecule: &MolecularGraph,
        red: &[Vec<usize>],
        black: &[usize],
    ) -> Result<Fragmentation, FragmentError> {
        if red.len() != black.len() {
            return Err(self.inconsistent("red groups must pair one-to-one with black groups"));
        }
        let red = self.groups_zero_based(red)?;
        let of = frag.fragment_of();
        let mut contexts = Vec::new();
        for (i, atoms) in red.iter().enumerate() {
            let from = black[i];
            let neighbors = frag.neighbors(from);
            let mut per: Vec<Vec<usize>> = vec![Vec::new(); neighbors.len()];
            for &a in atoms {
                let to = *of.get(a).ok_or_else(|| self.inconsistent(format!("red atom {} out of range", a + 1)))?;
                let slot = neighbors.binary_search(&to).map_err(|_| {
                    self.inconsistent(format!(
                        "red atom {} of group {} is not in a neighbouring fragment",
                        a + 1,
                        i + 1
                    ))
                })?;
                per[slot].push(a);
            }
            for (slot, to) in neighbors.into_iter().enumerate() {
                let mut atoms = std::mem::take(&mut per[slot]);
                atoms.sort_unstable();
                atoms.dedup();
                if atoms.is_empty() {
                    return Err(
                        self.inconsistent(format!("red group {} has no atom in neighbour fragment {to}", i + 1))
                    );
                }
                check_context(molecule, &frag, from, to, &atoms).map_err(|e| self.tag(e))?;
                contexts.push(Context { from, to, atoms });
            }
        }
        contexts.sort_by_key(|c| (c.from, c.to));
        frag.contexts = contexts;
        Ok(frag)
    }
}

/// Fragments a molecule with heuristic cuts and the ring rule.
pub fn heuristic_segment(molecule_id: &str, molecule: &MolecularGraph) -> Result<Segmented, FragmentError> {
    let frag = break_bonds(molecule, &heuristic_fragment(molecule))?;
    let fragmentation = infer_context(frag, molecule, RuleKind::Heuristic)?;
    Ok(Segmented { molecule_id: molecule_id.to_string(), molecule: molecule.clone(), fragmentation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn ethanol_cut() {
        let m = parse_smiles("CCO").unwrap();
        let f = break_bonds(&m, &[(1, 2)]).unwrap();
        assert_eq!(f.fragments.len(), 2);
        assert_eq!(f.fragments[0].atoms, vec![0, 1]);
        assert_eq!(f.fragments[1].atoms, vec![2]);
        assert_eq!(f.cut_bonds, vec![(1, 2)]);
        assert!(matches!(break_bonds(&m, &[(0, 2)]), Err(FragmentError::MissingBond { a: 0, b: 2 })));
        let whole = break_bonds(&m, &[]).unwrap();
        assert_eq!(whole.fragments.len(), 1);
        assert_eq!(whole.fragments[0].graph, m);
    }

    #[test]
    fn heuristic_examples() {
        let biphenyl = parse_smiles("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(heuristic_fragment(&biphenyl), vec![(5, 6)]);
        assert!(heuristic_fragment(&parse_smiles("c1ccccc1C").unwrap()).is_empty());
        assert_eq!(heuristic_fragment(&parse_smiles("c1ccccc1CO").unwrap()), vec![(5, 6)]);
    }

    #[test]
    fn single_atom_pair_contexts() {
        let m = parse_smiles("CO").unwrap();
        let f = infer_context(break_bonds(&m, &[(0, 1)]).unwrap(), &m, RuleKind::Hopv).unwrap();
        assert_eq!(f.context(0, 1), Some(&[1][..]));
        assert_eq!(f.context(1, 0), Some(&[0][..]));
    }

    #[test]
    fn single_atom_takes_neighbor_ring() {
        // Benzene with an O substituent that bonds on to a methyl.
        let m = parse_smiles("c1ccccc1OC").unwrap();
        let f = infer_context(break_bonds(&m, &[(5, 6), (6, 7)]).unwrap(), &m, RuleKind::Hopv).unwrap();
        assert_eq!(f.fragments.len(), 3);
        assert_eq!(f.context(1, 0), Some(&[0, 1, 2, 3, 4, 5][..]));
        assert_eq!(f.context(0, 1), Some(&[6][..]));
        assert_eq!(f.context(1, 2), Some(&[7][..]));
    }

    #[test]
    fn annotated_red_groups_win() {
        let ann = Annotation {
            molecule_id: "m".into(),
            smiles: Some("c1ccccc1OC".into()),
            graph: None,
            bonds_to_break: vec![[6, 7], [7, 8]],
            black_groups: Some(vec![vec![1, 2, 3, 4, 5, 6], vec![7], vec![8]]),
            red_groups: Some(vec![vec![7], vec![6, 8], vec![7]]),
            rule: RuleKind::Hopv,
        };
        let seg = ann.resolve().unwrap();
        assert_eq!(seg.fragmentation.context(1, 0), Some(&[5][..]));
        let mut bad = ann.clone();
        bad.red_groups = Some(vec![vec![7], vec![8], vec![7]]);
        assert!(matches!(bad.resolve(), Err(FragmentError::Inconsistent { .. })));
        let mut bad = ann.clone();
        bad.black_groups = Some(vec![vec![1, 2, 3, 4, 5], vec![6, 7], vec![8]]);
        assert!(matches!(bad.resolve(), Err(FragmentError::Inconsistent { .. })));
        let mut bad = ann;
        bad.red_groups = Some(vec![vec![1], vec![6, 8], vec![7]]);
        assert!(matches!(bad.resolve(), Err(FragmentError::Inconsistent { .. })));
    }

    #[test]
    fn annotation_json() {
        let text = r#"{"molecule_id":"x","smiles":"CCO","bonds_to_break":[[2,3]],"rule":"ptc"}"#;
        let ann: Annotation = serde_json::from_str(text).unwrap();
        let seg = ann.resolve().unwrap();
        assert_eq!(seg.fragmentation.fragments.len(), 2);
        assert_eq!(seg.fragmentation.context(0, 1), Some(&[2][..]));
        assert_eq!(seg.fragmentation.context(1, 0), Some(&[1][..]));
    }
}
