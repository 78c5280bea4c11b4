//! Molecule assembly by replaying motif-graph edges.

use crate::error::WalkError;
use crate::molgraph::{validate_valence, MolecularGraph, ViolationKind};
use crate::motifgraph::{MotifGraph, MotifRef};
use crate::walks::WalkDag;

/// How strictly valence is enforced after each attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    /// No atom may exceed its largest valence.
    Capacity,
    /// The partial molecule must be fully valid.
    Full,
}

fn passes(m: &MolecularGraph, check: Check) -> bool {
    let v = validate_valence(m);
    match check {
        Check::Full => v.is_empty(),
        Check::Capacity => v.iter().all(|x| !matches!(x.kind, ViolationKind::Exceeded { .. })),
    }
}

/// A placed motif: molecule atom of every black motif atom and the red
/// groups already consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub node: MotifRef,
    pub atoms: Vec<Option<usize>>,
    pub used: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub molecule: MolecularGraph,
    pub instances: Vec<Instance>,
}

impl Assembly {
    /// Places the black part of `node` as the first instance.
    pub fn start(g: &MotifGraph, node: MotifRef) -> Self {
        let motif = &g.motifs[node.base];
        let mut molecule = MolecularGraph::new();
        let mut atoms = vec![None; motif.graph.num_atoms()];
        for a in motif.black_atoms() {
            atoms[a] = Some(molecule.add_atom(*motif.graph.atom(a)));
        }
        for b in motif.graph.bonds() {
            if let (Some(x), Some(y)) = (atoms[b.a], atoms[b.b]) {
                molecule.add_bond(x, y, b.order).expect("motif bonds are simple");
            }
        }
        Assembly { molecule, instances: vec![Instance { node, atoms, used: vec![false; motif.red_groups.len()] }] }
    }

    /// Whether red group `l` of instance `i` may still be used.
    pub fn group_usable(&self, g: &MotifGraph, i: usize, l: usize) -> bool {
        let inst = &self.instances[i];
        let groups = &g.motifs[inst.node.base].red_groups;
        !inst.used[l]
            && groups[l]
                .iter()
                .all(|a| !groups.iter().zip(&inst.used).any(|(grp, &u)| u && grp.binary_search(a).is_ok()))
    }

    fn trial(
        &self,
        g: &MotifGraph,
        from: usize,
        edge: usize,
        check: Check,
    ) -> Result<(MolecularGraph, Vec<Option<usize>>), String> {
        let e = &g.edges[edge];
        let inst = &self.instances[from];
        if e.u != inst.node.base {
            return Err(format!("edge {edge} does not leave motif {}", g.motifs[inst.node.base].id));
        }
        if !self.group_usable(g, from, e.l1) {
            return Err(format!("red group {} of instance {from} is used", e.l1));
        }
        let v = &g.motifs[e.v];
        let mut molecule = self.molecule.clone();
        let mut atoms = vec![None; v.graph.num_atoms()];
        for a in v.black_atoms() {
            atoms[a] = Some(molecule.add_atom(*v.graph.atom(a)));
        }
        for b in v.graph.bonds() {
            if let (Some(x), Some(y)) = (atoms[b.a], atoms[b.b]) {
                molecule.add_bond(x, y, b.order).map_err(|err| err.to_string())?;
            }
        }
        for &(x, u_atom, order) in &e.attach {
            let target = inst.atoms.get(u_atom).copied().flatten().ok_or("attach atom is not placed")?;
            let new = atoms[x].ok_or("attach atom of v is not black")?;
            molecule.add_bond(new, target, order).map_err(|err| err.to_string())?;
        }
        if !passes(&molecule, check) {
            return Err("valence violation".into());
        }
        Ok((molecule, atoms))
    }

    pub fn can_attach(&self, g: &MotifGraph, from: usize, edge: usize, check: Check) -> bool {
        self.trial(g, from, edge, check).is_ok()
    }

    /// Attaches `node` (a copy of the edge's target motif) to instance
    /// `from`; returns the new instance index.
    pub fn attach(
        &mut self,
        g: &MotifGraph,
        from: usize,
        edge: usize,
        node: MotifRef,
        check: Check,
    ) -> Result<usize, WalkError> {
        let e = &g.edges[edge];
        if node.base != e.v {
            return Err(WalkError::Replay(format!("edge {edge} does not reach motif {}", g.motifs[node.base].id)));
        }
        let (molecule, atoms) = self.trial(g, from, edge, check).map_err(WalkError::Replay)?;
        self.molecule = molecule;
        self.instances[from].used[e.l1] = true;
        let mut used = vec![false; g.motifs[e.v].red_groups.len()];
        used[e.l2] = true;
        self.instances.push(Instance { node, atoms, used });
        Ok(self.instances.len() - 1)
    }

    pub fn is_valid(&self) -> bool {
        passes(&self.molecule, Check::Full)
    }
}

/// Rebuilds the molecule of a walk DAG. Unresolved edges take the first
/// feasible edge between the two motifs. The result must be fully valid.
pub fn replay(g: &MotifGraph, dag: &WalkDag, check: Check) -> Result<Assembly, WalkError> {
    let Some(root) = dag.nodes.first() else {
        return Err(WalkError::Replay("empty walk".into()));
    };
    let mut asm = Assembly::start(g, root.motif);
    for node in &dag.nodes[1..] {
        let p = node.parent.ok_or_else(|| WalkError::Replay("non-root node without parent".into()))?;
        if p >= asm.instances.len() {
            return Err(WalkError::Replay("nodes are not in pre-order".into()));
        }
        let pb = asm.instances[p].node.base;
        let edge = match node.edge {
            Some(e) => e,
            None => {
                let lo = g.edges.partition_point(|e| (e.u, e.v) < (pb, node.motif.base));
                let n = g.edges_between(pb, node.motif.base).len();
                (lo..lo + n).find(|&e| asm.can_attach(g, p, e, check)).ok_or_else(|| {
                    WalkError::Replay(format!(
                        "no feasible edge from {} to {}",
                        g.node_name(asm.instances[p].node),
                        g.node_name(node.motif)
                    ))
                })?
            }
        };
        asm.attach(g, p, edge, node.motif, check)?;
    }
    if !asm.is_valid() {
        return Err(WalkError::Replay("assembled molecule is not valence-valid".into()));
    }
    Ok(asm)
}
