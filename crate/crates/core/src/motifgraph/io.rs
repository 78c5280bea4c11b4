use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::{AttachBond, Motif, MotifEdge, MotifGraph, MotifRef};
use crate::error::GraphError;
use crate::molgraph::MolecularGraph;

/// Certificates re-verified on load when the graph is large.
const VERIFY_SAMPLE: usize = 256;

#[derive(Serialize, Deserialize)]
struct MotifJson {
    id: String,
    graph: MolecularGraph,
    red_groups: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct EdgeJson {
    u: String,
    v: String,
    l1: usize,
    l2: usize,
    b1: Vec<usize>,
    b2: Vec<usize>,
    map: Vec<(usize, usize)>,
    attach: Vec<AttachBond>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    motifs: Vec<MotifJson>,
    edges: Vec<EdgeJson>,
    /// Base id -> duplicate ids.
    duplicates: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    incomplete: bool,
}

impl Serialize for MotifGraph {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let id = |i: usize| self.motifs[i].id.clone();
        GraphFile {
            motifs: self
                .motifs
                .iter()
                .map(|m| MotifJson { id: m.id.clone(), graph: m.graph.clone(), red_groups: m.red_groups.clone() })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson {
                    u: id(e.u),
                    v: id(e.v),
                    l1: e.l1,
                    l2: e.l2,
                    b1: e.b1.clone(),
                    b2: e.b2.clone(),
                    map: e.map.clone(),
                    attach: e.attach.clone(),
                })
                .collect(),
            duplicates: self
                .duplicates
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(b, &k)| (id(b), (1..=k).map(|c| self.node_name(MotifRef { base: b, copy: c })).collect()))
                .collect(),
            incomplete: self.incomplete,
        }
        .serialize(serializer)
    }
}

fn schema(msg: impl Into<String>) -> GraphError {
    GraphError::Schema(msg.into())
}

fn from_file(file: GraphFile) -> Result<MotifGraph, GraphError> {
    let mut motifs = Vec::with_capacity(file.motifs.len());
    for m in file.motifs {
        let n = m.graph.num_atoms();
        if motifs.iter().any(|x: &Motif| x.id == m.id) {
            return Err(schema(format!("duplicate motif id `{}`", m.id)));
        }
        for g in &m.red_groups {
            if g.windows(2).any(|w| w[0] >= w[1]) || g.iter().any(|&a| a >= n) || g.is_empty() {
                return Err(schema(format!("motif `{}` has an invalid red group", m.id)));
            }
        }
        let motif = Motif { id: m.id, graph: m.graph, red_groups: m.red_groups };
        if motif.black_atoms().is_empty() {
            return Err(schema(format!("motif `{}` has no black atoms", motif.id)));
        }
        if !motif.graph.is_connected() {
            return Err(schema(format!("motif `{}` is not connected", motif.id)));
        }
        motifs.push(motif);
    }
    let index: BTreeMap<&str, usize> = motifs.iter().enumerate().map(|(i, m)| (m.id.as_str(), i)).collect();
    let mut edges = Vec::with_capacity(file.edges.len());
    for (k, e) in file.edges.into_iter().enumerate() {
        let u = *index.get(e.u.as_str()).ok_or(GraphError::DanglingEdge { edge: k, motif: usize::MAX })?;
        let v = *index.get(e.v.as_str()).ok_or(GraphError::DanglingEdge { edge: k, motif: usize::MAX })?;
        edges.push(MotifEdge { u, v, l1: e.l1, l2: e.l2, b1: e.b1, b2: e.b2, attach: e.attach, map: e.map });
    }
    if edges.windows(2).any(|w| w[0].key() >= w[1].key()) {
        return Err(schema("edges must be sorted and distinct"));
    }
    let mut duplicates = vec![0; motifs.len()];
    for (base, ids) in file.duplicates {
        let b = *index.get(base.as_str()).ok_or_else(|| GraphError::UnknownMotif(base.clone()))?;
        for (c, id) in ids.iter().enumerate() {
            if *id != format!("{base}:{}", c + 1) {
                return Err(schema(format!("duplicate `{id}` of `{base}` is out of sequence")));
            }
        }
        duplicates[b] = ids.len();
    }
    Ok(MotifGraph { motifs, edges, duplicates, incomplete: file.incomplete })
}

impl<'de> Deserialize<'de> for MotifGraph {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        from_file(GraphFile::deserialize(deserializer)?).map_err(serde::de::Error::custom)
    }
}

pub fn save_motif_graph(g: &MotifGraph) -> Result<String, GraphError> {
    Ok(serde_json::to_string_pretty(g)?)
}

/// Parses and validates a motif graph; certificates are re-verified (all of
/// them, or a fixed-seed sample for large graphs).
pub fn load_motif_graph(text: &str) -> Result<MotifGraph, GraphError> {
    let file: GraphFile = serde_json::from_str(text)?;
    let g = from_file(file)?;
    let n = g.edges.len();
    let picks: Vec<usize> = if n <= VERIFY_SAMPLE {
        (0..n).collect()
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut p = sample(&mut rng, n, VERIFY_SAMPLE).into_vec();
        p.sort_unstable();
        p
    };
    for edge in picks {
        if !g.verify_edge(edge) {
            return Err(GraphError::BadCertificate { edge });
        }
    }
    Ok(g)
}

impl MotifGraph {
    /// Graphviz rendering of the base graph; parallel edges are merged and
    /// their count drives the pen width.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph motifs {\n");
        for (i, m) in self.motifs.iter().enumerate() {
            let smiles = crate::molgraph::canonical_form(&m.black_graph().graph);
            let _ = writeln!(out, "  n{i} [label=\"{}\\n{}\"];", m.id, smiles);
        }
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &self.edges {
            *counts.entry((e.u, e.v)).or_default() += 1;
        }
        for ((u, v), c) in counts {
            let width = 1.0 + (c as f64).ln();
            let _ = writeln!(out, "  n{u} -> n{v} [label=\"{c}\", penwidth={width:.2}];");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;
    use crate::motifgraph::build_motif_graph;

    fn toy() -> MotifGraph {
        let motifs = vec![
            Motif { id: "G0".into(), graph: parse_smiles("CC").unwrap(), red_groups: vec![vec![1]] },
            Motif { id: "G1".into(), graph: parse_smiles("CO").unwrap(), red_groups: vec![vec![0]] },
        ];
        let mut g = build_motif_graph(motifs);
        g.augment(&[2, 1]);
        g
    }

    #[test]
    fn json_round_trip() {
        let g = toy();
        assert!(!g.edges.is_empty());
        let text = save_motif_graph(&g).unwrap();
        assert!(text.contains("\"G0:1\""));
        assert_eq!(load_motif_graph(&text).unwrap(), g);
    }

    #[test]
    fn rejects_dangling_edges_and_bad_certificates() {
        let g = toy();
        let mut value: serde_json::Value = serde_json::from_str(&save_motif_graph(&g).unwrap()).unwrap();
        value["edges"][0]["v"] = "G9".into();
        assert!(matches!(load_motif_graph(&value.to_string()), Err(GraphError::DanglingEdge { edge: 0, .. })));
        let mut value: serde_json::Value = serde_json::from_str(&save_motif_graph(&g).unwrap()).unwrap();
        value["edges"][0]["attach"] = serde_json::json!([]);
        assert!(matches!(load_motif_graph(&value.to_string()), Err(GraphError::BadCertificate { edge: 0 })));
    }

    #[test]
    fn dot_lists_nodes_and_edges() {
        let dot = toy().to_dot();
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("n0 -> n0"));
    }
}
