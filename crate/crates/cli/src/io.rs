//! File formats and exit-code classification.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use motifwalk::fragment::{heuristic_segment, Annotation, Segmented};
use motifwalk::grammar::GrammarParams;
use motifwalk::molgraph::{parse_smiles, MolecularGraph};
use motifwalk::motifgraph::{load_motif_graph, MotifGraph};
use motifwalk::pipeline::WalkRecord;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// I/O failures exit with 2, everything else with 1.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<std::io::Error>()) {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("malformed JSON in {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// `(id, SMILES)` pairs from a text file of `SMILES [id]` lines. Blank lines
/// and `#` comments are skipped; missing ids become `mol_<line>`.
pub fn read_smiles_lines(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let smiles = parts.next().expect("line is not empty").to_string();
        let id = parts.next().map_or_else(|| format!("mol_{}", k + 1), str::to_string);
        out.push((id, smiles));
    }
    Ok(out)
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// A dataset is a JSON array of annotations or a SMILES file segmented with
/// the heuristic cuts.
pub fn load_dataset(path: &Path) -> Result<Vec<Segmented>> {
    let segs: Vec<Segmented> = if is_json(path) {
        let rows: Vec<Annotation> = read_json(path)?;
        rows.iter()
            .map(|a| a.resolve().with_context(|| format!("annotation `{}`", a.molecule_id)))
            .collect::<Result<_>>()?
    } else {
        read_smiles_lines(path)?
            .iter()
            .map(|(id, s)| {
                let m = parse_smiles(s).with_context(|| format!("molecule `{id}`"))?;
                heuristic_segment(id, &m).with_context(|| format!("molecule `{id}`"))
            })
            .collect::<Result<_>>()?
    };
    if segs.is_empty() {
        bail!("dataset {} is empty", path.display());
    }
    Ok(segs)
}

pub fn load_graph(path: &Path) -> Result<MotifGraph> {
    load_motif_graph(&read_text(path)?).with_context(|| format!("invalid motif graph {}", path.display()))
}

pub fn load_params(path: &Path, g: &MotifGraph) -> Result<GrammarParams> {
    let params: GrammarParams = read_json(path)?;
    params.check_shapes().with_context(|| format!("invalid parameters {}", path.display()))?;
    params.check_graph(g).with_context(|| format!("parameters {} do not fit the graph", path.display()))?;
    Ok(params)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Failure {
    pub molecule_id: String,
    pub error: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WalkCorpus {
    pub walks: Vec<WalkRecord>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GeneratedRecord {
    pub index: usize,
    pub seed: u64,
    pub smiles: String,
    pub walk: String,
    pub valid: bool,
}

/// Molecules of a generation output (JSON) or a SMILES file.
pub fn load_molecules(path: &Path) -> Result<Vec<MolecularGraph>> {
    let smiles: Vec<(String, String)> = if is_json(path) {
        let recs: Vec<GeneratedRecord> = read_json(path)?;
        recs.into_iter().map(|r| (r.index.to_string(), r.smiles)).collect()
    } else {
        read_smiles_lines(path)?
    };
    smiles
        .iter()
        .map(|(id, s)| parse_smiles(s).with_context(|| format!("molecule `{id}` in {}", path.display())))
        .collect()
}

/// `id,value` rows; a first row whose value is not a number is a header.
pub fn read_properties(path: &Path) -> Result<Vec<(String, f64)>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((id, value)) = line.split_once(',') else {
            bail!("{}:{}: expected `id,value`", path.display(), k + 1);
        };
        match value.trim().parse::<f64>() {
            Ok(v) => out.push((id.trim().to_string(), v)),
            Err(_) if out.is_empty() && k == 0 => {}
            Err(_) => bail!("{}:{}: `{}` is not a number", path.display(), k + 1, value.trim()),
        }
    }
    Ok(out)
}
