//! Bundled molecules and annotations used by tests, benches and the CLI.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fragment::{Annotation, RuleKind};
use crate::molgraph::{parse_smiles, write_smiles, Atom, BondOrder, Element, MolecularGraph};

/// Builds a graph from space-separated atom symbols (lowercase = aromatic)
/// and space-separated 1-based bonds such as `1-2 2=3 3:4 4#5`.
pub fn graph_from_lists(atoms: &str, bonds: &str) -> MolecularGraph {
    let mut g = MolecularGraph::new();
    for sym in atoms.split_whitespace() {
        let aromatic = sym.chars().next().is_some_and(|c| c.is_ascii_lowercase());
        let mut upper = sym.to_string();
        upper[..1].make_ascii_uppercase();
        let element = Element::from_symbol(&upper).unwrap_or_else(|| panic!("unknown element {sym}"));
        g.add_atom(if aromatic { Atom::aromatic(element) } else { Atom::new(element) });
    }
    for tok in bonds.split_whitespace() {
        let pos = tok.find(['-', '=', '#', ':']).unwrap_or_else(|| panic!("bad bond {tok}"));
        let order = match &tok[pos..pos + 1] {
            "-" => BondOrder::Single,
            "=" => BondOrder::Double,
            "#" => BondOrder::Triple,
            _ => BondOrder::Aromatic,
        };
        let a: usize = tok[..pos].parse().expect("atom index");
        let b: usize = tok[pos + 1..].parse().expect("atom index");
        g.add_bond(a - 1, b - 1, order).unwrap_or_else(|e| panic!("bond {tok}: {e}"));
    }
    g
}

fn groups(text: &str) -> Vec<Vec<usize>> {
    text.split(';').map(|g| g.split_whitespace().map(|a| a.parse().expect("atom index")).collect()).collect()
}

fn pairs(text: &str) -> Vec<[usize; 2]> {
    text.split(';')
        .map(|p| {
            let v: Vec<usize> = p.split_whitespace().map(|a| a.parse().expect("atom index")).collect();
            [v[0], v[1]]
        })
        .collect()
}

fn row(id: &str, graph: MolecularGraph, cuts: &str, black: &str, red: &str) -> Annotation {
    Annotation {
        molecule_id: id.to_string(),
        smiles: None,
        graph: Some(graph),
        bonds_to_break: pairs(cuts),
        black_groups: Some(groups(black)),
        red_groups: Some(groups(red)),
        rule: RuleKind::Hopv,
    }
}

/// Four annotated photovoltaic-style molecules with expert cuts, black
/// groups and red groups. Atom numbering follows the annotation table; the
/// structures are reconstructions consistent with it.
pub fn expert_rows() -> Vec<Annotation> {
    // (a) hexylthiophene-vinyl | thiophene | benzamide core | thiophene |
    // phenyl | N-phenyl
    let mut a_atoms = vec!["C"; 45];
    for i in [7, 8, 9, 10, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 25, 26, 27] {
        a_atoms[i - 1] = "c";
    }
    for i in 28..=33 {
        a_atoms[i - 1] = "c";
    }
    for i in 35..=40 {
        a_atoms[i - 1] = "c";
    }
    a_atoms[24 - 1] = "s";
    a_atoms[43 - 1] = "s";
    a_atoms[44 - 1] = "s";
    a_atoms[34 - 1] = "N";
    a_atoms[42 - 1] = "O";
    let a = graph_from_lists(
        &a_atoms.join(" "),
        "1-2 2-3 3-4 4-5 5-6 6-7 7:8 8:9 9:10 10:44 44:7 10-11 11=12 11-45 12-13 \
         13:14 14:15 15:16 16:43 43:13 16-17 \
         17:18 18:19 19:25 25:26 26:27 27:17 25-41 41=42 41-34 \
         19-20 20:21 21:22 22:23 23:24 24:20 \
         27-28 28:29 29:30 30:31 31:32 32:33 33:28 \
         34-35 35:36 36:37 37:38 38:39 39:40 40:35",
    );
    // (b) thiophene | benzothiophene | alkoxyphenylene | butylthiophene |
    // thiophene
    let mut b_atoms = vec!["C"; 41];
    for i in [6, 7, 8, 9, 10, 11, 12, 13, 14, 16, 17, 18, 19, 21, 22, 23, 24, 25, 26, 27, 28, 29, 30, 31, 32, 33] {
        b_atoms[i - 1] = "c";
    }
    for i in [15, 20, 34, 35] {
        b_atoms[i - 1] = "s";
    }
    b_atoms[41 - 1] = "O";
    let b = graph_from_lists(
        &b_atoms.join(" "),
        "11:12 12:13 13:14 14:15 15:11 10-11 \
         7:8 8:9 9:10 10:16 16:17 17:7 17:18 18:19 19:20 20:16 6-7 \
         1-2 2-3 3-4 4-5 5-40 40-41 41-21 6:21 21:22 22:25 25:24 24:23 23:6 25-26 \
         26:27 27:28 28:29 29:35 35:26 27-36 36-37 37-38 38-39 29-30 \
         30:31 31:32 32:33 33:34 34:30",
    );
    // (c) ethyl | carbazole | phenylene | vinylene | nitrile | biphenyl
    let mut c_atoms = vec!["C"; 37];
    for i in [4, 5, 6, 7, 8, 9, 10, 25, 26, 27, 36, 37] {
        c_atoms[i - 1] = "c";
    }
    for i in 13..=24 {
        c_atoms[i - 1] = "c";
    }
    for i in [28, 29, 30, 31, 34, 35] {
        c_atoms[i - 1] = "c";
    }
    c_atoms[3 - 1] = "n";
    c_atoms[33 - 1] = "N";
    let c = graph_from_lists(
        &c_atoms.join(" "),
        "1-2 2-3 \
         3:4 4:9 9:25 25:26 26:3 4:5 5:6 6:7 7:8 8:9 25:27 27:10 10:37 37:36 36:26 \
         10-11 11=12 12-13 \
         13:14 14:15 15:16 16:17 17:18 18:13 16-19 19:20 20:21 21:22 22:23 23:24 24:19 \
         27-28 28:29 29:30 30:31 31:34 34:35 35:28 31-32 32#33",
    );
    // (d) alkyl methoxyphenyl | thiophene | benzodithiophene | thiophene
    let mut d_atoms = vec!["C"; 39];
    for i in (10..=15).chain(16..=19).chain(20..=26).chain(27..=30).chain([33, 34, 35]) {
        d_atoms[i - 1] = "c";
    }
    for i in [31, 32, 36, 37] {
        d_atoms[i - 1] = "s";
    }
    d_atoms[38 - 1] = "O";
    let d = graph_from_lists(
        &d_atoms.join(" "),
        "1-2 2-3 3-4 4-5 5-6 6-7 7-8 8-9 9-10 10:11 11:12 12:13 13:14 14:15 15:10 12-38 38-39 15-16 \
         16:17 17:18 18:19 19:37 37:16 19-20 \
         32:20 20:21 21:22 22:33 33:32 22:23 23:24 24:34 34:35 35:33 24:25 25:26 26:36 36:34 26-27 \
         27:28 28:29 29:30 30:31 31:27",
    );
    vec![
        row(
            "row_a",
            a,
            "12 13; 16 17; 19 20; 27 28; 34 35",
            "1 2 3 4 5 6 7 8 9 10 11 12 44 45; 13 14 15 16 43; 17 18 19 25 26 27 34 41 42; \
             20 21 22 23 24; 28 29 30 31 32 33; 35 36 37 38 39 40",
            "13; 12 17; 16 20 28 35; 19; 27; 34",
        ),
        row(
            "row_b",
            b,
            "10 11; 6 7; 25 26; 29 30",
            "11 12 13 14 15; 7 8 9 10 16 17 18 19 20; 1 2 3 4 5 6 21 22 23 24 25 40 41; \
             26 27 28 29 35 36 37 38 39; 30 31 32 33 34",
            "10; 11 6; 7 26; 25 30; 29",
        ),
        row(
            "row_c",
            c,
            "2 3; 11 10; 12 13; 27 28; 31 32",
            "1 2; 3 4 5 6 7 8 9 10 26 25 27 36 37; 28 29 30 31 34 35; 11 12; 32 33; \
             13 14 15 16 17 18 19 20 21 22 23 24",
            "3; 2 11 28; 27 32; 10 13; 31; 12",
        ),
        row(
            "row_d",
            d,
            "15 16; 19 20; 26 27",
            "1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 38 39; 16 17 18 19 37; \
             20 21 22 23 24 25 26 32 33 34 35 36; 27 28 29 30 31",
            "16; 15 20; 19 27; 26",
        ),
    ]
}

fn smiles_row(id: &str, smiles: &str, cuts: &str) -> Annotation {
    Annotation {
        molecule_id: id.to_string(),
        smiles: Some(smiles.to_string()),
        graph: None,
        bonds_to_break: if cuts.is_empty() { Vec::new() } else { pairs(cuts) },
        black_groups: None,
        red_groups: None,
        rule: RuleKind::Hopv,
    }
}

/// Small annotation set of thiophene, phenyl and methoxy fragments; their
/// contexts give a vocabulary of six motifs.
pub fn toy_annotations() -> Vec<Annotation> {
    vec![
        // c1ccc(cc1)-c1cccs1: atoms 1-6 phenyl, 7-11 thiophene
        smiles_row("toy_1", "c1ccc(cc1)-c1cccs1", "4 7"),
        smiles_row("toy_2", "c1ccc(cc1)-c1ccc(s1)-c1ccccc1", "4 7; 10 12"),
        smiles_row("toy_3", "COc1ccc(cc1)-c1cccs1", "2 3; 6 9"),
        smiles_row("toy_4", "c1cccs1", ""),
    ]
}

/// A building block: SMILES and the atoms that may carry a substituent.
#[derive(Debug, Clone, Copy)]
pub struct Block {
    pub smiles: &'static str,
    pub sites: &'static [usize],
    pub ring: bool,
}

/// Ring blocks bond to anything; chain blocks bond only to ring blocks.
pub const BLOCKS: &[Block] = &[
    Block { smiles: "c1ccccc1", sites: &[0, 2, 3], ring: true },
    Block { smiles: "c1ccsc1", sites: &[2, 4, 0], ring: true },
    Block { smiles: "c1ccoc1", sites: &[2, 4], ring: true },
    Block { smiles: "c1ccncc1", sites: &[0, 2, 4], ring: true },
    Block { smiles: "C1CCCCC1", sites: &[0, 3], ring: true },
    Block { smiles: "c1cnccn1", sites: &[0, 3], ring: true },
    Block { smiles: "C=C", sites: &[0, 1], ring: false },
    Block { smiles: "C(=O)", sites: &[0, 0], ring: false },
    Block { smiles: "CCCC", sites: &[0], ring: false },
    Block { smiles: "OC", sites: &[0], ring: false },
    Block { smiles: "C#N", sites: &[0], ring: false },
    Block { smiles: "Cl", sites: &[0], ring: false },
    Block { smiles: "C(F)(F)F", sites: &[0], ring: false },
    Block { smiles: "CCBr", sites: &[0], ring: false },
];

/// Random molecule of `blocks` building blocks joined by single bonds.
pub fn block_molecule(rng: &mut impl Rng, blocks: usize) -> MolecularGraph {
    let parsed: Vec<MolecularGraph> = BLOCKS.iter().map(|b| parse_smiles(b.smiles).expect("block parses")).collect();
    let rings: Vec<usize> = (0..BLOCKS.len()).filter(|&i| BLOCKS[i].ring).collect();
    let mut g = MolecularGraph::new();
    // (molecule atom, site belongs to a ring block)
    let mut open: Vec<(usize, bool)> = Vec::new();
    let place = |g: &mut MolecularGraph, b: usize| -> Vec<usize> {
        let offset = g.num_atoms();
        for a in parsed[b].atoms() {
            g.add_atom(*a);
        }
        for bond in parsed[b].bonds() {
            g.add_bond(offset + bond.a, offset + bond.b, bond.order).expect("block bonds");
        }
        BLOCKS[b].sites.iter().map(|&s| offset + s).collect()
    };
    let first = *rings.choose(rng).expect("ring blocks exist");
    open.extend(place(&mut g, first).into_iter().map(|a| (a, true)));
    for _ in 1..blocks {
        if open.is_empty() {
            break;
        }
        let (at, on_ring) = open.swap_remove(rng.random_range(0..open.len()));
        let b =
            if on_ring { rng.random_range(0..BLOCKS.len()) } else { *rings.choose(rng).expect("ring blocks exist") };
        let mut sites = place(&mut g, b);
        let k = rng.random_range(0..sites.len());
        let joint = sites.swap_remove(k);
        g.add_bond(at, joint, BondOrder::Single).expect("new bond");
        open.extend(sites.into_iter().map(|a| (a, BLOCKS[b].ring)));
    }
    g
}

/// `n` block molecules with 2 to `max_blocks` blocks, deterministic in `seed`.
pub fn block_corpus(n: usize, max_blocks: usize, seed: u64) -> Vec<MolecularGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = rng.random_range(2..=max_blocks.max(2));
            block_molecule(&mut rng, k)
        })
        .collect()
}

/// Linear chain of 1 to `max_units` para-linked benzene or thiophene rings
/// joined by methylene, capped with methyl groups.
pub fn chain_molecule(rng: &mut impl Rng, max_units: usize) -> MolecularGraph {
    const UNITS: [&str; 2] = ["c1ccc(cc1)", "c1ccc(s1)"];
    let n = rng.random_range(1..=max_units.max(1));
    let mut smiles = String::from("C");
    for k in 0..n {
        if k > 0 {
            smiles.push('C');
        }
        smiles.push_str(UNITS.choose(rng).expect("units exist"));
    }
    smiles.push('C');
    parse_smiles(&smiles).expect("chain SMILES parses")
}

/// `n` chain molecules with up to eight rings, deterministic in `seed`.
pub fn chain_corpus(n: usize, seed: u64) -> Vec<MolecularGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| chain_molecule(&mut rng, 8)).collect()
}

/// Uniform weights in `[-2, 2)` for a linear property over motif counts.
pub fn property_weights(num_motifs: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num_motifs).map(|_| rng.random_range(-2.0..2.0)).collect()
}

/// One molecule of a synthetic property dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub molecule_id: String,
    pub smiles: String,
    pub value: f64,
}

/// `n` chain molecules whose property is a weighted sum of their motif
/// counts under heuristic segmentation.
pub fn linear_property_dataset(n: usize, seed: u64) -> Vec<PropertyRow> {
    let segs: Vec<_> = chain_corpus(n, seed)
        .iter()
        .enumerate()
        .map(|(i, m)| crate::fragment::heuristic_segment(&format!("chain_{i}"), m).expect("chain molecules segment"))
        .collect();
    let built = crate::pipeline::build(&segs);
    let k = built.graph.num_motifs();
    let weights = property_weights(k, seed);
    segs.iter()
        .zip(&built.walks)
        .map(|(seg, walk)| {
            let counts = walk.as_ref().expect("chain walks extract").motif_counts(k);
            PropertyRow {
                molecule_id: seg.molecule_id.clone(),
                smiles: write_smiles(&seg.molecule).expect("chain molecule is connected"),
                value: counts.iter().zip(&weights).map(|(&c, w)| c as f64 * w).sum(),
            }
        })
        .collect()
}

/// SMILES of every bundled molecule.
pub fn corpus_smiles() -> Vec<String> {
    let mut out = Vec::new();
    for a in expert_rows().into_iter().chain(toy_annotations()) {
        let m = a.molecule().expect("fixture molecule is valid");
        out.push(write_smiles(&m).expect("fixture molecule is connected"));
    }
    for m in block_corpus(40, 6, 7) {
        out.push(write_smiles(&m).expect("block molecule is connected"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::validate_valence;

    #[test]
    fn expert_rows_resolve() {
        let counts = [6, 5, 6, 4];
        for (a, &k) in expert_rows().iter().zip(&counts) {
            let m = a.molecule().unwrap_or_else(|e| panic!("{}: {e}", a.molecule_id));
            assert!(validate_valence(&m).is_empty(), "{}", a.molecule_id);
            let seg = a.resolve().unwrap_or_else(|e| panic!("{}: {e}", a.molecule_id));
            assert_eq!(seg.fragmentation.fragments.len(), k, "{}", a.molecule_id);
        }
    }

    #[test]
    fn toy_annotations_resolve() {
        for a in toy_annotations() {
            a.resolve().unwrap_or_else(|e| panic!("{}: {e}", a.molecule_id));
        }
    }

    #[test]
    fn block_molecules_are_valid_and_deterministic() {
        let a = block_corpus(50, 8, 3);
        assert_eq!(a, block_corpus(50, 8, 3));
        for m in &a {
            assert!(validate_valence(m).is_empty());
            assert!(m.is_connected());
        }
    }
}
