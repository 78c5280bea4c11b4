use super::smiles::write_component;
use super::MolecularGraph;

/// Leaves explored by the individualization search before the best
/// certificate so far is accepted.
const LEAF_BUDGET: usize = 20_000;

/// Assigns each atom the number of atoms with a strictly smaller key.
fn rank_by<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();
    keys.iter().map(|k| sorted.partition_point(|s| s < k)).collect()
}

fn initial_colors(g: &MolecularGraph) -> Vec<usize> {
    let keys: Vec<_> = (0..g.num_atoms())
        .map(|i| {
            let a = g.atom(i);
            (a.element, a.aromatic, a.hydrogens, g.degree(i))
        })
        .collect();
    rank_by(&keys)
}

fn count_distinct(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Colour refinement; cell order is preserved, so the result depends only on
/// the isomorphism class of (graph, colouring).
fn refine(g: &MolecularGraph, mut colors: Vec<usize>) -> Vec<usize> {
    let mut distinct = count_distinct(&colors);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..g.num_atoms())
            .map(|v| {
                let mut sig: Vec<(usize, u8)> =
                    g.incident(v).iter().map(|&(w, bi)| (colors[w], g.bonds()[bi].order.code())).collect();
                sig.sort_unstable();
                (colors[v], sig)
            })
            .collect();
        let next = rank_by(&keys);
        let next_distinct = count_distinct(&next);
        colors = next;
        if next_distinct == distinct {
            return colors;
        }
        distinct = next_distinct;
    }
}

type Certificate = Vec<(usize, usize, u8)>;

fn certificate(g: &MolecularGraph, colors: &[usize]) -> Certificate {
    let mut cert: Certificate = g
        .bonds()
        .iter()
        .map(|b| {
            let (x, y) = (colors[b.a], colors[b.b]);
            (x.min(y), x.max(y), b.order.code())
        })
        .collect();
    cert.sort_unstable();
    cert
}

struct Search<'a> {
    g: &'a MolecularGraph,
    best: Option<(Certificate, Vec<usize>)>,
    leaves: usize,
}

impl Search<'_> {
    fn run(&mut self, colors: Vec<usize>) {
        if self.leaves >= LEAF_BUDGET {
            return;
        }
        let n = colors.len();
        // Target cell: the non-singleton cell with the smallest colour.
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c] += 1;
        }
        let Some(cell) = (0..n).find(|&c| sizes[c] > 1) else {
            self.leaves += 1;
            let cert = certificate(self.g, &colors);
            if self.best.as_ref().is_none_or(|(b, _)| cert < *b) {
                self.best = Some((cert, colors));
            }
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&v| colors[v] == cell).collect();
        for v in members {
            let mut next = colors.clone();
            for (u, c) in next.iter_mut().enumerate() {
                if *c == cell && u != v {
                    *c = cell + 1;
                }
            }
            self.run(refine(self.g, next));
        }
    }
}

/// Canonical atom order: `order[k]` is the atom placed at position `k`.
/// Isomorphic graphs yield orders whose permuted graphs are identical.
pub fn canonical_order(g: &MolecularGraph) -> Vec<usize> {
    if g.is_empty() {
        return Vec::new();
    }
    let colors = refine(g, initial_colors(g));
    let mut search = Search { g, best: None, leaves: 0 };
    search.run(colors);
    let (_, colors) = search.best.expect("search reaches at least one leaf");
    let mut order = vec![0; g.num_atoms()];
    for (atom, &c) in colors.iter().enumerate() {
        order[c] = atom;
    }
    order
}

/// Canonical SMILES; components are written separately, sorted and joined
/// with `.`.
pub fn canonical_form(g: &MolecularGraph) -> String {
    let mut parts: Vec<String> = g
        .components()
        .into_iter()
        .map(|comp| {
            let sub = g.induced_subgraph(&comp).expect("component indices are valid").graph;
            let canon = sub.permuted(&canonical_order(&sub));
            write_component(&canon, 0)
        })
        .collect();
    parts.sort();
    parts.join(".")
}
