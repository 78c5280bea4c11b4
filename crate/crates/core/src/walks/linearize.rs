use itertools::Itertools;

use super::WalkDag;

/// Upper bound on the orderings produced per DAG by [`AugmentMode::Permute`].
pub const DEFAULT_PERMUTATION_CAP: usize = 64;

/// Node sequence of the walk: every side chain is an excursion that returns
/// to its branch point, while the main chain is followed once. With
/// `closed`, the walk finally retraces the main chain back to the root.
pub fn euler_linearize(dag: &WalkDag, closed: bool) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * dag.len());
    if dag.is_empty() {
        return out;
    }
    // (node, next child position)
    let mut stack = vec![(0usize, 0usize)];
    out.push(0);
    while let Some(&(x, k)) = stack.last() {
        let kids = &dag.nodes[x].children;
        if k < kids.len() {
            stack.last_mut().expect("non-empty").1 += 1;
            out.push(kids[k]);
            stack.push((kids[k], 0));
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                if !dag.nodes[x].main {
                    out.push(p);
                }
            }
        }
    }
    if closed {
        let chain = dag.main_chain();
        out.extend(chain.iter().rev().skip(1));
    }
    out
}

/// Open walk order used to replay a molecule step by step.
pub fn dfs_walk(dag: &WalkDag) -> Vec<usize> {
    euler_linearize(dag, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    /// Re-root at the other end of the main chain.
    Reverse,
    /// Reorder side chains at every branch point.
    Permute,
}

fn reversed(dag: &WalkDag) -> WalkDag {
    let chain = dag.main_chain();
    let mut out = dag.clone();
    for w in chain.windows(2) {
        let (p, c) = (w[0], w[1]);
        let old = &dag.nodes[c];
        out.nodes[p].parent = Some(c);
        out.nodes[p].edge = old.back_edge;
        out.nodes[p].back_edge = old.edge;
        out.nodes[p].children.retain(|&k| k != c);
        out.nodes[c].children.push(p);
    }
    let root = *chain.last().expect("non-empty");
    out.nodes[root].parent = None;
    out.nodes[root].edge = None;
    out.nodes[root].back_edge = None;
    // The new main child goes last.
    for &x in &chain {
        let main: Vec<usize> = out.nodes[x].children.iter().copied().filter(|&k| out.nodes[k].main).collect();
        out.nodes[x].children.retain(|k| !main.contains(k));
        out.nodes[x].children.extend(main);
    }
    out.renumber();
    out
}

fn permutations(dag: &WalkDag, cap: usize) -> Vec<WalkDag> {
    let branch: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..dag.len())
        .filter_map(|x| {
            let (side, main): (Vec<usize>, Vec<usize>) =
                dag.nodes[x].children.iter().partition(|&&k| !dag.nodes[k].main || !dag.nodes[x].main);
            // Inside a side chain the last child continues the chain and may
            // be reordered too.
            (side.len() > 1).then_some((x, side, main))
        })
        .collect();
    if branch.is_empty() {
        return vec![dag.clone()];
    }
    let choices: Vec<Vec<Vec<usize>>> =
        branch.iter().map(|(_, side, _)| side.iter().copied().permutations(side.len()).take(cap).collect()).collect();
    choices
        .iter()
        .multi_cartesian_product()
        .take(cap)
        .map(|pick| {
            let mut d = dag.clone();
            for ((x, _, main), order) in branch.iter().zip(pick) {
                d.nodes[*x].children = order.iter().chain(main).copied().collect();
            }
            d.renumber();
            d
        })
        .collect()
}

/// Data augmentation: each input yields itself followed by its variants.
/// Permutations are capped at `cap` per DAG.
pub fn augment_data(dags: &[WalkDag], mode: AugmentMode, cap: usize) -> Vec<WalkDag> {
    let mut out = Vec::new();
    for d in dags {
        if d.is_empty() {
            continue;
        }
        match mode {
            AugmentMode::Reverse => {
                out.push(d.clone());
                if d.main_chain().len() > 1 {
                    out.push(reversed(d));
                }
            }
            AugmentMode::Permute => out.extend(permutations(d, cap.max(1))),
        }
    }
    out
}
