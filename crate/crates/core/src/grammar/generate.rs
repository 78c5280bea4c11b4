//! Sampling molecules from a trained grammar.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{diffuse, memory_update, one_hot, transition_distribution, GrammarParams};
use crate::assembly::{Assembly, Check};
use crate::error::GrammarError;
use crate::molgraph::MolecularGraph;
use crate::motifgraph::{MotifGraph, MotifRef};
use crate::walks::{dfs_walk, print_walk, WalkDag, WalkNode};

/// Which feasible edge realizes an attachment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeChoice {
    /// Lowest-index feasible edge.
    First,
    /// Uniform among feasible edges.
    #[default]
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerateConfig {
    /// Stop successfully when the walk returns to its root.
    pub loop_back: bool,
    /// Defaults to twice the longest training walk.
    pub max_steps: Option<usize>,
    pub seed: u64,
    /// Root motif id; uniform over base motifs when absent.
    pub start: Option<String>,
    pub edge_choice: EdgeChoice,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig { loop_back: false, max_steps: None, seed: 0, start: None, edge_choice: EdgeChoice::Random }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    Attach { node: MotifRef, edge: usize },
    Return { to: MotifRef },
    Close,
}

/// Transitions allowed from the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    /// Allowed augmented node indices, sorted.
    pub mask: Vec<usize>,
    /// Per attachable node: its index, copy and feasible edges.
    pub attach: Vec<(usize, MotifRef, Vec<usize>)>,
}

/// Generation state: the partial molecule, its walk DAG and the diffusion
/// state. Walk node `k` is assembly instance `k`.
#[derive(Debug, Clone)]
pub struct Walker<'a> {
    g: &'a MotifGraph,
    params: &'a GrammarParams,
    pub assembly: Assembly,
    pub dag: WalkDag,
    pub cursor: usize,
    x: Vec<f64>,
    c: Vec<f64>,
    t: usize,
    loop_back: bool,
}

impl<'a> Walker<'a> {
    pub fn new(
        g: &'a MotifGraph,
        params: &'a GrammarParams,
        root: usize,
        loop_back: bool,
    ) -> Result<Self, GrammarError> {
        params.check_graph(g)?;
        if root >= g.num_motifs() {
            return Err(GrammarError::UnknownNode(root));
        }
        let r = MotifRef::base(root);
        let node = WalkNode {
            motif: r,
            main: true,
            parent: None,
            edge: None,
            back_edge: None,
            children: Vec::new(),
            fragment: None,
        };
        Ok(Walker {
            g,
            params,
            assembly: Assembly::start(g, r),
            dag: WalkDag { nodes: vec![node] },
            cursor: 0,
            x: one_hot(g.num_nodes(), root),
            c: vec![0.0; g.num_nodes()],
            t: 0,
            loop_back,
        })
    }

    fn index(&self, node: usize) -> usize {
        self.g.node_index(self.dag.nodes[node].motif).expect("walker nodes exist")
    }

    /// Next unused copy of base `v`, if any remain.
    fn next_copy(&self, v: usize) -> Option<MotifRef> {
        let used = self.dag.nodes.iter().filter(|n| n.motif.base == v).count();
        (used <= self.g.duplicates[v]).then_some(MotifRef { base: v, copy: used })
    }

    pub fn options(&self) -> Options {
        let g = self.g;
        let u = self.dag.nodes[self.cursor].motif.base;
        let lo = g.edges.partition_point(|e| e.u < u);
        let hi = g.edges.partition_point(|e| e.u <= u);
        let mut attach: Vec<(usize, MotifRef, Vec<usize>)> = Vec::new();
        for e in lo..hi {
            let v = g.edges[e].v;
            if attach.last().is_some_and(|a| a.1.base == v) {
                if self.assembly.can_attach(g, self.cursor, e, Check::Full) {
                    attach.last_mut().expect("checked").2.push(e);
                }
                continue;
            }
            let Some(r) = self.next_copy(v) else { continue };
            let feasible = if self.assembly.can_attach(g, self.cursor, e, Check::Full) { vec![e] } else { Vec::new() };
            attach.push((g.node_index(r).expect("copy exists"), r, feasible));
        }
        attach.retain(|a| !a.2.is_empty());
        let mut mask: Vec<usize> = attach.iter().map(|a| a.0).collect();
        if let Some(p) = self.dag.nodes[self.cursor].parent {
            mask.push(self.index(p));
        }
        if self.loop_back && self.cursor != 0 {
            mask.push(self.index(0));
        }
        mask.sort_unstable();
        mask.dedup();
        Options { mask, attach }
    }

    /// Next diffusion state and memory before masking.
    fn propose(&self) -> (Vec<f64>, Vec<f64>) {
        let here = one_hot(self.g.num_nodes(), self.index(self.cursor));
        let c = memory_update(&self.c, &here, self.t);
        let w = self.params.slot_weights(&c);
        let d = self.params.degrees(&w);
        (diffuse(self.params, &self.x, &w, &d), c)
    }

    /// Allowed transitions and their probabilities.
    pub fn distribution(&self) -> Result<(Options, Vec<(usize, f64)>), GrammarError> {
        let opts = self.options();
        let (x, _) = self.propose();
        let dist = transition_distribution(&x, &opts.mask)?;
        Ok((opts, dist))
    }

    /// Moves to augmented node `target`; returns the move and its
    /// probability.
    pub fn step_to(
        &mut self,
        target: usize,
        choice: EdgeChoice,
        rng: &mut impl Rng,
    ) -> Result<(Move, f64), GrammarError> {
        self.advance(target, |edges| match choice {
            EdgeChoice::First => Some(edges[0]),
            EdgeChoice::Random => Some(edges[rng.random_range(0..edges.len())]),
        })
    }

    /// Like [`Walker::step_to`] but attaches through `edge`, which must be
    /// feasible.
    pub fn step_with_edge(&mut self, target: usize, edge: usize) -> Result<(Move, f64), GrammarError> {
        self.advance(target, |edges| edges.contains(&edge).then_some(edge))
    }

    fn advance(
        &mut self,
        target: usize,
        pick: impl FnOnce(&[usize]) -> Option<usize>,
    ) -> Result<(Move, f64), GrammarError> {
        let opts = self.options();
        let (x, c) = self.propose();
        let dist = transition_distribution(&x, &opts.mask)?;
        let Some(&(_, prob)) = dist.iter().find(|d| d.0 == target) else {
            return Err(GrammarError::Transition(format!(
                "{} from {}",
                self.g.node_name(self.g.node_ref(target)),
                self.g.node_name(self.dag.nodes[self.cursor].motif)
            )));
        };
        let attach = opts.attach.iter().find(|a| a.0 == target);
        let edge = match attach {
            Some(a) => Some(pick(&a.2).ok_or_else(|| GrammarError::Transition("edge is not feasible here".into()))?),
            None => None,
        };
        let mut next = vec![0.0; self.g.num_nodes()];
        for &(i, p) in &dist {
            next[i] = p;
        }
        self.x = next;
        self.c = c;
        self.t += 1;
        let parent = self.dag.nodes[self.cursor].parent;
        if self.loop_back && target == self.index(0) && self.cursor != 0 {
            return Ok((Move::Close, prob));
        }
        if let Some(p) = parent.filter(|&p| self.index(p) == target) {
            self.cursor = p;
            return Ok((Move::Return { to: self.dag.nodes[p].motif }, prob));
        }
        let node = attach.expect("masked attach target").1;
        let edge = edge.expect("attach edge picked");
        let inst = self.assembly.attach(self.g, self.cursor, edge, node, Check::Full)?;
        debug_assert_eq!(inst, self.dag.nodes.len());
        self.dag.nodes.push(WalkNode {
            motif: node,
            main: false,
            parent: Some(self.cursor),
            edge: Some(edge),
            back_edge: None,
            children: Vec::new(),
            fragment: None,
        });
        self.dag.nodes[self.cursor].children.push(inst);
        self.cursor = inst;
        Ok((Move::Attach { node, edge }, prob))
    }

    /// The walk with the path from the root to the cursor as main chain.
    pub fn current_dag(&self) -> WalkDag {
        let mut dag = self.dag.clone();
        for n in &mut dag.nodes {
            n.main = false;
        }
        let mut x = Some(self.cursor);
        while let Some(k) = x {
            dag.nodes[k].main = true;
            x = dag.nodes[k].parent;
        }
        dag
    }

    pub fn walk_string(&self) -> String {
        print_walk(self.g, &self.current_dag())
    }
}

/// Result of one generation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub molecule: MolecularGraph,
    pub dag: WalkDag,
    pub walk: String,
    pub moves: Vec<(Move, f64)>,
    pub valid: bool,
}

fn sample(dist: &[(usize, f64)], rng: &mut impl Rng) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for &(i, p) in dist {
        acc += p;
        if r < acc {
            return i;
        }
    }
    dist.iter().rev().find(|d| d.1 > 0.0).unwrap_or(&dist[dist.len() - 1]).0
}

/// Samples one molecule. Deterministic for a fixed seed.
pub fn generate(params: &GrammarParams, g: &MotifGraph, cfg: &GenerateConfig) -> Result<Generation, GrammarError> {
    if g.num_motifs() == 0 {
        return Err(GrammarError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let root = match &cfg.start {
        Some(id) => g.motif_index(id).ok_or_else(|| GrammarError::Config(format!("unknown start motif {id}")))?,
        None => rng.random_range(0..g.num_motifs()),
    };
    let max_steps = cfg.max_steps.unwrap_or(2 * params.longest_walk.max(1));
    let mut walker = Walker::new(g, params, root, cfg.loop_back)?;
    let mut moves = Vec::new();
    let mut valid = true;
    for _ in 0..max_steps {
        let dist = match walker.distribution() {
            Ok((_, dist)) => dist,
            Err(GrammarError::EmptyMask) => {
                valid = !cfg.loop_back;
                break;
            }
            Err(e) => return Err(e),
        };
        let target = sample(&dist, &mut rng);
        let step = walker.step_to(target, cfg.edge_choice, &mut rng)?;
        moves.push(step);
        if step.0 == Move::Close {
            break;
        }
    }
    let dag = walker.current_dag();
    Ok(Generation {
        valid: valid && walker.assembly.is_valid(),
        walk: print_walk(g, &dag),
        molecule: walker.assembly.molecule,
        dag,
        moves,
    })
}

/// Walk node sequence with the model probability of every transition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkRepr {
    pub nodes: Vec<MotifRef>,
    pub probabilities: Vec<f64>,
}

/// Replays a walk through the model and records transition probabilities.
/// Copies are taken in order of first use, so any consistent duplicate
/// labelling replays identically.
pub fn walk_probabilities(
    params: &GrammarParams,
    g: &MotifGraph,
    dag: &WalkDag,
) -> Result<RandomWalkRepr, GrammarError> {
    let (_, probabilities) = Walker::replay(params, g, dag)?;
    Ok(RandomWalkRepr { nodes: dfs_walk(dag).into_iter().map(|x| dag.nodes[x].motif).collect(), probabilities })
}

impl<'a> Walker<'a> {
    /// Walker positioned at the end of `dag`'s open walk, with the
    /// probability of every transition taken. Stored edges are used when
    /// feasible, otherwise the first feasible edge.
    pub fn replay(
        params: &'a GrammarParams,
        g: &'a MotifGraph,
        dag: &WalkDag,
    ) -> Result<(Self, Vec<f64>), GrammarError> {
        let order = dfs_walk(dag);
        let Some(&first) = order.first() else {
            return Err(GrammarError::Config("empty walk".into()));
        };
        let mut walker = Walker::new(g, params, dag.nodes[first].motif.base, false)?;
        if dag.nodes[first].motif.copy != 0 {
            return Err(GrammarError::Transition("walks start at a base motif".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Walk node to walker node.
        let mut placed = vec![None; dag.len()];
        placed[first] = Some(0);
        let mut probabilities = Vec::with_capacity(order.len().saturating_sub(1));
        for &x in &order[1..] {
            let target = match placed[x] {
                Some(k) => walker.index(k),
                None => {
                    let base = dag.nodes[x].motif.base;
                    let opts = walker.options();
                    let found = opts.attach.iter().find(|a| a.1.base == base).ok_or_else(|| {
                        GrammarError::Transition(format!(
                            "no feasible attachment of {} to {}",
                            g.motifs[base].id,
                            g.node_name(walker.dag.nodes[walker.cursor].motif)
                        ))
                    })?;
                    found.0
                }
            };
            let pinned = dag.nodes[x].edge.filter(|_| placed[x].is_none());
            let step = match pinned {
                Some(e) => match walker.step_with_edge(target, e) {
                    Err(GrammarError::Transition(_)) => walker.step_to(target, EdgeChoice::First, &mut rng),
                    other => other,
                },
                None => walker.step_to(target, EdgeChoice::First, &mut rng),
            };
            let (mv, p) = step?;
            if matches!(mv, Move::Attach { .. }) {
                placed[x] = Some(walker.cursor);
            }
            probabilities.push(p);
        }
        Ok((walker, probabilities))
    }
}
