//! Training targets, exact gradients and the Adam training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{diffuse, memory_update, one_hot, DegreeMode, GrammarParams, SignConvention, Strategy};
use crate::error::GrammarError;
use crate::motifgraph::MotifGraph;
use crate::walks::{dfs_walk, WalkDag};

/// When parameters are updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateMode {
    /// After every diffusion step, holding the incoming state fixed.
    #[default]
    Step,
    /// Once per trajectory with the full backpropagated gradient.
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub strategy: Strategy,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    #[serde(rename = "sign_convention")]
    pub sign: SignConvention,
    pub degree: DegreeMode,
    pub update: UpdateMode,
    /// Diffusion steps per trajectory; defaults to the walk length.
    pub steps: Option<usize>,
    pub init_std: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            strategy: Strategy::Forcing,
            epochs: 200,
            lr: 1e-3,
            seed: 0,
            sign: SignConvention::Paper,
            degree: DegreeMode::Weighted,
            update: UpdateMode::Step,
            steps: None,
            init_std: 0.1,
        }
    }
}

/// Target mass vectors `p^0 .. p^T` of one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Targets {
    pub p: Vec<Vec<f64>>,
}

impl Targets {
    pub fn steps(&self) -> usize {
        self.p.len() - 1
    }
}

/// Builds the targets of a walk over the augmented nodes of `g`.
pub fn walk_targets(
    g: &MotifGraph,
    dag: &WalkDag,
    strategy: Strategy,
    steps: Option<usize>,
) -> Result<Targets, GrammarError> {
    let n = g.num_nodes();
    let index: Vec<usize> = dag
        .nodes
        .iter()
        .map(|node| g.node_index(node.motif).ok_or(GrammarError::UnknownNode(node.motif.base)))
        .collect::<Result<_, _>>()?;
    let Some(&root) = index.first() else {
        return Err(GrammarError::Config("empty walk".into()));
    };
    let traj: Vec<usize> = dfs_walk(dag).into_iter().map(|x| index[x]).collect();
    let steps = steps.unwrap_or(traj.len());
    let mut p = vec![one_hot(n, root)];
    match strategy {
        Strategy::Forcing => {
            for t in 0..steps {
                p.push(one_hot(n, traj[(t + 1) % traj.len()]));
            }
        }
        Strategy::Split => {
            let mut out = vec![Vec::new(); n];
            for (x, node) in dag.nodes.iter().enumerate() {
                if let Some(par) = node.parent {
                    out[index[par]].push(index[x]);
                }
            }
            for _ in 0..steps {
                let prev = p.last().expect("non-empty");
                let mut next = vec![0.0; n];
                for (j, outs) in out.iter().enumerate() {
                    for &i in outs {
                        next[i] += prev[j] / outs.len() as f64;
                    }
                }
                p.push(next);
            }
        }
    }
    Ok(Targets { p })
}

/// Gradients with the layout of [`GrammarParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads {
    pub e: Vec<f64>,
    pub w_adj: Vec<f64>,
    pub b: Vec<f64>,
}

impl Grads {
    fn zeros(params: &GrammarParams) -> Self {
        Grads { e: vec![0.0; params.e.len()], w_adj: vec![0.0; params.w_adj.len()], b: vec![0.0; params.n] }
    }
}

fn mse(x: &[f64], p: &[f64]) -> f64 {
    x.iter().zip(p).map(|(x, p)| (x - p) * (x - p)).sum::<f64>() / x.len() as f64
}

/// Cached forward state of one step.
struct StepCache {
    x: Vec<f64>,
    c: Vec<f64>,
    w: Vec<f64>,
    d: Vec<f64>,
    out: Vec<f64>,
}

fn forward_step(params: &GrammarParams, x: Vec<f64>, c: Vec<f64>) -> StepCache {
    let w = params.slot_weights(&c);
    let d = params.degrees(&w);
    let out = diffuse(params, &x, &w, &d);
    StepCache { x, c, w, d, out }
}

/// Accumulates parameter gradients of one step given `g = dL/dout` and
/// returns `dL/dx`.
fn backward_step(params: &GrammarParams, cache: &StepCache, g: &[f64], grads: &mut Grads) -> Vec<f64> {
    let n = params.n;
    let s = params.sign.factor();
    let weighted = params.degree == DegreeMode::Weighted;
    let mut gx: Vec<f64> = (0..n).map(|j| g[j] + s * g[j] * cache.d[j]).collect();
    for (k, &(i, j)) in params.slots.iter().enumerate() {
        let own = if weighted { cache.x[i] } else { 0.0 };
        let gw = s * g[i] * (own - cache.x[j]);
        grads.e[i * n + j] += gw;
        grads.b[i] += gw;
        if gw != 0.0 {
            for (dw, c) in grads.w_adj[k * n..(k + 1) * n].iter_mut().zip(&cache.c) {
                *dw += gw * c;
            }
        }
        gx[j] -= s * g[i] * cache.w[k];
    }
    gx
}

/// Mean per-step loss of a trajectory run from `p^0`.
pub fn trajectory_loss(params: &GrammarParams, targets: &Targets) -> f64 {
    let mut x = targets.p[0].clone();
    let mut c = vec![0.0; params.n];
    let mut total = 0.0;
    for t in 0..targets.steps() {
        c = memory_update(&c, &targets.p[t], t);
        let cache = forward_step(params, x, c.clone());
        total += mse(&cache.out, &targets.p[t + 1]);
        x = cache.out;
    }
    total / targets.steps().max(1) as f64
}

/// Loss and exact gradient of [`trajectory_loss`] through every step.
pub fn trajectory_gradient(params: &GrammarParams, targets: &Targets) -> (f64, Grads) {
    let steps = targets.steps();
    let mut caches = Vec::with_capacity(steps);
    let mut x = targets.p[0].clone();
    let mut c = vec![0.0; params.n];
    let mut total = 0.0;
    for t in 0..steps {
        c = memory_update(&c, &targets.p[t], t);
        let cache = forward_step(params, x, c.clone());
        total += mse(&cache.out, &targets.p[t + 1]);
        x = cache.out.clone();
        caches.push(cache);
    }
    let mut grads = Grads::zeros(params);
    let scale = 2.0 / (params.n as f64 * steps.max(1) as f64);
    let mut gx = vec![0.0; params.n];
    for t in (0..steps).rev() {
        let cache = &caches[t];
        let g: Vec<f64> =
            cache.out.iter().zip(&targets.p[t + 1]).zip(&gx).map(|((o, p), gx)| gx + scale * (o - p)).collect();
        gx = backward_step(params, cache, &g, &mut grads);
    }
    (total / steps.max(1) as f64, grads)
}

/// Loss and gradient of one step from a fixed state `x` and memory `c`.
pub fn step_gradient(params: &GrammarParams, x: &[f64], c: &[f64], target: &[f64]) -> (f64, Vec<f64>, Grads) {
    let cache = forward_step(params, x.to_vec(), c.to_vec());
    let loss = mse(&cache.out, target);
    let g: Vec<f64> = cache.out.iter().zip(target).map(|(o, p)| 2.0 * (o - p) / params.n as f64).collect();
    let mut grads = Grads::zeros(params);
    backward_step(params, &cache, &g, &mut grads);
    (loss, cache.out, grads)
}

struct Adam {
    lr: f64,
    t: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(len: usize, lr: f64) -> Self {
        Adam { lr, t: 0, m: vec![0.0; len], v: vec![0.0; len] }
    }

    fn step(&mut self, params: &mut GrammarParams, grads: &Grads) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        let values = params.e.iter_mut().chain(&mut params.w_adj).chain(&mut params.b);
        let gs = grads.e.iter().chain(&grads.w_adj).chain(&grads.b);
        for (((p, g), m), v) in values.zip(gs).zip(&mut self.m).zip(&mut self.v) {
            if !g.is_finite() {
                continue;
            }
            *m = Self::B1 * *m + (1.0 - Self::B1) * g;
            *v = Self::B2 * *v + (1.0 - Self::B2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
        }
    }
}

/// Trained parameters and the mean loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub params: GrammarParams,
    pub epoch_loss: Vec<f64>,
}

/// Fits grammar parameters to a walk corpus.
pub fn train(g: &MotifGraph, walks: &[WalkDag], cfg: &TrainConfig) -> Result<TrainReport, GrammarError> {
    if g.num_nodes() == 0 {
        return Err(GrammarError::EmptyGraph);
    }
    if walks.is_empty() {
        return Err(GrammarError::Config("no training walks".into()));
    }
    if cfg.lr.is_nan() || cfg.lr <= 0.0 || cfg.init_std.is_nan() || cfg.init_std < 0.0 {
        return Err(GrammarError::Config("learning rate must be positive and init_std non-negative".into()));
    }
    let targets: Vec<Targets> =
        walks.iter().map(|w| walk_targets(g, w, cfg.strategy, cfg.steps)).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = GrammarParams::for_graph(g, cfg.init_std, cfg.sign, cfg.degree, &mut rng);
    params.longest_walk = walks.iter().map(|w| dfs_walk(w).len()).max().unwrap_or(1);
    let total = params.e.len() + params.w_adj.len() + params.b.len();
    let mut adam = Adam::new(total, cfg.lr);
    let mut order: Vec<usize> = (0..targets.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut count = 0usize;
        for &k in &order {
            let tg = &targets[k];
            match cfg.update {
                UpdateMode::Trajectory => {
                    let (loss, grads) = trajectory_gradient(&params, tg);
                    adam.step(&mut params, &grads);
                    sum += loss * tg.steps() as f64;
                    count += tg.steps();
                }
                UpdateMode::Step => {
                    let mut x = tg.p[0].clone();
                    let mut c = vec![0.0; params.n];
                    for t in 0..tg.steps() {
                        c = memory_update(&c, &tg.p[t], t);
                        let (loss, out, grads) = step_gradient(&params, &x, &c, &tg.p[t + 1]);
                        adam.step(&mut params, &grads);
                        sum += loss;
                        count += 1;
                        x = out;
                    }
                }
            }
        }
        epoch_loss.push(sum / count.max(1) as f64);
    }
    Ok(TrainReport { params, epoch_loss })
}
