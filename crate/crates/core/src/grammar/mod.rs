//! Learnable context-sensitive grammar: heat diffusion over the augmented
//! motif graph with a set-based memory.
//!
//! Mass vectors are columns: `W[i][j]` is the weight of edge `j -> i`, so
//! `(W x)_i` collects mass arriving at `i`.

mod generate;
mod rules;
mod train;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::GrammarError;
use crate::motifgraph::MotifGraph;

pub use generate::{
    generate, walk_probabilities, EdgeChoice, GenerateConfig, Generation, Move, RandomWalkRepr, Walker,
};
pub use rules::{extract_hard_rules, replay_rule, HardRule, RuleConfig};
pub use train::{
    step_gradient, train, trajectory_gradient, trajectory_loss, walk_targets, Grads, Targets, TrainConfig, TrainReport,
    UpdateMode,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// One-hot targets along the forcing trajectory.
    #[default]
    Forcing,
    /// Mass splits equally along the walk's out-edges.
    Split,
}

/// `Paper`: `x + (D - W) x`. `Heat`: `x - (D - W) x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    #[default]
    Paper,
    Heat,
}

impl SignConvention {
    fn factor(self) -> f64 {
        match self {
            SignConvention::Paper => 1.0,
            SignConvention::Heat => -1.0,
        }
    }
}

/// Diagonal `D` of the diffusion operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DegreeMode {
    /// Number of in-neighbours in the augmented graph.
    Structural,
    /// Row sums of the effective weights, so that `D - W` is a Laplacian.
    #[default]
    Weighted,
}

/// Learned transition model over the `n` nodes of an augmented motif graph.
///
/// Only structural edges carry weight, so the adjustment layer is stored
/// per edge slot: slot `s = (i, j)` owns row `s` of `w_adj`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrammarParams {
    #[serde(rename = "dims")]
    pub n: usize,
    /// Edge slots `(i, j)` for edges `j -> i`, sorted.
    pub slots: Vec<(usize, usize)>,
    /// Prior weights, dense `n x n` row-major.
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    /// Adjustment layer, `slots.len() x n` row-major.
    #[serde(rename = "W_adj")]
    pub w_adj: Vec<f64>,
    /// Row bias, length `n`.
    pub b: Vec<f64>,
    pub sign: SignConvention,
    pub degree: DegreeMode,
    /// Longest training trajectory; generation defaults to twice this.
    pub longest_walk: usize,
}

/// Edge slots of the augmented graph: `(i, j)` whenever `j -> i`.
pub fn structural_slots(g: &MotifGraph) -> Vec<(usize, usize)> {
    let mut slots: Vec<(usize, usize)> =
        g.adjacency().into_iter().enumerate().flat_map(|(j, outs)| outs.into_iter().map(move |i| (i, j))).collect();
    slots.sort_unstable();
    slots
}

impl GrammarParams {
    /// Gaussian prior and adjustment weights, zero bias.
    pub fn init(
        n: usize,
        slots: Vec<(usize, usize)>,
        std: f64,
        sign: SignConvention,
        degree: DegreeMode,
        rng: &mut impl Rng,
    ) -> Self {
        let normal = Normal::new(0.0, std).expect("finite std");
        let e = (0..n * n).map(|_| normal.sample(rng)).collect();
        let w_adj = (0..slots.len() * n).map(|_| normal.sample(rng)).collect();
        GrammarParams { n, slots, e, w_adj, b: vec![0.0; n], sign, degree, longest_walk: 1 }
    }

    pub fn for_graph(g: &MotifGraph, std: f64, sign: SignConvention, degree: DegreeMode, rng: &mut impl Rng) -> Self {
        Self::init(g.num_nodes(), structural_slots(g), std, sign, degree, rng)
    }

    /// Checks that the parameters fit `g`.
    pub fn check_graph(&self, g: &MotifGraph) -> Result<(), GrammarError> {
        if self.n != g.num_nodes() {
            return Err(GrammarError::Dimension { expected: g.num_nodes(), found: self.n });
        }
        if self.slots != structural_slots(g) {
            return Err(GrammarError::Config("parameters were trained on a different graph structure".into()));
        }
        self.check_shapes()
    }

    pub fn check_shapes(&self) -> Result<(), GrammarError> {
        let n = self.n;
        let dims = [(self.e.len(), n * n), (self.w_adj.len(), self.slots.len() * n), (self.b.len(), n)];
        for (found, expected) in dims {
            if found != expected {
                return Err(GrammarError::Dimension { expected, found });
            }
        }
        if self.slots.iter().any(|&(i, j)| i >= n || j >= n) {
            return Err(GrammarError::Config("edge slot out of range".into()));
        }
        Ok(())
    }

    /// Effective weight of every slot under memory `c`.
    pub fn slot_weights(&self, c: &[f64]) -> Vec<f64> {
        let n = self.n;
        self.slots
            .iter()
            .enumerate()
            .map(|(s, &(i, j))| {
                let adj: f64 = self.w_adj[s * n..(s + 1) * n].iter().zip(c).map(|(w, c)| w * c).sum();
                self.e[i * n + j] + adj + self.b[i]
            })
            .collect()
    }

    /// Diagonal of `D` for the given slot weights.
    pub fn degrees(&self, w: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for (s, &(i, _)) in self.slots.iter().enumerate() {
            d[i] += match self.degree {
                DegreeMode::Structural => 1.0,
                DegreeMode::Weighted => w[s],
            };
        }
        d
    }
}

/// Running mean update of the set-based memory.
pub fn memory_update(c: &[f64], p: &[f64], t: usize) -> Vec<f64> {
    let t = t as f64;
    c.iter().zip(p).map(|(c, p)| (t * c + p) / (t + 1.0)).collect()
}

/// Dense masked effective weights `E + h(c)`, zero off the edge slots.
pub fn effective_weights(params: &GrammarParams, c: &[f64]) -> Vec<f64> {
    let n = params.n;
    let mut w = vec![0.0; n * n];
    for (s, v) in params.slot_weights(c).into_iter().enumerate() {
        let (i, j) = params.slots[s];
        w[i * n + j] = v;
    }
    w
}

/// One diffusion step `x + sign (D - W) x` with dense `w` and diagonal `d`.
pub fn diffusion_step(x: &[f64], w: &[f64], d: &[f64], sign: SignConvention) -> Vec<f64> {
    let n = x.len();
    let s = sign.factor();
    (0..n)
        .map(|i| {
            let wx: f64 = (0..n).map(|j| w[i * n + j] * x[j]).sum();
            x[i] + s * (d[i] * x[i] - wx)
        })
        .collect()
}

/// Slot-based diffusion step.
pub(crate) fn diffuse(params: &GrammarParams, x: &[f64], w: &[f64], d: &[f64]) -> Vec<f64> {
    let s = params.sign.factor();
    let mut out: Vec<f64> = x.iter().zip(d).map(|(x, d)| x + s * d * x).collect();
    for (k, &(i, j)) in params.slots.iter().enumerate() {
        out[i] -= s * w[k] * x[j];
    }
    out
}

/// Masked sampling distribution: negative values are clamped to zero, and a
/// vanishing total falls back to uniform. Returns `(index, probability)`
/// in mask order.
pub fn transition_distribution(x: &[f64], mask: &[usize]) -> Result<Vec<(usize, f64)>, GrammarError> {
    if mask.is_empty() {
        return Err(GrammarError::EmptyMask);
    }
    let vals: Vec<f64> = mask.iter().map(|&i| x[i].max(0.0)).collect();
    let total: f64 = vals.iter().sum();
    if !total.is_finite() || total < 1e-12 {
        let u = 1.0 / mask.len() as f64;
        return Ok(mask.iter().map(|&i| (i, u)).collect());
    }
    Ok(mask.iter().zip(vals).map(|(&i, v)| (i, v / total)).collect())
}

pub(crate) fn one_hot(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}
