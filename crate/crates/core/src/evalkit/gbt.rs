//! Gradient-boosted regression trees.

use serde::{Deserialize, Serialize};

use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Squared loss.
    #[default]
    Regression,
    /// Logistic loss on 0/1 labels; predictions are probabilities.
    Classification,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtConfig {
    pub n_estimators: usize,
    pub max_depth: usize,
    pub lr: f64,
    pub task: Task,
    pub min_samples_leaf: usize,
}

impl Default for GbtConfig {
    fn default() -> Self {
        GbtConfig { n_estimators: 16, max_depth: 10, lr: 0.3, task: Task::Regression, min_samples_leaf: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf(f64),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf(v) => return v,
                Node::Split { feature, threshold, left, right } => {
                    k = if x[feature] <= threshold { left } else { right };
                }
            }
        }
    }
}

/// Fitted boosted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gbt {
    pub task: Task,
    base: f64,
    lr: f64,
    trees: Vec<Tree>,
    /// Training loss before any tree and after each round.
    pub train_loss: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    /// Negative gradients.
    g: &'a [f64],
    /// Hessians.
    h: &'a [f64],
    cfg: &'a GbtConfig,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&self, rows: &[usize]) -> f64 {
        let g: f64 = rows.iter().map(|&r| self.g[r]).sum();
        let h: f64 = rows.iter().map(|&r| self.h[r]).sum();
        if h > 0.0 {
            g / h
        } else {
            0.0
        }
    }

    /// Best variance-reduction split as `(gain, feature, threshold)`.
    fn best_split(&self, rows: &[usize]) -> Option<(f64, usize, f64)> {
        let n = rows.len();
        let min = self.cfg.min_samples_leaf.max(1);
        if n < 2 * min {
            return None;
        }
        let total: f64 = rows.iter().map(|&r| self.g[r]).sum();
        let base = total * total / n as f64;
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(n);
        for f in 0..self.x[rows[0]].len() {
            sorted.clear();
            sorted.extend(rows.iter().map(|&r| (self.x[r][f], self.g[r])));
            if sorted.iter().all(|p| p.0 == sorted[0].0) {
                continue;
            }
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = 0.0;
            for k in 0..n - 1 {
                left += sorted[k].1;
                if sorted[k].0 == sorted[k + 1].0 || k + 1 < min || n - k - 1 < min {
                    continue;
                }
                let (nl, nr) = ((k + 1) as f64, (n - k - 1) as f64);
                let right = total - left;
                let gain = left * left / nl + right * right / nr - base;
                if best.is_none_or(|b| gain > b.0 + 1e-12) {
                    best = Some((gain, f, 0.5 * (sorted[k].0 + sorted[k + 1].0)));
                }
            }
        }
        best.filter(|b| b.0 > 1e-12)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf(self.leaf(&rows)));
        if depth >= self.cfg.max_depth {
            return me;
        }
        let Some((_, feature, threshold)) = self.best_split(&rows) else {
            return me;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[me] = Node::Split { feature, threshold, left, right };
        me
    }
}

impl Gbt {
    pub fn fit(x: &[Vec<f64>], y: &[f64], cfg: &GbtConfig) -> Result<Gbt, EvalError> {
        if x.len() != y.len() {
            return Err(EvalError::Length(x.len(), y.len()));
        }
        if x.len() < 2 {
            return Err(EvalError::TooFewSamples(2));
        }
        let width = x[0].len();
        if let Some(bad) = x.iter().find(|r| r.len() != width) {
            return Err(EvalError::Length(width, bad.len()));
        }
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let base = match cfg.task {
            Task::Regression => mean,
            Task::Classification => {
                let p = mean.clamp(1e-6, 1.0 - 1e-6);
                (p / (1.0 - p)).ln()
            }
        };
        let mut model = Gbt { task: cfg.task, base, lr: cfg.lr, trees: Vec::new(), train_loss: Vec::new() };
        let mut raw = vec![base; y.len()];
        model.train_loss.push(model.loss(&raw, y));
        for _ in 0..cfg.n_estimators {
            let (g, h): (Vec<f64>, Vec<f64>) = match cfg.task {
                Task::Regression => (y.iter().zip(&raw).map(|(y, f)| y - f).collect(), vec![1.0; y.len()]),
                Task::Classification => raw
                    .iter()
                    .zip(y)
                    .map(|(f, y)| {
                        let p = sigmoid(*f);
                        (y - p, (p * (1.0 - p)).max(1e-12))
                    })
                    .unzip(),
            };
            let mut b = Builder { x, g: &g, h: &h, cfg, nodes: Vec::new() };
            b.grow((0..y.len()).collect(), 0);
            let tree = Tree { nodes: b.nodes };
            for (f, row) in raw.iter_mut().zip(x) {
                *f += cfg.lr * tree.predict(row);
            }
            model.trees.push(tree);
            model.train_loss.push(model.loss(&raw, y));
        }
        Ok(model)
    }

    fn loss(&self, raw: &[f64], y: &[f64]) -> f64 {
        let n = y.len() as f64;
        match self.task {
            Task::Regression => raw.iter().zip(y).map(|(f, y)| (f - y) * (f - y)).sum::<f64>() / n,
            Task::Classification => raw.iter().zip(y).map(|(f, y)| (1.0 + f.exp()).ln() - y * f).sum::<f64>() / n,
        }
    }

    fn raw(&self, x: &[f64]) -> f64 {
        self.base + self.lr * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    /// Regression value or class-1 probability.
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.task {
            Task::Regression => self.raw(x),
            Task::Classification => sigmoid(self.raw(x)),
        }
    }
}
