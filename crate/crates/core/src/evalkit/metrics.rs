//! Prediction metrics and the repeated hold-out protocol.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gbt::{Gbt, GbtConfig, Task};
use crate::error::EvalError;

fn check(preds: &[f64], targets: &[f64]) -> Result<(), EvalError> {
    if preds.len() != targets.len() {
        return Err(EvalError::Length(preds.len(), targets.len()));
    }
    if preds.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

pub fn mae(preds: &[f64], targets: &[f64]) -> Result<f64, EvalError> {
    check(preds, targets)?;
    Ok(preds.iter().zip(targets).map(|(p, t)| (p - t).abs()).sum::<f64>() / preds.len() as f64)
}

/// Coefficient of determination `1 - SS_res / SS_tot`.
pub fn r2(preds: &[f64], targets: &[f64]) -> Result<f64, EvalError> {
    check(preds, targets)?;
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    let ss_tot: f64 = targets.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(EvalError::ConstantTargets);
    }
    let ss_res: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Fraction of probabilities on the correct side of 0.5.
pub fn accuracy(probs: &[f64], labels: &[f64]) -> Result<f64, EvalError> {
    check(probs, labels)?;
    let hits = probs.iter().zip(labels).filter(|(p, l)| (**p > 0.5) == (**l > 0.5)).count();
    Ok(hits as f64 / probs.len() as f64)
}

/// Area under the ROC curve via the rank-sum statistic with tied ranks
/// averaged.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64, EvalError> {
    check(scores, labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    let pos = labels.iter().filter(|&&l| l > 0.5).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l > 0.5).map(|(r, _)| r).sum();
    let (pos, neg) = (pos as f64, neg as f64);
    Ok((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// Metrics of one task; the other task's fields are absent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PredictionMetrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

impl PredictionMetrics {
    fn fields(&self) -> [Option<f64>; 4] {
        [self.mae, self.r2, self.accuracy, self.auc]
    }

    fn from_fields(f: [Option<f64>; 4]) -> Self {
        PredictionMetrics { mae: f[0], r2: f[1], accuracy: f[2], auc: f[3] }
    }
}

pub fn evaluate_predictions(preds: &[f64], targets: &[f64], task: Task) -> Result<PredictionMetrics, EvalError> {
    Ok(match task {
        Task::Regression => {
            PredictionMetrics { mae: Some(mae(preds, targets)?), r2: Some(r2(preds, targets)?), ..Default::default() }
        }
        Task::Classification => PredictionMetrics {
            accuracy: Some(accuracy(preds, targets)?),
            auc: Some(auc(preds, targets)?),
            ..Default::default()
        },
    })
}

/// One hold-out run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub metrics: PredictionMetrics,
    /// `(sample index, target, prediction)` over the test split.
    pub predictions: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub runs: Vec<SeedResult>,
    pub mean: PredictionMetrics,
    /// Population standard deviation across seeds.
    pub std: PredictionMetrics,
}

/// Shuffled `train_frac` hold-out split per seed, a fresh model per split,
/// and mean and standard deviation of the test metrics.
pub fn run_protocol(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &GbtConfig,
    seeds: &[u64],
    train_frac: f64,
) -> Result<ProtocolReport, EvalError> {
    check(y, y)?;
    if x.len() != y.len() {
        return Err(EvalError::Length(x.len(), y.len()));
    }
    if seeds.is_empty() {
        return Err(EvalError::Empty);
    }
    let n = y.len();
    let n_train = ((n as f64 * train_frac).round() as usize).clamp(2, n.saturating_sub(1));
    if n < 3 {
        return Err(EvalError::TooFewSamples(3));
    }
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (train, test) = idx.split_at(n_train);
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let model = Gbt::fit(&tx, &ty, cfg)?;
        let preds: Vec<f64> = test.iter().map(|&i| model.predict(&x[i])).collect();
        let truth: Vec<f64> = test.iter().map(|&i| y[i]).collect();
        let metrics = evaluate_predictions(&preds, &truth, cfg.task)?;
        let predictions = test.iter().zip(&truth).zip(&preds).map(|((&i, &t), &p)| (i, t, p)).collect();
        runs.push(SeedResult { seed, metrics, predictions });
    }
    let k = runs.len() as f64;
    let mut mean = [None; 4];
    let mut std = [None; 4];
    for f in 0..4 {
        let vals: Vec<f64> = runs.iter().filter_map(|r| r.metrics.fields()[f]).collect();
        if vals.len() == runs.len() {
            let m = vals.iter().sum::<f64>() / k;
            mean[f] = Some(m);
            std[f] = Some((vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / k).sqrt());
        }
    }
    Ok(ProtocolReport { runs, mean: PredictionMetrics::from_fields(mean), std: PredictionMetrics::from_fields(std) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn perfect_and_mean_predictions() {
        let t = [1.0, 2.0, 4.0, 7.0];
        assert_eq!(mae(&t, &t).unwrap(), 0.0);
        assert_eq!(r2(&t, &t).unwrap(), 1.0);
        assert_eq!(r2(&[3.5; 4], &t).unwrap(), 0.0);
        assert_eq!(r2(&t, &[1.0; 4]), Err(EvalError::ConstantTargets));
        assert_eq!(auc(&[0.1, 0.9], &[1.0, 1.0]), Err(EvalError::SingleClass));
        assert_eq!(mae(&[1.0], &[]), Err(EvalError::Length(1, 0)));
    }

    #[test]
    fn metrics_match_direct_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p: Vec<f64> = (0..100).map(|_| rng.random()).collect();
        let t: Vec<f64> = (0..100).map(|_| rng.random()).collect();
        let l: Vec<f64> = (0..100).map(|_| rng.random_range(0..2) as f64).collect();
        let direct_mae = p.iter().zip(&t).map(|(a, b)| (a - b).abs()).sum::<f64>() / 100.0;
        assert!((mae(&p, &t).unwrap() - direct_mae).abs() < 1e-10);
        let mean = t.iter().sum::<f64>() / 100.0;
        let direct_r2 = 1.0
            - p.iter().zip(&t).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                / t.iter().map(|b| (b - mean).powi(2)).sum::<f64>();
        assert!((r2(&p, &t).unwrap() - direct_r2).abs() < 1e-10);
        // Pairwise AUC definition.
        let (mut wins, mut pairs) = (0.0, 0.0);
        for i in 0..100 {
            for j in 0..100 {
                if l[i] == 1.0 && l[j] == 0.0 {
                    pairs += 1.0;
                    wins += if p[i] > p[j] {
                        1.0
                    } else if p[i] == p[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        assert!((auc(&p, &l).unwrap() - wins / pairs).abs() < 1e-10);
        let tied = [0.5, 0.5, 0.5, 0.5];
        assert_eq!(auc(&tied, &[0.0, 1.0, 0.0, 1.0]).unwrap(), 0.5);
        let direct_acc = p.iter().zip(&l).filter(|(a, b)| (**a > 0.5) == (**b > 0.5)).count() as f64 / 100.0;
        assert_eq!(accuracy(&p, &l).unwrap(), direct_acc);
    }

    #[test]
    fn protocol_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x: Vec<Vec<f64>> =
            (0..60).map(|_| vec![rng.random_range(0..5) as f64, rng.random_range(0..5) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| 2.0 * r[0] - r[1]).collect();
        let a = run_protocol(&x, &y, &GbtConfig::default(), &[0, 1, 2], 0.8).unwrap();
        let b = run_protocol(&x, &y, &GbtConfig::default(), &[0, 1, 2], 0.8).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.len(), 3);
        assert_eq!(a.runs[0].predictions.len(), 12);
        assert!(a.mean.r2.unwrap() > 0.9, "{:?}", a.mean);
        assert!(a.std.r2.unwrap() >= 0.0 && a.mean.auc.is_none());
    }
}
