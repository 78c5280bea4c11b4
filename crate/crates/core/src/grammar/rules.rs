//! Deterministic rules read off a trained grammar.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EdgeChoice, GrammarParams, Walker};
use crate::error::GrammarError;
use crate::motifgraph::MotifGraph;
use crate::walks::parse_walk;

/// Tolerance for a transition to count as forced.
pub const FORCED_TOLERANCE: f64 = 1e-9;

/// From walk state `lhs` the grammar moves to `rhs` with certainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardRule {
    pub lhs: String,
    pub rhs: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleConfig {
    /// Transitions below this probability are not explored.
    pub theta_min: f64,
    /// Deepest walk explored; defaults to twice the longest training walk.
    pub max_depth: Option<usize>,
    /// Search budget in expanded states.
    pub max_states: usize,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig { theta_min: 0.05, max_depth: None, max_states: 20_000 }
    }
}

struct Frontier<'a> {
    prob: f64,
    order: usize,
    depth: usize,
    walker: Walker<'a>,
}

impl PartialEq for Frontier<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier<'_> {}

impl PartialOrd for Frontier<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob.total_cmp(&other.prob).then_with(|| other.order.cmp(&self.order))
    }
}

/// The forced transition of a distribution, if any.
fn forced(dist: &[(usize, f64)]) -> Option<(usize, f64)> {
    let (i, p) = *dist.iter().max_by(|a, b| a.1.total_cmp(&b.1))?;
    let others_vanish = dist.iter().filter(|d| d.0 != i).all(|d| d.1 <= FORCED_TOLERANCE);
    ((p - 1.0).abs() <= FORCED_TOLERANCE && others_vanish).then_some((i, p))
}

/// Best-first search from every base motif over transitions of probability
/// at least `theta_min`, emitting each forced transition once. Rules are
/// sorted by `(lhs, rhs)`.
pub fn extract_hard_rules(
    params: &GrammarParams,
    g: &MotifGraph,
    cfg: &RuleConfig,
) -> Result<Vec<HardRule>, GrammarError> {
    params.check_graph(g)?;
    if !(cfg.theta_min > 0.0 && cfg.theta_min <= 1.0) {
        return Err(GrammarError::Config("theta_min must lie in (0, 1]".into()));
    }
    let max_depth = cfg.max_depth.unwrap_or(2 * params.longest_walk.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut heap = BinaryHeap::new();
    let mut order = 0;
    for root in 0..g.num_motifs() {
        heap.push(Frontier { prob: 1.0, order, depth: 0, walker: Walker::new(g, params, root, false)? });
        order += 1;
    }
    let mut rules = BTreeMap::new();
    let mut expanded = 0;
    while let Some(state) = heap.pop() {
        if expanded >= cfg.max_states {
            break;
        }
        expanded += 1;
        if state.depth >= max_depth {
            continue;
        }
        let dist = match state.walker.distribution() {
            Ok((_, d)) => d,
            Err(GrammarError::EmptyMask) => continue,
            Err(e) => return Err(e),
        };
        if let Some((target, p)) = forced(&dist) {
            let mut next = state.walker.clone();
            next.step_to(target, EdgeChoice::First, &mut rng)?;
            rules.entry((state.walker.walk_string(), next.walk_string())).or_insert(p);
        }
        for &(target, p) in &dist {
            if p < cfg.theta_min {
                continue;
            }
            let mut next = state.walker.clone();
            next.step_to(target, EdgeChoice::First, &mut rng)?;
            heap.push(Frontier { prob: state.prob * p, order, depth: state.depth + 1, walker: next });
            order += 1;
        }
    }
    Ok(rules.into_iter().map(|((lhs, rhs), probability)| HardRule { lhs, rhs, probability }).collect())
}

/// Replays a rule's left-hand side and returns the probability of its
/// forced transition. Fails if the transition is not forced or leads
/// somewhere other than the right-hand side.
pub fn replay_rule(params: &GrammarParams, g: &MotifGraph, rule: &HardRule) -> Result<f64, GrammarError> {
    let dag = parse_walk(g, &rule.lhs)?;
    let (walker, _) = Walker::replay(params, g, &dag)?;
    if walker.walk_string() != rule.lhs {
        return Err(GrammarError::Transition(format!("left-hand side replays as {}", walker.walk_string())));
    }
    let (_, dist) = walker.distribution()?;
    let (target, p) =
        forced(&dist).ok_or_else(|| GrammarError::Transition(format!("no forced transition after {}", rule.lhs)))?;
    let mut next = walker.clone();
    next.step_to(target, EdgeChoice::First, &mut ChaCha8Rng::seed_from_u64(0))?;
    let reached = next.walk_string();
    if reached != rule.rhs {
        return Err(GrammarError::Transition(format!("forced transition reaches {reached}, not {}", rule.rhs)));
    }
    Ok(p)
}
