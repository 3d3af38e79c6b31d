//! Sleeping-experts aggregation over the active root-to-leaf path.
//!
//! Every tree node is an expert that is awake exactly on the rounds where it
//! lies on the active path. Square loss is aggregated with exponential
//! weights at the fixed rate 1/2, absolute loss with AdaNormalHedge. Both
//! touch only the awake nodes, so a round costs O(D).

use crate::bench::RoundLog;
use crate::error::{structural, Error, Result};
use crate::net::NodeIdx;
use crate::pruning::Pruning;

/// Learning rate of the exponential-weights aggregator. The square loss is
/// 1/2-exp-concave on `[0, 1]`, so no tuning is involved.
pub const ETA: f64 = 0.5;

fn unregistered(node: NodeIdx) -> Error {
    Error::Internal(format!("node {node} has no aggregator entry"))
}

/// Exponential weights with sleeping experts.
#[derive(Debug, Clone, PartialEq)]
pub struct EwaState {
    weights: Vec<Option<f64>>,
    initial: f64,
}

impl Default for EwaState {
    fn default() -> Self {
        Self::new()
    }
}

impl EwaState {
    /// Every node enters with weight 1.
    pub fn new() -> Self {
        Self::with_initial_weight(1.0)
    }

    pub fn with_initial_weight(initial: f64) -> Self {
        assert!(initial > 0.0, "initial weight must be positive");
        EwaState {
            weights: Vec::new(),
            initial,
        }
    }

    pub fn register(&mut self, node: NodeIdx) {
        if node >= self.weights.len() {
            self.weights.resize(node + 1, None);
        }
        self.weights[node].get_or_insert(self.initial);
    }

    pub fn weight(&self, node: NodeIdx) -> Option<f64> {
        self.weights.get(node).copied().flatten()
    }

    fn awake(&self, nodes: &[NodeIdx]) -> Result<Vec<f64>> {
        nodes
            .iter()
            .map(|&n| self.weight(n).ok_or_else(|| unregistered(n)))
            .collect()
    }

    /// Awake weights normalized to sum to one.
    pub fn mixture(&self, nodes: &[NodeIdx]) -> Result<Vec<f64>> {
        let w = self.awake(nodes)?;
        let total: f64 = w.iter().sum();
        Ok(w.into_iter().map(|v| v / total).collect())
    }

    /// Weighted mean of the awake predictions.
    pub fn predict(&self, nodes: &[NodeIdx], predictions: &[f64]) -> Result<f64> {
        if nodes.is_empty() {
            return Err(Error::Internal("empty path".into()));
        }
        let w = self.awake(nodes)?;
        let num: f64 = w.iter().zip(predictions).map(|(w, p)| w * p).sum();
        let den: f64 = w.iter().sum();
        Ok((num / den).clamp(0.0, 1.0))
    }

    /// Multiplies each awake weight by `exp(-ETA * loss)` and rescales so the
    /// awake mass is unchanged. Sleeping weights are not touched.
    pub fn update(&mut self, nodes: &[NodeIdx], losses: &[f64]) -> Result<()> {
        let w = self.awake(nodes)?;
        let mass: f64 = w.iter().sum();
        let scaled: Vec<f64> = w
            .iter()
            .zip(losses)
            .map(|(w, l)| w * (-ETA * l).exp())
            .collect();
        let z: f64 = scaled.iter().sum();
        for (&n, s) in nodes.iter().zip(scaled) {
            self.weights[n] = Some(s * mass / z);
        }
        Ok(())
    }
}

/// AdaNormalHedge potential
/// `psi(r, c) = (exp([r+1]_+^2 / (3(c+1))) - exp([r-1]_+^2 / (3(c+1)))) / 2`.
pub fn psi(r: f64, c: f64) -> f64 {
    debug_assert!(c >= 0.0);
    let denom = 3.0 * (c + 1.0);
    let plus = (r + 1.0).max(0.0);
    let minus = (r - 1.0).max(0.0);
    0.5 * ((plus * plus / denom).exp() - (minus * minus / denom).exp())
}

/// Per-node AdaNormalHedge statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnhEntry {
    /// Cumulative regret against the played mixture.
    pub rbar: f64,
    /// Cumulative absolute instantaneous regret.
    pub cum: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnhState {
    entries: Vec<Option<AnhEntry>>,
}

impl AnhState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, node: NodeIdx) {
        if node >= self.entries.len() {
            self.entries.resize(node + 1, None);
        }
        self.entries[node].get_or_insert_with(AnhEntry::default);
    }

    pub fn entry(&self, node: NodeIdx) -> Option<AnhEntry> {
        self.entries.get(node).copied().flatten()
    }

    /// Normalized `psi` weights of the awake nodes; uniform when every
    /// potential vanishes.
    pub fn mixture(&self, nodes: &[NodeIdx]) -> Result<Vec<f64>> {
        if nodes.is_empty() {
            return Err(Error::Internal("empty path".into()));
        }
        let w: Vec<f64> = nodes
            .iter()
            .map(|&n| {
                self.entry(n)
                    .map(|e| psi(e.rbar, e.cum))
                    .ok_or_else(|| unregistered(n))
            })
            .collect::<Result<_>>()?;
        let z: f64 = w.iter().sum();
        if z > 0.0 {
            Ok(w.into_iter().map(|v| v / z).collect())
        } else {
            Ok(vec![1.0 / nodes.len() as f64; nodes.len()])
        }
    }

    pub fn predict(&self, nodes: &[NodeIdx], predictions: &[f64]) -> Result<f64> {
        let w = self.mixture(nodes)?;
        Ok(mix(&w, predictions))
    }

    /// Charges each awake node the regret `mixture loss - own loss`, where
    /// the mixture loss uses the same normalized weights as the prediction.
    pub fn update(&mut self, nodes: &[NodeIdx], losses: &[f64]) -> Result<()> {
        let w = self.mixture(nodes)?;
        let mixed = mix(&w, losses);
        for (&n, l) in nodes.iter().zip(losses) {
            let r = mixed - l;
            let e = self.entries[n].as_mut().ok_or_else(|| unregistered(n))?;
            e.rbar += r;
            e.cum += r.abs();
        }
        Ok(())
    }

    /// One full round: predict, then update against `label`.
    pub fn round(
        &mut self,
        nodes: &[NodeIdx],
        predictions: &[f64],
        label: f64,
        kind: crate::domain::LossKind,
    ) -> Result<f64> {
        kind.check_label(label)?;
        let yhat = self.predict(nodes, predictions)?;
        let losses: Vec<f64> = predictions.iter().map(|p| kind.eval(*p, label)).collect();
        self.update(nodes, &losses)?;
        Ok(yhat)
    }
}

fn mix(weights: &[f64], values: &[f64]) -> f64 {
    weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>().clamp(0.0, f64::MAX)
}

/// Which aggregator a run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum Aggregator {
    Ewa(EwaState),
    Anh(AnhState),
}

impl Aggregator {
    pub fn register(&mut self, node: NodeIdx) {
        match self {
            Aggregator::Ewa(s) => s.register(node),
            Aggregator::Anh(s) => s.register(node),
        }
    }

    pub fn mixture(&self, nodes: &[NodeIdx]) -> Result<Vec<f64>> {
        match self {
            Aggregator::Ewa(s) => s.mixture(nodes),
            Aggregator::Anh(s) => s.mixture(nodes),
        }
    }

    pub fn predict(&self, nodes: &[NodeIdx], predictions: &[f64]) -> Result<f64> {
        match self {
            Aggregator::Ewa(s) => s.predict(nodes, predictions),
            Aggregator::Anh(s) => s.predict(nodes, predictions),
        }
    }

    pub fn update(&mut self, nodes: &[NodeIdx], losses: &[f64]) -> Result<()> {
        match self {
            Aggregator::Ewa(s) => s.update(nodes, losses),
            Aggregator::Anh(s) => s.update(nodes, losses),
        }
    }
}

/// Cumulative loss of the aggregate minus that of the pruning's leaf on each
/// round's path.
pub fn tree_regret(log: &RoundLog, pruning: &Pruning) -> Result<f64> {
    let mut regret = 0.0;
    for r in &log.rounds {
        let pos = r
            .path
            .iter()
            .position(|n| pruning.contains(*n))
            .ok_or_else(|| structural(format!("round {} has no pruning leaf on its path", r.t)))?;
        regret += r.loss - r.node_losses[pos];
    }
    Ok(regret)
}
