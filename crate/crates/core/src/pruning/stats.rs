use crate::bench::RoundLog;
use crate::error::{structural, Result};
use crate::learners::LocalLearner;
use crate::net::{NodeIdx, Tree};

use super::Pruning;

/// Per-node totals over a logged run.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTotals {
    /// `|T_i|`: rounds on which the node was on the active path.
    pub visits: Vec<usize>,
    /// `Lambda_{i,T}`: cumulative loss of the node's local learner.
    pub online: Vec<f64>,
    /// Cumulative loss of the node's hindsight-best constant.
    pub best: Vec<f64>,
    /// The hindsight-best constant `y*_i`.
    pub best_value: Vec<f64>,
}

pub fn node_totals(log: &RoundLog) -> Result<NodeTotals> {
    let m = log.tree.len();
    let mut visits = vec![0; m];
    let mut online = vec![0.0; m];
    let mut learners = vec![LocalLearner::for_loss(log.kind); m];
    for r in &log.rounds {
        for (pos, &n) in r.path.iter().enumerate() {
            visits[n] += 1;
            online[n] += r.node_losses[pos];
            learners[n].update(r.y)?;
        }
    }
    let (best_value, best) = learners.iter().map(|l| l.best()).unzip();
    Ok(NodeTotals {
        visits,
        online,
        best,
        best_value,
    })
}

/// Per-level summary of a pruning over a logged run.
#[derive(Debug, Clone, PartialEq)]
pub struct PruningStats {
    pub horizon: usize,
    /// `M_T`.
    pub nodes: usize,
    /// `|E_k|`.
    pub leaves: Vec<usize>,
    /// `T_{E,k}`: rounds whose pruning leaf sits at level `k`.
    pub visits: Vec<usize>,
    /// `Lambda_{i,T}` per pruning leaf, aligned with [`Pruning::leaves`].
    pub leaf_losses: Vec<f64>,
    /// Hindsight-best constant loss per pruning leaf.
    pub leaf_best_losses: Vec<f64>,
    pub level_losses: Vec<f64>,
    pub level_best_losses: Vec<f64>,
    /// `Lambda_E`.
    pub total_loss: f64,
    pub total_best_loss: f64,
}

impl PruningStats {
    /// `|E|`.
    pub fn size(&self) -> usize {
        self.leaves.iter().sum()
    }

    pub fn depth(&self) -> usize {
        self.leaves.len()
    }
}

fn check_fit(tree: &Tree, log: &RoundLog) -> Result<()> {
    if tree.len() != log.tree.len() || tree.depth() != log.tree.depth() {
        return Err(structural("tree and log describe different runs"));
    }
    Ok(())
}

pub fn stats(tree: &Tree, pruning: &Pruning, log: &RoundLog) -> Result<PruningStats> {
    check_fit(tree, log)?;
    let depth = tree.depth();
    let totals = node_totals(log)?;
    let mut visits = vec![0; depth];
    for r in &log.rounds {
        let leaf = r
            .path
            .iter()
            .find(|n| pruning.contains(**n))
            .ok_or_else(|| structural(format!("round {} misses the pruning", r.t)))?;
        visits[tree.node(*leaf).level() - 1] += 1;
    }
    let mut level_losses = vec![0.0; depth];
    let mut level_best_losses = vec![0.0; depth];
    let mut leaf_losses = Vec::with_capacity(pruning.len());
    let mut leaf_best_losses = Vec::with_capacity(pruning.len());
    for &n in pruning.leaves() {
        let k = tree.node(n).level() - 1;
        level_losses[k] += totals.online[n];
        level_best_losses[k] += totals.best[n];
        leaf_losses.push(totals.online[n]);
        leaf_best_losses.push(totals.best[n]);
    }
    Ok(PruningStats {
        horizon: log.rounds.len(),
        nodes: tree.len(),
        leaves: pruning.level_sizes().to_vec(),
        visits,
        total_loss: leaf_losses.iter().sum(),
        total_best_loss: leaf_best_losses.iter().sum(),
        leaf_losses,
        leaf_best_losses,
        level_losses,
        level_best_losses,
    })
}

/// The pruning with the least total local-learner loss over its leaves.
/// Every logged path reaches depth `D`, so an internal node's rounds are
/// exactly the union of its children's, and the recursion is
/// `value(v) = min(own loss, sum of children's values)`, keeping `v` on ties.
pub fn best_pruning(tree: &Tree, log: &RoundLog) -> Result<(Pruning, f64)> {
    check_fit(tree, log)?;
    let totals = node_totals(log)?;
    best_pruning_where(tree, &totals.online, |_| true)
}

/// Least-cost pruning using only nodes accepted by `allowed` as leaves.
pub fn best_pruning_where(
    tree: &Tree,
    cost: &[f64],
    allowed: impl Fn(NodeIdx) -> bool,
) -> Result<(Pruning, f64)> {
    let m = tree.len();
    let mut value = vec![f64::INFINITY; m];
    let mut cut = vec![false; m];
    for v in (0..m).rev() {
        let own = if allowed(v) { cost[v] } else { f64::INFINITY };
        let children = tree.node(v).children();
        let split = if children.is_empty() {
            f64::INFINITY
        } else {
            children.iter().map(|&c| value[c]).sum()
        };
        if own <= split {
            value[v] = own;
            cut[v] = own.is_finite();
        } else {
            value[v] = split;
        }
    }
    let total: f64 = tree.top().iter().map(|&c| value[c]).sum();
    if !total.is_finite() {
        return Err(structural("no pruning satisfies the restriction"));
    }
    let mut leaves = Vec::new();
    let mut stack: Vec<NodeIdx> = tree.top().to_vec();
    while let Some(v) = stack.pop() {
        if cut[v] {
            leaves.push(v);
        } else {
            stack.extend_from_slice(tree.node(v).children());
        }
    }
    Ok((Pruning::new(tree, leaves)?, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_la, LaConfig};
    use crate::domain::{Example, LossKind};
    use crate::net::RadiusSchedule;
    use crate::pruning::enumerate_prunings;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn toy_log(seed: u64, depth: usize, t: usize) -> RoundLog {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stream: Vec<Example> = (1..=t)
            .map(|i| {
                let x = rng.gen::<f64>();
                let y = if x < 0.3 { 0.2 } else { rng.gen::<f64>() };
                Example::new(vec![x], y, i, LossKind::Square).unwrap()
            })
            .collect();
        let grid = (0..depth).map(|k| 3f64.powi(k as i32)).collect();
        let cfg = LaConfig::new(RadiusSchedule::lipschitz(grid, 1).unwrap(), LossKind::Square);
        run_la(&stream, &cfg).unwrap()
    }

    #[test]
    fn level_cuts_collect_every_visit() {
        let log = toy_log(1, 3, 200);
        let t = &log.tree;
        let deep = stats(t, &Pruning::level_cut(t, 3).unwrap(), &log).unwrap();
        assert_eq!(deep.visits, vec![0, 0, 200]);
        let shallow = stats(t, &Pruning::level_cut(t, 1).unwrap(), &log).unwrap();
        assert_eq!(shallow.visits, vec![200, 0, 0]);
        assert_eq!(shallow.size(), t.level_count(1));
    }

    #[test]
    fn mixed_pruning_matches_replay() {
        let log = toy_log(2, 3, 40);
        let tree = &log.tree;
        let all = enumerate_prunings(tree, 100_000).unwrap();
        let p = &all[all.len() / 2];
        let s = stats(tree, p, &log).unwrap();
        let mut visits = [0usize; 3];
        let mut loss = 0.0;
        for r in &log.rounds {
            let pos = r.path.iter().position(|n| p.contains(*n)).unwrap();
            visits[pos] += 1;
            loss += r.node_losses[pos];
        }
        assert_eq!(s.visits, visits.to_vec());
        assert_eq!(s.visits.iter().sum::<usize>(), 40);
        assert!((s.total_loss - loss).abs() < 1e-9);
        assert!((s.level_losses.iter().sum::<f64>() - s.total_loss).abs() < 1e-9);
    }

    #[test]
    fn best_pruning_matches_enumeration() {
        for seed in 0..8 {
            let log = toy_log(seed, 3, 40);
            let tree = &log.tree;
            let Ok(all) = enumerate_prunings(tree, 200_000) else { continue };
            let (best, value) = best_pruning(tree, &log).unwrap();
            let min = all
                .iter()
                .map(|p| stats(tree, p, &log).unwrap().total_loss)
                .fold(f64::INFINITY, f64::min);
            assert!((value - min).abs() < 1e-9, "seed {seed}");
            assert!((stats(tree, &best, &log).unwrap().total_loss - value).abs() < 1e-9);
        }
    }

    #[test]
    fn ties_keep_the_shallow_cut() {
        let log = toy_log(4, 3, 60);
        let zero = vec![0.0; log.tree.len()];
        let (p, v) = best_pruning_where(&log.tree, &zero, |_| true).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(p, Pruning::level_cut(&log.tree, 1).unwrap());
    }

    #[test]
    fn perfect_top_level_wins() {
        let log = toy_log(5, 3, 60);
        let cost: Vec<f64> = log
            .tree
            .nodes()
            .iter()
            .map(|n| if n.level() == 1 { 0.0 } else { 1.0 })
            .collect();
        let (p, _) = best_pruning_where(&log.tree, &cost, |_| true).unwrap();
        assert_eq!(p, Pruning::level_cut(&log.tree, 1).unwrap());
    }

    #[test]
    fn restriction_is_respected() {
        let log = toy_log(6, 3, 80);
        let tree = &log.tree;
        let totals = node_totals(&log).unwrap();
        let (p, _) =
            best_pruning_where(tree, &totals.online, |n| tree.node(n).level() >= 2).unwrap();
        assert!(p.leaves().iter().all(|&n| tree.node(n).level() >= 2));
        assert!(best_pruning_where(tree, &totals.online, |_| false).is_err());
    }
}
