use crate::bench::RoundLog;
use crate::domain::{dist, norm};
use crate::net::{NodeIdx, RadiusSchedule, Tree};

use super::{level_capacity, Pruning, PruningStats};

const TOL: f64 = 1e-12;
/// Grid points per axis direction in each audited ball.
const AXIS_POINTS: usize = 64;
/// Radii audited between a ball's birth and the horizon, besides the ends.
const RADII: usize = 32;

/// Checks `|f(x_i) - f(x)| <= L_k rho(k, t)` for one node `i` at level `k`
/// over the instances that visited it and over a grid of points along each
/// axis at a geometric range of rounds from the node's birth to `horizon`.
/// A finite-resolution falsifier: `true` means no violation was found.
pub fn node_admissible(
    f: &dyn Fn(&[f64]) -> f64,
    tree: &Tree,
    node: NodeIdx,
    schedule: &RadiusSchedule,
    horizon: usize,
    visits: &[(usize, &[f64])],
) -> bool {
    let n = tree.node(node);
    let k = n.level();
    let lk = schedule.level_lipschitz(k);
    let center = &n.center;
    let fc = f(center);
    let within = |x: &[f64], r: f64| (f(x) - fc).abs() <= lk * r + TOL;

    for &(t, x) in visits {
        let r = schedule.radius(k, t);
        if dist(x, center) <= r && !within(x, r) {
            return false;
        }
    }

    let birth = n.birth().min(horizon).max(1);
    let ratio = horizon as f64 / birth as f64;
    let mut rounds: Vec<usize> = (0..=RADII)
        .map(|j| (birth as f64 * ratio.powf(j as f64 / RADII as f64)).round() as usize)
        .map(|t| t.clamp(birth, horizon.max(birth)))
        .collect();
    rounds.dedup();

    let mut x = center.clone();
    for t in rounds {
        let r = schedule.radius(k, t);
        for axis in 0..center.len() {
            for m in 1..=AXIS_POINTS / 2 {
                for sign in [-1.0, 1.0] {
                    x[axis] = center[axis] + sign * r * m as f64 / (AXIS_POINTS / 2) as f64;
                    if norm(&x) <= 1.0 && !within(&x, r) {
                        return false;
                    }
                }
            }
            x[axis] = center[axis];
        }
    }
    true
}

/// Instances that visited each node, as `(round, instance)`.
pub(crate) fn visits_by_node(log: &RoundLog) -> Vec<Vec<(usize, &[f64])>> {
    let mut out = vec![Vec::new(); log.tree.len()];
    for r in &log.rounds {
        for &n in &r.path {
            out[n].push((r.t, r.x.as_slice()));
        }
    }
    out
}

/// Whether `f` has the local Lipschitz profile of `schedule` on every leaf
/// ball of `pruning`.
pub fn admissible_lipschitz(
    f: &dyn Fn(&[f64]) -> f64,
    tree: &Tree,
    pruning: &Pruning,
    schedule: &RadiusSchedule,
    log: &RoundLog,
) -> bool {
    let visits = visits_by_node(log);
    let horizon = log.rounds.len();
    pruning
        .leaves()
        .iter()
        .all(|&n| node_admissible(f, tree, n, schedule, horizon, &visits[n]))
}

/// `|E_k| <= C (L T)^(d_k/(1+d_k))` at every level.
pub fn admissible_dim(
    level_sizes: &[usize],
    cover: f64,
    schedule: &RadiusSchedule,
    horizon: usize,
) -> bool {
    level_sizes.iter().enumerate().all(|(i, n)| {
        *n == 0 || *n as f64 <= cover * level_capacity(schedule, i + 1, horizon) * (1.0 + TOL)
    })
}

/// Whether the leaves of each level lose at most `tau_k(T_{E,k})` in total.
pub fn admissible_loss(stats: &PruningStats, schedule: &RadiusSchedule) -> bool {
    stats
        .level_losses
        .iter()
        .zip(&stats.visits)
        .enumerate()
        .all(|(i, (loss, v))| *loss <= schedule.tau(i + 1, *v as f64) + 1e-9)
}
