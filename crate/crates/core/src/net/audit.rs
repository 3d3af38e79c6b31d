//! Covering and packing checks over a finished run.

use crate::domain::dist;

use super::schedule::RadiusSchedule;
use super::tree::{NodeId, NodeIdx, Tree};

const SLACK: f64 = 1e-12;

/// What the audit needs to know about one logged round.
#[derive(Debug, Clone, Copy)]
pub struct Visit<'a> {
    pub t: usize,
    pub x: &'a [f64],
    pub path: &'a [NodeIdx],
    pub created: &'a [bool],
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    /// `(round, level)` pairs where the instance was outside its
    /// activated ball without having created it.
    pub covering: Vec<(usize, usize)>,
    /// Nodes born within radius of an earlier sibling in the parent ball.
    pub packing: Vec<NodeId>,
    /// Rounds whose path is not a root-to-leaf chain.
    pub broken_paths: Vec<usize>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.covering.is_empty() && self.packing.is_empty() && self.broken_paths.is_empty()
    }

    pub fn packing_passed(&self) -> bool {
        self.packing.is_empty()
    }

    pub fn covering_passed(&self) -> bool {
        self.covering.is_empty()
    }
}

/// Checks that (a) every logged instance was within `rho(k, t)` of its
/// level-`k` center unless it created that center, and (b) every node was
/// born farther than `rho(k, birth)` from each earlier sibling considered at
/// its birth.
pub fn covering_audit<'a>(
    tree: &Tree,
    visits: impl IntoIterator<Item = Visit<'a>>,
    schedule: &RadiusSchedule,
) -> AuditReport {
    let mut report = AuditReport::default();
    for v in visits {
        let chained = v.path.len() == tree.depth()
            && v.path.iter().enumerate().all(|(i, &n)| {
                tree.node(n).level() == i + 1
                    && tree.node(n).parent == if i == 0 { None } else { Some(v.path[i - 1]) }
            });
        if !chained {
            report.broken_paths.push(v.t);
            continue;
        }
        for (i, (&n, &new)) in v.path.iter().zip(v.created).enumerate() {
            let k = i + 1;
            if new {
                continue;
            }
            if dist(v.x, &tree.node(n).center) > schedule.radius(k, v.t) + SLACK {
                report.covering.push((v.t, k));
            }
        }
    }

    for (idx, node) in tree.nodes().iter().enumerate() {
        let k = node.level();
        let birth = node.birth();
        let earlier: Vec<NodeIdx> = tree
            .children_of(node.parent)
            .iter()
            .copied()
            .filter(|&s| s < idx)
            .collect();
        if earlier.is_empty() {
            continue;
        }
        let in_ball: Vec<NodeIdx> = match node.parent {
            None => earlier.clone(),
            Some(p) => earlier
                .iter()
                .copied()
                .filter(|&s| {
                    dist(&tree.node(s).center, &tree.node(p).center)
                        <= schedule.radius(k - 1, birth)
                })
                .collect(),
        };
        let candidates = if in_ball.is_empty() { &earlier } else { &in_ball };
        let nearest = candidates
            .iter()
            .map(|&s| dist(&tree.node(s).center, &node.center))
            .fold(f64::INFINITY, f64::min);
        if nearest <= schedule.radius(k, birth) {
            report.packing.push(node.id);
        }
    }
    report
}
