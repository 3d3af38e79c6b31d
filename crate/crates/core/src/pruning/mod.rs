//! Prunings of a hierarchical net: validation, counting, enumeration,
//! per-level statistics, admissibility and regret-bound calculators.

mod admissible;
mod bounds;
mod stats;

pub use admissible::{admissible_dim, admissible_lipschitz, admissible_loss, node_admissible};
pub use bounds::{
    dimension_bound, leaf_count_check, leaf_count_sweep, level_capacity, lipschitz_bound,
    loss_bound, BoundReport, LeafCount, LeafCountSweep, ANH_CONSTANT,
};
pub use stats::{best_pruning, best_pruning_where, node_totals, stats, NodeTotals, PruningStats};

use crate::error::{structural, Error, Result};
use crate::net::{NodeId, NodeIdx, Tree};

/// A set of tree nodes such that every root-to-leaf path of the tree passes
/// through exactly one of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruning {
    leaves: Vec<NodeIdx>,
    member: Vec<bool>,
    per_level: Vec<usize>,
}

impl Pruning {
    pub fn new(tree: &Tree, mut leaves: Vec<NodeIdx>) -> Result<Self> {
        if tree.is_empty() {
            return Err(structural("an empty tree has no prunings"));
        }
        leaves.sort_unstable();
        if leaves.windows(2).any(|w| w[0] == w[1]) {
            return Err(structural("pruning lists a node twice"));
        }
        if let Some(&bad) = leaves.iter().find(|&&n| n >= tree.len()) {
            return Err(structural(format!("node {bad} is not in the tree")));
        }
        let mut member = vec![false; tree.len()];
        let mut per_level = vec![0; tree.depth()];
        for &n in &leaves {
            member[n] = true;
            per_level[tree.node(n).level() - 1] += 1;
        }
        for (idx, node) in tree.nodes().iter().enumerate() {
            if !node.children().is_empty() {
                continue;
            }
            let mut hits = 0;
            let mut cur = Some(idx);
            while let Some(c) = cur {
                hits += member[c] as usize;
                cur = tree.node(c).parent;
            }
            if hits != 1 {
                return Err(structural(format!(
                    "path to {} meets the pruning {hits} times",
                    node.id
                )));
            }
        }
        Ok(Pruning {
            leaves,
            member,
            per_level,
        })
    }

    pub fn from_ids(tree: &Tree, ids: &[NodeId]) -> Result<Self> {
        let leaves = ids
            .iter()
            .map(|id| {
                tree.find(*id)
                    .ok_or_else(|| structural(format!("node {id} is not in the tree")))
            })
            .collect::<Result<_>>()?;
        Self::new(tree, leaves)
    }

    /// Every node of level `k`. Each internal node has at least one child,
    /// so this is a pruning for every `k`.
    pub fn level_cut(tree: &Tree, k: usize) -> Result<Self> {
        let leaves = tree
            .nodes()
            .iter()
            .enumerate()
            .filter(|(_, n)| n.level() == k)
            .map(|(i, _)| i)
            .collect();
        Self::new(tree, leaves)
    }

    /// Leaves in arena order.
    pub fn leaves(&self) -> &[NodeIdx] {
        &self.leaves
    }

    pub fn contains(&self, node: NodeIdx) -> bool {
        self.member.get(node).copied().unwrap_or(false)
    }

    /// `|E|`.
    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// `|E_k|` for `k` in `1..=D`.
    pub fn level_sizes(&self) -> &[usize] {
        &self.per_level
    }

    /// One leaf per line, `level<TAB>birth`.
    pub fn export(&self, tree: &Tree) -> String {
        self.leaves
            .iter()
            .map(|&n| {
                let id = tree.node(n).id;
                format!("{}\t{}\n", id.level, id.birth)
            })
            .collect()
    }

    pub fn parse(tree: &Tree, text: &str) -> Result<Self> {
        let ids = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let mut it = line.split('\t');
                let parse = |s: Option<&str>| {
                    s.and_then(|v| v.trim().parse::<usize>().ok())
                        .ok_or_else(|| structural(format!("bad pruning line `{line}`")))
                };
                let level = parse(it.next())?;
                let birth = parse(it.next())?;
                Ok(NodeId { level, birth })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_ids(tree, &ids)
    }

    /// Human-readable summary: `|E|` and the per-level sizes.
    pub fn describe(&self) -> String {
        let levels: Vec<String> = self.per_level.iter().map(|c| c.to_string()).collect();
        format!("{} leaves, per level {}", self.len(), levels.join("/"))
    }
}

/// Number of prunings: `count(v) = 1 + prod count(children)` for internal
/// nodes, 1 for leaves, and the product over level-1 nodes at the root.
/// Saturates at `u128::MAX`.
pub fn count_prunings(tree: &Tree) -> u128 {
    let mut count = vec![1u128; tree.len()];
    for idx in (0..tree.len()).rev() {
        let children = tree.node(idx).children();
        if !children.is_empty() {
            let prod = children
                .iter()
                .fold(1u128, |acc, &c| acc.saturating_mul(count[c]));
            count[idx] = prod.saturating_add(1);
        }
    }
    if tree.is_empty() {
        return 0;
    }
    tree.top()
        .iter()
        .fold(1u128, |acc, &c| acc.saturating_mul(count[c]))
}

/// All prunings of `tree`, refusing when there are more than `cap`.
pub fn enumerate_prunings(tree: &Tree, cap: usize) -> Result<Vec<Pruning>> {
    let count = count_prunings(tree);
    if count > cap as u128 {
        return Err(Error::CapExceeded { count, cap });
    }
    let top = product(tree.top().iter().map(|&c| options(tree, c)).collect());
    top.into_iter().map(|leaves| Pruning::new(tree, leaves)).collect()
}

fn options(tree: &Tree, node: NodeIdx) -> Vec<Vec<NodeIdx>> {
    let children = tree.node(node).children();
    let mut out = vec![vec![node]];
    if !children.is_empty() {
        out.extend(product(children.iter().map(|&c| options(tree, c)).collect()));
    }
    out
}

fn product(parts: Vec<Vec<Vec<NodeIdx>>>) -> Vec<Vec<NodeIdx>> {
    parts.into_iter().fold(vec![Vec::new()], |acc, opts| {
        acc.iter()
            .flat_map(|prefix| {
                opts.iter().map(move |o| {
                    let mut v = prefix.clone();
                    v.extend_from_slice(o);
                    v
                })
            })
            .collect()
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::net::RadiusSchedule;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_tree(seed: u64, depth: usize, rounds: usize) -> Tree {
        let grid: Vec<f64> = (0..depth).map(|k| 4f64.powi(k as i32)).collect();
        let s = RadiusSchedule::lipschitz(grid, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tree = Tree::new(depth);
        for t in 1..=rounds {
            tree.propagate(&[rng.gen::<f64>()], t, &s).unwrap();
        }
        tree
    }

    fn brute_count(tree: &Tree, node: Option<NodeIdx>) -> u128 {
        let kids = tree.children_of(node);
        let prod: u128 = kids.iter().map(|&c| brute_count(tree, Some(c))).product();
        match node {
            None => prod,
            Some(_) if kids.is_empty() => 1,
            Some(_) => prod + 1,
        }
    }

    #[test]
    fn path_tree_has_depth_prunings() {
        let s = RadiusSchedule::lipschitz(vec![1.0, 2.0, 4.0, 8.0], 1).unwrap();
        let mut tree = Tree::new(4);
        tree.propagate(&[0.2], 1, &s).unwrap();
        assert_eq!(count_prunings(&tree), 4);
        let all = enumerate_prunings(&tree, 10).unwrap();
        assert_eq!(all.len(), 4);
        assert!(all.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn one_parent_two_children() {
        let s = RadiusSchedule::lipschitz(vec![1.0, 4.0], 1).unwrap();
        let mut tree = Tree::new(2);
        tree.propagate(&[0.0], 1, &s).unwrap();
        tree.propagate(&[0.6], 2, &s).unwrap();
        let all = enumerate_prunings(&tree, 10).unwrap();
        let sets: Vec<Vec<NodeIdx>> = all.iter().map(|p| p.leaves().to_vec()).collect();
        assert_eq!(sets, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn count_matches_brute_force() {
        for seed in 0..20 {
            let tree = random_tree(seed, 3, 30);
            assert_eq!(count_prunings(&tree), brute_count(&tree, None));
            if count_prunings(&tree) <= 5000 {
                let all = enumerate_prunings(&tree, 5000).unwrap();
                assert_eq!(all.len() as u128, count_prunings(&tree));
                let mut sets: Vec<_> = all.iter().map(|p| p.leaves().to_vec()).collect();
                sets.sort();
                sets.dedup();
                assert_eq!(sets.len(), all.len());
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let tree = random_tree(3, 3, 200);
        let n = count_prunings(&tree);
        assert!(n > 2);
        match enumerate_prunings(&tree, 2) {
            Err(Error::CapExceeded { count, cap }) => assert_eq!((count, cap), (n, 2)),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn invalid_prunings_are_rejected() {
        let s = RadiusSchedule::lipschitz(vec![1.0, 4.0], 1).unwrap();
        let mut tree = Tree::new(2);
        tree.propagate(&[0.0], 1, &s).unwrap();
        tree.propagate(&[0.6], 2, &s).unwrap();
        // parent plus child: double cover
        assert!(Pruning::new(&tree, vec![0, 1]).is_err());
        // one child only: the other path is uncovered
        assert!(Pruning::new(&tree, vec![1]).is_err());
        assert!(Pruning::new(&tree, vec![0, 0]).is_err());
        assert!(Pruning::new(&tree, vec![7]).is_err());
        assert!(Pruning::new(&Tree::new(2), vec![]).is_err());
    }

    #[test]
    fn level_cuts_are_valid() {
        let tree = random_tree(5, 4, 100);
        for k in 1..=4 {
            let p = Pruning::level_cut(&tree, k).unwrap();
            assert_eq!(p.len(), tree.level_count(k));
            assert_eq!(p.level_sizes()[k - 1], p.len());
        }
    }

    #[test]
    fn export_roundtrip() {
        let tree = random_tree(6, 3, 50);
        let p = Pruning::level_cut(&tree, 2).unwrap();
        let text = p.export(&tree);
        assert!(text.lines().all(|l| l.starts_with("2\t")));
        assert_eq!(Pruning::parse(&tree, &text).unwrap(), p);
        assert!(Pruning::parse(&tree, "2\tx\n").is_err());
    }
}
