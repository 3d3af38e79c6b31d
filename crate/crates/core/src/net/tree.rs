use std::fmt;

use crate::domain::{check_instance, dist};
use crate::error::{domain, Result};
use crate::format::g17;

use super::schedule::{Mode, RadiusSchedule};

/// Index of a node in its tree's arena.
pub type NodeIdx = usize;

/// Stable node identity: a node is named by its level and the round that
/// created it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub level: usize,
    pub birth: usize,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.birth)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub center: Vec<f64>,
    /// `None` for level-1 nodes, whose parent is the implicit root.
    pub parent: Option<NodeIdx>,
    children: Vec<NodeIdx>,
}

impl Node {
    pub fn level(&self) -> usize {
        self.id.level
    }

    pub fn birth(&self) -> usize {
        self.id.birth
    }

    /// Children in creation order.
    pub fn children(&self) -> &[NodeIdx] {
        &self.children
    }
}

/// The nodes activated on one round, one per level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<NodeIdx>,
    pub created: Vec<bool>,
}

impl Path {
    pub fn new_nodes(&self) -> usize {
        self.created.iter().filter(|c| **c).count()
    }
}

/// A hierarchical net grown online, viewed as a rooted tree of depth `D`.
///
/// The root is implicit: the unit ball centered at the origin. Nodes live
/// in an arena in creation order, so indices are deterministic given the
/// instance stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    depth: usize,
    dim: Option<usize>,
    nodes: Vec<Node>,
    top: Vec<NodeIdx>,
    level_counts: Vec<usize>,
    last_round: usize,
}

impl Tree {
    pub fn new(depth: usize) -> Self {
        assert!(depth >= 1, "tree depth must be positive");
        Tree {
            depth,
            dim: None,
            nodes: Vec::new(),
            top: Vec::new(),
            level_counts: vec![0; depth],
            last_round: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Number of nodes ever created, excluding the root (`M_T`).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: NodeIdx) -> &Node {
        &self.nodes[idx]
    }

    /// Children of the root: the level-1 nodes.
    pub fn top(&self) -> &[NodeIdx] {
        &self.top
    }

    /// Children of `parent`, or of the root when `parent` is `None`.
    pub fn children_of(&self, parent: Option<NodeIdx>) -> &[NodeIdx] {
        match parent {
            None => &self.top,
            Some(p) => &self.nodes[p].children,
        }
    }

    /// `|S_k|` for `k` in `1..=D`.
    pub fn level_count(&self, k: usize) -> usize {
        self.level_counts[k - 1]
    }

    pub fn level_counts(&self) -> &[usize] {
        &self.level_counts
    }

    pub fn find(&self, id: NodeId) -> Option<NodeIdx> {
        // Nodes are stored in birth order; all nodes of one round are
        // contiguous, so a binary search on birth narrows it to <= D nodes.
        let start = self.nodes.partition_point(|n| n.id.birth < id.birth);
        self.nodes[start..]
            .iter()
            .take_while(|n| n.id.birth == id.birth)
            .position(|n| n.id.level == id.level)
            .map(|off| start + off)
    }

    /// Whether every path from `a` up to the root passes through `b`.
    pub fn is_ancestor_or_self(&self, b: NodeIdx, mut a: NodeIdx) -> bool {
        loop {
            if a == b {
                return true;
            }
            match self.nodes[a].parent {
                Some(p) => a = p,
                None => return false,
            }
        }
    }

    /// Maps `x` to its root-to-leaf path, creating nodes where `x` is not
    /// covered by an existing ball.
    pub fn propagate(&mut self, x: &[f64], t: usize, schedule: &RadiusSchedule) -> Result<Path> {
        self.descend(x, t, schedule, None)
    }

    /// Like [`Tree::propagate`], but a level only grows while its size is
    /// within `cover * radius^(-d_k)`. A new node always brings a fresh
    /// chain down to depth `D`, so creation at level `k` also requires
    /// budget at every deeper level.
    pub fn propagate_dim(
        &mut self,
        x: &[f64],
        t: usize,
        schedule: &RadiusSchedule,
        cover: f64,
    ) -> Result<Path> {
        if schedule.mode() != Mode::Dimension {
            return Err(crate::error::config("propagate_dim needs a dimension schedule"));
        }
        if !(cover.is_finite() && cover > 0.0) {
            return Err(crate::error::config("cover constant must be positive"));
        }
        self.descend(x, t, schedule, Some(cover))
    }

    /// Level-`k` size budget `C * rho(k, t)^(-d_k)` at round `t`.
    pub fn level_budget(schedule: &RadiusSchedule, cover: f64, k: usize, t: usize) -> f64 {
        cover * schedule.radius(k, t).powf(-(schedule.level_dim(k) as f64))
    }

    fn descend(
        &mut self,
        x: &[f64],
        t: usize,
        schedule: &RadiusSchedule,
        cover: Option<f64>,
    ) -> Result<Path> {
        check_instance(x)?;
        match self.dim {
            Some(d) if d != x.len() => {
                return Err(domain(format!(
                    "instance has dimension {} but the tree holds dimension {d}",
                    x.len()
                )))
            }
            _ => {}
        }
        if t <= self.last_round {
            return Err(domain(format!(
                "round {t} does not follow round {}",
                self.last_round
            )));
        }
        if schedule.depth() != self.depth {
            return Err(crate::error::config(format!(
                "schedule depth {} does not match tree depth {}",
                schedule.depth(),
                self.depth
            )));
        }
        self.dim = Some(x.len());
        self.last_round = t;

        let mut parent: Option<NodeIdx> = None;
        let mut path = Path {
            nodes: Vec::with_capacity(self.depth),
            created: Vec::with_capacity(self.depth),
        };
        for k in 1..=self.depth {
            let eps = schedule.radius(k, t);
            let closest = self.closest_child(parent, x, k, t, schedule);
            let chosen = match closest {
                Some((s, d)) if d <= eps => Some(s),
                Some((s, _)) => match cover {
                    Some(c) if !self.budget_allows(schedule, c, k, t) => Some(s),
                    _ => None,
                },
                None => None,
            };
            let node = match chosen {
                Some(s) => {
                    path.created.push(false);
                    s
                }
                None => {
                    path.created.push(true);
                    self.create(parent, k, t, x)
                }
            };
            path.nodes.push(node);
            parent = Some(node);
        }
        Ok(path)
    }

    /// Closest child of `parent` to `x` among those whose center lies in the
    /// parent's current ball; all children when none does. Ties go to the
    /// earliest-born child.
    fn closest_child(
        &self,
        parent: Option<NodeIdx>,
        x: &[f64],
        k: usize,
        t: usize,
        schedule: &RadiusSchedule,
    ) -> Option<(NodeIdx, f64)> {
        let children = self.children_of(parent);
        let in_ball = |c: &NodeIdx| match parent {
            None => true,
            Some(p) => {
                dist(&self.nodes[*c].center, &self.nodes[p].center) <= schedule.radius(k - 1, t)
            }
        };
        let argmin = |it: &mut dyn Iterator<Item = &NodeIdx>| {
            let mut best: Option<(NodeIdx, f64)> = None;
            for &c in it {
                let d = dist(&self.nodes[c].center, x);
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((c, d));
                }
            }
            best
        };
        argmin(&mut children.iter().filter(|c| in_ball(c)))
            .or_else(|| argmin(&mut children.iter()))
    }

    fn budget_allows(&self, schedule: &RadiusSchedule, cover: f64, k: usize, t: usize) -> bool {
        (k..=self.depth)
            .all(|j| self.level_count(j) as f64 <= Self::level_budget(schedule, cover, j, t))
    }

    fn create(&mut self, parent: Option<NodeIdx>, level: usize, t: usize, x: &[f64]) -> NodeIdx {
        let idx = self.nodes.len();
        self.nodes.push(Node {
            id: NodeId { level, birth: t },
            center: x.to_vec(),
            parent,
            children: Vec::new(),
        });
        match parent {
            None => self.top.push(idx),
            Some(p) => self.nodes[p].children.push(idx),
        }
        self.level_counts[level - 1] += 1;
        idx
    }

    /// One node per line, in creation order:
    /// `level<TAB>birth<TAB>parent_birth<TAB>coords`, with the root's birth
    /// written as 0.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let parent_birth = n.parent.map_or(0, |p| self.nodes[p].id.birth);
            let coords: Vec<String> = n.center.iter().map(|v| g17(*v)).collect();
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                n.id.level,
                n.id.birth,
                parent_birth,
                coords.join(",")
            ));
        }
        out
    }
}
