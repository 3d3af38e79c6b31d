use crate::aggregate::{Aggregator, AnhState, EwaState};
use crate::domain::{Example, LossKind};
use crate::error::{config, Result};
use crate::learners::LocalLearner;
use crate::net::{Mode, NodeIdx, RadiusSchedule, Tau, Tree, Visit};

/// One logged round.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub t: usize,
    pub x: Vec<f64>,
    pub y: f64,
    pub yhat: f64,
    pub loss: f64,
    /// Running sum of `loss` up to and including this round.
    pub cum_loss: f64,
    pub path: Vec<NodeIdx>,
    pub node_predictions: Vec<f64>,
    pub node_losses: Vec<f64>,
    pub created: Vec<bool>,
    /// Level of the path node holding the most aggregator weight when the
    /// prediction was made.
    pub leaf_level: usize,
}

impl Round {
    pub fn new_nodes(&self) -> usize {
        self.created.iter().filter(|c| **c).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub kind: LossKind,
    pub schedule: RadiusSchedule,
    pub rounds: Vec<Round>,
    pub tree: Tree,
}

impl RoundLog {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }

    /// `M_T`.
    pub fn node_count(&self) -> usize {
        self.tree.len()
    }

    pub fn cum_loss(&self) -> f64 {
        self.rounds.last().map_or(0.0, |r| r.cum_loss)
    }

    pub fn visits(&self) -> impl Iterator<Item = Visit<'_>> {
        self.rounds.iter().map(|r| Visit {
            t: r.t,
            x: &r.x,
            path: &r.path,
            created: &r.created,
        })
    }
}

/// Settings of one locally adaptive run.
#[derive(Debug, Clone, PartialEq)]
pub struct LaConfig {
    pub schedule: RadiusSchedule,
    pub kind: LossKind,
    /// Level budget constant; required in dimension mode, unused otherwise.
    pub cover: Option<f64>,
    /// Weight a node enters the exponential-weights aggregator with.
    pub initial_weight: f64,
}

impl LaConfig {
    pub fn new(schedule: RadiusSchedule, kind: LossKind) -> Self {
        LaConfig {
            schedule,
            kind,
            cover: None,
            initial_weight: 1.0,
        }
    }

    pub fn with_cover(mut self, cover: f64) -> Self {
        self.cover = Some(cover);
        self
    }

    /// Lipschitz and dimension modes go with the square loss, local-loss
    /// mode with the absolute loss.
    pub fn validate(&self) -> Result<()> {
        let expected = match self.schedule.mode() {
            Mode::Lipschitz | Mode::Dimension => LossKind::Square,
            Mode::LocalLoss => LossKind::Absolute,
        };
        if self.kind != expected {
            return Err(config(format!(
                "{} mode runs with the {expected} loss, not {}",
                self.schedule.mode(),
                self.kind
            )));
        }
        match (self.schedule.mode(), self.cover) {
            (Mode::Dimension, None) => Err(config("dimension mode needs a cover constant")),
            (Mode::Dimension, Some(c)) if !(c.is_finite() && c > 0.0) => {
                Err(config("cover constant must be positive"))
            }
            (Mode::Lipschitz | Mode::LocalLoss, Some(_)) => {
                Err(config("a cover constant only applies in dimension mode"))
            }
            _ if !(self.initial_weight.is_finite() && self.initial_weight > 0.0) => {
                Err(config("initial weight must be positive"))
            }
            _ => Ok(()),
        }
    }
}

/// Runs the locally adaptive learner over `stream`.
pub fn run_la(stream: &[Example], cfg: &LaConfig) -> Result<RoundLog> {
    cfg.validate()?;
    let kind = cfg.kind;
    let s = &cfg.schedule;
    let mut tree = Tree::new(s.depth());
    let mut learners: Vec<LocalLearner> = Vec::new();
    let mut agg = match kind {
        LossKind::Square => Aggregator::Ewa(EwaState::with_initial_weight(cfg.initial_weight)),
        LossKind::Absolute => Aggregator::Anh(AnhState::new()),
    };
    let mut rounds = Vec::with_capacity(stream.len());
    let mut cum_loss = 0.0;
    for ex in stream {
        kind.check_label(ex.y)?;
        let path = match cfg.cover {
            Some(c) => tree.propagate_dim(&ex.x, ex.t, s, c)?,
            None => tree.propagate(&ex.x, ex.t, s)?,
        };
        while learners.len() < tree.len() {
            agg.register(learners.len());
            learners.push(LocalLearner::for_loss(kind));
        }
        let preds: Vec<f64> = path.nodes.iter().map(|&n| learners[n].predict()).collect();
        let mixture = agg.mixture(&path.nodes)?;
        let yhat = agg.predict(&path.nodes, &preds)?;
        let loss = kind.eval(yhat, ex.y);
        let node_losses: Vec<f64> = preds.iter().map(|p| kind.eval(*p, ex.y)).collect();
        agg.update(&path.nodes, &node_losses)?;
        for &n in &path.nodes {
            learners[n].update(ex.y)?;
        }
        let heaviest = mixture
            .iter()
            .enumerate()
            .fold(0, |best, (i, w)| if *w > mixture[best] { i } else { best });
        cum_loss += loss;
        rounds.push(Round {
            t: ex.t,
            x: ex.x.clone(),
            y: ex.y,
            yhat,
            loss,
            cum_loss,
            leaf_level: heaviest + 1,
            node_predictions: preds,
            node_losses,
            created: path.created,
            path: path.nodes,
        });
    }
    Ok(RoundLog {
        kind,
        schedule: cfg.schedule.clone(),
        rounds,
        tree,
    })
}

/// The flat baseline: one level with the global Lipschitz constant. Square
/// loss uses radius `(L t)^(-1/(d+1))`; absolute loss uses the local-loss
/// radius with `tau(n) = n`.
pub fn hm_config(lipschitz: f64, dim: u32, kind: LossKind) -> Result<LaConfig> {
    let schedule = match kind {
        LossKind::Square => RadiusSchedule::lipschitz(vec![lipschitz], dim)?,
        LossKind::Absolute => RadiusSchedule::local_loss(lipschitz, Tau::Linear, 1, dim)?,
    };
    Ok(LaConfig::new(schedule, kind))
}

pub fn run_hm(stream: &[Example], lipschitz: f64, dim: u32, kind: LossKind) -> Result<RoundLog> {
    run_la(stream, &hm_config(lipschitz, dim, kind)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{gen_stream, StreamSpec, TargetFunction, TargetPreset};
    use crate::net::covering_audit;

    fn stream(t: usize, seed: u64, preset: TargetPreset) -> Vec<Example> {
        let f = TargetFunction::preset(preset, 2.0, 32.0).unwrap();
        gen_stream(&StreamSpec::new(t, 1, seed), &f).unwrap().examples
    }

    #[test]
    fn single_level_equals_baseline() {
        let xs = stream(500, 3, TargetPreset::MostlyFlat);
        let la = run_la(
            &xs,
            &LaConfig::new(RadiusSchedule::lipschitz(vec![32.0], 1).unwrap(), LossKind::Square),
        )
        .unwrap();
        assert_eq!(la, run_hm(&xs, 32.0, 1, LossKind::Square).unwrap());
    }

    #[test]
    fn cold_start_predicts_half() {
        let xs = stream(1, 1, TargetPreset::MostlyFlat);
        let log = run_hm(&xs, 4.0, 1, LossKind::Square).unwrap();
        assert_eq!(log.rounds[0].yhat, 0.5);
        assert_eq!(log.tree.len(), 1);
    }

    #[test]
    fn constant_target_is_learned_exactly() {
        let xs = stream(300, 2, TargetPreset::Constant);
        let s = RadiusSchedule::lipschitz(vec![1.0, 2.0, 4.0], 1).unwrap();
        let log = run_la(&xs, &LaConfig::new(s, LossKind::Square)).unwrap();
        assert_eq!(log.cum_loss(), 0.0);
        assert!(log.rounds.iter().all(|r| r.node_predictions.iter().all(|p| *p == 0.5)));
    }

    #[test]
    fn hm_ball_count_is_bounded() {
        let xs = stream(10_000, 8, TargetPreset::UniformlyRough);
        let l = 4.0;
        let log = run_hm(&xs, l, 1, LossKind::Square).unwrap();
        assert!(log.tree.len() as f64 <= 2.0 * (l * 10_000.0f64).sqrt() + 1.0);
    }

    #[test]
    fn log_invariants() {
        let xs = stream(400, 4, TargetPreset::MostlyFlat);
        let s = RadiusSchedule::lipschitz(vec![2.0, 4.0, 8.0, 16.0, 32.0], 1).unwrap();
        let log = run_la(&xs, &LaConfig::new(s.clone(), LossKind::Square)).unwrap();
        assert_eq!(log.horizon(), 400);
        let mut sum = 0.0;
        for r in &log.rounds {
            sum += r.loss;
            assert!((r.cum_loss - sum).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&r.yhat));
            let lo = r.node_predictions.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.node_predictions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(r.yhat >= lo - 1e-12 && r.yhat <= hi + 1e-12);
            assert!((1..=5).contains(&r.leaf_level));
        }
        assert!(covering_audit(&log.tree, log.visits(), &s).passed());
    }

    #[test]
    fn config_pairing_is_enforced() {
        let xs = stream(10, 1, TargetPreset::Constant);
        let loss = RadiusSchedule::local_loss(1.0, Tau::Pow, 2, 1).unwrap();
        assert!(run_la(&xs, &LaConfig::new(loss, LossKind::Square)).is_err());
        let lip = RadiusSchedule::lipschitz(vec![1.0], 1).unwrap();
        assert!(run_la(&xs, &LaConfig::new(lip.clone(), LossKind::Absolute)).is_err());
        assert!(run_la(&xs, &LaConfig::new(lip, LossKind::Square).with_cover(1.0)).is_err());
        let dim = RadiusSchedule::dimension(1.0, vec![1]).unwrap();
        assert!(run_la(&xs, &LaConfig::new(dim, LossKind::Square)).is_err());
    }
}
