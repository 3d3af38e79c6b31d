use crate::error::{structural, Result};
use crate::pruning::{node_totals, Pruning};

use super::RoundLog;

/// What the learner is measured against.
pub enum Comparator<'a> {
    /// A fixed function of the instance.
    Target(&'a dyn Fn(&[f64]) -> f64),
    /// Each round's pruning leaf, predicting its hindsight-best constant.
    Pruning(&'a Pruning),
    /// An explicit prediction per round.
    Predictions(&'a [f64]),
}

/// Cumulative regret after each round.
pub fn regret_curve(log: &RoundLog, comparator: &Comparator<'_>) -> Result<Vec<f64>> {
    let kind = log.kind;
    let reference: Vec<f64> = match comparator {
        Comparator::Target(f) => log.rounds.iter().map(|r| f(&r.x)).collect(),
        Comparator::Predictions(p) => {
            if p.len() != log.rounds.len() {
                return Err(structural("one comparator prediction per round is needed"));
            }
            p.to_vec()
        }
        Comparator::Pruning(pruning) => {
            let totals = node_totals(log)?;
            log.rounds
                .iter()
                .map(|r| {
                    r.path
                        .iter()
                        .find(|n| pruning.contains(**n))
                        .map(|n| totals.best_value[*n])
                        .ok_or_else(|| structural(format!("round {} misses the pruning", r.t)))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut acc = 0.0;
    Ok(log
        .rounds
        .iter()
        .zip(reference)
        .map(|(r, p)| {
            acc += r.loss - kind.eval(p, r.y);
            acc
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{run_la, LaConfig};
    use crate::domain::{Example, LossKind};
    use crate::net::RadiusSchedule;

    fn log(labels: &[f64]) -> RoundLog {
        let xs: Vec<Example> = labels
            .iter()
            .enumerate()
            .map(|(i, y)| Example::new(vec![0.1 * i as f64], *y, i + 1, LossKind::Square).unwrap())
            .collect();
        let s = RadiusSchedule::lipschitz(vec![1.0, 100.0], 1).unwrap();
        run_la(&xs, &LaConfig::new(s, LossKind::Square)).unwrap()
    }

    #[test]
    fn against_the_labels_is_the_learner_loss() {
        let labels = [0.0, 1.0, 0.5, 0.25, 1.0];
        let l = log(&labels);
        let curve = regret_curve(&l, &Comparator::Predictions(&labels)).unwrap();
        for (c, r) in curve.iter().zip(&l.rounds) {
            assert!((c - r.cum_loss).abs() < 1e-15);
        }
    }

    #[test]
    fn against_itself_is_zero() {
        let l = log(&[0.0, 1.0, 0.5, 0.25, 1.0]);
        let own: Vec<f64> = l.rounds.iter().map(|r| r.yhat).collect();
        let curve = regret_curve(&l, &Comparator::Predictions(&own)).unwrap();
        assert!(curve.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn hand_computed_stream() {
        let labels = [1.0, 0.0, 1.0, 1.0, 0.0];
        let l = log(&labels);
        let f = |_: &[f64]| 0.5;
        let curve = regret_curve(&l, &Comparator::Target(&f)).unwrap();
        let mut manual = 0.0;
        for (i, r) in l.rounds.iter().enumerate() {
            manual += 0.5 * (r.yhat - labels[i]).powi(2) - 0.125;
            assert!((curve[i] - manual).abs() < 1e-15);
        }
        assert!(regret_curve(&l, &Comparator::Predictions(&[0.0])).is_err());
    }

    #[test]
    fn pruning_comparator_uses_hindsight_constants() {
        let labels = [1.0, 0.0, 1.0, 1.0, 0.0];
        let l = log(&labels);
        // one level-1 ball holds every instance; its best constant is 0.6
        let top = Pruning::level_cut(&l.tree, 1).unwrap();
        assert_eq!(top.len(), 1);
        let curve = regret_curve(&l, &Comparator::Pruning(&top)).unwrap();
        let best: f64 = labels.iter().map(|y| 0.5 * (y - 0.6) * (y - 0.6)).sum();
        assert!((curve[4] - (l.cum_loss() - best)).abs() < 1e-12);
    }
}
