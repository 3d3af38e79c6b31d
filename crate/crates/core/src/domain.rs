//! Instances, labels, losses and the Euclidean metric.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};

/// Instances may sit on the unit sphere up to this much rounding.
pub const NORM_SLACK: f64 = 1e-12;

/// The loss used for a run. Square pairs with labels in `[0, 1]`,
/// absolute with labels in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Square,
    Absolute,
}

impl LossKind {
    pub fn check_label(self, y: f64) -> Result<()> {
        let ok = match self {
            LossKind::Square => (0.0..=1.0).contains(&y),
            LossKind::Absolute => y == 0.0 || y == 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("label {y} outside the {self} label space")))
        }
    }

    /// Loss without label validation; callers on the hot path have
    /// already checked the label once per round.
    #[inline]
    pub fn eval(self, prediction: f64, y: f64) -> f64 {
        match self {
            LossKind::Square => 0.5 * (y - prediction) * (y - prediction),
            LossKind::Absolute => (y - prediction).abs(),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Square => "square",
            LossKind::Absolute => "absolute",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(LossKind::Square),
            "absolute" => Ok(LossKind::Absolute),
            other => Err(Error::Config(format!("unknown loss `{other}`"))),
        }
    }
}

/// A prediction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Prediction(f64);

impl Prediction {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Prediction(value))
        } else {
            Err(domain(format!("prediction {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// One round of the protocol: the instance, its label and the round index.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub x: Vec<f64>,
    pub y: f64,
    pub t: usize,
}

impl Example {
    pub fn new(x: Vec<f64>, y: f64, t: usize, kind: LossKind) -> Result<Self> {
        check_instance(&x)?;
        kind.check_label(y)?;
        if t == 0 {
            return Err(domain("round indices start at 1"));
        }
        Ok(Example { x, y, t })
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn check_instance(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(domain("instance has dimension 0"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(domain("instance has a non-finite coordinate"));
    }
    let n = norm(x);
    if n > 1.0 + NORM_SLACK {
        return Err(domain(format!("instance norm {n} exceeds 1")));
    }
    Ok(())
}

pub fn loss(kind: LossKind, prediction: Prediction, label: f64) -> Result<f64> {
    kind.check_label(label)?;
    Ok(kind.eval(prediction.value(), label))
}

pub fn distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(domain(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(dist(a, b))
}

/// Euclidean distance for vectors already known to share a dimension.
#[inline]
pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}
