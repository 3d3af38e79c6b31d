use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Example, LossKind};
use crate::error::{config, Error, Result};

use super::TargetFunction;

/// Identifier of the pseudo-random generator behind every stream.
pub const RNG_ALGORITHM: &str = "chacha8-rand_chacha-0.3";

/// How instances are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InstanceLaw {
    /// `u / sqrt(d)` with `u` uniform on the unit cube.
    Uniform,
    /// An `m`-dimensional sheet: the first `m` coordinates are uniform and
    /// the rest are smooth functions of them.
    Manifold { m: usize },
}

impl fmt::Display for InstanceLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceLaw::Uniform => f.write_str("uniform"),
            InstanceLaw::Manifold { m } => write!(f, "manifold:{m}"),
        }
    }
}

impl FromStr for InstanceLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "uniform" {
            return Ok(InstanceLaw::Uniform);
        }
        match s.strip_prefix("manifold:").map(str::parse::<usize>) {
            Some(Ok(m)) if m >= 1 => Ok(InstanceLaw::Manifold { m }),
            _ => Err(config(format!("unknown stream `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub horizon: usize,
    pub dim: usize,
    pub seed: u64,
    pub law: InstanceLaw,
    /// Amplitude `a` of uniform label noise on `[-a, a]`.
    pub noise: f64,
    /// Square loss gets real labels, absolute loss thresholded binary ones.
    pub kind: LossKind,
}

impl StreamSpec {
    pub fn new(horizon: usize, dim: usize, seed: u64) -> Self {
        StreamSpec {
            horizon,
            dim,
            seed,
            law: InstanceLaw::Uniform,
            noise: 0.0,
            kind: LossKind::Square,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(config("horizon must be positive"));
        }
        if self.dim == 0 {
            return Err(config("dimension must be positive"));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(config("noise amplitude must be nonnegative"));
        }
        if let InstanceLaw::Manifold { m } = self.law {
            if m == 0 || m >= self.dim {
                return Err(config(format!(
                    "manifold dimension {m} must lie in 1..{}",
                    self.dim
                )));
            }
        }
        Ok(())
    }
}

/// A generated stream with the noiseless target values alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct Stream {
    pub examples: Vec<Example>,
    pub clean: Vec<f64>,
}

/// The manifold embedding: coordinate `j >= m` is
/// `(1/2 + sin(2 pi sum(u) + j) / 2) / sqrt(d)`.
pub fn embed(latent: &[f64], dim: usize) -> Vec<f64> {
    let scale = 1.0 / (dim as f64).sqrt();
    let phase = TAU * latent.iter().sum::<f64>();
    (0..dim)
        .map(|j| match latent.get(j) {
            Some(u) => u * scale,
            None => (0.5 + 0.5 * (phase + j as f64).sin()) * scale,
        })
        .collect()
}

pub fn gen_stream(spec: &StreamSpec, f: &TargetFunction) -> Result<Stream> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut examples = Vec::with_capacity(spec.horizon);
    let mut clean = Vec::with_capacity(spec.horizon);
    for t in 1..=spec.horizon {
        let x = match spec.law {
            InstanceLaw::Uniform => {
                let u: Vec<f64> = (0..spec.dim).map(|_| rng.gen()).collect();
                embed(&u, u.len())
            }
            InstanceLaw::Manifold { m } => {
                let u: Vec<f64> = (0..m).map(|_| rng.gen()).collect();
                embed(&u, spec.dim)
            }
        };
        let v: f64 = rng.gen();
        let fx = f.eval(&x);
        let noisy = fx + spec.noise * (2.0 * v - 1.0);
        let y = match spec.kind {
            LossKind::Square => noisy.clamp(0.0, 1.0),
            LossKind::Absolute => (noisy > 0.5) as u8 as f64,
        };
        examples.push(Example::new(x, y, t, spec.kind)?);
        clean.push(fx);
    }
    Ok(Stream { examples, clean })
}
