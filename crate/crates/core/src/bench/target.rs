use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};

/// Labels stay inside this band so zigzags never clip.
const LOW: f64 = 0.25;
const HIGH: f64 = 0.75;
/// Width of the rough region of the mostly-flat preset.
const ROUGH_WIDTH: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetPreset {
    /// Slope `L_D` on `[0, 0.1]`, slope `L_1` elsewhere.
    MostlyFlat,
    /// Slope `L_D` throughout.
    UniformlyRough,
    Constant,
}

impl fmt::Display for TargetPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetPreset::MostlyFlat => "mostly-flat",
            TargetPreset::UniformlyRough => "uniformly-rough",
            TargetPreset::Constant => "constant",
        })
    }
}

impl FromStr for TargetPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mostly-flat" => Ok(TargetPreset::MostlyFlat),
            "uniformly-rough" => Ok(TargetPreset::UniformlyRough),
            "constant" => Ok(TargetPreset::Constant),
            other => Err(config(format!("unknown target `{other}`"))),
        }
    }
}

/// A continuous piecewise-linear function of the first coordinate,
/// constant outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFunction {
    knots: Vec<(f64, f64)>,
}

impl TargetFunction {
    /// `knots` are `(x, f(x))` pairs with strictly increasing `x` spanning
    /// `[0, 1]` and values in `[0, 1]`.
    pub fn piecewise(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(config("a target needs at least two knots"));
        }
        if knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(config("target knots must span [0, 1]"));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(config("target knots must be strictly increasing"));
        }
        if knots.iter().any(|(_, y)| !(0.0..=1.0).contains(y)) {
            return Err(config("target values must lie in [0, 1]"));
        }
        Ok(TargetFunction { knots })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::piecewise(vec![(0.0, value), (1.0, value)])
    }

    /// The preset for Lipschitz profile `low` (the smoothest level) to
    /// `high` (the global constant).
    pub fn preset(preset: TargetPreset, low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0 && high >= low && high.is_finite()) {
            return Err(config("preset slopes must satisfy 0 < low <= high"));
        }
        let mut z = Zigzag::new();
        match preset {
            TargetPreset::Constant => return Self::constant(0.5),
            TargetPreset::MostlyFlat => {
                z.run(ROUGH_WIDTH, high);
                z.run(1.0, low);
            }
            TargetPreset::UniformlyRough => z.run(1.0, high),
        }
        Self::piecewise(z.knots)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    /// Largest absolute slope.
    pub fn lipschitz(&self) -> f64 {
        self.knots
            .windows(2)
            .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
            .fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let u = x.first().copied().unwrap_or(0.0).clamp(0.0, 1.0);
        let i = self.knots.partition_point(|(k, _)| *k <= u);
        if i == 0 {
            return self.knots[0].1;
        }
        if i == self.knots.len() {
            return self.knots[i - 1].1;
        }
        let (x0, y0) = self.knots[i - 1];
        let (x1, y1) = self.knots[i];
        y0 + (y1 - y0) * (u - x0) / (x1 - x0)
    }
}

/// Builds a zigzag between `LOW` and `HIGH` that starts at 1/2 going up.
struct Zigzag {
    knots: Vec<(f64, f64)>,
    up: bool,
}

impl Zigzag {
    fn new() -> Self {
        Zigzag {
            knots: vec![(0.0, 0.5)],
            up: true,
        }
    }

    /// Extends the curve to `end` with slope magnitude `slope`.
    fn run(&mut self, end: f64, slope: f64) {
        loop {
            let (x, y) = self.knots[self.knots.len() - 1];
            let goal = if self.up { HIGH } else { LOW };
            let dx = (goal - y).abs() / slope;
            if x + dx >= end {
                let sign = if self.up { 1.0 } else { -1.0 };
                let y_end = (y + sign * slope * (end - x)).clamp(LOW, HIGH);
                self.knots.push((end, y_end));
                return;
            }
            self.knots.push((x + dx, goal));
            self.up = !self.up;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_the_promised_slopes() {
        let rough = TargetFunction::preset(TargetPreset::UniformlyRough, 2.0, 32.0).unwrap();
        assert!((rough.lipschitz() - 32.0).abs() < 1e-9);
        let flat = TargetFunction::preset(TargetPreset::MostlyFlat, 2.0, 32.0).unwrap();
        assert!((flat.lipschitz() - 32.0).abs() < 1e-9);
        for w in flat.knots().windows(2) {
            let slope = ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs();
            if w[0].0 >= ROUGH_WIDTH {
                assert!((slope - 2.0).abs() < 1e-9);
            }
        }
        let c = TargetFunction::preset(TargetPreset::Constant, 1.0, 1.0).unwrap();
        assert_eq!(c.eval(&[0.3]), 0.5);
        assert_eq!(c.lipschitz(), 0.0);
    }

    #[test]
    fn eval_interpolates_and_clamps() {
        let f = TargetFunction::piecewise(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)]).unwrap();
        assert_eq!(f.eval(&[0.25]), 0.5);
        assert_eq!(f.eval(&[0.5]), 1.0);
        assert_eq!(f.eval(&[0.75]), 0.75);
        assert_eq!(f.eval(&[-3.0]), 0.0);
        assert_eq!(f.eval(&[2.0]), 0.5);
        assert_eq!(f.lipschitz(), 2.0);
    }

    #[test]
    fn zigzag_is_continuous_and_bounded() {
        for (lo, hi) in [(1.0, 1.0), (0.5, 64.0), (3.0, 7.0)] {
            for p in [TargetPreset::MostlyFlat, TargetPreset::UniformlyRough] {
                let f = TargetFunction::preset(p, lo, hi).unwrap();
                for i in 0..=10_000 {
                    let x = i as f64 / 10_000.0;
                    let y = f.eval(&[x]);
                    assert!((LOW - 1e-12..=HIGH + 1e-12).contains(&y));
                    let y2 = f.eval(&[x + 1e-7]);
                    assert!((y - y2).abs() <= f.lipschitz() * 1e-7 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(TargetFunction::piecewise(vec![(0.0, 0.5)]).is_err());
        assert!(TargetFunction::piecewise(vec![(0.1, 0.5), (1.0, 0.5)]).is_err());
        assert!(TargetFunction::piecewise(vec![(0.0, 0.5), (1.0, 1.5)]).is_err());
        assert!(TargetFunction::preset(TargetPreset::MostlyFlat, 4.0, 2.0).is_err());
        assert!("wiggly".parse::<TargetPreset>().is_err());
        assert_eq!("mostly-flat".parse::<TargetPreset>().unwrap(), TargetPreset::MostlyFlat);
    }
}
