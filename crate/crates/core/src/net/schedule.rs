use std::fmt;
use std::str::FromStr;

use crate::error::{config, Error, Result};

/// Which notion of local regularity the levels of the net encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Lipschitz,
    Dimension,
    LocalLoss,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Lipschitz => "lipschitz",
            Mode::Dimension => "dimension",
            Mode::LocalLoss => "loss",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lipschitz" => Ok(Mode::Lipschitz),
            "dimension" => Ok(Mode::Dimension),
            "loss" => Ok(Mode::LocalLoss),
            other => Err(config(format!("unknown mode `{other}`"))),
        }
    }
}

/// Per-level local loss envelopes `tau_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tau {
    /// `tau_k(n) = n^(1 / (D - k + 1))`.
    Pow,
    /// `tau_k(n) = n` at every level.
    Linear,
}

impl Tau {
    pub fn eval(self, k: usize, depth: usize, n: f64) -> f64 {
        debug_assert!((1..=depth).contains(&k));
        match self {
            Tau::Pow => n.powf(1.0 / (depth - k + 1) as f64),
            Tau::Linear => n,
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tau::Pow => "pow",
            Tau::Linear => "linear",
        })
    }
}

impl FromStr for Tau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pow" => Ok(Tau::Pow),
            "linear" => Ok(Tau::Linear),
            other => Err(config(format!("unknown tau spec `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// Local Lipschitz constants `0 < L_1 < ... < L_D`.
    Lipschitz { grid: Vec<f64> },
    /// Global Lipschitz constant and local dimensions `d_1 > ... > d_D >= 1`.
    Dimension { lipschitz: f64, dims: Vec<u32> },
    /// Global Lipschitz constant and loss envelopes.
    LocalLoss { lipschitz: f64, tau: Tau },
}

/// The radius tuning function `rho(k, t)` of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    profile: Profile,
    depth: usize,
    dim: u32,
}

impl RadiusSchedule {
    /// `rho(k, t) = (L_k t)^(-1/(d+1))`.
    pub fn lipschitz(grid: Vec<f64>, dim: u32) -> Result<Self> {
        if grid.is_empty() {
            return Err(config("lipschitz grid is empty"));
        }
        if grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(config("lipschitz constants must be positive"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(config("lipschitz grid must be strictly increasing"));
        }
        check_dim(dim)?;
        let depth = grid.len();
        Ok(RadiusSchedule {
            profile: Profile::Lipschitz { grid },
            depth,
            dim,
        })
    }

    /// `rho(k, t) = (L t)^(-1/(1+d_k))`; the ambient dimension is `d_1`.
    pub fn dimension(lipschitz: f64, dims: Vec<u32>) -> Result<Self> {
        check_lipschitz(lipschitz)?;
        if dims.is_empty() {
            return Err(config("dimension grid is empty"));
        }
        if dims.windows(2).any(|w| w[0] <= w[1]) {
            return Err(config("dimension grid must be strictly decreasing"));
        }
        if dims[dims.len() - 1] < 1 {
            return Err(config("local dimensions must be at least 1"));
        }
        let depth = dims.len();
        let dim = dims[0];
        Ok(RadiusSchedule {
            profile: Profile::Dimension { lipschitz, dims },
            depth,
            dim,
        })
    }

    /// `rho(k, t) = (L tau_k(t))^(-1/(2+d))`.
    pub fn local_loss(lipschitz: f64, tau: Tau, depth: usize, dim: u32) -> Result<Self> {
        check_lipschitz(lipschitz)?;
        check_dim(dim)?;
        if depth == 0 {
            return Err(config("depth must be positive"));
        }
        Ok(RadiusSchedule {
            profile: Profile::LocalLoss { lipschitz, tau },
            depth,
            dim,
        })
    }

    pub fn mode(&self) -> Mode {
        match self.profile {
            Profile::Lipschitz { .. } => Mode::Lipschitz,
            Profile::Dimension { .. } => Mode::Dimension,
            Profile::LocalLoss { .. } => Mode::LocalLoss,
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Ambient metric dimension `d`.
    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// The global Lipschitz constant: `L_D` in Lipschitz mode.
    pub fn global_lipschitz(&self) -> f64 {
        match &self.profile {
            Profile::Lipschitz { grid } => grid[grid.len() - 1],
            Profile::Dimension { lipschitz, .. } | Profile::LocalLoss { lipschitz, .. } => {
                *lipschitz
            }
        }
    }

    /// `L_k` in Lipschitz mode, the global constant otherwise.
    pub fn level_lipschitz(&self, k: usize) -> f64 {
        match &self.profile {
            Profile::Lipschitz { grid } => grid[k - 1],
            _ => self.global_lipschitz(),
        }
    }

    /// Local dimension of level `k` (the ambient one outside dimension mode).
    pub fn level_dim(&self, k: usize) -> u32 {
        match &self.profile {
            Profile::Dimension { dims, .. } => dims[k - 1],
            _ => self.dim,
        }
    }

    /// `tau_k(n)`; `n` itself outside local-loss mode.
    pub fn tau(&self, k: usize, n: f64) -> f64 {
        match &self.profile {
            Profile::LocalLoss { tau, .. } => tau.eval(k, self.depth, n),
            _ => n,
        }
    }

    /// Ball radius at level `k` (1-based) and round `t >= 1`.
    pub fn radius(&self, k: usize, t: usize) -> f64 {
        assert!(
            (1..=self.depth).contains(&k),
            "level {k} outside 1..={}",
            self.depth
        );
        assert!(t >= 1, "rounds start at 1");
        let t = t as f64;
        let d = self.dim as f64;
        match &self.profile {
            Profile::Lipschitz { grid } => (grid[k - 1] * t).powf(-1.0 / (d + 1.0)),
            Profile::Dimension { lipschitz, dims } => {
                (lipschitz * t).powf(-1.0 / (1.0 + dims[k - 1] as f64))
            }
            Profile::LocalLoss { lipschitz, tau } => {
                (lipschitz * tau.eval(k, self.depth, t)).powf(-1.0 / (2.0 + d))
            }
        }
    }
}

fn check_lipschitz(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(config("lipschitz constant must be positive"))
    }
}

fn check_dim(d: u32) -> Result<()> {
    if d >= 1 {
        Ok(())
    } else {
        Err(config("dimension must be at least 1"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn radius_examples() {
        let s = RadiusSchedule::lipschitz(vec![2.0], 1).unwrap();
        assert!((s.radius(1, 8) - 0.25).abs() < 1e-15);
        let s = RadiusSchedule::dimension(1.0, vec![1]).unwrap();
        assert_eq!(s.radius(1, 1), 1.0);
        let s = RadiusSchedule::local_loss(1.0, Tau::Linear, 1, 2).unwrap();
        assert!((s.radius(1, 16) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grids_are_validated() {
        assert!(RadiusSchedule::lipschitz(vec![1.0, 1.0], 1).is_err());
        assert!(RadiusSchedule::lipschitz(vec![2.0, 1.0], 1).is_err());
        assert!(RadiusSchedule::lipschitz(vec![], 1).is_err());
        assert!(RadiusSchedule::lipschitz(vec![1.0], 0).is_err());
        assert!(RadiusSchedule::dimension(1.0, vec![1, 2]).is_err());
        assert!(RadiusSchedule::dimension(1.0, vec![2, 0]).is_err());
        assert!(RadiusSchedule::dimension(0.0, vec![2, 1]).is_err());
        assert!(RadiusSchedule::local_loss(1.0, Tau::Pow, 0, 1).is_err());
    }

    #[test]
    fn pow_tau_tops_out_at_identity() {
        for n in 0..50 {
            let n = n as f64;
            assert_eq!(Tau::Pow.eval(4, 4, n), n);
            for k in 1..4 {
                assert!(Tau::Pow.eval(k, 4, n) <= Tau::Pow.eval(k + 1, 4, n));
            }
        }
    }

    proptest! {
        #[test]
        fn radii_shrink_in_time_and_depth(t in 1usize..100_000, dim in 1u32..4) {
            let lip = RadiusSchedule::lipschitz(vec![1.0, 2.0, 4.0, 8.0], dim).unwrap();
            let dm = RadiusSchedule::dimension(2.0, vec![4, 3, 2, 1]).unwrap();
            let ll = RadiusSchedule::local_loss(1.5, Tau::Pow, 4, dim).unwrap();
            for k in 1..=4 {
                prop_assert!(lip.radius(k, t + 1) < lip.radius(k, t));
                prop_assert!(dm.radius(k, t + 1) < dm.radius(k, t));
                prop_assert!(ll.radius(k, t + 1) < ll.radius(k, t));
                if k < 4 {
                    prop_assert!(lip.radius(k + 1, t) < lip.radius(k, t));
                    prop_assert!(dm.radius(k + 1, t) < dm.radius(k, t));
                    prop_assert!(ll.radius(k + 1, t) <= ll.radius(k, t));
                }
            }
        }
    }
}
