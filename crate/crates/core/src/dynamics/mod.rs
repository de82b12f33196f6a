//! Interconnections `ẋ = f(x, z)`, `ż = g(x, z)`: Dini derivatives, RK4
//! integration, Lyapunov monitors and ensembles.

mod dini;
mod ensemble;
mod integrate;
mod monitor;

use std::fmt;
use std::sync::Arc;

pub use dini::{default_schedule, dini_forward, DiniEstimate};
pub use ensemble::{circle_points, simulate_ensemble, EnsembleOptions, EnsembleReport, LevelSet, MemberReport, Outcome, Target};
pub use integrate::{integrate, step_halving_gap, write_csv_many, IntegrateOptions, Trajectory, BLOWUP_NORM};
pub use monitor::{monitor_lyapunov, MonitorReport, MonitorSpec, RegionPredicate, MONITOR_TOL};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynError {
    #[error("non-finite value {value} at step size {tau}")]
    NonFinite { tau: f64, value: f64 },
    #[error("state norm exceeded {limit} at t = {t}")]
    Blowup { t: f64, limit: f64 },
    #[error("origin is not an equilibrium: |f(0,0)| + |g(0,0)| = {0}")]
    NotEquilibrium(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// Right-hand side of one subsystem: `(x, z, out)`.
pub type Field = Arc<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;
/// Scalar function of the full state `(x, z)`.
pub type StateFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Named scalar observable recorded along trajectories.
#[derive(Clone)]
pub struct Probe {
    pub name: String,
    pub f: StateFn,
}

impl Probe {
    pub fn new(name: impl Into<String>, f: StateFn) -> Self {
        Probe { name: name.into(), f }
    }
}

impl fmt::Debug for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Probe").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub struct InterconnectedSystem {
    pub n: usize,
    pub m: usize,
    f: Field,
    g: Field,
}

impl fmt::Debug for InterconnectedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InterconnectedSystem").field("n", &self.n).field("m", &self.m).finish_non_exhaustive()
    }
}

impl InterconnectedSystem {
    pub fn new(n: usize, m: usize, f: Field, g: Field) -> Result<Self, DynError> {
        if n == 0 || m == 0 {
            return Err(DynError::Invalid("dimensions must be positive".into()));
        }
        let sys = InterconnectedSystem { n, m, f, g };
        let mut d = vec![0.0; n + m];
        sys.rhs(&vec![0.0; n + m], &mut d);
        let r: f64 = d.iter().map(|v| v.abs()).sum();
        if !(r <= 1e-12) {
            return Err(DynError::NotEquilibrium(r));
        }
        Ok(sys)
    }

    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    /// Full vector field at the stacked state `y = (x, z)`.
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        let (x, z) = y.split_at(self.n);
        let (dx, dz) = dy.split_at_mut(self.n);
        (self.f)(x, z, dx);
        (self.g)(x, z, dz);
    }

    pub fn field(&self, y: &[f64]) -> Vec<f64> {
        let mut d = vec![0.0; y.len()];
        self.rhs(y, &mut d);
        d
    }
}

pub(crate) fn norm(y: &[f64]) -> f64 {
    y.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `sign` with `sign(0) = 0`.
pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_equilibrium() {
        let f: Field = Arc::new(|x, _z, o| o[0] = -x[0] + 1.0);
        let g: Field = Arc::new(|_x, z, o| o[0] = -z[0]);
        assert!(matches!(InterconnectedSystem::new(1, 1, f, g), Err(DynError::NotEquilibrium(_))));
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sign0(0.0), 0.0);
        assert_eq!(sign0(-0.0), 0.0);
        assert_eq!(sign0(-2.0), -1.0);
    }
}
