//! Worked instances: the scalar cubic interconnection and a linear pair.

pub mod example1;
pub mod linear_pair;

use std::sync::Arc;

use serde::Serialize;

use crate::certificates::{CertError, Interconnection, MergedLyapunov};
use crate::dynamics::{
    simulate_ensemble, DynError, EnsembleOptions, EnsembleReport, IntegrateOptions, LevelSet, MonitorSpec, Probe, Target,
};
use crate::scalar_fn::GainError;

pub use example1::{Example1, ExampleConstants};
pub use linear_pair::LinearPair;

#[derive(Debug, thiserror::Error)]
pub enum ExampleError {
    #[error("validation failed: {constraint} (margin {margin} at s = {s})")]
    ValidationFailed { constraint: &'static str, s: f64, margin: f64 },
    #[error(transparent)]
    Gain(#[from] GainError),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Dynamics(#[from] DynError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Settings of one ensemble run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunOptions {
    pub radius: f64,
    pub count: usize,
    pub step: f64,
    pub horizon: f64,
    pub record_dt: f64,
    pub origin_tol: f64,
    pub workers: usize,
}

impl RunOptions {
    /// Radius `0.236`, `T = 200`, final norm `≤ 1e-3`.
    pub fn local() -> Self {
        RunOptions { radius: 0.236, count: 16, step: 1e-3, horizon: 200.0, record_dt: 0.1, origin_tol: 1e-3, workers: 1 }
    }

    /// Radius 5, `T = 500`, final norm `≤ 1e-2`.
    pub fn global() -> Self {
        RunOptions { radius: 5.0, count: 16, step: 1e-3, horizon: 500.0, record_dt: 0.1, origin_tol: 1e-2, workers: 1 }
    }
}

/// Probes for the trajectory channels `V, W, U_local, U_global`.
pub fn probes(inter: &Interconnection, local: &MergedLyapunov, global: &MergedLyapunov) -> Vec<Probe> {
    let n = inter.system.n;
    let (v, w) = (inter.v.clone(), inter.w.clone());
    vec![
        Probe::new("V", Arc::new(move |y: &[f64]| v.eval(&y[..n]))),
        Probe::new("W", Arc::new(move |y: &[f64]| w.eval(&y[n..]))),
        Probe::new("U_local", local.state_fn()),
        Probe::new("U_global", global.state_fn()),
    ]
}

/// Ensemble on a circle with both merged functions monitored: `U_ℓ` on its
/// attractive level set, `U_g` outside its own. Entry into the global level
/// set is recorded.
pub fn monitored_ensemble(
    inter: &Interconnection,
    local: &MergedLyapunov,
    global: &MergedLyapunov,
    run: &RunOptions,
) -> Result<EnsembleReport, ExampleError> {
    let (cl, cg) = (local.level_constant, global.level_constant);
    let entry = LevelSet { name: "U_global level".into(), u: global.state_fn(), c: cg };
    let opts = EnsembleOptions {
        integrate: IntegrateOptions { step: run.step, horizon: run.horizon, record_every: 1 }.with_record_dt(run.record_dt),
        origin_tol: run.origin_tol,
        target: Target::Origin,
        entry: Some(entry),
        probes: probes(inter, local, global),
        monitors: vec![
            MonitorSpec::new("U_local", local.state_fn(), Arc::new(move |_, u| u <= cl)),
            MonitorSpec::new("U_global", global.state_fn(), Arc::new(move |_, u| u > cg)),
        ],
        workers: run.workers,
    };
    Ok(simulate_ensemble(&inter.system, run.radius, run.count, &opts)?)
}
