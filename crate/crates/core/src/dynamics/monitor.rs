use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{DynError, StateFn, Trajectory};

/// Where a monitored function is required to decrease: `(state, U(state))`.
pub type RegionPredicate = Arc<dyn Fn(&[f64], f64) -> bool + Send + Sync>;

/// Largest allowed forward increment of a monitored Lyapunov function.
pub const MONITOR_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorReport {
    pub name: String,
    pub max_increment: f64,
    pub at_time: f64,
    pub checked: usize,
    pub passed: bool,
}

impl MonitorReport {
    fn new(name: &str) -> Self {
        MonitorReport { name: name.to_string(), max_increment: 0.0, at_time: 0.0, checked: 0, passed: true }
    }

    fn record(&mut self, t: f64, inc: f64) {
        if self.checked == 0 || inc > self.max_increment {
            self.max_increment = inc;
            self.at_time = t;
        }
        self.checked += 1;
        self.passed = self.max_increment <= MONITOR_TOL;
    }

    /// Combine reports of the same monitor over several trajectories.
    pub fn merge(&mut self, other: &MonitorReport) {
        if other.checked > 0 {
            let checked = self.checked;
            self.record(other.at_time, other.max_increment);
            self.checked = checked + other.checked;
        }
    }
}

/// Max forward increment of channel `name` over consecutive stored samples
/// whose first member satisfies `active`.
pub fn monitor_lyapunov(tr: &Trajectory, name: &str, active: &dyn Fn(&[f64], f64) -> bool) -> Result<MonitorReport, DynError> {
    let u = tr.channel(name).ok_or_else(|| DynError::Invalid(format!("no channel {name}")))?;
    let mut rep = MonitorReport::new(name);
    for k in 0..u.len().saturating_sub(1) {
        if active(&tr.states[k], u[k]) {
            rep.record(tr.times[k], u[k + 1] - u[k]);
        }
    }
    Ok(rep)
}

/// Monitor evaluated at every integration step rather than on stored samples.
#[derive(Clone)]
pub struct MonitorSpec {
    pub name: String,
    pub u: StateFn,
    pub active: RegionPredicate,
}

impl fmt::Debug for MonitorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonitorSpec").field("name", &self.name).finish_non_exhaustive()
    }
}

impl MonitorSpec {
    pub fn new(name: impl Into<String>, u: StateFn, active: RegionPredicate) -> Self {
        MonitorSpec { name: name.into(), u, active }
    }
}

pub(crate) struct OnlineMonitor<'a> {
    spec: &'a MonitorSpec,
    prev: Option<(f64, f64, bool)>,
    pub(crate) report: MonitorReport,
}

impl<'a> OnlineMonitor<'a> {
    pub(crate) fn new(spec: &'a MonitorSpec) -> Self {
        OnlineMonitor { spec, prev: None, report: MonitorReport::new(&spec.name) }
    }

    pub(crate) fn observe(&mut self, t: f64, y: &[f64]) {
        let u = (self.spec.u)(y);
        if let Some((pt, pu, active)) = self.prev {
            if active {
                self.report.record(pt, u - pu);
            }
        }
        self.prev = Some((t, u, (self.spec.active)(y, u)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, Field, IntegrateOptions, InterconnectedSystem, Probe};

    #[test]
    fn flat_and_growing_trajectories() {
        let probes = [Probe::new("U", Arc::new(|y: &[f64]| y[0].abs()))];
        let zero = Trajectory::constant(1, 1, &[0.0, 0.0], &probes);
        let rep = monitor_lyapunov(&zero, "U", &|_, _| true).unwrap();
        assert!(rep.passed && rep.max_increment == 0.0);

        let f: Field = Arc::new(|x, _z, o| o[0] = x[0]);
        let g: Field = Arc::new(|_x, z, o| o[0] = -z[0]);
        let sys = InterconnectedSystem::new(1, 1, f, g).unwrap();
        let opts = IntegrateOptions { step: 1e-2, horizon: 1.0, record_every: 1 };
        let spec = MonitorSpec::new("U", probes[0].f.clone(), Arc::new(|_, _| true));
        let mut online = OnlineMonitor::new(&spec);
        let tr = integrate(&sys, &[0.1], &[0.0], &opts, &probes, &mut |t, y| online.observe(t, y)).unwrap();
        let rep = monitor_lyapunov(&tr, "U", &|_, _| true).unwrap();
        assert!(!rep.passed && rep.max_increment > 1e-4);
        assert_eq!(online.report.checked, rep.checked);
        assert!((online.report.max_increment - rep.max_increment).abs() < 1e-15);
    }
}
