use std::fmt;

use serde::Serialize;

use super::integrate::{integrate, IntegrateOptions, Trajectory};
use super::monitor::{MonitorReport, MonitorSpec, OnlineMonitor};
use super::{norm, DynError, InterconnectedSystem, Probe, StateFn};

/// Sublevel set `{U ≤ c}` used as a convergence target or entry marker.
#[derive(Clone)]
pub struct LevelSet {
    pub name: String,
    pub u: StateFn,
    pub c: f64,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSet").field("name", &self.name).field("c", &self.c).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Target {
    Origin,
    Level(LevelSet),
}

#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub integrate: IntegrateOptions,
    /// Final norm counted as convergence to the origin.
    pub origin_tol: f64,
    pub target: Target,
    /// Set whose first entry time is recorded for every member.
    pub entry: Option<LevelSet>,
    pub probes: Vec<Probe>,
    pub monitors: Vec<MonitorSpec>,
    pub workers: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        EnsembleOptions {
            integrate: IntegrateOptions::default(),
            origin_tol: 1e-3,
            target: Target::Origin,
            entry: None,
            probes: Vec::new(),
            monitors: Vec::new(),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome {
    ConvergedToOrigin,
    ConvergedToSet,
    NotConverged,
    Diverged { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub index: usize,
    pub initial: Vec<f64>,
    pub final_state: Vec<f64>,
    pub final_norm: f64,
    pub outcome: Outcome,
    pub met_target: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entered_at: Option<f64>,
    pub monitors: Vec<MonitorReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleReport {
    pub radius: f64,
    pub count: usize,
    pub met: usize,
    pub all_met: bool,
    pub members: Vec<MemberReport>,
    /// Each monitor merged over all members.
    pub monitors: Vec<MonitorReport>,
    #[serde(skip)]
    pub trajectories: Vec<Option<Trajectory>>,
}

/// `count` points equally spaced on the circle of `radius` in the plane of
/// the first `x` and first `z` coordinates; radius 0 gives the origin once.
pub fn circle_points(n: usize, m: usize, radius: f64, count: usize) -> Vec<Vec<f64>> {
    if radius == 0.0 {
        return vec![vec![0.0; n + m]];
    }
    (0..count)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            let mut y = vec![0.0; n + m];
            y[0] = radius * th.cos();
            y[n] = radius * th.sin();
            y
        })
        .collect()
}

/// Integrate from every circle point and classify each run.
pub fn simulate_ensemble(sys: &InterconnectedSystem, radius: f64, count: usize, opts: &EnsembleOptions) -> Result<EnsembleReport, DynError> {
    if !(radius >= 0.0 && radius.is_finite()) || count == 0 {
        return Err(DynError::Invalid(format!("need radius >= 0 and count >= 1, got {radius}, {count}")));
    }
    let starts = circle_points(sys.n, sys.m, radius, count);
    let workers = opts.workers.max(1).min(starts.len());
    let mut slots: Vec<Option<(MemberReport, Option<Trajectory>)>> = vec![None; starts.len()];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let starts = &starts;
                scope.spawn(move || {
                    (w..starts.len()).step_by(workers).map(|i| (i, run_member(sys, i, &starts[i], opts))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("ensemble worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    let (members, trajectories): (Vec<_>, Vec<_>) = slots.into_iter().map(|s| s.expect("every member ran")).unzip();
    let mut monitors: Vec<MonitorReport> = Vec::new();
    for m in &members {
        for (k, r) in m.monitors.iter().enumerate() {
            match monitors.get_mut(k) {
                Some(acc) => acc.merge(r),
                None => monitors.push(r.clone()),
            }
        }
    }
    let met = members.iter().filter(|m| m.met_target).count();
    Ok(EnsembleReport { radius, count: members.len(), met, all_met: met == members.len(), members, monitors, trajectories })
}

fn run_member(sys: &InterconnectedSystem, index: usize, y0: &[f64], opts: &EnsembleOptions) -> (MemberReport, Option<Trajectory>) {
    let (x0, z0) = y0.split_at(sys.n);
    let mut online: Vec<OnlineMonitor> = opts.monitors.iter().map(OnlineMonitor::new).collect();
    let mut entered_at = None;
    let result = if norm(y0) == 0.0 {
        for m in online.iter_mut() {
            m.observe(0.0, y0);
        }
        if let Some(set) = &opts.entry {
            if (set.u)(y0) <= set.c {
                entered_at = Some(0.0);
            }
        }
        Ok(Trajectory::constant(sys.n, sys.m, y0, &opts.probes))
    } else {
        integrate(sys, x0, z0, &opts.integrate, &opts.probes, &mut |t, y| {
            for m in online.iter_mut() {
                m.observe(t, y);
            }
            if let (None, Some(set)) = (entered_at, &opts.entry) {
                if (set.u)(y) <= set.c {
                    entered_at = Some(t);
                }
            }
        })
    };
    let monitors = online.into_iter().map(|m| m.report).collect();
    match result {
        Ok(tr) => {
            let final_state = tr.final_state().to_vec();
            let final_norm = norm(&final_state);
            let in_set = |set: &LevelSet| (set.u)(&final_state) <= set.c;
            let outcome = if final_norm <= opts.origin_tol {
                Outcome::ConvergedToOrigin
            } else if matches!(&opts.target, Target::Level(set) if in_set(set)) {
                Outcome::ConvergedToSet
            } else {
                Outcome::NotConverged
            };
            let met_target = match opts.target {
                Target::Origin => outcome == Outcome::ConvergedToOrigin,
                Target::Level(_) => outcome != Outcome::NotConverged,
            };
            let rep = MemberReport {
                index,
                initial: y0.to_vec(),
                final_state,
                final_norm,
                outcome,
                met_target,
                entered_at,
                monitors,
            };
            (rep, Some(tr))
        }
        Err(e) => {
            let rep = MemberReport {
                index,
                initial: y0.to_vec(),
                final_state: Vec::new(),
                final_norm: f64::NAN,
                outcome: Outcome::Diverged { reason: e.to_string() },
                met_target: false,
                entered_at,
                monitors,
            };
            (rep, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::Field;

    fn sys(a: f64) -> InterconnectedSystem {
        let f: Field = Arc::new(move |x, _z, o| o[0] = a * x[0]);
        let g: Field = Arc::new(|_x, z, o| o[0] = -z[0]);
        InterconnectedSystem::new(1, 1, f, g).unwrap()
    }

    #[test]
    fn radius_zero_is_one_resting_member() {
        let rep = simulate_ensemble(&sys(-1.0), 0.0, 16, &EnsembleOptions::default()).unwrap();
        assert_eq!(rep.count, 1);
        assert!(rep.all_met);
        assert_eq!(rep.trajectories[0].as_ref().unwrap().len(), 1);
    }

    #[test]
    fn parallel_matches_serial_and_divergence_is_recorded() {
        let mut opts = EnsembleOptions::default();
        opts.integrate = IntegrateOptions { step: 1e-2, horizon: 20.0, record_every: 100 };
        let serial = simulate_ensemble(&sys(-1.0), 1.0, 8, &opts).unwrap();
        opts.workers = 3;
        let par = simulate_ensemble(&sys(-1.0), 1.0, 8, &opts).unwrap();
        assert_eq!(serial.members, par.members);
        assert!(serial.all_met);
        let bad = simulate_ensemble(&sys(1.0), 1.0, 4, &opts).unwrap();
        assert!(bad.members.iter().any(|m| matches!(m.outcome, Outcome::Diverged { .. })));
        assert!(!bad.all_met);
    }
}
