use std::io::Write;

use serde::Serialize;

use super::{norm, DynError, InterconnectedSystem, Probe};

/// Integration aborts once the state norm passes this bound.
pub const BLOWUP_NORM: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrateOptions {
    pub step: f64,
    pub horizon: f64,
    /// Store every `record_every`-th step (the final step is always stored).
    pub record_every: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { step: 1e-3, horizon: 50.0, record_every: 1 }
    }
}

impl IntegrateOptions {
    /// Recording stride that stores roughly one sample per `dt` time units.
    pub fn with_record_dt(mut self, dt: f64) -> Self {
        self.record_every = ((dt / self.step).round() as usize).max(1);
        self
    }

    fn steps(&self) -> Result<usize, DynError> {
        if !(self.step > 0.0 && self.horizon >= self.step && self.horizon.is_finite()) {
            return Err(DynError::Invalid(format!("need h > 0 and T >= h, got h = {}, T = {}", self.step, self.horizon)));
        }
        Ok((self.horizon / self.step).round() as usize)
    }
}

/// Time-stamped states with named scalar channels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub n: usize,
    pub m: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub channels: Vec<(String, Vec<f64>)>,
}

impl Trajectory {
    fn start(n: usize, m: usize, probes: &[Probe]) -> Self {
        Trajectory {
            n,
            m,
            times: Vec::new(),
            states: Vec::new(),
            channels: probes.iter().map(|p| (p.name.clone(), Vec::new())).collect(),
        }
    }

    /// Single-row trajectory resting at `y`.
    pub fn constant(n: usize, m: usize, y: &[f64], probes: &[Probe]) -> Self {
        let mut tr = Self::start(n, m, probes);
        tr.push(0.0, y, probes);
        tr
    }

    fn push(&mut self, t: f64, y: &[f64], probes: &[Probe]) {
        self.times.push(t);
        self.states.push(y.to_vec());
        for ((_, ch), p) in self.channels.iter_mut().zip(probes) {
            ch.push((p.f)(y));
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map_or(&[], |v| v.as_slice())
    }

    pub fn final_norm(&self) -> f64 {
        norm(self.final_state())
    }

    pub fn header(&self) -> Vec<String> {
        let name = |base: &str, k: usize, dim: usize| if dim == 1 { base.to_string() } else { format!("{base}{}", k + 1) };
        let mut h = vec!["t".to_string()];
        h.extend((0..self.n).map(|k| name("x", k, self.n)));
        h.extend((0..self.m).map(|k| name("z", k, self.m)));
        h.extend(self.channels.iter().map(|(n, _)| n.clone()));
        h
    }

    fn write_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> csv::Result<()> {
        for (i, (t, y)) in self.times.iter().zip(&self.states).enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(y.iter().map(f64::to_string));
            row.extend(self.channels.iter().map(|(_, v)| v[i].to_string()));
            w.write_record(&row)?;
        }
        Ok(())
    }

    /// CSV with header `t,x…,z…,<channels>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DynError> {
        write_csv_many(std::slice::from_ref(self), out)
    }
}

/// Several trajectories under one header, `t` restarting at each one.
pub fn write_csv_many<W: Write>(trajs: &[Trajectory], out: W) -> Result<(), DynError> {
    let io = |e: csv::Error| DynError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = trajs.first() {
        w.write_record(first.header()).map_err(io)?;
    }
    for tr in trajs {
        tr.write_rows(&mut w).map_err(io)?;
    }
    w.flush().map_err(|e| DynError::Io(e.to_string()))
}

/// Classical fixed-step RK4 from `(x0, z0)`; `observe` sees every step.
pub fn integrate(
    sys: &InterconnectedSystem,
    x0: &[f64],
    z0: &[f64],
    opts: &IntegrateOptions,
    probes: &[Probe],
    observe: &mut dyn FnMut(f64, &[f64]),
) -> Result<Trajectory, DynError> {
    if x0.len() != sys.n || z0.len() != sys.m {
        return Err(DynError::Invalid("initial state has wrong dimension".into()));
    }
    let steps = opts.steps()?;
    let h = opts.step;
    let dim = sys.dim();
    let mut y: Vec<f64> = x0.iter().chain(z0).copied().collect();
    let mut tr = Trajectory::start(sys.n, sys.m, probes);
    tr.push(0.0, &y, probes);
    observe(0.0, &y);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for k in 1..=steps {
        sys.rhs(&y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        sys.rhs(&tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        sys.rhs(&tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + h * k3[i];
        }
        sys.rhs(&tmp, &mut k4);
        for i in 0..dim {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t = k as f64 * h;
        let r = norm(&y);
        if !(r <= BLOWUP_NORM) {
            return Err(DynError::Blowup { t, limit: BLOWUP_NORM });
        }
        observe(t, &y);
        if k % opts.record_every == 0 || k == steps {
            tr.push(t, &y, probes);
        }
    }
    Ok(tr)
}

/// Largest coordinate change of the final state when the step is halved.
pub fn step_halving_gap(sys: &InterconnectedSystem, x0: &[f64], z0: &[f64], step: f64, horizon: f64) -> Result<f64, DynError> {
    let run = |h: f64| {
        let opts = IntegrateOptions { step: h, horizon, record_every: usize::MAX };
        integrate(sys, x0, z0, &opts, &[], &mut |_, _| {}).map(|t| t.final_state().to_vec())
    };
    let (a, b) = (run(step)?, run(0.5 * step)?);
    Ok(a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::dynamics::Field;

    fn linear() -> InterconnectedSystem {
        let f: Field = Arc::new(|x, z, o| o[0] = -x[0] + 0.5 * z[0]);
        let g: Field = Arc::new(|x, z, o| o[0] = -z[0] + 0.5 * x[0]);
        InterconnectedSystem::new(1, 1, f, g).unwrap()
    }

    #[test]
    fn rk4_matches_exponential() {
        let sys = linear();
        let opts = IntegrateOptions { step: 1e-2, horizon: 2.0, record_every: 10 };
        let tr = integrate(&sys, &[1.0], &[1.0], &opts, &[], &mut |_, _| {}).unwrap();
        // x = z = e^{-t/2} along the diagonal
        let exact = (-1.0_f64).exp();
        assert!((tr.final_state()[0] - exact).abs() < 1e-9);
        assert_eq!(tr.len(), 21);
        assert!((tr.times[20] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_stays_put_and_blowup_is_caught() {
        let sys = linear();
        let tr = integrate(&sys, &[0.0], &[0.0], &IntegrateOptions::default(), &[], &mut |_, _| {}).unwrap();
        assert!(tr.states.iter().all(|s| s.iter().all(|v| *v == 0.0)));
        let f: Field = Arc::new(|x, _z, o| o[0] = x[0] * x[0]);
        let g: Field = Arc::new(|_x, z, o| o[0] = -z[0]);
        let sys = InterconnectedSystem::new(1, 1, f, g).unwrap();
        let e = integrate(&sys, &[2.0], &[0.0], &IntegrateOptions { step: 1e-3, horizon: 5.0, record_every: 1 }, &[], &mut |_, _| {});
        assert!(matches!(e, Err(DynError::Blowup { .. })));
    }

    #[test]
    fn csv_header_and_rows() {
        let sys = linear();
        let probes = [Probe::new("V", Arc::new(|y: &[f64]| y[0].abs()))];
        let tr = integrate(&sys, &[1.0], &[0.0], &IntegrateOptions { step: 0.5, horizon: 1.0, record_every: 1 }, &probes, &mut |_, _| {}).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,z,V\n0,1,0,1\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
