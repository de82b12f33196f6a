use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::StateFn;
use crate::scalar_fn::{build_kinf_bridge, build_smooth_bridge, log_knots, ComparisonFunction, Gain, KinfBridgeParts};

use super::{CertError, Halton, Interconnection, RegionalGainBundle, Result, SamplingOptions, StorageFunction};

const RAY_LIMIT: f64 = 1e6;
const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Local,
    Global,
}

/// Endpoints and knots for a smooth bridge `lower < σ < upper`.
#[derive(Debug, Clone)]
pub struct BridgeSpec {
    pub lower: Arc<ComparisonFunction>,
    pub upper: Arc<ComparisonFunction>,
    pub knots: Vec<f64>,
}

/// Upper end of the global bridge interval.
pub const GLOBAL_BRIDGE_END: f64 = 1e3;

fn continuous(g: &Gain, which: &str) -> Result<Arc<ComparisonFunction>> {
    match g {
        Gain::Continuous(f) => Ok(f.clone()),
        Gain::Piecewise(_) => Err(CertError::Invalid(format!("{which} gain must be continuous to be bridged"))),
    }
}

impl RegionalGainBundle {
    /// `γ̃_ℓ` with `δ < γ̃_ℓ < γ_ℓ⁻¹` on `(0, M_ℓ]`.
    pub fn local_kinf_bridge(&self) -> Result<KinfBridgeParts> {
        let g = continuous(&self.local_gain, "local")?;
        Ok(build_kinf_bridge(&self.cross_gain, &g, 0.0, self.m_local, None)?)
    }

    /// `γ̃_g` with `δ < γ̃_g < γ_g⁻¹` on `[γ_g(M_g), 10³]`, the range of
    /// storage values where the composition `γ_g ∘ δ` is required to stay
    /// below the identity when `δ ∘ γ_g < id` holds on `[M_g, ∞)`.
    pub fn global_kinf_bridge(&self) -> Result<KinfBridgeParts> {
        let g = continuous(&self.global_gain, "global")?;
        let p = g.eval(self.m_global)?;
        Ok(build_kinf_bridge(&self.cross_gain, &g, p, GLOBAL_BRIDGE_END, None)?)
    }

    pub fn local_bridge_spec(&self) -> Result<BridgeSpec> {
        let upper = Arc::new(self.local_kinf_bridge()?.function);
        Ok(BridgeSpec { lower: self.cross_gain.clone(), upper, knots: log_knots(1e-6, 10.0, 160) })
    }

    pub fn global_bridge_spec(&self) -> Result<BridgeSpec> {
        let upper = Arc::new(self.global_kinf_bridge()?.function);
        Ok(BridgeSpec { lower: self.cross_gain.clone(), upper, knots: log_knots(1e-6, GLOBAL_BRIDGE_END, 240) })
    }
}

/// `U(x, z) = max{σ(V(x)), W(z)}` with its attractive level.
#[derive(Clone)]
pub struct MergedLyapunov {
    pub role: Role,
    pub sigma: Arc<ComparisonFunction>,
    pub v: StorageFunction,
    pub w: StorageFunction,
    pub n: usize,
    pub m: usize,
    pub threshold: f64,
    /// `σ(threshold)`.
    pub level_constant: f64,
}

impl fmt::Debug for MergedLyapunov {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MergedLyapunov")
            .field("role", &self.role)
            .field("threshold", &self.threshold)
            .field("level_constant", &self.level_constant)
            .finish_non_exhaustive()
    }
}

impl MergedLyapunov {
    pub fn new(role: Role, sigma: Arc<ComparisonFunction>, inter: &Interconnection, threshold: f64) -> Result<Self> {
        let level_constant = sigma.eval(threshold)?;
        Ok(MergedLyapunov {
            role,
            sigma,
            v: inter.v.clone(),
            w: inter.w.clone(),
            n: inter.system.n,
            m: inter.system.m,
            threshold,
            level_constant,
        })
    }

    pub fn evaluate(&self, y: &[f64]) -> f64 {
        let v = self.v.eval(&y[..self.n]);
        let sv = self.sigma.eval(v).unwrap_or(f64::INFINITY);
        sv.max(self.w.eval(&y[self.n..]))
    }

    /// Guaranteed decay rate `min{σ'(V) λ_x, λ_z}`.
    pub fn envelope(&self, y: &[f64]) -> f64 {
        let (x, z) = y.split_at(self.n);
        let ds = self.sigma.derivative(self.v.eval(x)).unwrap_or(0.0);
        (ds * (self.v.decay)(x)).min((self.w.decay)(z))
    }

    pub fn state_fn(&self) -> StateFn {
        let me = self.clone();
        Arc::new(move |y: &[f64]| me.evaluate(y))
    }
}

/// Bridge `spec` into `σ`, assemble `U` and verify its level constant.
pub fn build_merged_lyapunov(
    role: Role,
    spec: &BridgeSpec,
    inter: &Interconnection,
    threshold: f64,
    sampling: &SamplingOptions,
) -> Result<MergedLyapunov> {
    let sigma = build_smooth_bridge(spec.lower.as_ref(), spec.upper.as_ref(), &spec.knots)?;
    let u = MergedLyapunov::new(role, Arc::new(sigma), inter, threshold)?;
    level_constant(&u, sampling)?;
    Ok(u)
}

/// Verify and return `c = σ(M)`.
///
/// Local: every boundary point of `{U ≤ c}` has `V ≤ M`. Global: every `x`
/// with `V(x) ≤ M` gives `(x, 0)` in `{U ≤ c}`. Both are sampled along rays.
pub fn level_constant(u: &MergedLyapunov, sampling: &SamplingOptions) -> Result<f64> {
    let c = u.level_constant;
    let dim = u.n + u.m;
    let count = sampling.samples.clamp(1, 4096);
    match u.role {
        Role::Local => {
            let f = |y: &[f64]| u.evaluate(y);
            for y in boundary_points(&f, c, dim, count, sampling.seed) {
                let v = u.v.eval(&y[..u.n]);
                if v > u.threshold * (1.0 + LEVEL_TOL) + LEVEL_TOL {
                    return Err(CertError::ContainmentFailed {
                        state: y,
                        detail: format!("V = {v} exceeds {} on the level {c}", u.threshold),
                    });
                }
            }
        }
        Role::Global => {
            let f = |x: &[f64]| u.v.eval(x);
            for x in boundary_points(&f, u.threshold, u.n, count, sampling.seed) {
                let mut y = x.clone();
                y.extend(std::iter::repeat(0.0).take(dim - u.n));
                let val = u.evaluate(&y);
                if val > c * (1.0 + LEVEL_TOL) + LEVEL_TOL {
                    return Err(CertError::ContainmentFailed { state: y, detail: format!("U = {val} exceeds {c}") });
                }
            }
        }
    }
    Ok(c)
}

/// Points where `f = c` along Halton-distributed rays from the origin;
/// rays on which `f` stays below `c` up to a large radius are skipped.
pub(crate) fn boundary_points(f: &dyn Fn(&[f64]) -> f64, c: f64, dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut seq = Halton::new(dim, seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let d: Vec<f64> = seq.next_point().iter().map(|u| 2.0 * u - 1.0).collect();
        let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nrm < 1e-9 {
            continue;
        }
        let at = |r: f64| -> Vec<f64> { d.iter().map(|v| r * v / nrm).collect() };
        let mut hi = 1.0;
        while f(&at(hi)) <= c {
            hi *= 2.0;
            if hi > RAY_LIMIT {
                break;
            }
        }
        if hi > RAY_LIMIT {
            continue;
        }
        let mut lo = 0.0;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if f(&at(mid)) <= c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        out.push(at(lo));
    }
    out
}
