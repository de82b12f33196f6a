use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::LevelSet;
use crate::scalar_fn::{build_smooth_bridge, log_knots, ComparisonFunction};

use super::merged::boundary_points;
use super::{CheckReport, Halton, Interconnection, MergedLyapunov, RegionalGainBundle, Result, Role};

const INCLUSION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Theorem2Options {
    /// Continue when `M_g > M_ℓ`, taking `M` as their midpoint and noting it.
    pub allow_threshold_swap: bool,
    pub knots: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for Theorem2Options {
    fn default() -> Self {
        Theorem2Options { allow_threshold_swap: false, knots: log_knots(1e-4, 1e3, 200), samples: 4000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct Theorem2Outcome {
    pub report: CheckReport,
    pub m: Option<f64>,
    pub sigma_hat: Option<Arc<ComparisonFunction>>,
    pub u_hat: Option<MergedLyapunov>,
}

/// Combine a local merged function with a global bridge `γ̃_g`: bridge
/// `δ < σ̂_g < min{γ̃_g, σ_ℓ}`, pick `M` between the thresholds and check
/// the nested sublevel sets (with the two thresholds exchanged when the swap
/// option is used)
/// `{Û ≤ σ̂(M_g)} ⊂ {Û ≤ σ̂(M)} ⊂ {U_ℓ ≤ σ_ℓ(M)} ⊂ {U_ℓ ≤ σ_ℓ(M_ℓ)}`
/// together with `Û ≤ U_ℓ`.
pub fn verify_theorem2(
    bundle: &RegionalGainBundle,
    inter: &Interconnection,
    local: &MergedLyapunov,
    gamma_tilde_global: &Arc<ComparisonFunction>,
    opts: &Theorem2Options,
) -> Result<Theorem2Outcome> {
    let (ml, mg) = (bundle.m_local, bundle.m_global);
    let mut order = CheckReport::new("threshold order", format!("M_g = {mg} < M_l = {ml}"));
    order.samples = 1;
    order.tested = 1;
    if mg >= ml {
        order.violate(vec![mg, ml], ml - mg);
    }
    if !order.passed && !opts.allow_threshold_swap {
        let report = CheckReport::aggregate("theorem 2", "merged functions", vec![(order, true)]);
        return Ok(Theorem2Outcome { report, m: None, sigma_hat: None, u_hat: None });
    }
    let swapped = !order.passed;
    let (lo, hi) = if swapped { (ml, mg) } else { (mg, ml) };
    let m = 0.5 * (lo + hi);

    let gamma_hat = Arc::new(ComparisonFunction::pointwise_min(gamma_tilde_global, &local.sigma));
    let sigma_hat = Arc::new(build_smooth_bridge(bundle.cross_gain.as_ref(), gamma_hat.as_ref(), &opts.knots)?);
    let u_hat = MergedLyapunov::new(Role::Global, sigma_hat.clone(), inter, lo)?;

    let levels = [
        level("U_hat", &u_hat, sigma_hat.eval(lo)?),
        level("U_hat", &u_hat, sigma_hat.eval(m)?),
        level("U_local", local, local.sigma.eval(m)?),
        level("U_local", local, local.sigma.eval(hi)?),
    ];
    let dim = inter.system.n + inter.system.m;
    let below_grid = sigma_below(&sigma_hat, &local.sigma, &opts.knots)?;
    let chain = inclusion_chain(&levels, dim, opts.samples, opts.seed)?;
    let below = dominated(&u_hat, local, dim, opts)?;

    let mut report = CheckReport::aggregate(
        "theorem 2",
        format!("M = {m}"),
        vec![(order, !opts.allow_threshold_swap), (below_grid, true), (chain, true), (below, true)],
    );
    if swapped {
        report.note(format!(
            "thresholds swapped: M_g = {mg} > M_l = {ml}; the chain uses {lo} as the global and {hi} as the local threshold, M = {m}"
        ));
    }
    Ok(Theorem2Outcome { report, m: Some(m), sigma_hat: Some(sigma_hat), u_hat: Some(u_hat) })
}

fn sigma_below(hat: &ComparisonFunction, local: &ComparisonFunction, grid: &[f64]) -> Result<CheckReport> {
    let mut r = CheckReport::new("sigma_hat < sigma_local", "bridge knots");
    for &s in grid.iter().filter(|s| **s > 0.0) {
        r.samples += 1;
        r.tested += 1;
        let gap = local.eval(s)? - hat.eval(s)?;
        if gap <= 0.0 {
            r.violate(vec![s], gap);
        }
    }
    Ok(r)
}

fn level(name: &str, u: &MergedLyapunov, c: f64) -> LevelSet {
    LevelSet { name: format!("{name} <= {c:.6}"), u: u.state_fn(), c }
}

/// Check `sets[i] ⊂ sets[i + 1]` on boundary points of `sets[i]` (along rays)
/// and on interior points drawn from a box around it. Inclusions that hold
/// only with touching boundaries pass with a note.
pub fn inclusion_chain(sets: &[LevelSet], dim: usize, samples: usize, seed: u64) -> Result<CheckReport> {
    let mut children = Vec::new();
    for pair in sets.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let mut r = CheckReport::new(format!("{} in {}", a.name, b.name), "sublevel sets");
        let fa = |y: &[f64]| (a.u)(y);
        let edge = boundary_points(&fa, a.c, dim, samples, seed);
        let radius = edge.iter().flat_map(|y| y.iter().map(|v| v.abs())).fold(0.0, f64::max);
        let mut seq = Halton::new(dim, seed.wrapping_add(1));
        let interior: Vec<Vec<f64>> = (0..samples)
            .map(|_| seq.next_point().iter().map(|u| radius * (2.0 * u - 1.0)).collect::<Vec<f64>>())
            .filter(|y| (a.u)(y) <= a.c)
            .collect();
        let mut closest = f64::INFINITY;
        for y in edge.into_iter().chain(interior) {
            r.samples += 1;
            r.tested += 1;
            let slack = b.c - (b.u)(&y);
            closest = closest.min(slack);
            if slack < -INCLUSION_TOL * (1.0 + b.c.abs()) {
                r.violate(y, slack);
            }
        }
        if r.passed && closest <= INCLUSION_TOL * (1.0 + b.c.abs()) {
            r.note("boundary case: the sets touch");
        }
        children.push((r, true));
    }
    if children.is_empty() {
        return Err(super::CertError::Invalid("inclusion chain needs two sets".into()));
    }
    Ok(CheckReport::aggregate("inclusion chain", "sublevel sets", children))
}

fn dominated(u_hat: &MergedLyapunov, local: &MergedLyapunov, dim: usize, opts: &Theorem2Options) -> Result<CheckReport> {
    let mut r = CheckReport::new("U_hat <= U_local", "box of radius 2 M_l");
    let radius = 2.0 * local.threshold.max(u_hat.threshold);
    let mut seq = Halton::new(dim, opts.seed.wrapping_add(2));
    let mut touching = 0usize;
    for _ in 0..opts.samples {
        let y: Vec<f64> = seq.next_point().iter().map(|u| radius * (2.0 * u - 1.0)).collect();
        let (h, l) = (u_hat.evaluate(&y), local.evaluate(&y));
        r.samples += 1;
        r.tested += 1;
        if h > l + INCLUSION_TOL {
            r.violate(y, l - h);
        } else if h >= l - INCLUSION_TOL {
            touching += 1;
        }
    }
    if touching > 0 {
        r.note(format!("equality at {touching} samples, where W dominates"));
    }
    Ok(r)
}
