use std::sync::Arc;

use serde::Serialize;

use super::{
    geometric_grid, BridgeCap, ComparisonFunction, GainError, MonotoneSpline, Piece, Result, ScalarGain, Segment,
};

/// Constants chosen for the explicit K∞ bridge, alongside the function.
#[derive(Debug, Clone, Serialize)]
pub struct KinfBridgeParts {
    pub function: ComparisonFunction,
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    /// Cap of the first branch; `None` when `p = 0`.
    pub k: Option<f64>,
    pub a: f64,
    pub b: f64,
}

/// K∞ function `β̃` with `α < β̃` everywhere and `β̃ < β⁻¹` on `[p, q]`,
/// given `β(α(s)) < s` on `[p, q]`.
///
/// Branches: `α + min(s, K)` on `[0, p)`, `α + min(s, (β⁻¹ − α)/2)` on
/// `[p, q)`, affine on `[q, q + ε)`, `α + s` afterwards. `K`, the affine
/// constants and the default `ε = 0.01 (q − p)` are fixed by continuity.
pub fn build_kinf_bridge(
    alpha: &Arc<ComparisonFunction>,
    beta: &Arc<ComparisonFunction>,
    p: f64,
    q: f64,
    epsilon: Option<f64>,
) -> Result<KinfBridgeParts> {
    if !(p >= 0.0 && q > p && q.is_finite()) {
        return Err(GainError::Invalid(format!("need 0 <= p < q, got p = {p}, q = {q}")));
    }
    for i in 0..512 {
        let s = if p == 0.0 { q * f64::from(i + 1) / 512.0 } else { p + (q - p) * f64::from(i) / 511.0 };
        let value = beta.eval(alpha.eval(s)?)?;
        if value >= s {
            return Err(GainError::HypothesisViolated { s, value });
        }
    }
    let epsilon = epsilon.unwrap_or(0.01 * (q - p));
    if !(epsilon > 0.0) {
        return Err(GainError::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let limit = beta.limit_at_infinity();
    if q + epsilon >= limit {
        return Err(GainError::EpsilonTooLarge { reach: q + epsilon, limit });
    }
    let half_gap = Segment::Bridge { alpha: alpha.clone(), cap: BridgeCap::HalfGap { beta: beta.clone() } };
    let a = half_gap.eval(q)?;
    let end = q + epsilon;
    let b = (alpha.eval(end)? + end - a) / epsilon;
    if !(b > 0.0) {
        return Err(GainError::Invalid(format!("affine branch slope {b} is not positive")));
    }
    let mut pieces = Vec::with_capacity(4);
    let k = if p > 0.0 {
        let k = p.min(0.5 * (beta.inverse_value(p)? - alpha.eval(p)?));
        pieces.push(Piece::new(0.0, Segment::Bridge { alpha: alpha.clone(), cap: BridgeCap::Constant { value: k } }));
        Some(k)
    } else {
        None
    };
    pieces.push(Piece::new(p, half_gap));
    pieces.push(Piece::new(q, Segment::Affine { slope: b, intercept: a - b * q }));
    pieces.push(Piece::new(end, Segment::Bridge { alpha: alpha.clone(), cap: BridgeCap::Identity }));
    let function = ComparisonFunction::new(pieces)?;
    Ok(KinfBridgeParts { function, p, q, epsilon, k, a, b })
}

/// `n` log-spaced knots on `[lo, hi]`.
pub fn log_knots(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    geometric_grid(lo, hi, n)
}

const MAX_REPAIR_ROUNDS: usize = 8;
const REFINE: usize = 10;

/// C¹ strictly increasing `σ` with `lower < σ < upper` at every verification
/// point: geometric-mean values at `knots` (plus 0), strictified, then a
/// monotone Hermite spline. Violations found on a tenfold refinement become
/// new knots, for at most eight rounds. Past the last knot `σ` continues
/// linearly and the sandwich is not verified there.
pub fn build_smooth_bridge(lower: &dyn ScalarGain, upper: &dyn ScalarGain, knots: &[f64]) -> Result<ComparisonFunction> {
    let mut xs: Vec<f64> = knots.iter().copied().filter(|s| *s > 0.0).collect();
    if xs.is_empty() {
        return Err(GainError::Invalid("smooth bridge needs positive knots".into()));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.insert(0, 0.0);
    check_gap(lower, upper, &refine(&xs))?;
    for _ in 0..MAX_REPAIR_ROUNDS {
        let sp = fit_seed(lower, upper, &xs)?;
        let sigma = ComparisonFunction::single(Segment::Spline(sp))?;
        let bad = violations(lower, upper, &sigma, &xs)?;
        if bad.is_empty() {
            return Ok(sigma);
        }
        xs.extend(bad);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    Err(GainError::MonotonicityRepairFailed(MAX_REPAIR_ROUNDS))
}

fn refine(xs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len() * REFINE);
    for w in xs.windows(2) {
        for j in 1..=REFINE {
            out.push(w[0] + (w[1] - w[0]) * j as f64 / REFINE as f64);
        }
    }
    out
}

fn check_gap(lower: &dyn ScalarGain, upper: &dyn ScalarGain, pts: &[f64]) -> Result<()> {
    for &s in pts {
        if upper.eval(s)? - lower.eval(s)? <= 1e-12 {
            return Err(GainError::GapClosed(s));
        }
    }
    Ok(())
}

fn fit_seed(lower: &dyn ScalarGain, upper: &dyn ScalarGain, xs: &[f64]) -> Result<MonotoneSpline> {
    let mut ys = Vec::with_capacity(xs.len());
    let mut prev = 0.0_f64;
    for &s in xs {
        let m = if s == 0.0 { 0.0 } else { (lower.eval(s)? * upper.eval(s)?).sqrt().max(prev) + 1e-12 * s };
        ys.push(m);
        prev = m;
    }
    MonotoneSpline::fit(xs, &ys)
}

/// Points (refinement samples and knot-interval midpoints) where the
/// sandwich or the derivative sign fails.
fn violations(
    lower: &dyn ScalarGain,
    upper: &dyn ScalarGain,
    sigma: &ComparisonFunction,
    xs: &[f64],
) -> Result<Vec<f64>> {
    let mut bad = Vec::new();
    for s in refine(xs) {
        let v = sigma.eval(s)?;
        if !(lower.eval(s)? < v && v < upper.eval(s)?) {
            bad.push(s);
        }
    }
    for w in xs.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let h = 1e-3 * (w[1] - w[0]);
        if !(sigma.eval(mid + h)? > sigma.eval(mid - h)?) {
            bad.push(mid);
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lin(a: f64) -> Arc<ComparisonFunction> {
        Arc::new(ComparisonFunction::linear(a))
    }

    #[test]
    fn kinf_bridge_affine_case() {
        let parts = build_kinf_bridge(&lin(0.5), &lin(1.0), 0.1, 1.0, Some(0.1)).unwrap();
        let f = &parts.function;
        let v = f.eval(0.5).unwrap();
        assert!(v > 0.25 && v < 1.0);
        assert!(f.seam_gap() <= 1e-9);
        assert_eq!(parts.k, Some(0.1_f64.min(0.5 * (0.1 - 0.05))));
        for i in 1..=2000 {
            let s = 10.0 * f64::from(i) / 2000.0;
            assert!(f.eval(s).unwrap() > 0.5 * s);
        }
    }

    #[test]
    fn kinf_bridge_rejects_boundary_hypothesis() {
        let e = build_kinf_bridge(&lin(0.5), &lin(2.0), 0.1, 1.0, None);
        assert!(matches!(e, Err(GainError::HypothesisViolated { .. })));
    }

    #[test]
    fn kinf_bridge_with_p_zero_starts_at_second_branch() {
        let parts = build_kinf_bridge(&lin(0.5), &lin(1.0), 0.0, 1.0, None).unwrap();
        assert_eq!(parts.k, None);
        assert_eq!(parts.function.pieces().len(), 3);
        assert!(matches!(parts.function.pieces()[0].segment, Segment::Bridge { cap: BridgeCap::HalfGap { .. }, .. }));
    }

    #[test]
    fn kinf_bridge_rejects_epsilon_past_saturation() {
        let sat = Arc::new(ComparisonFunction::single(Segment::Saturating { limit: 1.2, half: 0.2 }).unwrap());
        let e = build_kinf_bridge(&lin(0.1), &sat, 0.1, 1.0, Some(0.5));
        assert!(matches!(e, Err(GainError::EpsilonTooLarge { .. })));
    }

    #[test]
    fn smooth_bridge_between_lines() {
        let sigma = build_smooth_bridge(lin(0.5).as_ref(), lin(2.0).as_ref(), &log_knots(1e-4, 10.0, 40)).unwrap();
        let v = sigma.eval(1.0).unwrap();
        assert!(v > 0.5 && v < 2.0);
        let e = build_smooth_bridge(lin(1.0).as_ref(), lin(1.0).as_ref(), &[0.5, 1.0]);
        assert!(matches!(e, Err(GainError::GapClosed(_))));
    }
}
