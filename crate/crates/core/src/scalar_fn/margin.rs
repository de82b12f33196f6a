use serde::{Deserialize, Serialize};

use super::{GainError, Result, ScalarGain, TailBound, TailExpr};

/// Real interval with independently open or closed ends; `hi` may be `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: false, hi_open: false }
    }
    /// `(lo, hi]`
    pub fn left_open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: true, hi_open: false }
    }
    pub fn open(lo: f64, hi: f64) -> Self {
        Interval { lo, hi, lo_open: true, hi_open: true }
    }
    /// `[lo, ∞)`
    pub fn ray(lo: f64) -> Self {
        Interval { lo, hi: f64::INFINITY, lo_open: false, hi_open: true }
    }

    pub fn is_bounded(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn contains(&self, s: f64) -> bool {
        let above = if self.lo_open { s > self.lo } else { s >= self.lo };
        let below = if self.hi_open { s < self.hi } else { s <= self.hi };
        above && below
    }
}

/// `n` equally spaced points honouring open ends.
pub fn uniform_grid(iv: &Interval, n: usize) -> Vec<f64> {
    let (lo, hi) = (iv.lo, iv.hi);
    let n = n.max(2);
    let (first, last, count) = match (iv.lo_open, iv.hi_open) {
        (false, false) => (0, n - 1, n - 1),
        (true, false) => (1, n, n),
        (false, true) => (0, n - 1, n),
        (true, true) => (1, n, n + 1),
    };
    (first..=last).map(|i| lo + (hi - lo) * i as f64 / count as f64).collect()
}

/// `n` log-spaced points from `lo > 0` to `hi`, both included.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let r = (hi / lo).ln();
    (0..n).map(|i| lo * (r * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Uniform grid merged with a geometric one when the interval spans more
/// than a decade, so that both ends are resolved.
pub(crate) fn mixed_grid(iv: &Interval, n: usize) -> Vec<f64> {
    let mut g = uniform_grid(iv, n);
    let lo_eff = if iv.lo > 0.0 { iv.lo } else { (iv.hi / n as f64).min(1e-4) };
    if iv.hi / lo_eff > 10.0 {
        g.extend(geometric_grid(lo_eff, iv.hi, n).into_iter().filter(|s| iv.contains(*s)));
        g.sort_by(f64::total_cmp);
        g.dedup();
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Orientation {
    /// `s − γ(δ(s))`
    GammaAfterDelta,
    /// `s − δ(γ(s))`
    DeltaAfterGamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailVerdict {
    pub from: f64,
    pub at: f64,
    pub margin: f64,
    pub slope: f64,
    pub bound: TailExpr,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub interval: (f64, f64),
    pub grid_size: usize,
    pub min_margin: f64,
    pub argmin: f64,
    pub passed: bool,
    /// Grid points with a nonpositive margin, as `(s, margin)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailVerdict>,
}

impl MarginReport {
    pub(crate) fn from_samples(iv: &Interval, samples: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut rep = MarginReport {
            interval: (iv.lo, iv.hi),
            grid_size: 0,
            min_margin: f64::INFINITY,
            argmin: f64::NAN,
            passed: false,
            violations: Vec::new(),
            tail: None,
        };
        for (s, m) in samples {
            rep.grid_size += 1;
            if m < rep.min_margin || rep.argmin.is_nan() {
                rep.min_margin = m;
                rep.argmin = s;
            }
            if !(m > 0.0) {
                rep.violations.push((s, m));
            }
        }
        rep.passed = rep.grid_size > 0 && rep.min_margin > 0.0;
        rep
    }

    /// Smallest and largest violating grid point.
    pub fn violation_span(&self) -> Option<(f64, f64)> {
        let first = self.violations.first()?.0;
        let last = self.violations.last()?.0;
        Some((first, last))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailPolicy {
    /// Compose the closed-form tail bounds of both gains.
    Derived,
    /// Use a bound on the composition supplied by the caller.
    Supplied(TailBound),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgcOptions {
    pub s_max: f64,
    pub tail: TailPolicy,
}

impl Default for SgcOptions {
    fn default() -> Self {
        SgcOptions { s_max: 100.0, tail: TailPolicy::Derived }
    }
}

/// Minimum of `min(mid − lower, upper − mid)` over a uniform grid.
pub fn sandwich_margin(
    lower: &dyn ScalarGain,
    mid: &dyn ScalarGain,
    upper: &dyn ScalarGain,
    iv: &Interval,
    grid_n: usize,
) -> Result<MarginReport> {
    if !(iv.hi > iv.lo) || !iv.is_bounded() {
        return Err(GainError::Domain(iv.lo));
    }
    let samples = uniform_grid(iv, grid_n)
        .into_iter()
        .map(|s| {
            let m = mid.eval(s)?;
            Ok((s, (m - lower.eval(s)?).min(upper.eval(s)? - m)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginReport::from_samples(iv, samples))
}

/// Minimum of `upper − lower` over a uniform grid.
pub fn gap_margin(lower: &dyn ScalarGain, upper: &dyn ScalarGain, iv: &Interval, grid_n: usize) -> Result<MarginReport> {
    sandwich_margin(lower, upper, &Infinite, iv, grid_n)
}

struct Infinite;

impl ScalarGain for Infinite {
    fn eval(&self, _: f64) -> Result<f64> {
        Ok(f64::INFINITY)
    }
    fn limit_at_infinity(&self) -> f64 {
        f64::INFINITY
    }
    fn upper_tail(&self) -> Option<TailBound> {
        None
    }
}

/// Minimum of `s − composition(s)` on a grid over the interval; unbounded
/// intervals are sampled up to `s_max` and closed by a tail certificate.
pub fn small_gain_margin(
    gamma: &dyn ScalarGain,
    delta: &dyn ScalarGain,
    iv: &Interval,
    orientation: Orientation,
    grid_n: usize,
    opts: &SgcOptions,
) -> Result<MarginReport> {
    let (outer, inner) = match orientation {
        Orientation::GammaAfterDelta => (gamma, delta),
        Orientation::DeltaAfterGamma => (delta, gamma),
    };
    let sampled = if iv.is_bounded() {
        *iv
    } else {
        if !(opts.s_max > iv.lo) {
            return Err(GainError::Domain(opts.s_max));
        }
        Interval { hi: opts.s_max, hi_open: false, ..*iv }
    };
    let comp = |s: f64| outer.eval(inner.eval(s)?);
    let samples = mixed_grid(&sampled, grid_n)
        .into_iter()
        .map(|s| Ok((s, s - comp(s)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut rep = MarginReport::from_samples(iv, samples);
    if iv.is_bounded() || !rep.passed {
        return Ok(rep);
    }
    let bound = match &opts.tail {
        TailPolicy::Supplied(tb) => Some(tb.clone()),
        TailPolicy::Derived => match (outer.upper_tail(), inner.upper_tail()) {
            (Some(o), Some(i)) => TailBound::compose(o, i, inner),
            _ => None,
        },
    };
    let bound = bound.ok_or(GainError::AsymptoticUndecided(opts.s_max))?;
    let at = opts.s_max;
    let margin = at - bound.expr.eval(at);
    let slope = 1.0 - bound.expr.derivative(at);
    let sound = bound.expr.is_concave_nondecreasing() && bound.from <= at && comp(at)? <= bound.expr.eval(at) + 1e-12;
    let verdict = TailVerdict { from: bound.from, at, margin, slope, bound: bound.expr, passed: sound && margin > 0.0 && slope >= 0.0 };
    if !verdict.passed {
        return Err(GainError::AsymptoticUndecided(at));
    }
    rep.tail = Some(verdict);
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar_fn::ComparisonFunction;

    #[test]
    fn grids_honour_open_ends() {
        let g = uniform_grid(&Interval::left_open(0.0, 1.0), 4);
        assert_eq!(g, vec![0.25, 0.5, 0.75, 1.0]);
        let g = uniform_grid(&Interval::open(0.0, 1.0), 3);
        assert_eq!(g, vec![0.25, 0.5, 0.75]);
        let g = uniform_grid(&Interval::closed(0.0, 1.0), 3);
        assert_eq!(g, vec![0.0, 0.5, 1.0]);
        let g = geometric_grid(1e-4, 1.0, 5);
        assert!((g[1] - 1e-3).abs() < 1e-15 && (g[4] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_sandwich_margin() {
        let (l, m, u) = (ComparisonFunction::linear(1.0 / 3.0), ComparisonFunction::linear(0.5), ComparisonFunction::identity());
        let r = sandwich_margin(&l, &m, &u, &Interval::closed(0.1, 1.0), 64).unwrap();
        assert!((r.min_margin - 0.1 / 6.0).abs() < 1e-15 && r.passed && r.argmin == 0.1);
        let r = sandwich_margin(&u, &m, &ComparisonFunction::linear(2.0), &Interval::closed(0.1, 1.0), 64).unwrap();
        assert!(!r.passed && r.min_margin < 0.0);
        assert!(sandwich_margin(&l, &m, &u, &Interval::closed(1.0, 1.0), 64).is_err());
    }

    #[test]
    fn halves_pass_on_unit_interval() {
        let h = ComparisonFunction::linear(0.5);
        let r = small_gain_margin(&h, &h, &Interval::left_open(0.0, 1.0), Orientation::GammaAfterDelta, 100, &SgcOptions::default()).unwrap();
        assert!(r.passed);
        let s_min = r.argmin;
        assert!((r.min_margin - 0.75 * s_min).abs() < 1e-18);
    }

    #[test]
    fn identity_fails_and_ray_needs_certificate() {
        let id = ComparisonFunction::identity();
        let r = small_gain_margin(&id, &id, &Interval::ray(1.0), Orientation::GammaAfterDelta, 100, &SgcOptions::default()).unwrap();
        assert!(!r.passed && r.min_margin == 0.0);
        let h = ComparisonFunction::linear(0.5);
        let r = small_gain_margin(&h, &h, &Interval::ray(1.0), Orientation::DeltaAfterGamma, 100, &SgcOptions::default()).unwrap();
        assert!(r.passed && r.tail.as_ref().unwrap().passed);
        let bad = SgcOptions { s_max: 100.0, tail: TailPolicy::Supplied(TailBound::new(TailExpr::linear(2.0, 0.0), 0.0)) };
        let e = small_gain_margin(&h, &h, &Interval::ray(1.0), Orientation::DeltaAfterGamma, 100, &bad);
        assert!(matches!(e, Err(GainError::AsymptoticUndecided(_))));
    }
}
