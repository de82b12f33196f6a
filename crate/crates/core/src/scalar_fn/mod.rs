//! Comparison functions: strictly increasing maps on `[0, ∞)` vanishing at 0.
//!
//! A [`ComparisonFunction`] is an ordered list of pieces, each a closed-form
//! [`Segment`] active from its breakpoint to the next one. Segments are
//! expressed in the global argument, so an affine piece `slope·s + intercept`
//! uses `s` itself, not an offset from the breakpoint.
//!
//! Derived segments (composition, inverse, rescaling, pointwise minimum,
//! bridge branches) hold shared references to other functions, which keeps
//! cloning cheap and evaluation exact up to nested bisection.

mod bridge;
mod margin;
mod piecewise;
mod spline;
mod tail;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bridge::{build_kinf_bridge, build_smooth_bridge, log_knots, KinfBridgeParts};
pub use margin::{
    gap_margin, geometric_grid, sandwich_margin, small_gain_margin, uniform_grid, Interval, MarginReport,
    Orientation, SgcOptions, TailPolicy, TailVerdict,
};
pub use piecewise::{Jump, PiecewiseGain};
pub use spline::MonotoneSpline;
pub use tail::{TailBound, TailExpr};

/// Absolute residual accepted after inverting by bisection.
pub const INVERT_TOL: f64 = 1e-10;
/// Largest mismatch tolerated between adjacent segments at a shared breakpoint.
pub const SEAM_TOL: f64 = 1e-9;
const MAX_BISECT: usize = 200;
const MAX_EXPAND: usize = 1100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GainError {
    #[error("argument {0} is outside the domain of the function")]
    Domain(f64),
    #[error("value {y} is outside the bracket image [{lo_val}, {hi_val}]")]
    Bracket { y: f64, lo_val: f64, hi_val: f64 },
    #[error("bisection did not converge: {0}")]
    NonConvergence(String),
    #[error("invalid gain: {0}")]
    Invalid(String),
    #[error("no dominance certificate beyond s = {0}")]
    AsymptoticUndecided(f64),
    #[error("hypothesis violated at s = {s}: composition gives {value} >= s")]
    HypothesisViolated { s: f64, value: f64 },
    #[error("q + epsilon = {reach} is not below the saturation limit {limit}")]
    EpsilonTooLarge { reach: f64, limit: f64 },
    #[error("gap between lower and upper closes at s = {0}")]
    GapClosed(f64),
    #[error("monotone repair failed after {0} refinement rounds")]
    MonotonicityRepairFailed(usize),
}

pub type Result<T, E = GainError> = std::result::Result<T, E>;

/// Evaluate `c0 + c1 s + c2 s² + c3 s³`.
pub fn poly_eval(c: &[f64; 4], s: f64) -> f64 {
    ((c[3] * s + c[2]) * s + c[1]) * s + c[0]
}

pub fn poly_derivative(c: &[f64; 4], s: f64) -> f64 {
    (3.0 * c[3] * s + 2.0 * c[2]) * s + c[1]
}

/// Cap term of a bridge branch `alpha(s) + min(s, cap)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BridgeCap {
    /// `alpha(s) + s`.
    Identity,
    /// `alpha(s) + min(s, value)`.
    Constant { value: f64 },
    /// `alpha(s) + min(s, (beta⁻¹(s) − alpha(s)) / 2)`.
    HalfGap { beta: Arc<ComparisonFunction> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Segment {
    Affine {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    /// Increasing cubic `c0 + c1 s + c2 s² + c3 s³`.
    Cubic { coeffs: [f64; 4] },
    /// `s ↦ p⁻¹(s / scale)` with `p` increasing on `[lo, hi]`.
    BranchInverse {
        coeffs: [f64; 4],
        lo: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi: Option<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    /// `limit · s / (half + s)`.
    Saturating { limit: f64, half: f64 },
    Spline(MonotoneSpline),
    Compose {
        outer: Arc<ComparisonFunction>,
        inner: Arc<ComparisonFunction>,
    },
    Inverse { of: Arc<ComparisonFunction> },
    /// `output · of(input · s)`.
    Rescale {
        of: Arc<ComparisonFunction>,
        input: f64,
        output: f64,
    },
    Min {
        a: Arc<ComparisonFunction>,
        b: Arc<ComparisonFunction>,
    },
    Bridge {
        alpha: Arc<ComparisonFunction>,
        cap: BridgeCap,
    },
    /// `factor · of(s)`.
    Scaled { factor: f64, of: Box<Segment> },
}

fn one() -> f64 {
    1.0
}

impl Segment {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GainError::Invalid(m.to_string()));
        match self {
            Segment::Affine { slope, intercept } => {
                if !(slope.is_finite() && *slope > 0.0 && intercept.is_finite()) {
                    return bad("affine slope must be positive and finite");
                }
            }
            Segment::Cubic { coeffs } => {
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return bad("cubic coefficients must be finite");
                }
            }
            Segment::BranchInverse { coeffs, lo, hi, scale } => {
                if coeffs.iter().any(|c| !c.is_finite()) || !lo.is_finite() || *lo < 0.0 {
                    return bad("branch inverse needs finite coefficients and lo >= 0");
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad("branch inverse scale must be positive");
                }
                if let Some(h) = hi {
                    if !(h.is_finite() && h > lo) {
                        return bad("branch inverse needs hi > lo");
                    }
                } else if coeffs[3] < 0.0 || (coeffs[3] == 0.0 && coeffs[2] < 0.0) {
                    return bad("unbounded branch inverse needs a growing polynomial");
                }
            }
            Segment::Saturating { limit, half } => {
                if !(limit.is_finite() && *limit > 0.0 && half.is_finite() && *half > 0.0) {
                    return bad("saturating segment needs positive limit and half");
                }
            }
            Segment::Spline(sp) => sp.validate()?,
            Segment::Rescale { input, output, .. } => {
                if !(input.is_finite() && *input > 0.0 && output.is_finite() && *output > 0.0) {
                    return bad("rescale factors must be positive");
                }
            }
            Segment::Bridge { cap: BridgeCap::Constant { value }, .. } => {
                if !(value.is_finite() && *value > 0.0) {
                    return bad("bridge cap must be positive");
                }
            }
            Segment::Scaled { factor, of } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return bad("scale factor must be positive");
                }
                of.validate()?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        match self {
            Segment::Affine { slope, intercept } => Ok(intercept + slope * s),
            Segment::Cubic { coeffs } => Ok(poly_eval(coeffs, s)),
            Segment::BranchInverse { coeffs, lo, hi, scale } => {
                let p = |x: f64| Ok(poly_eval(coeffs, x));
                bisect(p, s / scale, *lo, hi.unwrap_or(f64::INFINITY))
            }
            Segment::Saturating { limit, half } => Ok(limit * s / (half + s)),
            Segment::Spline(sp) => Ok(sp.eval(s)),
            Segment::Compose { outer, inner } => outer.eval(inner.eval(s)?),
            Segment::Inverse { of } => of.inverse_value(s),
            Segment::Rescale { of, input, output } => Ok(output * of.eval(input * s)?),
            Segment::Min { a, b } => Ok(a.eval(s)?.min(b.eval(s)?)),
            Segment::Bridge { alpha, cap } => {
                let a = alpha.eval(s)?;
                let c = match cap {
                    BridgeCap::Identity => s,
                    BridgeCap::Constant { value } => s.min(*value),
                    BridgeCap::HalfGap { beta } => s.min(0.5 * (beta.inverse_value(s)? - a)),
                };
                Ok(a + c)
            }
            Segment::Scaled { factor, of } => Ok(factor * of.eval(s)?),
        }
    }

    /// Closed-form inverse when one exists.
    fn invert_exact(&self, y: f64) -> Option<Result<f64>> {
        match self {
            Segment::Affine { slope, intercept } => Some(Ok((y - intercept) / slope)),
            Segment::BranchInverse { coeffs, scale, .. } => Some(Ok(poly_eval(coeffs, y) * scale)),
            Segment::Saturating { limit, half } => Some(if y < *limit {
                Ok(half * y / (limit - y))
            } else {
                Err(GainError::Domain(y))
            }),
            Segment::Inverse { of } => Some(of.eval(y)),
            Segment::Compose { outer, inner } => {
                Some(outer.inverse_value(y).and_then(|v| inner.inverse_value(v)))
            }
            Segment::Rescale { of, input, output } => {
                Some(of.inverse_value(y / output).map(|v| v / input))
            }
            Segment::Scaled { factor, of } => of.invert_exact(y / factor),
            _ => None,
        }
    }

    fn limit(&self) -> f64 {
        match self {
            Segment::BranchInverse { hi, .. } => hi.unwrap_or(f64::INFINITY),
            Segment::Saturating { limit, .. } => *limit,
            Segment::Compose { outer, inner } => {
                let l = inner.limit_at_infinity();
                if l.is_finite() && l < outer.domain_end() {
                    outer.eval(l).unwrap_or(f64::INFINITY)
                } else {
                    outer.limit_at_infinity()
                }
            }
            Segment::Inverse { of } => of.domain_end(),
            Segment::Rescale { of, output, .. } => output * of.limit_at_infinity(),
            Segment::Min { a, b } => a.limit_at_infinity().min(b.limit_at_infinity()),
            Segment::Bridge { alpha, cap } => match cap {
                BridgeCap::Constant { value } => alpha.limit_at_infinity() + value,
                _ => f64::INFINITY,
            },
            Segment::Scaled { factor, of } => factor * of.limit(),
            _ => f64::INFINITY,
        }
    }

    fn domain_end(&self) -> f64 {
        match self {
            Segment::BranchInverse { coeffs, hi: Some(h), scale, .. } => poly_eval(coeffs, *h) * scale,
            Segment::Compose { outer, inner } => {
                let d = outer.domain_end();
                if d < inner.limit_at_infinity() {
                    inner.inverse_value(d).unwrap_or(inner.domain_end())
                } else {
                    inner.domain_end()
                }
            }
            Segment::Inverse { of } => of.limit_at_infinity(),
            Segment::Rescale { of, input, .. } => of.domain_end() / input,
            Segment::Min { a, b } => a.domain_end().min(b.domain_end()),
            Segment::Bridge { alpha, cap } => match cap {
                BridgeCap::HalfGap { beta } => alpha.domain_end().min(beta.limit_at_infinity()),
                _ => alpha.domain_end(),
            },
            Segment::Scaled { of, .. } => of.domain_end(),
            _ => f64::INFINITY,
        }
    }
}

/// A segment together with the breakpoint where it becomes active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub segment: Segment,
}

impl Piece {
    pub fn new(start: f64, segment: Segment) -> Self {
        Piece { start, segment }
    }
}

/// Shared storage for continuous and piecewise gains.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Pieces {
    pub(crate) pieces: Vec<Piece>,
}

impl Pieces {
    pub(crate) fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(GainError::Invalid("no pieces".into()));
        }
        if pieces[0].start != 0.0 {
            return Err(GainError::Invalid("first piece must start at 0".into()));
        }
        for w in pieces.windows(2) {
            if !(w[1].start.is_finite() && w[1].start > w[0].start) {
                return Err(GainError::Invalid("breakpoints must strictly increase".into()));
            }
        }
        for p in &pieces {
            p.segment.validate()?;
        }
        let z = pieces[0].segment.eval(0.0)?;
        if z.abs() > 1e-12 {
            return Err(GainError::Invalid(format!("value at 0 is {z}, expected 0")));
        }
        Ok(Pieces { pieces })
    }

    pub(crate) fn locate(&self, s: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= s).saturating_sub(1)
    }

    pub(crate) fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(GainError::Domain(s));
        }
        self.pieces[self.locate(s)].segment.eval(s)
    }

    /// `(breakpoint, left value, right value)` at every interior breakpoint.
    pub(crate) fn seams(&self) -> Result<Vec<(f64, f64, f64)>> {
        self.pieces
            .windows(2)
            .map(|w| Ok((w[1].start, w[0].segment.eval(w[1].start)?, w[1].segment.eval(w[1].start)?)))
            .collect()
    }

    pub(crate) fn last(&self) -> &Piece {
        self.pieces.last().expect("non-empty")
    }
}

/// Continuous, strictly increasing function on `[0, domain_end)` with `f(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "repr::GainRepr", into = "repr::GainRepr")]
pub struct ComparisonFunction {
    inner: Pieces,
    start_values: Vec<f64>,
    limit: f64,
    domain: f64,
}

impl ComparisonFunction {
    /// Build from pieces, checking `f(0) = 0` and continuity at every seam.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let inner = Pieces::new(pieces)?;
        for (at, l, r) in inner.seams()? {
            if (l - r).abs() > SEAM_TOL {
                return Err(GainError::Invalid(format!(
                    "discontinuity at {at}: left {l}, right {r}"
                )));
            }
        }
        let start_values = inner
            .pieces
            .iter()
            .map(|p| p.segment.eval(p.start))
            .collect::<Result<Vec<_>>>()?;
        let last = &inner.last().segment;
        let (limit, domain) = (last.limit(), last.domain_end());
        Ok(ComparisonFunction { inner, start_values, limit, domain })
    }

    pub fn single(segment: Segment) -> Result<Self> {
        Self::new(vec![Piece::new(0.0, segment)])
    }

    pub fn identity() -> Self {
        Self::linear(1.0)
    }

    /// `s ↦ slope · s`.
    pub fn linear(slope: f64) -> Self {
        Self::single(Segment::Affine { slope, intercept: 0.0 }).expect("positive slope")
    }

    /// Continuous piecewise-affine interpolant through `knots` (first knot
    /// `(0, 0)`), continued with `tail_slope` after the last knot.
    pub fn piecewise_affine(knots: &[(f64, f64)], tail_slope: f64) -> Result<Self> {
        if knots.len() < 2 || knots[0] != (0.0, 0.0) {
            return Err(GainError::Invalid("piecewise affine needs (0,0) and one more knot".into()));
        }
        let mut pieces = Vec::with_capacity(knots.len());
        for w in knots.windows(2) {
            let ((x0, y0), (x1, y1)) = (w[0], w[1]);
            let slope = (y1 - y0) / (x1 - x0);
            pieces.push(Piece::new(x0, Segment::Affine { slope, intercept: y0 - slope * x0 }));
        }
        let (xn, yn) = knots[knots.len() - 1];
        pieces.push(Piece::new(xn, Segment::Affine { slope: tail_slope, intercept: yn - tail_slope * xn }));
        Self::new(pieces)
    }

    pub fn compose(outer: &Arc<Self>, inner: &Arc<Self>) -> Self {
        Self::single(Segment::Compose { outer: outer.clone(), inner: inner.clone() })
            .expect("composition of valid functions")
    }

    pub fn inverse_function(of: &Arc<Self>) -> Self {
        Self::single(Segment::Inverse { of: of.clone() }).expect("inverse of a valid function")
    }

    /// `s ↦ output · of(input · s)`.
    pub fn rescaled(of: &Arc<Self>, input: f64, output: f64) -> Result<Self> {
        Self::single(Segment::Rescale { of: of.clone(), input, output })
    }

    pub fn pointwise_min(a: &Arc<Self>, b: &Arc<Self>) -> Self {
        Self::single(Segment::Min { a: a.clone(), b: b.clone() }).expect("minimum of valid functions")
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.inner.pieces
    }

    pub fn limit_at_infinity(&self) -> f64 {
        self.limit
    }

    /// Supremum of the domain (`∞` unless the function is an inverse of a
    /// saturating map or similar).
    pub fn domain_end(&self) -> f64 {
        self.domain
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        if s >= self.domain {
            return Err(GainError::Domain(s));
        }
        self.inner.eval(s)
    }

    /// Largest absolute mismatch over all seams.
    pub fn seam_gap(&self) -> f64 {
        self.inner
            .seams()
            .map(|v| v.iter().map(|(_, l, r)| (l - r).abs()).fold(0.0, f64::max))
            .unwrap_or(f64::INFINITY)
    }

    /// Inverse value `f⁻¹(y)` for `0 ≤ y < limit_at_infinity`.
    pub fn inverse_value(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || y >= self.limit || !y.is_finite() {
            return Err(GainError::Domain(y));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let i = self.start_values.partition_point(|v| *v <= y).saturating_sub(1);
        let piece = &self.inner.pieces[i];
        if let Some(r) = piece.segment.invert_exact(y) {
            return r;
        }
        let hi = self.inner.pieces.get(i + 1).map_or(self.domain, |p| p.start);
        bisect(|s| piece.segment.eval(s), y, piece.start, hi)
    }

    /// Solve `f(s) = y` for `s` in `[lo, hi]` by bisection.
    pub fn invert(&self, y: f64, lo: f64, hi: f64) -> Result<f64> {
        let (flo, fhi) = (self.eval(lo)?, self.eval(hi)?);
        let tol = INVERT_TOL * y.abs().max(1.0);
        if y < flo - tol || y > fhi + tol {
            return Err(GainError::Bracket { y, lo_val: flo, hi_val: fhi });
        }
        bisect(|s| self.eval(s), y, lo, hi)
    }

    /// Derivative, analytic for closed forms and central-difference otherwise.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        let seg = &self.inner.pieces[self.inner.locate(s)].segment;
        match seg {
            Segment::Affine { slope, .. } => Ok(*slope),
            Segment::Cubic { coeffs } => Ok(poly_derivative(coeffs, s)),
            Segment::Spline(sp) => Ok(sp.derivative(s)),
            _ => {
                let h = 1e-7 * s.max(1.0);
                if s < h {
                    Ok((self.eval(s + h)? - self.eval(s)?) / h)
                } else {
                    Ok((self.eval(s + h)? - self.eval(s - h)?) / (2.0 * h))
                }
            }
        }
    }

    /// Strict increase on a grid; returns the first offending pair.
    pub fn check_increasing(&self, grid: &[f64]) -> Result<Option<(f64, f64)>> {
        let mut prev: Option<(f64, f64)> = None;
        for &s in grid {
            let v = self.eval(s)?;
            if let Some((ps, pv)) = prev {
                if v <= pv {
                    return Ok(Some((ps, s)));
                }
            }
            prev = Some((s, v));
        }
        Ok(None)
    }

    /// Same pieces with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(scale_pieces(&self.inner.pieces, factor))
    }

    /// Upper bound valid on a tail `[from, ∞)`, when one can be derived.
    pub fn upper_tail(&self) -> Option<TailBound> {
        tail::upper_tail_of(self)
    }
}

pub(crate) fn scale_pieces(pieces: &[Piece], factor: f64) -> Vec<Piece> {
    pieces
        .iter()
        .map(|p| Piece::new(p.start, Segment::Scaled { factor, of: Box::new(p.segment.clone()) }))
        .collect()
}

/// Shared interface of continuous and piecewise gains.
pub trait ScalarGain: Send + Sync {
    fn eval(&self, s: f64) -> Result<f64>;
    fn limit_at_infinity(&self) -> f64;
    fn upper_tail(&self) -> Option<TailBound>;

    /// Smallest `s` with `eval(s) ≥ y` (up to bisection precision).
    fn preimage_at_least(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        if y >= self.limit_at_infinity() {
            return Err(GainError::Domain(y));
        }
        let mut hi = 1.0;
        for _ in 0..MAX_EXPAND {
            if self.eval(hi)? >= y {
                break;
            }
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..MAX_BISECT {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid)? >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }
}

impl ScalarGain for ComparisonFunction {
    fn eval(&self, s: f64) -> Result<f64> {
        ComparisonFunction::eval(self, s)
    }
    fn limit_at_infinity(&self) -> f64 {
        self.limit
    }
    fn upper_tail(&self) -> Option<TailBound> {
        ComparisonFunction::upper_tail(self)
    }
    fn preimage_at_least(&self, y: f64) -> Result<f64> {
        self.inverse_value(y)
    }
}

/// A gain as stored in certificates: continuous or with upward jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Gain {
    Continuous(Arc<ComparisonFunction>),
    Piecewise(Arc<PiecewiseGain>),
}

impl Gain {
    pub fn eval(&self, s: f64) -> Result<f64> {
        match self {
            Gain::Continuous(f) => f.eval(s),
            Gain::Piecewise(f) => f.eval(s),
        }
    }

    pub fn as_scalar(&self) -> &dyn ScalarGain {
        match self {
            Gain::Continuous(f) => f.as_ref(),
            Gain::Piecewise(f) => f.as_ref(),
        }
    }

    pub fn limit_at_infinity(&self) -> f64 {
        self.as_scalar().limit_at_infinity()
    }

    /// Same gain with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Gain> {
        Ok(match self {
            Gain::Continuous(f) => Gain::Continuous(Arc::new(f.scaled(factor)?)),
            Gain::Piecewise(p) => Gain::Piecewise(Arc::new(p.scaled(factor)?)),
        })
    }
}

impl From<ComparisonFunction> for Gain {
    fn from(f: ComparisonFunction) -> Self {
        Gain::Continuous(Arc::new(f))
    }
}

impl From<PiecewiseGain> for Gain {
    fn from(f: PiecewiseGain) -> Self {
        Gain::Piecewise(Arc::new(f))
    }
}

impl ScalarGain for Gain {
    fn eval(&self, s: f64) -> Result<f64> {
        Gain::eval(self, s)
    }
    fn limit_at_infinity(&self) -> f64 {
        self.as_scalar().limit_at_infinity()
    }
    fn upper_tail(&self) -> Option<TailBound> {
        self.as_scalar().upper_tail()
    }
    fn preimage_at_least(&self, y: f64) -> Result<f64> {
        self.as_scalar().preimage_at_least(y)
    }
}

/// Bisection for an increasing `f` on `[lo, hi]` (`hi` may be infinite).
///
/// Values at or below `f(lo)` resolve to `lo`, which pins double roots at the
/// left end of a branch exactly.
pub fn bisect(f: impl Fn(f64) -> Result<f64>, y: f64, lo: f64, hi: f64) -> Result<f64> {
    let flo = f(lo)?;
    let tiny = 4.0 * f64::EPSILON * y.abs().max(1.0);
    if y <= flo + tiny {
        if flo - y > INVERT_TOL * y.abs().max(1.0) {
            return Err(GainError::Bracket { y, lo_val: flo, hi_val: f64::NAN });
        }
        return Ok(lo);
    }
    let mut hi = hi;
    if hi.is_infinite() {
        hi = (2.0 * lo).max(lo + 1.0);
        let mut n = 0;
        while f(hi)? < y {
            hi *= 2.0;
            n += 1;
            if n > MAX_EXPAND || !hi.is_finite() {
                return Err(GainError::NonConvergence(format!("no upper bracket for {y}")));
            }
        }
    } else {
        let fhi = f(hi)?;
        if y >= fhi {
            if y - fhi > INVERT_TOL * y.abs().max(1.0) {
                return Err(GainError::Bracket { y, lo_val: flo, hi_val: fhi });
            }
            return Ok(hi);
        }
    }
    let mut lo = lo;
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (el, eh) = ((f(lo)? - y).abs(), (f(hi)? - y).abs());
    let (x, err) = if el < eh { (lo, el) } else { (hi, eh) };
    if err > INVERT_TOL * y.abs().max(1.0) {
        return Err(GainError::NonConvergence(format!("residual {err} at {x} for {y}")));
    }
    Ok(x)
}

mod repr {
    //! JSON layout: a single segment object, or `{"kind": "piecewise", "pieces": [...]}`.
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(rename_all = "kebab-case")]
    pub enum PiecewiseTag {
        Piecewise,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub enum GainRepr {
        Pieces { kind: PiecewiseTag, pieces: Vec<Piece> },
        Single(Segment),
    }

    impl GainRepr {
        pub fn from_pieces(pieces: &[Piece]) -> Self {
            if pieces.len() == 1 {
                GainRepr::Single(pieces[0].segment.clone())
            } else {
                GainRepr::Pieces { kind: PiecewiseTag::Piecewise, pieces: pieces.to_vec() }
            }
        }

        pub fn into_pieces(self) -> Vec<Piece> {
            match self {
                GainRepr::Pieces { pieces, .. } => pieces,
                GainRepr::Single(s) => vec![Piece::new(0.0, s)],
            }
        }
    }

    impl From<ComparisonFunction> for GainRepr {
        fn from(f: ComparisonFunction) -> Self {
            Self::from_pieces(&f.inner.pieces)
        }
    }

    impl TryFrom<GainRepr> for ComparisonFunction {
        type Error = GainError;
        fn try_from(r: GainRepr) -> Result<Self> {
            let f = ComparisonFunction::new(r.into_pieces())?;
            let top = f.pieces().last().map_or(0.0, |p| p.start);
            let end = f.domain_end().min(2.0 * top + 1.0);
            let grid: Vec<f64> = (0..=256).map(|i| end * f64::from(i) / 257.0).collect();
            if let Some((a, b)) = f.check_increasing(&grid)? {
                return Err(GainError::Invalid(format!("not strictly increasing on [{a}, {b}]")));
            }
            Ok(f)
        }
    }
}

pub(crate) use repr::GainRepr;
