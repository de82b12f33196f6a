//! Concave upper bounds on the tail of a gain.
//!
//! Every expression is built from `coef·s^exp + offset` with `coef ≥ 0` and
//! `0 ≤ exp ≤ 1`, closed under composition and sums, so it is concave and
//! nondecreasing. Then `s − bound(s)` is convex, and a positive value plus a
//! nonnegative slope at one point settles the sign on the whole half-line
//! to the right.

use serde::{Deserialize, Serialize};

use super::{poly_eval, BridgeCap, ComparisonFunction, ScalarGain, Segment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum TailExpr {
    Power { coef: f64, exp: f64, offset: f64 },
    Compose { outer: Box<TailExpr>, inner: Box<TailExpr> },
    Sum { a: Box<TailExpr>, b: Box<TailExpr> },
}

impl TailExpr {
    pub fn linear(slope: f64, offset: f64) -> Self {
        TailExpr::Power { coef: slope, exp: 1.0, offset }
    }

    pub fn constant(value: f64) -> Self {
        TailExpr::Power { coef: 0.0, exp: 1.0, offset: value }
    }

    pub fn compose(outer: TailExpr, inner: TailExpr) -> Self {
        TailExpr::Compose { outer: Box::new(outer), inner: Box::new(inner) }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            TailExpr::Power { coef, exp, offset } => coef * s.max(0.0).powf(*exp) + offset,
            TailExpr::Compose { outer, inner } => outer.eval(inner.eval(s)),
            TailExpr::Sum { a, b } => a.eval(s) + b.eval(s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            TailExpr::Power { coef, exp, .. } => {
                if *coef == 0.0 || *exp == 0.0 {
                    0.0
                } else if *exp == 1.0 {
                    *coef
                } else {
                    coef * exp * s.max(f64::MIN_POSITIVE).powf(exp - 1.0)
                }
            }
            TailExpr::Compose { outer, inner } => outer.derivative(inner.eval(s)) * inner.derivative(s),
            TailExpr::Sum { a, b } => a.derivative(s) + b.derivative(s),
        }
    }

    pub fn is_concave_nondecreasing(&self) -> bool {
        match self {
            TailExpr::Power { coef, exp, offset } => {
                coef.is_finite() && *coef >= 0.0 && (0.0..=1.0).contains(exp) && offset.is_finite()
            }
            TailExpr::Compose { outer, inner } => {
                outer.is_concave_nondecreasing() && inner.is_concave_nondecreasing()
            }
            TailExpr::Sum { a, b } => a.is_concave_nondecreasing() && b.is_concave_nondecreasing(),
        }
    }
}

/// `f(s) ≤ expr(s)` for every `s ≥ from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub expr: TailExpr,
    pub from: f64,
}

impl TailBound {
    pub fn new(expr: TailExpr, from: f64) -> Self {
        TailBound { expr, from }
    }

    fn map(self, f: impl FnOnce(TailExpr) -> TailExpr, from: f64) -> Self {
        TailBound { expr: f(self.expr), from: self.from.max(from) }
    }

    /// Bound for `outer ∘ inner`, valid once `inner` has passed `outer.from`.
    pub fn compose(outer: TailBound, inner: TailBound, inner_fn: &dyn ScalarGain) -> Option<TailBound> {
        let reach = inner_fn.preimage_at_least(outer.from).ok()?;
        Some(TailBound { expr: TailExpr::compose(outer.expr, inner.expr), from: inner.from.max(reach) })
    }
}

pub(crate) fn upper_tail_of(f: &ComparisonFunction) -> Option<TailBound> {
    let last = f.pieces().last()?;
    segment_tail(&last.segment, last.start)
}

pub(crate) fn segment_tail(seg: &Segment, start: f64) -> Option<TailBound> {
    let tb = match seg {
        Segment::Affine { slope, intercept } => TailBound::new(TailExpr::linear(*slope, *intercept), start),
        Segment::Cubic { coeffs } if coeffs[2] == 0.0 && coeffs[3] == 0.0 => {
            TailBound::new(TailExpr::linear(coeffs[1], coeffs[0]), start)
        }
        Segment::BranchInverse { coeffs, hi: None, scale, .. } => {
            TailBound::new(cubic_branch_tail(coeffs, *scale)?, start)
        }
        Segment::Saturating { limit, .. } => TailBound::new(TailExpr::constant(*limit), start),
        Segment::Spline(sp) => {
            let n = sp.xs.len() - 1;
            let d = sp.slopes[n];
            TailBound::new(TailExpr::linear(d, sp.ys[n] - d * sp.xs[n]), sp.xs[n])
        }
        Segment::Compose { outer, inner } => {
            TailBound::compose(outer.upper_tail()?, inner.upper_tail()?, inner.as_ref())?
        }
        Segment::Inverse { of } => {
            let last = of.pieces().last()?;
            let (slope, intercept, from) = match &last.segment {
                Segment::Affine { slope, intercept } => (*slope, *intercept, last.start),
                Segment::Spline(sp) => {
                    let n = sp.xs.len() - 1;
                    let d = sp.slopes[n];
                    (d, sp.ys[n] - d * sp.xs[n], sp.xs[n].max(last.start))
                }
                _ => return None,
            };
            TailBound::new(TailExpr::linear(1.0 / slope, -intercept / slope), of.eval(from).ok()?)
        }
        Segment::Rescale { of, input, output } => {
            let inner = of.upper_tail()?;
            let from = inner.from / input;
            let expr = TailExpr::compose(
                TailExpr::linear(*output, 0.0),
                TailExpr::compose(inner.expr, TailExpr::linear(*input, 0.0)),
            );
            TailBound::new(expr, from)
        }
        Segment::Min { a, b } => a.upper_tail().or_else(|| b.upper_tail())?,
        Segment::Bridge { alpha, cap } => {
            let capped = match cap {
                BridgeCap::Constant { value } => TailExpr::constant(*value),
                _ => TailExpr::linear(1.0, 0.0),
            };
            alpha
                .upper_tail()?
                .map(|e| TailExpr::Sum { a: Box::new(e), b: Box::new(capped) }, start)
        }
        Segment::Scaled { factor, of } => {
            segment_tail(of, start)?.map(|e| TailExpr::compose(TailExpr::linear(*factor, 0.0), e), start)
        }
        _ => return None,
    };
    Some(TailBound { from: tb.from.max(start), ..tb })
}

/// For `s ↦ p⁻¹(s/scale)` on an unbounded branch of a cubic (or linear) `p`:
/// find `h` with `p(x) ≥ a3 (x − h)³` on `x ≥ 0`, so `p⁻¹(y) ≤ h + (y/a3)^{1/3}`.
fn cubic_branch_tail(c: &[f64; 4], scale: f64) -> Option<TailExpr> {
    let [a0, a1, a2, a3] = *c;
    if a3 == 0.0 && a2 == 0.0 && a1 > 0.0 {
        return Some(TailExpr::linear(1.0 / (scale * a1), -a0 / a1));
    }
    if !(a3 > 0.0) {
        return None;
    }
    let mut h: f64 = 0.5;
    for _ in 0..80 {
        // p(x) − a3 (x − h)³ = qa x² + qb x + qc
        let qa = a2 + 3.0 * a3 * h;
        let qb = a1 - 3.0 * a3 * h * h;
        let qc = a0 + a3 * h.powi(3);
        let nonneg = if qa > 0.0 {
            let v = -qb / (2.0 * qa);
            if v <= 0.0 {
                qc >= 0.0
            } else {
                qc - qb * qb / (4.0 * qa) >= 0.0
            }
        } else {
            qa == 0.0 && qb >= 0.0 && qc >= 0.0
        };
        if nonneg {
            debug_assert!(poly_eval(c, h + 1.0) >= a3);
            return Some(TailExpr::Power { coef: (scale * a3).powf(-1.0 / 3.0), exp: 1.0 / 3.0, offset: h });
        }
        h *= 2.0;
    }
    None
}
