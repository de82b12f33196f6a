use serde::{Deserialize, Serialize};

use super::{GainError, Result};

/// Monotone cubic Hermite interpolant, extended linearly past the last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotoneSpline {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl MonotoneSpline {
    /// Fritsch–Carlson slopes (weighted harmonic mean inside, shape-preserving
    /// three-point formula at the ends), kept strictly positive.
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 || ys.len() != n {
            return Err(GainError::Invalid("spline needs at least two knots".into()));
        }
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        if h.iter().any(|v| !(*v > 0.0)) || del.iter().any(|v| !(*v > 0.0)) {
            return Err(GainError::Invalid("spline data must be strictly increasing".into()));
        }
        let mut d = vec![0.0; n];
        if n == 2 {
            d = vec![del[0]; 2];
        } else {
            for k in 1..n - 1 {
                let w1 = 2.0 * h[k] + h[k - 1];
                let w2 = h[k] + 2.0 * h[k - 1];
                d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        let sp = MonotoneSpline { xs: xs.to_vec(), ys: ys.to_vec(), slopes: d };
        sp.validate()?;
        Ok(sp)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.xs.len();
        let ok = n >= 2
            && self.ys.len() == n
            && self.slopes.len() == n
            && self.xs.windows(2).all(|w| w[1] > w[0])
            && self.ys.windows(2).all(|w| w[1] > w[0])
            && self.slopes.iter().all(|d| d.is_finite() && *d > 0.0);
        if ok {
            Ok(())
        } else {
            Err(GainError::Invalid("spline knots, values and slopes must be increasing/positive".into()))
        }
    }

    fn interval(&self, s: f64) -> usize {
        self.xs.partition_point(|x| *x <= s).clamp(1, self.xs.len() - 1) - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.xs.len();
        if s >= self.xs[n - 1] {
            return self.ys[n - 1] + self.slopes[n - 1] * (s - self.xs[n - 1]);
        }
        if s <= self.xs[0] {
            return self.ys[0] + self.slopes[0] * (s - self.xs[0]);
        }
        let k = self.interval(s);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (s - self.xs[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k] + h10 * h * self.slopes[k] + h01 * self.ys[k + 1] + h11 * h * self.slopes[k + 1]
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let n = self.xs.len();
        if s >= self.xs[n - 1] {
            return self.slopes[n - 1];
        }
        if s <= self.xs[0] {
            return self.slopes[0];
        }
        let k = self.interval(s);
        let h = self.xs[k + 1] - self.xs[k];
        let t = (s - self.xs[k]) / h;
        let t2 = t * t;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        d00 * self.ys[k] + d10 * self.slopes[k] + d01 * self.ys[k + 1] + d11 * self.slopes[k + 1]
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let mut d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d <= 0.0 {
        d = 0.5 * del0;
    } else if d > 3.0 * del0 {
        d = 3.0 * del0;
    }
    d
}
