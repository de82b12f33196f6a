use serde::Serialize;

use super::DynError;

/// Upper-right Dini derivative surrogate with the spread of the last two
/// quotients as an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiniEstimate {
    pub value: f64,
    pub spread: f64,
}

/// `τ_k = 2⁻ᵏ · 10⁻²`, `k = 0..=20`.
pub fn default_schedule() -> Vec<f64> {
    (0..=20).map(|k| 1e-2 * 0.5_f64.powi(k)).collect()
}

const TAIL: usize = 8;

/// Forward difference quotients `(φ(y + τ d) − φ(y)) / τ` along a decreasing
/// schedule; the estimate is the maximum over the last eight.
pub fn dini_forward(
    phi: &dyn Fn(&[f64]) -> f64,
    direction: &[f64],
    y: &[f64],
    taus: &[f64],
) -> Result<DiniEstimate, DynError> {
    if taus.len() < 2 || taus.windows(2).any(|w| !(w[1] < w[0])) || taus.iter().any(|t| !(*t > 0.0)) {
        return Err(DynError::Invalid("schedule must be positive and strictly decreasing".into()));
    }
    let base = phi(y);
    if !base.is_finite() {
        return Err(DynError::NonFinite { tau: 0.0, value: base });
    }
    let mut probe = y.to_vec();
    let mut quotients = Vec::with_capacity(taus.len());
    for &tau in taus {
        for (p, (yi, di)) in probe.iter_mut().zip(y.iter().zip(direction)) {
            *p = yi + tau * di;
        }
        let v = phi(&probe);
        if !v.is_finite() {
            return Err(DynError::NonFinite { tau, value: v });
        }
        quotients.push((v - base) / tau);
    }
    let tail = &quotients[quotients.len().saturating_sub(TAIL)..];
    let value = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let n = quotients.len();
    Ok(DiniEstimate { value, spread: (quotients[n - 1] - quotients[n - 2]).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kink_and_smooth_cases() {
        let taus = default_schedule();
        let abs = |y: &[f64]| y[0].abs();
        assert_eq!(dini_forward(&abs, &[1.0], &[0.0], &taus).unwrap().value, 1.0);
        assert!((dini_forward(&abs, &[-3.0], &[0.0], &taus).unwrap().value - 3.0).abs() < 1e-12);
        let sq = |y: &[f64]| y[0] * y[0];
        assert!(dini_forward(&sq, &[1.0], &[0.0], &taus).unwrap().value.abs() < 1e-5);
        let rho = |x: f64| 1.25 * x - 2.0 * x * x + x * x * x;
        let est = dini_forward(&abs, &[-rho(1.0)], &[1.0], &taus).unwrap();
        assert!((est.value + 0.25).abs() < 1e-4);
    }

    #[test]
    fn non_finite_is_reported() {
        let ln = |y: &[f64]| y[0].ln();
        assert!(matches!(dini_forward(&ln, &[1.0], &[0.0], &default_schedule()), Err(DynError::NonFinite { .. })));
    }
}
