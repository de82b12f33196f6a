use serde::{Deserialize, Serialize};

const PRIMES: [u64; 24] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89];

/// Van der Corput radical inverse of `i` in `base`.
pub fn radical_inverse(base: u64, mut i: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Halton low-discrepancy sequence in `[0, 1)^dims`; the seed skips ahead.
#[derive(Debug, Clone)]
pub struct Halton {
    dims: usize,
    index: u64,
}

impl Halton {
    pub fn new(dims: usize, seed: u64) -> Self {
        assert!(dims <= PRIMES.len(), "at most {} dimensions", PRIMES.len());
        Halton { dims, index: 1 + seed.wrapping_mul(7919) % (1 << 40) }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        let i = self.index;
        self.index += 1;
        PRIMES[..self.dims].iter().map(|&b| radical_inverse(b, i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplingOptions {
    /// Accepted samples per check.
    pub samples: usize,
    pub seed: u64,
    pub tol_dini: f64,
    /// Half-width of boxes in unbounded directions.
    pub box_cap: f64,
    /// Storage values above this are not sampled.
    pub level_cap: f64,
    /// Draws allowed per requested sample before giving up.
    pub max_attempts: usize,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { samples: 10_000, seed: 0, tol_dini: 1e-6, box_cap: 10.0, level_cap: 1e3, max_attempts: 50 }
    }
}

/// Norm-based set for one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ComponentSet {
    /// `|v|∞ ≤ radius`, uniform.
    Box { radius: f64 },
    /// `inner ≤ |v| ≤ outer`, log-uniform in the radius.
    Shell { inner: f64, outer: f64 },
}

impl ComponentSet {
    fn coords(&self) -> usize {
        match self {
            ComponentSet::Box { .. } => 0,
            ComponentSet::Shell { .. } => 1,
        }
    }

    fn draw(&self, u: &[f64], out: &mut [f64]) {
        let k = out.len();
        match *self {
            ComponentSet::Box { radius } => {
                for (o, ui) in out.iter_mut().zip(u) {
                    *o = radius * (2.0 * ui - 1.0);
                }
            }
            ComponentSet::Shell { inner, outer } => {
                let r = if inner > 0.0 { inner * (outer / inner).powf(u[0]) } else { outer * u[0] };
                let dir: Vec<f64> = u[1..=k].iter().map(|v| 2.0 * v - 1.0).collect();
                let nrm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
                for (o, d) in out.iter_mut().zip(&dir) {
                    *o = if k == 1 { r * d.signum() } else { r * d / nrm.max(1e-12) };
                }
            }
        }
    }
}

/// Deterministic sampler of stacked states `(x, z)` from a product of sets.
#[derive(Debug, Clone)]
pub struct ProductSampler {
    n: usize,
    m: usize,
    x: ComponentSet,
    z: ComponentSet,
    seq: Halton,
}

impl ProductSampler {
    pub fn new(n: usize, m: usize, x: ComponentSet, z: ComponentSet, seed: u64) -> Self {
        let dims = n + m + x.coords() + z.coords();
        ProductSampler { n, m, x, z, seq: Halton::new(dims, seed) }
    }

    pub fn next_state(&mut self) -> Vec<f64> {
        let u = self.seq.next_point();
        let (ux, uz) = u.split_at(self.n + self.x.coords());
        let mut y = vec![0.0; self.n + self.m];
        let (yx, yz) = y.split_at_mut(self.n);
        self.x.draw(ux, yx);
        self.z.draw(uz, yz);
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        assert_eq!(radical_inverse(2, 1), 0.5);
        assert_eq!(radical_inverse(2, 3), 0.75);
        assert!((radical_inverse(3, 5) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
        let mut a = Halton::new(3, 4);
        let mut b = Halton::new(3, 4);
        assert_eq!(a.next_point(), b.next_point());
    }

    #[test]
    fn shell_samples_respect_radii() {
        let mut s = ProductSampler::new(1, 1, ComponentSet::Shell { inner: 0.5, outer: 100.0 }, ComponentSet::Box { radius: 2.0 }, 0);
        let mut neg = 0;
        for _ in 0..2000 {
            let y = s.next_state();
            assert!(y[0].abs() >= 0.5 - 1e-12 && y[0].abs() <= 100.0 + 1e-9);
            assert!(y[1].abs() <= 2.0);
            neg += usize::from(y[0] < 0.0);
        }
        assert!(neg > 800 && neg < 1200);
    }
}
