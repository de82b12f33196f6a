//! Scalar cubic interconnection whose optimal ISS gain has a jump.
//!
//! `ẋ = −ρ(x) + z`, `ż = −sign(z) δ̃(|z|) + x` with
//! `ρ(x) = 1.25x − 2x² + x³`, storage functions `V = |x|`, `W = |z|`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;

use crate::certificates::{
    build_merged_lyapunov, verify_theorem2, Interconnection, MergedLyapunov, RegionalGainBundle, Role,
    SamplingOptions, Side, StorageFunction, Theorem2Options, Theorem2Outcome,
};
use crate::dynamics::{norm, sign0, EnsembleReport, Field, InterconnectedSystem, StateFn};
use crate::scalar_fn::{
    bisect, build_smooth_bridge, gap_margin, log_knots, poly_derivative, poly_eval,
    small_gain_margin, uniform_grid, ComparisonFunction, Gain, GainError, Interval, KinfBridgeParts, MarginReport,
    Orientation, PiecewiseGain, Piece, Segment, SgcOptions,
};

use super::{monitored_ensemble, ExampleError, RunOptions};

pub const RHO: [f64; 4] = [0.0, 1.25, -2.0, 1.0];
pub const EPS_X: f64 = 0.05;
pub const EPS_Z: f64 = 0.05;
pub const M_LOCAL: f64 = 0.236;
pub const M_GLOBAL: f64 = 0.245;
/// `1 − ε_x`.
pub const SCALE: f64 = 1.0 - EPS_X;
/// Left end of the upper increasing branch of `ρ`.
pub const UPPER_BRANCH_START: f64 = 5.0 / 6.0;

/// Knots of the interconnection gain, continued with slope 1.
pub const DELTA_TILDE_KNOTS: [(f64, f64); 9] = [
    (0.0, 0.0),
    (4e-5, 0.03),
    (0.2199, 0.80),
    (0.2315, 0.88),
    (0.236, 0.95),
    (0.245, 1.12),
    (0.3, 1.30),
    (0.5, 1.60),
    (1.0, 2.2),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleConstants {
    pub eps_x: f64,
    pub eps_z: f64,
    pub m_local: f64,
    pub m_global: f64,
    /// Jump of `Γ`: `0.95 ρ(5/6)`.
    pub s1: f64,
    /// End of the lower branch: `0.95 ρ(1/2)`.
    pub s2: f64,
}

impl Default for ExampleConstants {
    fn default() -> Self {
        ExampleConstants {
            eps_x: EPS_X,
            eps_z: EPS_Z,
            m_local: M_LOCAL,
            m_global: M_GLOBAL,
            s1: SCALE * rho(UPPER_BRANCH_START),
            s2: SCALE * rho(0.5),
        }
    }
}

pub fn rho(s: f64) -> f64 {
    poly_eval(&RHO, s)
}

pub fn rho_derivative(s: f64) -> f64 {
    poly_derivative(&RHO, s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `[0, 1/2]`.
    Lower,
    /// `[5/6, ∞)`.
    Upper,
}

/// Inverse of `ρ` restricted to one of its increasing branches.
pub fn rho_branch_inverse(branch: Branch, y: f64) -> Result<f64, GainError> {
    let f = |s: f64| Ok(rho(s));
    match branch {
        Branch::Lower => {
            let top = rho(0.5);
            if !(0.0..=top).contains(&y) {
                return Err(GainError::Bracket { y, lo_val: 0.0, hi_val: top });
            }
            bisect(f, y, 0.0, 0.5)
        }
        Branch::Upper => {
            let bottom = rho(UPPER_BRANCH_START);
            if !(y >= bottom) || !y.is_finite() {
                return Err(GainError::Bracket { y, lo_val: bottom, hi_val: f64::INFINITY });
            }
            bisect(f, y, UPPER_BRANCH_START, f64::INFINITY)
        }
    }
}

fn lower_branch() -> Segment {
    Segment::BranchInverse { coeffs: RHO, lo: 0.0, hi: Some(0.5), scale: SCALE }
}

fn upper_branch() -> Segment {
    Segment::BranchInverse { coeffs: RHO, lo: UPPER_BRANCH_START, hi: None, scale: SCALE }
}

/// Smallest gain for the `x`-subsystem: lower branch below `s₁`, upper branch
/// from `s₁` on.
pub fn gamma_capital() -> Result<PiecewiseGain, GainError> {
    let c = ExampleConstants::default();
    PiecewiseGain::new(vec![Piece::new(0.0, lower_branch()), Piece::new(c.s1, upper_branch())])
}

/// Lower branch on `[0, s₂)`, then affine with the slope of the secant
/// between `(s₁, 1/3)` and `(s₂, 1/2)`.
pub fn gamma_ell() -> Result<ComparisonFunction, GainError> {
    let c = ExampleConstants::default();
    let end = lower_branch().eval(c.s2)?;
    let slope = (end - rho_branch_inverse(Branch::Lower, rho(UPPER_BRANCH_START))?) / (c.s2 - c.s1);
    ComparisonFunction::new(vec![
        Piece::new(0.0, lower_branch()),
        Piece::new(c.s2, Segment::Affine { slope, intercept: end - slope * c.s2 }),
    ])
}

/// Linear up to `(s₁, 5/6)`, then the upper branch.
pub fn gamma_g() -> Result<ComparisonFunction, GainError> {
    let c = ExampleConstants::default();
    let at = upper_branch().eval(c.s1)?;
    ComparisonFunction::new(vec![
        Piece::new(0.0, Segment::Affine { slope: at / c.s1, intercept: 0.0 }),
        Piece::new(c.s1, upper_branch()),
    ])
}

/// One inequality required of the interconnection gain, with its grid margin.
#[derive(Debug, Clone, Serialize)]
pub struct Constraint {
    pub name: &'static str,
    pub report: MarginReport,
}

const GRID: usize = 4000;

/// Evaluate every requirement on `δ̃` (4000-point grids, tails certified
/// where the interval is unbounded).
pub fn delta_tilde_constraints(dt: &Arc<ComparisonFunction>) -> Result<Vec<Constraint>, ExampleError> {
    let c = ExampleConstants::default();
    let gamma = gamma_capital()?;
    let gl = gamma_ell()?;
    let inv = Arc::new(ComparisonFunction::inverse_function(dt));
    let delta = cross_gain(dt);
    let sgc = SgcOptions::default();
    let id = ComparisonFunction::identity();
    let ray = Interval::ray(M_GLOBAL);
    let local = Interval::left_open(0.0, M_LOCAL);

    let undecided = |name: &'static str, e: GainError| match e {
        GainError::AsymptoticUndecided(at) => ExampleError::ValidationFailed { constraint: name, s: at, margin: f64::NAN },
        e => e.into(),
    };
    let mut out = Vec::new();
    let mut push = |name, report| out.push(Constraint { name, report });

    push("delta_tilde > gamma_l on (0, M_l]", gap_margin(&gl, dt.as_ref(), &local, GRID)?);
    push("delta_tilde < Gamma on (s1, M_l)", gap_margin(dt.as_ref(), &gamma, &Interval::open(c.s1, M_LOCAL), GRID)?);
    let name = "delta_tilde > Gamma on [M_g, inf)";
    let r = small_gain_margin(&gamma, inv.as_ref(), &ray, Orientation::DeltaAfterGamma, GRID, &sgc)
        .map_err(|e| undecided(name, e))?;
    push(name, r);
    let name = "0.95 delta_tilde > Gamma on [M_g, inf)";
    let r = small_gain_margin(&gamma, delta.as_ref(), &ray, Orientation::DeltaAfterGamma, GRID, &sgc)
        .map_err(|e| undecided(name, e))?;
    push(name, r);
    let r = small_gain_margin(&gl, delta.as_ref(), &local, Orientation::GammaAfterDelta, GRID, &sgc)?;
    push("gamma_l(delta(s)) < s on (0, M_l]", r);
    push("delta_tilde(s) > s on (0, 100]", gap_margin(&id, dt.as_ref(), &Interval::left_open(0.0, 100.0), GRID)?);
    push("delta_tilde(rho(x)) > x on (0, 100]", no_equilibrium_margin(dt)?);
    Ok(out)
}

/// Positive exactly when `x = δ̃(ρ(x))` has no solution on the grid, i.e.
/// the origin is the only equilibrium with `x > 0`.
fn no_equilibrium_margin(dt: &ComparisonFunction) -> Result<MarginReport, GainError> {
    let iv = Interval::left_open(0.0, 100.0);
    let mut pts = uniform_grid(&iv, GRID);
    pts.extend(log_knots(1e-6, 100.0, GRID));
    pts.sort_by(f64::total_cmp);
    let samples = pts.into_iter().map(|x| Ok((x, dt.eval(rho(x))? - x))).collect::<Result<Vec<_>, GainError>>()?;
    Ok(MarginReport::from_samples(&iv, samples))
}

/// Interconnection gain through `knots`, validated against every
/// requirement; the first one that fails is reported.
pub fn build_delta_tilde_from(knots: &[(f64, f64)]) -> Result<Arc<ComparisonFunction>, ExampleError> {
    let dt = Arc::new(ComparisonFunction::piecewise_affine(knots, 1.0)?);
    for con in delta_tilde_constraints(&dt)? {
        if !con.report.passed {
            return Err(ExampleError::ValidationFailed {
                constraint: con.name,
                s: con.report.argmin,
                margin: con.report.min_margin,
            });
        }
    }
    Ok(dt)
}

pub fn build_delta_tilde() -> Result<Arc<ComparisonFunction>, ExampleError> {
    build_delta_tilde_from(&DELTA_TILDE_KNOTS)
}

/// `δ(s) = δ̃⁻¹(s / 0.95)`.
pub fn cross_gain(dt: &Arc<ComparisonFunction>) -> Arc<ComparisonFunction> {
    let inv = Arc::new(ComparisonFunction::inverse_function(dt));
    Arc::new(ComparisonFunction::compose(&inv, &Arc::new(ComparisonFunction::linear(1.0 / (1.0 - EPS_Z)))))
}

pub fn example_system(dt: &Arc<ComparisonFunction>) -> Result<InterconnectedSystem, ExampleError> {
    let f: Field = Arc::new(|x, z, out| out[0] = -rho(x[0]) + z[0]);
    let d = dt.clone();
    let g: Field = Arc::new(move |x, z, out| {
        let v = d.eval(z[0].abs()).unwrap_or(f64::INFINITY);
        out[0] = -sign0(z[0]) * v + x[0];
    });
    Ok(InterconnectedSystem::new(1, 1, f, g)?)
}

/// Euclidean norm as a storage function with its exact one-sided
/// directional derivative (`|d|` at the origin).
pub fn norm_storage(name: &str, side: Side, decay: StateFn) -> StorageFunction {
    let id = Arc::new(ComparisonFunction::identity());
    StorageFunction {
        name: name.to_string(),
        side,
        storage: Arc::new(|v: &[f64]| norm(v)),
        lower_bound: id.clone(),
        upper_bound: id,
        decay,
        oracle: Some(Arc::new(|v: &[f64], d: &[f64]| {
            let r = norm(v);
            if r == 0.0 {
                norm(d)
            } else {
                v.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / r
            }
        })),
    }
}

/// Everything needed to check, bridge and simulate the example.
#[derive(Debug, Clone)]
pub struct Example1 {
    pub constants: ExampleConstants,
    pub gamma_capital: Arc<PiecewiseGain>,
    pub gamma_ell: Arc<ComparisonFunction>,
    pub gamma_g: Arc<ComparisonFunction>,
    pub delta_tilde: Arc<ComparisonFunction>,
    /// `δ̃⁻¹(s / 0.95)`.
    pub delta: Arc<ComparisonFunction>,
    pub inter: Interconnection,
    pub bundle: RegionalGainBundle,
}

impl Example1 {
    pub fn new() -> Result<Self, ExampleError> {
        let dt = build_delta_tilde()?;
        let delta = cross_gain(&dt);
        let gamma_ell = Arc::new(gamma_ell()?);
        let gamma_g = Arc::new(gamma_g()?);
        let v = norm_storage("V", Side::X, Arc::new(|x: &[f64]| EPS_X * rho(x[0].abs())));
        let w = norm_storage("W", Side::Z, Arc::new(|z: &[f64]| EPS_Z * z[0].abs()));
        let inter = Interconnection { system: example_system(&dt)?, v, w };
        let bundle = RegionalGainBundle {
            local_gain: Gain::Continuous(gamma_ell.clone()),
            m_local: M_LOCAL,
            global_gain: Gain::Continuous(gamma_g.clone()),
            m_global: M_GLOBAL,
            cross_gain: delta.clone(),
        };
        Ok(Example1 {
            constants: ExampleConstants::default(),
            gamma_capital: Arc::new(gamma_capital()?),
            gamma_ell,
            gamma_g,
            delta_tilde: dt,
            delta,
            inter,
            bundle,
        })
    }

    pub fn local_kinf_bridge(&self) -> Result<KinfBridgeParts, ExampleError> {
        Ok(self.bundle.local_kinf_bridge()?)
    }

    /// Starts at `γ_g(M_g)`, see [`RegionalGainBundle::global_kinf_bridge`].
    pub fn global_kinf_bridge(&self) -> Result<KinfBridgeParts, ExampleError> {
        Ok(self.bundle.global_kinf_bridge()?)
    }

    pub fn sigma_local(&self) -> Result<ComparisonFunction, ExampleError> {
        let spec = self.bundle.local_bridge_spec()?;
        Ok(build_smooth_bridge(spec.lower.as_ref(), spec.upper.as_ref(), &spec.knots)?)
    }

    pub fn merged_local(&self, sampling: &SamplingOptions) -> Result<MergedLyapunov, ExampleError> {
        Ok(build_merged_lyapunov(Role::Local, &self.bundle.local_bridge_spec()?, &self.inter, M_LOCAL, sampling)?)
    }

    pub fn merged_global(&self, sampling: &SamplingOptions) -> Result<MergedLyapunov, ExampleError> {
        Ok(build_merged_lyapunov(Role::Global, &self.bundle.global_bridge_spec()?, &self.inter, M_GLOBAL, sampling)?)
    }

    /// Combination of the local and global merged functions. The thresholds
    /// of this example are in the opposite order, so the swap option decides
    /// whether the chain is checked at all.
    pub fn theorem2(&self, local: &MergedLyapunov, opts: &Theorem2Options) -> Result<Theorem2Outcome, ExampleError> {
        let gtg = Arc::new(self.bundle.global_kinf_bridge()?.function);
        Ok(verify_theorem2(&self.bundle, &self.inter, local, &gtg, opts)?)
    }

    /// First `x` in `[θ Γ(s*), Γ(s*))` (1000-point grid) with `z = s*` where
    /// `V = |x|` increases, or `None`.
    pub fn check_gamma_optimality(&self, s_star: f64, theta: f64) -> Result<Option<(f64, f64)>, GainError> {
        if !(s_star > 0.0) {
            return Ok(None);
        }
        let top = self.gamma_capital.eval(s_star)?;
        let lo = theta * top;
        if !(lo < top) {
            return Ok(None);
        }
        for k in 0..1000 {
            let x = lo + (top - lo) * f64::from(k) / 1000.0;
            if x > 0.0 && -rho(x) + s_star > 0.0 {
                return Ok(Some((x, s_star)));
            }
        }
        Ok(None)
    }

    /// Rows `s, id, Γ, γ_ℓ, δ̃` on `[0.225, 0.25]` (2000 points) plus the
    /// left and right rows at `s₂`, where `γ_ℓ` switches to its extension.
    pub fn fig1_rows(&self) -> Result<Vec<[f64; 5]>, GainError> {
        let s2 = self.constants.s2;
        let mut rows = Vec::with_capacity(2002);
        let row = |s: f64, gl: f64| -> Result<[f64; 5], GainError> {
            Ok([s, s, self.gamma_capital.eval(s)?, gl, self.delta_tilde.eval(s)?])
        };
        let mut placed = false;
        for s in uniform_grid(&Interval::closed(0.225, 0.25), 2000) {
            if !placed && s >= s2 {
                rows.push(row(s2, lower_branch().eval(s2)?)?);
                rows.push(row(s2, self.gamma_ell.eval(s2)?)?);
                placed = true;
            }
            rows.push(row(s, self.gamma_ell.eval(s)?)?);
        }
        Ok(rows)
    }

    /// `fig1_gains.csv` and the marker file `fig1_markers.csv`.
    pub fn write_fig1(&self, dir: &Path) -> Result<Vec<PathBuf>, ExampleError> {
        fs::create_dir_all(dir)?;
        let gains = dir.join("fig1_gains.csv");
        let mut w = csv::Writer::from_path(&gains)?;
        w.write_record(["s", "id", "Gamma", "gamma_l", "delta_tilde"])?;
        for r in self.fig1_rows()? {
            w.write_record(r.iter().map(f64::to_string))?;
        }
        w.flush()?;
        let markers = dir.join("fig1_markers.csv");
        let mut w = csv::Writer::from_path(&markers)?;
        w.write_record(["name", "s"])?;
        w.write_record(["M_l", &M_LOCAL.to_string()])?;
        w.write_record(["M_g", &M_GLOBAL.to_string()])?;
        w.flush()?;
        Ok(vec![gains, markers])
    }

    pub fn ensemble(
        &self,
        local: &MergedLyapunov,
        global: &MergedLyapunov,
        run: &RunOptions,
    ) -> Result<EnsembleReport, ExampleError> {
        monitored_ensemble(&self.inter, local, global, run)
    }

    /// Both trajectory bundles: `fig2_local.csv` (radius `M_ℓ`, `T = 200`)
    /// and `fig2_global.csv` (radius 5, `T = 500`).
    pub fn write_fig2(&self, dir: &Path, sampling: &SamplingOptions, workers: usize) -> Result<Vec<PathBuf>, ExampleError> {
        fs::create_dir_all(dir)?;
        let local = self.merged_local(sampling)?;
        let global = self.merged_global(sampling)?;
        let mut out = Vec::new();
        for (file, run) in [("fig2_local.csv", RunOptions::local()), ("fig2_global.csv", RunOptions::global())] {
            let rep = self.ensemble(&local, &global, &RunOptions { workers, ..run })?;
            let path = dir.join(file);
            let trajs: Vec<_> = rep.trajectories.into_iter().flatten().collect();
            crate::dynamics::write_csv_many(&trajs, fs::File::create(&path)?)?;
            out.push(path);
        }
        Ok(out)
    }
}
