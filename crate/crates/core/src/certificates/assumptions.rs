use serde::{Deserialize, Serialize};

use crate::scalar_fn::{small_gain_margin, GainError, Interval, Orientation, ScalarGain, SgcOptions, TailPolicy};

use super::{check_regional_implication, CheckReport, Interconnection, RegionalGainBundle, Result, SamplingOptions};

/// How derivatives of storage functions are obtained in implication checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiniMode {
    Numerical,
    Analytic,
}

/// Which composition order must hold on `[M_g, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationPolicy {
    /// `γ_g(δ(s)) < s`.
    GammaAfterDelta,
    /// `δ(γ_g(s)) < s`.
    DeltaAfterGamma,
    /// Either order suffices.
    Either,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckOptions {
    pub sampling: SamplingOptions,
    pub dini: DiniMode,
    pub grid_n: usize,
    pub s_max: f64,
    pub tail: TailPolicy,
    pub orientation: OrientationPolicy,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            sampling: SamplingOptions::default(),
            dini: DiniMode::Numerical,
            grid_n: 4000,
            s_max: 100.0,
            tail: TailPolicy::Derived,
            orientation: OrientationPolicy::Either,
        }
    }
}

impl CheckOptions {
    fn sgc(&self) -> SgcOptions {
        SgcOptions { s_max: self.s_max, tail: self.tail.clone() }
    }
}

fn interval_label(iv: &Interval) -> String {
    let l = if iv.lo_open { "(" } else { "[" };
    let r = if iv.hi_open { ")" } else { "]" };
    if iv.hi.is_finite() {
        format!("{l}{}, {}{r}", iv.lo, iv.hi)
    } else {
        format!("{l}{}, inf)", iv.lo)
    }
}

fn sgc_report(
    name: &str,
    gamma: &dyn ScalarGain,
    delta: &dyn ScalarGain,
    iv: Interval,
    orientation: Orientation,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let label = interval_label(&iv);
    match small_gain_margin(gamma, delta, &iv, orientation, opts.grid_n, &opts.sgc()) {
        Ok(m) => {
            let mut r = CheckReport::from_margin(name, label, m);
            let words = match orientation {
                Orientation::GammaAfterDelta => "s - gamma(delta(s))",
                Orientation::DeltaAfterGamma => "s - delta(gamma(s))",
            };
            r.note(format!("margin is {words}"));
            Ok(r)
        }
        Err(GainError::AsymptoticUndecided(at)) => {
            let mut r = CheckReport::new(name, label);
            r.violate(vec![at], f64::NAN);
            r.note(format!("grid passed but no tail certificate beyond {at}"));
            Ok(r)
        }
        Err(e) => Err(e.into()),
    }
}

fn saturation_report(name: &str, threshold: f64, limit: f64) -> CheckReport {
    let mut r = CheckReport::new(name, format!("threshold {threshold} < limit {limit}"));
    r.samples = 1;
    r.tested = 1;
    if !(threshold < limit) {
        r.violate(vec![threshold], limit - threshold);
    }
    r
}

fn cross_report(bundle: &RegionalGainBundle, inter: &Interconnection, opts: &CheckOptions) -> Result<CheckReport> {
    let mut r = check_regional_implication(&inter.system, &inter.cross_certificate(bundle), &inter.v, &opts.sampling, opts.dini)?;
    r.assumption = "cross implication".into();
    Ok(r)
}

/// Cross certificate, saturation `M_ℓ < b_ℓ`, the local implication on
/// `{V ≤ M_ℓ}` and `γ_ℓ(δ(s)) < s` on `(0, M_ℓ]`.
pub fn verify_local_assumptions(bundle: &RegionalGainBundle, inter: &Interconnection, opts: &CheckOptions) -> Result<CheckReport> {
    let cross = cross_report(bundle, inter, opts)?;
    let sat = saturation_report("local saturation", bundle.m_local, bundle.b_local());
    let mut imp = check_regional_implication(&inter.system, &inter.local_certificate(bundle), &inter.w, &opts.sampling, opts.dini)?;
    imp.assumption = "local implication".into();
    let sgc = sgc_report(
        "local small gain",
        &bundle.local_gain,
        bundle.cross_gain.as_ref(),
        Interval::left_open(0.0, bundle.m_local),
        Orientation::GammaAfterDelta,
        opts,
    )?;
    Ok(CheckReport::aggregate(
        "local assumptions",
        format!("V <= {}", bundle.m_local),
        vec![(cross, true), (sat, true), (imp, true), (sgc, true)],
    ))
}

/// Cross certificate, saturation `M_g < b_g`, the global implication on
/// `{V ≥ M_g}` and both composition orders on `[M_g, ∞)`; which order is
/// required follows `opts.orientation`.
pub fn verify_global_assumptions(bundle: &RegionalGainBundle, inter: &Interconnection, opts: &CheckOptions) -> Result<CheckReport> {
    let cross = cross_report(bundle, inter, opts)?;
    let sat = saturation_report("global saturation", bundle.m_global, bundle.b_global());
    let mut imp = check_regional_implication(&inter.system, &inter.global_certificate(bundle), &inter.w, &opts.sampling, opts.dini)?;
    imp.assumption = "global implication".into();
    let iv = Interval::ray(bundle.m_global);
    let delta = bundle.cross_gain.as_ref();
    let gd = sgc_report("global small gain, gamma-after-delta", &bundle.global_gain, delta, iv, Orientation::GammaAfterDelta, opts)?;
    let dg = sgc_report("global small gain, delta-after-gamma", &bundle.global_gain, delta, iv, Orientation::DeltaAfterGamma, opts)?;
    let (need_gd, need_dg) = match opts.orientation {
        OrientationPolicy::GammaAfterDelta => (true, false),
        OrientationPolicy::DeltaAfterGamma => (false, true),
        OrientationPolicy::Either if gd.passed => (true, false),
        OrientationPolicy::Either if dg.passed => (false, true),
        OrientationPolicy::Either => (true, true),
    };
    let mut r = CheckReport::aggregate(
        "global assumptions",
        format!("V >= {}", bundle.m_global),
        vec![(cross, true), (sat, true), (imp, true), (gd, need_gd), (dg, need_dg)],
    );
    r.note(format!(
        "composition order on [M_g, inf): gamma-after-delta {}, delta-after-gamma {}; required: {:?}",
        pass_word(r.children[3].passed),
        pass_word(r.children[4].passed),
        opts.orientation
    ));
    Ok(r)
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "passed"
    } else {
        "failed"
    }
}

/// Small-gain condition on all of `(0, ∞)`, sampled up to `s_max` and closed
/// by a tail certificate. Both orders are reported; the check passes only if
/// both hold, and the witness comes from `δ(γ(s)) < s`.
pub fn check_global_small_gain(
    gamma: &dyn ScalarGain,
    delta: &dyn ScalarGain,
    s_max: f64,
    grid_n: usize,
    tail: &TailPolicy,
) -> Result<CheckReport> {
    let iv = Interval { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true };
    let opts = SgcOptions { s_max, tail: tail.clone() };
    let dg = small_gain_margin(gamma, delta, &iv, Orientation::DeltaAfterGamma, grid_n, &opts)?;
    let gd = small_gain_margin(gamma, delta, &iv, Orientation::GammaAfterDelta, grid_n, &opts)?;
    let witness = dg.violation_span();
    let argmin = dg.argmin;
    let dg = CheckReport::from_margin("delta-after-gamma", interval_label(&iv), dg);
    let gd = CheckReport::from_margin("gamma-after-delta", interval_label(&iv), gd);
    let mut r = CheckReport::aggregate("global small gain", interval_label(&iv), vec![(dg, true), (gd, true)]);
    if let Some((a, b)) = witness {
        r.note(format!("delta(gamma(s)) >= s for sampled s in [{a}, {b}], worst at s = {argmin}"));
    }
    Ok(r)
}
