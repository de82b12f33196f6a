use crate::dynamics::{default_schedule, dini_forward, InterconnectedSystem};
use crate::scalar_fn::{GainError, ScalarGain};

use super::{
    CertError, CheckReport, ComponentSet, DiniMode, IssCertificate, ProductSampler, Region, Result, SamplingOptions,
    Side, StorageFunction,
};

/// Sample the certificate's region and check
/// `storage ≥ gain(other) ⇒ D⁺storage ≤ −decay + tol` at every sample.
///
/// The own component is drawn from a box (sublevel, all) or a shell
/// (superlevel) sized through the storage bounds; the other component from a
/// box just wide enough to reach states where the premise holds.
pub fn check_regional_implication(
    sys: &InterconnectedSystem,
    cert: &IssCertificate,
    other: &StorageFunction,
    sampling: &SamplingOptions,
    dini: DiniMode,
) -> Result<CheckReport> {
    let own = &cert.storage;
    let (n, m) = (sys.n, sys.m);
    let own_dim = if own.side == Side::X { n } else { m };
    let inv = |f: &crate::scalar_fn::ComparisonFunction, y: f64| f.inverse_value(y).unwrap_or(sampling.box_cap);
    let (own_set, own_max) = match cert.region {
        Region::Sublevel(level) => (ComponentSet::Box { radius: inv(&own.lower_bound, level) }, level),
        Region::Superlevel(level) => (
            ComponentSet::Shell { inner: inv(&own.upper_bound, level), outer: inv(&own.lower_bound, sampling.level_cap) },
            sampling.level_cap,
        ),
        Region::All => {
            let r = sampling.box_cap * (own_dim as f64).sqrt();
            (ComponentSet::Box { radius: sampling.box_cap }, own.upper_bound.eval(r)?)
        }
    };
    let other_radius = cert
        .gain
        .preimage_at_least(own_max)
        .ok()
        .and_then(|w| other.lower_bound.inverse_value(w).ok())
        .map_or(sampling.box_cap, |r| (1.25 * r).min(sampling.box_cap));
    let other_set = ComponentSet::Box { radius: other_radius };
    let (xs, zs) = if own.side == Side::X { (own_set, other_set) } else { (other_set, own_set) };
    let mut sampler = ProductSampler::new(n, m, xs, zs, sampling.seed);

    let region = format!("{} {}, |{}| <= {:.6}", own.name, cert.region, other.name, other_radius);
    let mut rep = CheckReport::new(format!("implication for {}", own.name), region);
    let taus = default_schedule();
    let attempts = sampling.samples.saturating_mul(sampling.max_attempts);
    for _ in 0..attempts {
        if rep.samples >= sampling.samples {
            break;
        }
        let y = sampler.next_state();
        let own_val = own.eval(own.component(&y, n));
        if !cert.region.contains(own_val) || own_val > sampling.level_cap {
            continue;
        }
        rep.samples += 1;
        let threshold = match cert.gain.eval(other.eval(other.component(&y, n))) {
            Ok(v) => v,
            Err(GainError::Domain(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        if own_val < threshold {
            continue;
        }
        rep.tested += 1;
        let field = sys.field(&y);
        let d = match &dini {
            DiniMode::Numerical => {
                let phi = |s: &[f64]| own.eval(own.component(s, n));
                dini_forward(&phi, &field, &y, &taus)?.value
            }
            DiniMode::Analytic => {
                let oracle = own
                    .oracle
                    .as_ref()
                    .ok_or_else(|| CertError::Invalid(format!("{} has no analytic derivative", own.name)))?;
                oracle(own.component(&y, n), own.component(&field, n))
            }
        };
        let bound = -(own.decay)(own.component(&y, n)) + sampling.tol_dini;
        if d > bound {
            rep.violate(y, bound - d);
        }
    }
    if rep.samples == 0 {
        return Err(CertError::EmptySample(rep.region));
    }
    Ok(rep)
}
