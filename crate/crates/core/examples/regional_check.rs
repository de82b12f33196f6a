//! Sampling the regional implications directly, with the optimality probe
//! that deflates the local gain.

use rsg::certificates::{check_regional_implication, DiniMode, SamplingOptions};
use rsg::gallery::Example1;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = Example1::new()?;
    let sampling = SamplingOptions::default();
    let sys = &ex.inter.system;
    for (cert, other) in [
        (ex.inter.local_certificate(&ex.bundle), &ex.inter.w),
        (ex.inter.global_certificate(&ex.bundle), &ex.inter.w),
        (ex.inter.cross_certificate(&ex.bundle), &ex.inter.v),
    ] {
        for dini in [DiniMode::Numerical, DiniMode::Analytic] {
            let r = check_regional_implication(sys, &cert, other, &sampling, dini)?;
            println!("{:<24} {:<10?} passed {} ({} of {} samples tested)", r.assumption, dini, r.passed, r.tested, r.samples);
        }
    }
    let mut deflated = ex.inter.local_certificate(&ex.bundle);
    deflated.gain = deflated.gain.scaled(0.9)?;
    let r = check_regional_implication(sys, &deflated, &ex.inter.w, &sampling, DiniMode::Numerical)?;
    println!("deflated local gain: {} violations, first at {:?}", r.violation_count, r.violations.first().map(|v| &v.state));
    Ok(())
}
