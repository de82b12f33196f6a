//! Explicit K∞ bridge between `α` and `β⁻¹` on an interval, and the two
//! bridges used by the example.

use std::sync::Arc;

use rsg::gallery::Example1;
use rsg::scalar_fn::{build_kinf_bridge, gap_margin, Interval, Segment};
use rsg::ComparisonFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alpha = Arc::new(ComparisonFunction::linear(0.5));
    let beta = Arc::new(ComparisonFunction::single(Segment::Cubic { coeffs: [0.0, 1.2, 0.0, 0.05] })?);
    let parts = build_kinf_bridge(&alpha, &beta, 0.2, 2.0, None)?;
    println!("p = {}, q = {}, eps = {}, K = {:?}, a = {:.6}, b = {:.6}", parts.p, parts.q, parts.epsilon, parts.k, parts.a, parts.b);
    let f = &parts.function;
    let above = gap_margin(alpha.as_ref(), f, &Interval::left_open(0.0, 20.0), 2000)?;
    let inv = ComparisonFunction::inverse_function(&beta);
    let below = gap_margin(f, &inv, &Interval::closed(0.2, 2.0), 2000)?;
    println!("alpha < bridge: {:.3e}, bridge < beta^-1 on [p, q]: {:.3e}, seam gap {:.1e}", above.min_margin, below.min_margin, f.seam_gap());

    let ex = Example1::new()?;
    for (name, b) in [("local", ex.local_kinf_bridge()?), ("global", ex.global_kinf_bridge()?)] {
        println!("{name}: [{:.6}, {}], value at q = {:.6}", b.p, b.q, b.function.eval(b.q)?);
    }
    Ok(())
}
