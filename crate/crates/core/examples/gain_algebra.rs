//! Comparison-function algebra: the discontinuous optimal gain, inverses,
//! compositions and a small-gain margin.

use std::sync::Arc;

use rsg::gallery::example1::{gamma_capital, rho, Example1};
use rsg::scalar_fn::{small_gain_margin, Interval, Orientation, SgcOptions};
use rsg::ComparisonFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("rho(1/2) = {}, rho(5/6) = {} (25/108 = {})", rho(0.5), rho(5.0 / 6.0), 25.0 / 108.0);

    let gamma = gamma_capital()?;
    for j in gamma.jumps() {
        println!("Gamma jumps at {:.6}: {:.6} -> {:.6}", j.at, j.left, j.right);
    }

    let f = Arc::new(ComparisonFunction::piecewise_affine(&[(0.0, 0.0), (1.0, 2.0), (2.0, 2.5)], 1.0)?);
    let inv = Arc::new(ComparisonFunction::inverse_function(&f));
    let round = ComparisonFunction::compose(&f, &inv);
    for s in [0.5, 2.2, 7.0] {
        println!("f(f^-1({s})) = {:.12}", round.eval(s)?);
    }

    let ex = Example1::new()?;
    let sgc = SgcOptions::default();
    let r = small_gain_margin(ex.gamma_ell.as_ref(), ex.delta.as_ref(), &Interval::left_open(0.0, 0.236), Orientation::GammaAfterDelta, 4000, &sgc)?;
    println!("gamma_l(delta(s)) < s on (0, 0.236]: {} (min margin {:.3e} at {:.2e})", r.passed, r.min_margin, r.argmin);
    Ok(())
}
