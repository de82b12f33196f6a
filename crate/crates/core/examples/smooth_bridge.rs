//! C¹ monotone bridge `δ < σ < γ̃_ℓ`, the scaling function of the local
//! merged Lyapunov function.

use std::sync::Arc;

use rsg::gallery::Example1;
use rsg::scalar_fn::{build_smooth_bridge, log_knots, sandwich_margin, Interval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = Example1::new()?;
    let upper = Arc::new(ex.local_kinf_bridge()?.function);
    let sigma = build_smooth_bridge(ex.delta.as_ref(), upper.as_ref(), &log_knots(1e-6, 10.0, 160))?;
    let m = sandwich_margin(ex.delta.as_ref(), &sigma, upper.as_ref(), &Interval::left_open(0.0, 10.0), 2000)?;
    println!("sandwich margin {:.3e} at {:.4}", m.min_margin, m.argmin);
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "s", "delta", "sigma", "upper", "sigma'");
    for s in [1e-4, 1e-2, 0.1, 0.236, 1.0, 5.0] {
        println!(
            "{s:>10} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            ex.delta.eval(s)?,
            sigma.eval(s)?,
            upper.eval(s)?,
            sigma.derivative(s)?
        );
    }
    Ok(())
}
