//! Local and global merged Lyapunov functions and their level constants.

use rsg::certificates::{level_constant, SamplingOptions};
use rsg::gallery::Example1;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = Example1::new()?;
    let sampling = SamplingOptions::default();
    let local = ex.merged_local(&sampling)?;
    let global = ex.merged_global(&sampling)?;
    for u in [&local, &global] {
        println!("{:?}: threshold {}, level {:.9} (verified {:.9})", u.role, u.threshold, u.level_constant, level_constant(u, &sampling)?);
    }
    for y in [[0.1, 0.0], [0.2, -0.1], [1.0, 0.5], [3.0, -4.0]] {
        println!("U_l{y:?} = {:.6}, U_g{y:?} = {:.6}, decay bound {:.3e}", local.evaluate(&y), global.evaluate(&y), local.envelope(&y));
    }
    Ok(())
}
