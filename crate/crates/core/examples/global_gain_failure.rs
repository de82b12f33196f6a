//! The global small-gain condition fails for the example while both
//! regional suites pass.

use rsg::certificates::{check_global_small_gain, verify_global_assumptions, verify_local_assumptions, CheckOptions};
use rsg::gallery::Example1;
use rsg::scalar_fn::TailPolicy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = Example1::new()?;
    let global = check_global_small_gain(ex.gamma_capital.as_ref(), ex.delta.as_ref(), 100.0, 4000, &TailPolicy::Derived)?;
    print!("{}", global.table());
    if let Some(v) = global.find("delta-after-gamma").and_then(|c| c.violations.first()) {
        let s = v.state[0];
        let back = ex.delta_tilde.inverse_value(ex.gamma_capital.eval(s)?)?;
        println!("witness s = {s:.6}: inverse delta_tilde of Gamma(s) = {back:.6} > s");
    }
    let opts = CheckOptions::default();
    println!("local suite passed: {}", verify_local_assumptions(&ex.bundle, &ex.inter, &opts)?.passed);
    println!("global suite passed: {}", verify_global_assumptions(&ex.bundle, &ex.inter, &opts)?.passed);
    Ok(())
}
