//! Combining the local and global merged functions, for the linear pair
//! (thresholds in the required order) and for the example (swapped).

use rsg::certificates::{SamplingOptions, Theorem2Options};
use rsg::gallery::{Example1, LinearPair};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sampling = SamplingOptions::default();
    let lp = LinearPair::new()?;
    let out = lp.theorem2(&lp.merged_local(&sampling)?, &Theorem2Options::default())?;
    print!("{}", out.report.table());

    let ex = Example1::new()?;
    let local = ex.merged_local(&sampling)?;
    let strict = ex.theorem2(&local, &Theorem2Options::default())?;
    print!("{}", strict.report.table());
    let swapped = ex.theorem2(&local, &Theorem2Options { allow_threshold_swap: true, ..Default::default() })?;
    print!("{}", swapped.report.table());
    Ok(())
}
