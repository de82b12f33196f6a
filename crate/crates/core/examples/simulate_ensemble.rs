//! Trajectories from two circles with both merged functions monitored.

use rsg::certificates::SamplingOptions;
use rsg::gallery::{Example1, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ex = Example1::new()?;
    let sampling = SamplingOptions::default();
    let local = ex.merged_local(&sampling)?;
    let global = ex.merged_global(&sampling)?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    for run in [RunOptions::local(), RunOptions::global()] {
        let r = ex.ensemble(&local, &global, &RunOptions { workers, ..run })?;
        println!("radius {}: {} of {} within {} by T = {}", run.radius, r.met, r.count, run.origin_tol, run.horizon);
        for m in &r.monitors {
            println!("  {}: max increment {:.2e} over {} steps", m.name, m.max_increment, m.checked);
        }
        let entries: Vec<String> = r.members.iter().filter_map(|m| m.entered_at).map(|t| format!("{t:.1}")).collect();
        println!("  entry times into the global level set: {}", entries.join(" "));
    }
    Ok(())
}
