//! Write the gain plot data and the trajectory data as CSV files.
//!
//! `cargo run --release --example reproduce_figures -- out/`

use std::path::PathBuf;

use rsg::certificates::SamplingOptions;
use rsg::gallery::Example1;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map_or_else(|| PathBuf::from("figures"), PathBuf::from);
    std::fs::create_dir_all(&dir)?;
    let ex = Example1::new()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut files = ex.write_fig1(&dir)?;
    files.extend(ex.write_fig2(&dir, &SamplingOptions::default(), workers)?);
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}
