//! `rsg` command-line front end.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails,
//! 2 on configuration errors.

pub mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::certificates::{
    check_global_small_gain, verify_global_assumptions, verify_local_assumptions, verify_theorem2, CheckOptions,
    CheckReport, Interconnection, MergedLyapunov, OrientationPolicy, RegionalGainBundle,
};
use crate::dynamics::write_csv_many;
use crate::gallery::{monitored_ensemble, Example1, ExampleError, LinearPair, RunOptions};
use crate::scalar_fn::{
    build_kinf_bridge, build_smooth_bridge, gap_margin, uniform_grid, ComparisonFunction, Gain, Interval, MarginReport,
    ScalarGain,
};

pub use config::{load_problem, parse_problem, BridgeConfig, ConfigError, ProblemConfig, SimulateConfig, SystemName};

#[derive(Debug, Parser)]
#[command(name = "rsg", version, about = "Regional small-gain checks for interconnected ISS systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Built-in problem (`example1`, `linear-pair`) or path to a JSON description.
    #[arg(long, default_value = "example1")]
    pub problem: String,
    /// Output directory.
    #[arg(long, env = "RSG_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the report table; files and the exit code are unchanged.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Cross certificate, local saturation, local implication, local small gain.
    Local,
    /// Global assumptions, either composition order.
    Global,
    /// Global assumptions requiring `γ_g ∘ δ < id`.
    GlobalGammaAfterDelta,
    /// Global assumptions requiring `δ ∘ γ_g < id`.
    GlobalDeltaAfterGamma,
    /// Small-gain condition on all of `(0, ∞)`.
    GlobalTheorem1,
    /// Threshold order and the merged-function inclusion chain.
    Theorem2,
    /// Local, global and theorem2 required; the others reported.
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify assumptions and write a JSON report.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Points per small-gain grid.
        #[arg(long)]
        grid: Option<usize>,
        /// Sampled end of unbounded intervals.
        #[arg(long)]
        s_max: Option<f64>,
        /// Accepted states per implication check.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Integrate an ensemble on a circle and write one CSV per trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        radius: Option<f64>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Write the data behind figure 1 (gains) or figure 2 (trajectories).
    Reproduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        figure: u32,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Build a K∞ or smooth bridge and tabulate it.
    Bridge {
        #[command(flatten)]
        common: Common,
        /// Rows in `bridge.csv` and points per margin check.
        #[arg(long, default_value_t = 2000)]
        grid: usize,
        /// Right end of the table.
        #[arg(long)]
        s_max: Option<f64>,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Example(#[from] ExampleError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn failed(e: impl std::fmt::Display) -> CliError {
    CliError::Failed(e.to_string())
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parse `args` and execute; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Built problem: the interconnection, its bundle and the gain used by the
/// global small-gain suite.
pub struct Problem {
    pub config: ProblemConfig,
    pub inter: Interconnection,
    pub bundle: RegionalGainBundle,
    pub global_condition_gain: Gain,
    pub example: Option<Example1>,
}

impl Problem {
    pub fn new(config: ProblemConfig) -> Result<Self, CliError> {
        let (inter, bundle, global_condition_gain, example) = match config.system {
            SystemName::Example1 => {
                let ex = Example1::new()?;
                let t1 = Gain::Piecewise(ex.gamma_capital.clone());
                (ex.inter.clone(), ex.bundle.clone(), t1, Some(ex))
            }
            SystemName::LinearPair => {
                let lp = LinearPair::new()?;
                (lp.inter.clone(), lp.bundle.clone(), Gain::Continuous(lp.gain.clone()), None)
            }
        };
        let (bundle, global_condition_gain) = match &config.bundle {
            Some(b) => (b.clone(), b.global_gain.clone()),
            None => (bundle, global_condition_gain),
        };
        Ok(Problem { config, inter, bundle, global_condition_gain, example })
    }

    pub fn load(problem: &str) -> Result<Self, CliError> {
        Self::new(load_problem(problem)?)
    }

    pub fn merged_local(&self) -> Result<MergedLyapunov, CliError> {
        let spec = self.bundle.local_bridge_spec().map_err(failed)?;
        crate::certificates::build_merged_lyapunov(
            crate::certificates::Role::Local,
            &spec,
            &self.inter,
            self.bundle.m_local,
            &self.config.check.sampling,
        )
        .map_err(failed)
    }

    pub fn merged_global(&self) -> Result<MergedLyapunov, CliError> {
        let spec = self.bundle.global_bridge_spec().map_err(failed)?;
        crate::certificates::build_merged_lyapunov(
            crate::certificates::Role::Global,
            &spec,
            &self.inter,
            self.bundle.m_global,
            &self.config.check.sampling,
        )
        .map_err(failed)
    }

    pub fn run_suite(&self, suite: Suite) -> Result<CheckReport, CliError> {
        let opts = &self.config.check;
        let with = |o: OrientationPolicy| CheckOptions { orientation: o, ..opts.clone() };
        let report = match suite {
            Suite::Local => verify_local_assumptions(&self.bundle, &self.inter, opts),
            Suite::Global => verify_global_assumptions(&self.bundle, &self.inter, opts),
            Suite::GlobalGammaAfterDelta => verify_global_assumptions(&self.bundle, &self.inter, &with(OrientationPolicy::GammaAfterDelta)),
            Suite::GlobalDeltaAfterGamma => verify_global_assumptions(&self.bundle, &self.inter, &with(OrientationPolicy::DeltaAfterGamma)),
            Suite::GlobalTheorem1 => check_global_small_gain(
                self.global_condition_gain.as_scalar(),
                self.bundle.cross_gain.as_ref(),
                opts.s_max,
                opts.grid_n,
                &opts.tail,
            ),
            Suite::Theorem2 => {
                let local = self.merged_local()?;
                let gtg = Arc::new(self.bundle.global_kinf_bridge().map_err(failed)?.function);
                verify_theorem2(&self.bundle, &self.inter, &local, &gtg, &self.config.theorem2).map(|o| o.report)
            }
            Suite::All => {
                let mut parts = Vec::new();
                for (s, required) in [
                    (Suite::Local, true),
                    (Suite::Global, true),
                    (Suite::Theorem2, true),
                    (Suite::GlobalGammaAfterDelta, false),
                    (Suite::GlobalTheorem1, false),
                ] {
                    let mut r = self.run_suite(s)?;
                    r.assumption = format!("{} [{}]", suite_name(s), r.assumption);
                    parts.push((r, required));
                }
                return Ok(CheckReport::aggregate("all", "local, global, theorem2 required", parts));
            }
        };
        report.map_err(failed)
    }
}

fn suite_name(s: Suite) -> String {
    s.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(failed)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    problem: &'a str,
    suite: String,
    passed: bool,
    report: &'a CheckReport,
}

fn execute(cmd: &Command) -> Result<bool, CliError> {
    match cmd {
        Command::Check { common, suite, grid, s_max, samples } => {
            let mut cfg = load_problem(&common.problem)?;
            if let Some(n) = grid {
                if *n < 2 {
                    return Err(CliError::Usage("--grid must be at least 2".into()));
                }
                cfg.check.grid_n = *n;
            }
            if let Some(s) = s_max {
                if !(s.is_finite() && *s > 0.0) {
                    return Err(CliError::Usage("--s-max must be positive".into()));
                }
                cfg.check.s_max = *s;
            }
            if let Some(n) = samples {
                cfg.check.sampling.samples = *n;
            }
            if let Some(seed) = common.seed {
                cfg.check.sampling.seed = seed;
                cfg.theorem2.seed = seed;
            }
            let problem = Problem::new(cfg)?;
            let report = problem.run_suite(*suite)?;
            if !common.quiet {
                print!("{}", report.table());
            }
            fs::create_dir_all(&common.out_dir)?;
            let name = suite_name(*suite);
            let out = CheckOutput { problem: &common.problem, suite: name.clone(), passed: report.passed, report: &report };
            write_json(&common.out_dir.join(format!("check_{name}.json")), &out)?;
            Ok(report.passed)
        }
        Command::Simulate { common, radius, count, step, horizon, workers } => {
            let mut cfg = load_problem(&common.problem)?;
            let sim = &mut cfg.simulate;
            if let Some(v) = radius {
                sim.radius = *v;
            }
            if let Some(v) = count {
                sim.count = *v;
            }
            if let Some(v) = step {
                sim.step = *v;
            }
            if horizon.is_some() {
                sim.horizon = *horizon;
            }
            if let Some(v) = workers {
                sim.workers = *v;
            }
            let problem = Problem::new(cfg)?;
            let run = run_options(&problem.config.simulate, problem.bundle.m_local)?;
            let local = problem.merged_local()?;
            let global = problem.merged_global()?;
            let report = monitored_ensemble(&problem.inter, &local, &global, &run)?;
            fs::create_dir_all(&common.out_dir)?;
            for (i, tr) in report.trajectories.iter().enumerate() {
                if let Some(tr) = tr {
                    let f = fs::File::create(common.out_dir.join(format!("traj_{i:02}.csv")))?;
                    write_csv_many(std::slice::from_ref(tr), f).map_err(failed)?;
                }
            }
            #[derive(Serialize)]
            struct Summary<'a> {
                problem: &'a str,
                run: RunOptions,
                report: &'a crate::dynamics::EnsembleReport,
            }
            write_json(
                &common.out_dir.join("ensemble_summary.json"),
                &Summary { problem: &common.problem, run, report: &report },
            )?;
            println!(
                "{} of {} trajectories met the target (radius {}, horizon {})",
                report.met, report.count, run.radius, run.horizon
            );
            for m in &report.monitors {
                println!("monitor {}: max increment {:.3e}, passed {}", m.name, m.max_increment, m.passed);
            }
            Ok(report.all_met)
        }
        Command::Reproduce { common, figure, workers } => {
            let cfg = load_problem(&common.problem)?;
            if !(1..=2).contains(figure) {
                return Err(CliError::Usage(format!("unknown figure {figure}, expected 1 or 2")));
            }
            if cfg.system != SystemName::Example1 || cfg.bundle.is_some() {
                return Err(CliError::Usage("figures are defined for the built-in example1 only".into()));
            }
            let ex = Example1::new()?;
            let files = if *figure == 1 {
                ex.write_fig1(&common.out_dir)?
            } else {
                ex.write_fig2(&common.out_dir, &cfg.check.sampling, *workers)?
            };
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Bridge { common, grid, s_max } => {
            let cfg = load_problem(&common.problem)?;
            let bridge = match cfg.bridge.clone() {
                Some(b) => b,
                None => {
                    let problem = Problem::new(cfg)?;
                    let beta = match &problem.bundle.local_gain {
                        Gain::Continuous(f) => f.clone(),
                        Gain::Piecewise(_) => return Err(CliError::Usage("local gain must be continuous".into())),
                    };
                    BridgeConfig::Kinf {
                        alpha: problem.bundle.cross_gain.clone(),
                        beta,
                        p: 0.0,
                        q: problem.bundle.m_local,
                        epsilon: None,
                    }
                }
            };
            if *grid < 2 {
                return Err(CliError::Usage("--grid must be at least 2".into()));
            }
            run_bridge(&bridge, *grid, *s_max, &common.out_dir)
        }
    }
}

fn run_options(sim: &SimulateConfig, m_local: f64) -> Result<RunOptions, CliError> {
    if !(sim.radius.is_finite() && sim.radius >= 0.0) {
        return Err(CliError::Usage(format!("radius must be finite and nonnegative, got {}", sim.radius)));
    }
    if sim.count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    if !(sim.step.is_finite() && sim.step > 0.0) {
        return Err(CliError::Usage(format!("step must be positive, got {}", sim.step)));
    }
    let near = sim.radius <= m_local;
    let horizon = sim.horizon.unwrap_or(if near { 200.0 } else { 500.0 });
    if !(horizon >= sim.step) {
        return Err(CliError::Usage(format!("horizon {horizon} is shorter than the step")));
    }
    if !(sim.record_dt > 0.0) || sim.workers == 0 {
        return Err(CliError::Usage("record_dt and workers must be positive".into()));
    }
    Ok(RunOptions {
        radius: sim.radius,
        count: sim.count,
        step: sim.step,
        horizon,
        record_dt: sim.record_dt,
        origin_tol: sim.origin_tol.unwrap_or(if near { 1e-3 } else { 1e-2 }),
        workers: sim.workers,
    })
}

#[derive(Serialize)]
struct BridgeOutput<'a> {
    config: &'a BridgeConfig,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameters: Option<KinfParameters>,
    checks: Vec<(&'static str, MarginReport)>,
}

#[derive(Serialize)]
struct KinfParameters {
    p: f64,
    q: f64,
    epsilon: f64,
    k: Option<f64>,
    a: f64,
    b: f64,
}

fn run_bridge(cfg: &BridgeConfig, grid: usize, s_max: Option<f64>, out_dir: &Path) -> Result<bool, CliError> {
    let (function, lower, upper, parameters, checks, default_end) = match cfg {
        BridgeConfig::Kinf { alpha, beta, p, q, epsilon } => {
            let parts = build_kinf_bridge(alpha, beta, *p, *q, *epsilon).map_err(failed)?;
            let f = Arc::new(parts.function.clone());
            let inv = Arc::new(ComparisonFunction::inverse_function(beta));
            let mut checks = vec![(
                "bridge above alpha on (0, 10q]",
                gap_margin(alpha.as_ref(), f.as_ref(), &Interval::left_open(0.0, 10.0 * q), grid).map_err(failed)?,
            )];
            let iv = if *p > 0.0 { Interval::closed(*p, *q) } else { Interval::left_open(0.0, *q) };
            checks.push(("bridge below beta inverse on [p, q]", gap_margin(f.as_ref(), inv.as_ref(), &iv, grid).map_err(failed)?));
            let params = KinfParameters { p: parts.p, q: parts.q, epsilon: parts.epsilon, k: parts.k, a: parts.a, b: parts.b };
            (f, alpha.clone(), inv, Some(params), checks, 10.0 * q)
        }
        BridgeConfig::Smooth { lower, upper, knots } => {
            let f = Arc::new(build_smooth_bridge(lower.as_ref(), upper.as_ref(), knots).map_err(failed)?);
            let end = knots.iter().copied().fold(0.0, f64::max);
            let iv = Interval::left_open(0.0, end);
            let checks = vec![
                ("bridge above lower", gap_margin(lower.as_ref(), f.as_ref(), &iv, grid).map_err(failed)?),
                ("bridge below upper", gap_margin(f.as_ref(), upper.as_ref(), &iv, grid).map_err(failed)?),
            ];
            (f, lower.clone(), upper.clone(), None, checks, end)
        }
    };
    let end = s_max.unwrap_or(default_end);
    if !(end.is_finite() && end > 0.0) {
        return Err(CliError::Usage("--s-max must be positive".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut w = csv::Writer::from_path(out_dir.join("bridge.csv")).map_err(failed)?;
    w.write_record(["s", "lower", "bridge", "upper"]).map_err(failed)?;
    let cell = |g: &dyn ScalarGain, s: f64| g.eval(s).map_or_else(|_| String::new(), |v| v.to_string());
    for s in uniform_grid(&Interval::closed(0.0, end), grid) {
        w.write_record([s.to_string(), cell(lower.as_ref(), s), cell(function.as_ref(), s), cell(upper.as_ref(), s)])
            .map_err(failed)?;
    }
    w.flush()?;
    let passed = checks.iter().all(|(_, r)| r.passed);
    for (name, r) in &checks {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        println!("{mark}  {name:<40} min margin {:.3e} at {:.6}", r.min_margin, r.argmin);
    }
    write_json(&out_dir.join("bridge.json"), &BridgeOutput { config: cfg, passed, parameters, checks })?;
    Ok(passed)
}
