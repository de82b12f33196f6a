//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed; the
//! process exits nonzero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsg::certificates::{check_regional_implication, level_constant, DiniMode, MergedLyapunov, SamplingOptions};
use rsg::cli::{Problem, Suite};
use rsg::dynamics::{circle_points, default_schedule, dini_forward, step_halving_gap};
use rsg::gallery::example1::{rho, Example1, ExampleConstants, M_GLOBAL, M_LOCAL};
use rsg::gallery::RunOptions;
use rsg::scalar_fn::{
    build_kinf_bridge, build_smooth_bridge, gap_margin, log_knots, sandwich_margin, small_gain_margin, uniform_grid,
    Interval, Orientation, Segment, SgcOptions,
};
use rsg::{ComparisonFunction, Gain};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(16)
}

fn cubic_algebra() -> Outcome {
    ensure((rho(0.5) - 0.25).abs() <= 1e-12, || format!("rho(1/2) = {}", rho(0.5)))?;
    ensure((rho(5.0 / 6.0) - 25.0 / 108.0).abs() <= 1e-12, || format!("rho(5/6) = {}", rho(5.0 / 6.0)))?;
    for x in uniform_grid(&Interval::closed(0.0, 2.0), 2001) {
        let factored = (x - 5.0 / 6.0).powi(2) * (x - 1.0 / 3.0);
        ensure((rho(x) - 25.0 / 108.0 - factored).abs() <= 1e-12, || format!("factorization off at x = {x}"))?;
    }
    let ex = ok(Example1::new())?;
    let s1 = 0.95 * 25.0 / 108.0;
    let jump = ex.gamma_capital.jumps().first().ok_or("no jump recorded")?;
    ensure((jump.at - s1).abs() <= 1e-12, || format!("jump at {}", jump.at))?;
    let left = ok(ex.gamma_capital.eval(jump.at * (1.0 - 1e-13)))?;
    let right = ok(ex.gamma_capital.eval(jump.at))?;
    ensure((left - 1.0 / 3.0).abs() <= 1e-8, || format!("left limit {left}"))?;
    ensure((right - 5.0 / 6.0).abs() <= 1e-8, || format!("right limit {right}"))?;
    ensure((jump.left - 1.0 / 3.0).abs() <= 1e-8 && (jump.right - 5.0 / 6.0).abs() <= 1e-8, || format!("{jump:?}"))?;
    Ok(format!("jump at s1 = {s1:.10}: {left:.10} -> {right:.10}"))
}

fn gain_corridor() -> Outcome {
    let ex = ok(Example1::new())?;
    let s1 = ExampleConstants::default().s1;
    let dt = ex.delta_tilde.as_ref();
    let gamma = ex.gamma_capital.as_ref();
    let gl = ok(gap_margin(ex.gamma_ell.as_ref(), dt, &Interval::left_open(0.0, 0.236), 4000))?;
    ensure(gl.passed && gl.min_margin >= 0.02, || format!("delta_tilde - gamma_l: {:.4e} at {}", gl.min_margin, gl.argmin))?;
    let below = ok(gap_margin(dt, gamma, &Interval::open(s1 + 1e-4, 0.236), 4000))?;
    ensure(below.passed, || format!("Gamma - delta_tilde: {:.4e} at {}", below.min_margin, below.argmin))?;
    let above = ok(gap_margin(gamma, dt, &Interval::closed(0.245, 100.0), 4000))?;
    ensure(above.passed, || format!("delta_tilde - Gamma: {:.4e} at {}", above.min_margin, above.argmin))?;
    // the same inequality on [0.245, inf) as dt⁻¹(Γ(s)) < s, closed by a tail bound
    let inv = Arc::new(ComparisonFunction::inverse_function(&ex.delta_tilde));
    let sgc = SgcOptions { s_max: 100.0, ..Default::default() };
    let tail = ok(small_gain_margin(gamma, inv.as_ref(), &Interval::ray(0.245), Orientation::DeltaAfterGamma, 4000, &sgc))?;
    let cert = tail.tail.as_ref().ok_or("no tail certificate")?;
    ensure(tail.passed && cert.passed, || format!("tail: {cert:?}"))?;
    let order = ok(gap_margin(ex.gamma_ell.as_ref(), gamma, &Interval::open(s1, 0.2375), 4000))?;
    ensure(order.passed, || format!("Gamma - gamma_l: {:.4e} at {}", order.min_margin, order.argmin))?;
    Ok(format!(
        "margins {:.3e} (at s = {:.2e}), {:.3e}, {:.3e}, {:.3e}; tail from {:.4}",
        gl.min_margin, gl.argmin, below.min_margin, above.min_margin, order.min_margin, cert.from
    ))
}

fn global_gain_failure() -> Outcome {
    let dir = ok(tempfile::tempdir())?;
    let out = dir.path().to_str().ok_or("temp path")?;
    let code = |suite: &str| rsg::cli::run(["rsg", "check", "--quiet", "--suite", suite, "--out-dir", out]);
    ensure(code("global-theorem1") == 1, || "global-theorem1 did not fail".into())?;
    ensure(code("local") == 0, || "local suite failed".into())?;
    ensure(code("global-delta-after-gamma") == 0, || "delta-after-gamma global suite failed".into())?;

    let text = ok(std::fs::read_to_string(dir.path().join("check_global-theorem1.json")))?;
    let json: serde_json::Value = ok(serde_json::from_str(&text))?;
    ensure(json["passed"] == false, || "json report passed".into())?;
    let report = ok(ok(Problem::load("example1"))?.run_suite(Suite::GlobalTheorem1))?;
    let child = report.find("delta-after-gamma").ok_or("no delta-after-gamma child")?;
    let ex = ok(Example1::new())?;
    let mut best: Option<(f64, f64)> = None;
    for v in &child.violations {
        let s = v.state[0];
        if s > 0.2199 && s < 0.236 {
            let back = ok(ex.delta_tilde.inverse_value(ok(ex.gamma_capital.eval(s))?))?;
            if back > s && best.map_or(true, |(_, g)| back - s > g) {
                best = Some((s, back - s));
            }
        }
    }
    let (s, gap) = best.ok_or("no witness in (0.2199, 0.236)")?;
    Ok(format!("witness s = {s:.6}, inverse(Gamma(s)) - s = {gap:.4e}; local and delta-after-gamma suites pass"))
}

fn poly(rng: &mut ChaCha8Rng, linear: (f64, f64)) -> ComparisonFunction {
    let c1 = rng.gen_range(linear.0..linear.1);
    let c3 = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.2) } else { 0.0 };
    let seg = if c3 == 0.0 { Segment::Affine { slope: c1, intercept: 0.0 } } else { Segment::Cubic { coeffs: [0.0, c1, 0.0, c3] } };
    ComparisonFunction::single(seg).expect("valid polynomial")
}

fn kinf_bridges() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut built, mut worst29, mut worst30, mut worst_seam) = (0, f64::INFINITY, f64::INFINITY, 0.0_f64);
    let mut draws = 0;
    while built < 50 {
        draws += 1;
        ensure(draws < 10_000, || "could not draw 50 instances".into())?;
        let alpha = Arc::new(poly(&mut rng, (0.1, 1.5)));
        let beta = Arc::new(poly(&mut rng, (0.1, 1.5)));
        let p = if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.01..1.0) };
        let q = p + rng.gen_range(0.1..3.0);
        let hyp = uniform_grid(&Interval::closed(p, q), 2000)
            .into_iter()
            .filter(|s| *s > 0.0)
            .all(|s| beta.eval(alpha.eval(s).unwrap()).unwrap() < s);
        if !hyp {
            continue;
        }
        let parts = ok(build_kinf_bridge(&alpha, &beta, p, q, None))?;
        let f = parts.function;
        let m29 = ok(gap_margin(alpha.as_ref(), &f, &Interval::left_open(0.0, 10.0 * q), 2000))?;
        let inv = ComparisonFunction::inverse_function(&beta);
        let iv = if p > 0.0 { Interval::closed(p, q) } else { Interval::left_open(0.0, q) };
        let m30 = ok(gap_margin(&f, &inv, &iv, 2000))?;
        let seam = f.seam_gap();
        ensure(m29.passed, || format!("instance {built}: alpha < bridge fails at {}", m29.argmin))?;
        ensure(m30.passed, || format!("instance {built}: bridge < beta inverse fails at {}", m30.argmin))?;
        ensure(seam <= 1e-9, || format!("instance {built}: seam gap {seam:e}"))?;
        worst29 = worst29.min(m29.min_margin);
        worst30 = worst30.min(m30.min_margin);
        worst_seam = worst_seam.max(seam);
        built += 1;
    }
    Ok(format!("50 instances ({draws} draws): min margins {worst29:.3e}, {worst30:.3e}; max seam gap {worst_seam:.1e}"))
}

/// Level constant from the sets alone: the `c` whose sublevel set reaches
/// exactly `V = threshold` along the `x` axis.
fn level_oracle(u: &MergedLyapunov) -> f64 {
    let n = u.n + u.m;
    let reach = |c: f64| {
        let at = |r: f64| {
            let mut y = vec![0.0; n];
            y[0] = r;
            u.evaluate(&y)
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while at(hi) <= c {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if at(mid) <= c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    while reach(hi) < u.threshold {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if reach(mid) < u.threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn merged_functions() -> Outcome {
    let ex = ok(Example1::new())?;
    let upper = Arc::new(ok(ex.local_kinf_bridge())?.function);
    let sigma = ok(build_smooth_bridge(ex.delta.as_ref(), upper.as_ref(), &log_knots(1e-6, 10.0, 160)))?;
    let uni = ok(sandwich_margin(ex.delta.as_ref(), &sigma, upper.as_ref(), &Interval::left_open(0.0, 10.0), 2000))?;
    ensure(uni.passed, || format!("sandwich fails at {} ({:e})", uni.argmin, uni.min_margin))?;
    let mut logm = f64::INFINITY;
    for s in log_knots(1e-6, 10.0, 2000) {
        let m = ok(sigma.eval(s))?;
        logm = logm.min((m - ok(ex.delta.eval(s))?).min(ok(upper.eval(s))? - m));
    }
    ensure(logm > 0.0, || format!("sandwich on log grid: {logm:e}"))?;

    let sampling = SamplingOptions::default();
    let local = ok(ex.merged_local(&sampling))?;
    let global = ok(ex.merged_global(&sampling))?;
    let mut detail = Vec::new();
    for (u, m) in [(&local, M_LOCAL), (&global, M_GLOBAL)] {
        let c = ok(level_constant(u, &sampling))?;
        let oracle = level_oracle(u);
        let algebra = ok(u.sigma.eval(m))?;
        ensure((c - oracle).abs() <= 1e-9 && (c - algebra).abs() <= 1e-9, || {
            format!("level at {m}: {c} vs oracle {oracle}, sigma(M) {algebra}")
        })?;
        detail.push(format!("{c:.9}"));
    }
    Ok(format!(
        "sandwich margin {:.3e} (uniform), {logm:.3e} (log grid); levels {} and {}",
        uni.min_margin, detail[0], detail[1]
    ))
}

fn trajectories() -> Outcome {
    let ex = ok(Example1::new())?;
    let sampling = SamplingOptions::default();
    let local = ok(ex.merged_local(&sampling))?;
    let global = ok(ex.merged_global(&sampling))?;
    let w = workers();
    let near = ok(ex.ensemble(&local, &global, &RunOptions { workers: w, ..RunOptions::local() }))?;
    let far = ok(ex.ensemble(&local, &global, &RunOptions { workers: w, ..RunOptions::global() }))?;
    ensure(near.count == 16 && near.all_met, || format!("radius 0.236: {} of 16 reached 1e-3", near.met))?;
    ensure(far.count == 16 && far.all_met, || format!("radius 5: {} of 16 reached 1e-2", far.met))?;
    let entries: Vec<f64> = far.members.iter().filter_map(|m| m.entered_at).collect();
    ensure(entries.len() == 16, || format!("only {} entered the global level set", entries.len()))?;
    let mut worst = f64::NEG_INFINITY;
    for m in near.monitors.iter().chain(&far.monitors) {
        ensure(m.passed && m.max_increment <= 1e-6, || format!("monitor {} increment {:e}", m.name, m.max_increment))?;
        worst = worst.max(m.max_increment);
    }

    let mut jobs = Vec::new();
    for (run, tol) in [(RunOptions::local(), 0), (RunOptions::global(), 1)] {
        for y in circle_points(1, 1, run.radius, run.count) {
            jobs.push((y, run.step, run.horizon, tol));
        }
    }
    let sys = &ex.inter.system;
    let chunk = jobs.len().div_ceil(w);
    let gaps: Vec<Result<f64, String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter().map(|(y, h, t, _)| ok(step_halving_gap(sys, &y[..1], &y[1..], *h, *t))).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker")).collect()
    });
    let mut max_gap = 0.0_f64;
    for g in gaps {
        max_gap = max_gap.max(g?);
    }
    ensure(max_gap <= 1e-6, || format!("step halving moves a final state by {max_gap:e}"))?;
    let (first, last) = entries.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), t| (a.min(*t), b.max(*t)));
    Ok(format!(
        "32 of 32 converged; entry times {first:.2}..{last:.2}; max monitor increment {worst:.1e}; step halving {max_gap:.1e}"
    ))
}

fn dini_estimator() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let taus = default_schedule();
    let mut worst = 0.0_f64;
    for case in 0..100 {
        let dim = rng.gen_range(1..=4);
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.2..3.0)).collect();
        let c = rng.gen_range(0.0..1.0);
        let e = rng.gen_range(-1.0..1.0);
        let phi = |y: &[f64]| {
            let trig: f64 = y.iter().zip(a.iter().zip(&b)).map(|(v, (ai, bi))| ai * (bi * v).sin()).sum();
            trig + c * y.iter().map(|v| v * v).sum::<f64>() + (e * y[0]).exp()
        };
        let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut exact = e * (e * y[0]).exp() * d[0];
        for i in 0..dim {
            exact += (a[i] * b[i] * (b[i] * y[i]).cos() + 2.0 * c * y[i]) * d[i];
        }
        let est = ok(dini_forward(&phi, &d, &y, &taus))?.value;
        let err = (est - exact).abs();
        ensure(err <= 1e-4, || format!("case {case}: estimate {est}, exact {exact}"))?;
        worst = worst.max(err);
    }
    let norm = |y: &[f64]| y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut kink = 0.0_f64;
    for dim in 1..=4 {
        for _ in 0..5 {
            let d: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let est = ok(dini_forward(&norm, &d, &vec![0.0; dim], &taus))?.value;
            let err = (est - norm(&d)).abs();
            ensure(err <= 1e-6, || format!("kink: estimate {est}, expected {}", norm(&d)))?;
            kink = kink.max(err);
        }
    }
    Ok(format!("100 smooth cases, max error {worst:.1e}; 20 kink cases, max error {kink:.1e}"))
}

fn implication_sampling() -> Outcome {
    let ex = ok(Example1::new())?;
    let sampling = SamplingOptions { samples: 10_000, ..Default::default() };
    let cert = ex.inter.local_certificate(&ex.bundle);
    let sys = &ex.inter.system;
    let pass = ok(check_regional_implication(sys, &cert, &ex.inter.w, &sampling, DiniMode::Numerical))?;
    ensure(pass.passed && pass.samples >= 10_000, || {
        format!("{} samples, violations {}", pass.samples, pass.violation_count)
    })?;
    let mut deflated = cert.clone();
    deflated.gain = ok(ex.bundle.local_gain.scaled(0.9))?;
    ensure(matches!(deflated.gain, Gain::Continuous(_)), || "deflated gain changed kind".into())?;
    let fail = ok(check_regional_implication(sys, &deflated, &ex.inter.w, &sampling, DiniMode::Numerical))?;
    let witness = fail.violations.first().ok_or("deflated gain produced no witness")?;
    Ok(format!(
        "{} samples ({} with the premise) pass; deflated gain: {} violations, e.g. state {:?}",
        pass.samples, pass.tested, fail.violation_count, witness.state
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("cubic algebra and gain jump", cubic_algebra),
        ("regional gain corridor", gain_corridor),
        ("global small gain fails, regional suites pass", global_gain_failure),
        ("K-infinity bridge properties", kinf_bridges),
        ("smooth bridge and level constants", merged_functions),
        ("trajectory ensembles", trajectories),
        ("Dini estimator", dini_estimator),
        ("implication sampling and gain optimality", implication_sampling),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {}  {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL  {}  {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
