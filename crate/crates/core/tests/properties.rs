use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use rsg::certificates::{inclusion_chain, MergedLyapunov, SamplingOptions, Theorem2Options};
use rsg::dynamics::{default_schedule, dini_forward, LevelSet};
use rsg::gallery::LinearPair;
use rsg::scalar_fn::{build_kinf_bridge, build_smooth_bridge, log_knots, uniform_grid, Interval, Segment};
use rsg::ComparisonFunction;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

/// Increasing piecewise-affine function through `(0, 0)` and the given
/// positive increments.
fn affine_from(steps: &[(f64, f64)], tail: f64) -> ComparisonFunction {
    let mut knots = vec![(0.0, 0.0)];
    let (mut x, mut y) = (0.0, 0.0);
    for &(dx, dy) in steps {
        x += dx;
        y += dy;
        knots.push((x, y));
    }
    ComparisonFunction::piecewise_affine(&knots, tail).unwrap()
}

fn steps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01..2.0f64, 0.01..2.0f64), 1..6)
}

fn cubic(c1: f64, c3: f64) -> Arc<ComparisonFunction> {
    Arc::new(ComparisonFunction::single(Segment::Cubic { coeffs: [0.0, c1, 0.0, c3] }).unwrap())
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn inverse_undoes_evaluation(st in steps(), tail in 0.1..3.0f64, s in 0.0..20.0f64) {
        let f = affine_from(&st, tail);
        let y = f.eval(s).unwrap();
        let back = f.inverse_value(y).unwrap();
        prop_assert!((back - s).abs() <= 1e-8 * (1.0 + s), "{back} vs {s}");
    }

    #[test]
    fn composition_stays_increasing(a in steps(), b in steps(), ta in 0.1..3.0f64, tb in 0.1..3.0f64) {
        let f = Arc::new(affine_from(&a, ta));
        let g = Arc::new(affine_from(&b, tb));
        let h = ComparisonFunction::compose(&f, &g);
        let grid = uniform_grid(&Interval::closed(0.0, 10.0), 500);
        prop_assert_eq!(h.check_increasing(&grid).unwrap(), None);
        let id = ComparisonFunction::compose(&f, &Arc::new(ComparisonFunction::inverse_function(&f)));
        for s in [0.1, 1.0, 7.5] {
            prop_assert!((id.eval(s).unwrap() - s).abs() <= 1e-8 * (1.0 + s));
        }
    }

    #[test]
    fn kinf_bridge_sits_between(a1 in 0.1..1.5f64, a3 in 0.0..0.2f64, b1 in 0.1..1.5f64, b3 in 0.0..0.2f64,
                                p in 0.0..1.0f64, width in 0.1..3.0f64) {
        let (alpha, beta) = (cubic(a1, a3), cubic(b1, b3));
        let q = p + width;
        let hyp = uniform_grid(&Interval::closed(p, q), 400)
            .into_iter()
            .filter(|s| *s > 0.0)
            .all(|s| beta.eval(alpha.eval(s).unwrap()).unwrap() < s);
        prop_assume!(hyp);
        let parts = build_kinf_bridge(&alpha, &beta, p, q, None).unwrap();
        let f = &parts.function;
        prop_assert!(f.seam_gap() <= 1e-9);
        for s in uniform_grid(&Interval::left_open(0.0, 10.0 * q), 400) {
            prop_assert!(f.eval(s).unwrap() > alpha.eval(s).unwrap(), "below alpha at {s}");
        }
        let inv = ComparisonFunction::inverse_function(&beta);
        for s in uniform_grid(&Interval::closed(p, q), 400).into_iter().filter(|s| *s > 0.0) {
            prop_assert!(f.eval(s).unwrap() < inv.eval(s).unwrap(), "above beta inverse at {s}");
        }
    }

    #[test]
    fn smooth_bridge_is_sandwiched(l1 in 0.1..1.0f64, l3 in 0.0..0.5f64, gap in 0.05..2.0f64, u3 in 0.0..0.5f64) {
        let lower = cubic(l1, l3);
        let upper = cubic(l1 * (1.0 + gap), l3 + u3);
        let knots = log_knots(1e-4, 10.0, 60);
        let sigma = build_smooth_bridge(lower.as_ref(), upper.as_ref(), &knots).unwrap();
        let grid = log_knots(1e-4, 10.0, 600);
        prop_assert_eq!(sigma.check_increasing(&grid).unwrap(), None);
        for s in grid {
            let v = sigma.eval(s).unwrap();
            prop_assert!(lower.eval(s).unwrap() < v && v < upper.eval(s).unwrap(), "outside at {s}");
        }
    }

    #[test]
    fn sublevel_sets_nest(c1 in 0.01..5.0f64, ratio in 1.0..3.0f64, wx in 0.2..3.0f64, wz in 0.2..3.0f64) {
        let u: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = Arc::new(move |y: &[f64]| (wx * y[0].abs()).max(wz * y[1].abs()));
        let small = LevelSet { name: "small".into(), u: u.clone(), c: c1 };
        let big = LevelSet { name: "big".into(), u, c: c1 * ratio };
        let r = inclusion_chain(&[small.clone(), big.clone()], 2, 200, 1).unwrap();
        prop_assert!(r.passed);
        if ratio > 1.01 {
            let r = inclusion_chain(&[big, small], 2, 200, 1).unwrap();
            prop_assert!(!r.passed);
        }
    }
}

struct Merged {
    pair: LinearPair,
    local: MergedLyapunov,
    hat: MergedLyapunov,
}

fn merged() -> &'static Merged {
    static CELL: OnceLock<Merged> = OnceLock::new();
    CELL.get_or_init(|| {
        let pair = LinearPair::new().unwrap();
        let local = pair.merged_local(&SamplingOptions::default()).unwrap();
        let out = pair.theorem2(&local, &Theorem2Options::default()).unwrap();
        assert!(out.report.passed, "{}", out.report.table());
        let hat = out.u_hat.unwrap();
        Merged { pair, local, hat }
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn combined_function_stays_below_local(x in -20.0..20.0f64, z in -20.0..20.0f64) {
        let m = merged();
        let y = [x, z];
        prop_assert!(m.hat.evaluate(&y) <= m.local.evaluate(&y) + 1e-12);
        prop_assert!(m.local.evaluate(&y) >= 0.0);
    }

    #[test]
    fn numerical_and_analytic_dini_agree(x in -5.0..5.0f64, z in -5.0..5.0f64, origin in prop::bool::weighted(0.1)) {
        let m = merged();
        let taus = default_schedule();
        for (storage, value) in [(&m.pair.inter.v, x), (&m.pair.inter.w, z)] {
            let own = [if origin { 0.0 } else { value }];
            let d = [z - 0.3 * x];
            let oracle = storage.oracle.as_ref().unwrap();
            let est = dini_forward(&|v: &[f64]| storage.eval(v), &d, &own, &taus).unwrap().value;
            prop_assert!((est - oracle(&own, &d)).abs() <= 1e-6, "{est} vs {}", oracle(&own, &d));
        }
    }
}
