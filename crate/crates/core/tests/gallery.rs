use rsg::certificates::{SamplingOptions, Theorem2Options};
use rsg::gallery::example1::{build_delta_tilde_from, delta_tilde_constraints, rho_branch_inverse, Branch, Example1, M_LOCAL};
use rsg::gallery::{ExampleError, LinearPair};

#[test]
fn every_interconnection_gain_requirement_holds() {
    let ex = Example1::new().unwrap();
    for c in delta_tilde_constraints(&ex.delta_tilde).unwrap() {
        assert!(c.report.passed, "{}: {} at {}", c.name, c.report.min_margin, c.report.argmin);
    }
}

#[test]
fn a_shallow_gain_is_rejected_with_its_constraint() {
    let knots = [(0.0, 0.0), (0.236, 0.4956), (0.245, 1.10), (1.0, 2.20)];
    match build_delta_tilde_from(&knots) {
        Err(ExampleError::ValidationFailed { constraint, s, margin }) => {
            assert!(constraint.contains("0.95"), "{constraint}");
            assert!(margin < 0.0 && s >= 0.245);
        }
        other => panic!("expected a validation failure, got {other:?}"),
    }
}

#[test]
fn branch_inverses_cover_their_ranges() {
    let lo = rho_branch_inverse(Branch::Lower, 0.2).unwrap();
    assert!(lo < 0.5 && (rsg::gallery::example1::rho(lo) - 0.2).abs() < 1e-10);
    let hi = rho_branch_inverse(Branch::Upper, 0.3).unwrap();
    assert!(hi > 5.0 / 6.0 && (rsg::gallery::example1::rho(hi) - 0.3).abs() < 1e-10);
    assert!(rho_branch_inverse(Branch::Lower, 0.26).is_err());
}

#[test]
fn deflated_gain_admits_an_increasing_state() {
    let ex = Example1::new().unwrap();
    assert!(ex.check_gamma_optimality(0.2, 0.9).unwrap().is_some());
    assert!(ex.check_gamma_optimality(0.2, 1.0).unwrap().is_none());
}

#[test]
fn theorem2_needs_the_swap_for_this_example() {
    let ex = Example1::new().unwrap();
    let local = ex.merged_local(&SamplingOptions::default()).unwrap();
    let strict = ex.theorem2(&local, &Theorem2Options::default()).unwrap();
    assert!(!strict.report.passed && strict.m.is_none());
    let swapped = ex.theorem2(&local, &Theorem2Options { allow_threshold_swap: true, ..Default::default() }).unwrap();
    assert!(swapped.report.passed, "{}", swapped.report.table());
    let m = swapped.m.unwrap();
    assert!(m > M_LOCAL && m < 0.245);
}

#[test]
fn linear_pair_satisfies_theorem2_without_swap() {
    let lp = LinearPair::new().unwrap();
    let local = lp.merged_local(&SamplingOptions::default()).unwrap();
    let out = lp.theorem2(&local, &Theorem2Options::default()).unwrap();
    assert!(out.report.passed, "{}", out.report.table());
}

#[test]
fn figure_files_have_their_columns() {
    let ex = Example1::new().unwrap();
    let rows = ex.fig1_rows().unwrap();
    assert_eq!(rows.len(), 2002);
    assert!(rows.windows(2).all(|w| w[0][0] <= w[1][0]));
    let dir = tempfile::tempdir().unwrap();
    let files = ex.write_fig1(dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    let head = std::fs::read_to_string(&files[0]).unwrap();
    assert!(head.lines().next().unwrap().starts_with("s,"));
}

#[test]
fn numerical_and_analytic_derivatives_reach_the_same_verdicts() {
    use rsg::certificates::{check_regional_implication, DiniMode};
    let ex = Example1::new().unwrap();
    let sampling = SamplingOptions { samples: 3000, ..Default::default() };
    let mut deflated = ex.inter.local_certificate(&ex.bundle);
    deflated.gain = deflated.gain.scaled(0.9).unwrap();
    for (cert, other) in [
        (ex.inter.local_certificate(&ex.bundle), &ex.inter.w),
        (ex.inter.global_certificate(&ex.bundle), &ex.inter.w),
        (ex.inter.cross_certificate(&ex.bundle), &ex.inter.v),
        (deflated, &ex.inter.w),
    ] {
        let sys = &ex.inter.system;
        let a = check_regional_implication(sys, &cert, other, &sampling, DiniMode::Numerical).unwrap();
        let b = check_regional_implication(sys, &cert, other, &sampling, DiniMode::Analytic).unwrap();
        assert_eq!(a.passed, b.passed, "{} {}", a.assumption, a.region);
        assert_eq!(a.tested, b.tested);
    }
}
