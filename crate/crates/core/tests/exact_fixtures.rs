//! Correlation vectors and moments at the unit-load point checked against
//! values obtained by exact rational elimination of the same linear systems.

use aoi_core::closed_form::stationary_closed_form;
use aoi_core::limits::{blocking_mean, blocking_mgf, preemptive_mean, preemptive_mgf};
use aoi_core::moments::summarize_oracle;
use aoi_core::shs_solver::{solve_mgf_correlations, stationary_distribution};
use aoi_core::{build_chain, DiscreteState, MgfOracle, Policy, SDomain, SystemParams};

fn unit() -> SystemParams {
    SystemParams::new(1.0, 1.0, 1.0).unwrap()
}

fn r(n: f64, d: f64) -> f64 {
    n / d
}

fn assert_rows(policy: Policy, expected: [[f64; 3]; 5]) {
    let chain = build_chain(policy, unit()).unwrap();
    let pi = stationary_distribution(&chain).unwrap();
    let sol = solve_mgf_correlations(&chain, &pi, &SDomain::new(-1.0, &unit()).unwrap()).unwrap();
    assert!(sol.is_fully_resolved());
    for q in DiscreteState::ALL {
        for j in 0..3 {
            let got = sol.value(q, j).unwrap();
            let want = expected[q.index()][j];
            assert!((got - want).abs() < 1e-14, "{policy:?} {q:?} x{j}: {got} vs {want}");
        }
    }
}

#[test]
fn self_preemptive_correlations_at_minus_one() {
    assert_rows(
        Policy::SelfPreemptive,
        [
            [r(23., 360.), r(23., 360.), r(11., 315.)],
            [r(67., 2160.), r(2., 15.), r(53., 945.)],
            [r(7., 120.), r(7., 120.), r(46., 945.)],
            [r(67., 4320.), r(1., 9.), r(1., 9.)],
            [r(7., 240.), r(7., 240.), r(2., 15.)],
        ],
    );
    let m = MgfOracle::for_policy(Policy::SelfPreemptive, unit()).unwrap().mgf(-1.0).unwrap();
    assert!((m - 19.0 / 96.0).abs() < 1e-14);
}

#[test]
fn non_preemptive_correlations_at_minus_one() {
    assert_rows(
        Policy::NonPreemptive,
        [
            [r(7., 144.), r(7., 144.), r(17., 630.)],
            [r(19., 864.), r(1., 9.), r(101., 1890.)],
            [r(5., 144.), r(5., 144.), r(26., 945.)],
            [r(19., 1728.), r(1., 18.), r(1., 18.)],
            [r(5., 288.), r(5., 288.), r(2., 15.)],
        ],
    );
    let m = MgfOracle::for_policy(Policy::NonPreemptive, unit()).unwrap().mgf(-1.0).unwrap();
    assert!((m - 77.0 / 576.0).abs() < 1e-14);
}

#[test]
fn self_preemptive_mgf_rational_function() {
    let oracle = MgfOracle::for_policy(Policy::SelfPreemptive, unit()).unwrap();
    for s in [-3.0, -1.5, -0.25, 0.3, 0.75] {
        let exact = (3.0 * s * s * s - 20.0 * s * s + 42.0 * s - 30.0)
            / (5.0 * (s - 3.0) * (s - 2.0) * (s - 1.0_f64).powi(3));
        let got = oracle.mgf(s).unwrap();
        assert!((got - exact).abs() / exact < 1e-12, "s={s}: {got} vs {exact}");
    }
}

#[test]
fn unit_load_moments() {
    let selfp = summarize_oracle(&MgfOracle::for_policy(Policy::SelfPreemptive, unit()).unwrap()).unwrap();
    assert!((selfp.moments.mean - 73.0 / 30.0).abs() < 1e-13);
    assert!((selfp.moments.second_moment - 779.0 / 90.0).abs() / (779.0 / 90.0) < 1e-8);

    let nonpre = summarize_oracle(&MgfOracle::for_policy(Policy::NonPreemptive, unit()).unwrap()).unwrap();
    assert!((nonpre.moments.mean - 37.0 / 12.0).abs() < 1e-13);
    assert!((nonpre.moments.second_moment - 1181.0 / 90.0).abs() / (1181.0 / 90.0) < 1e-8);
}

#[test]
fn stationary_unit_load() {
    // states 00, 01, 02, 21, 12 are equally split between the two sources
    let pi = stationary_closed_form(&unit());
    assert!((pi.prob(DiscreteState::S01) - pi.prob(DiscreteState::S02)).abs() < 1e-15);
    assert!((pi.prob(DiscreteState::S21) - pi.prob(DiscreteState::S12)).abs() < 1e-15);
    assert!((pi.probs().iter().sum::<f64>() - 1.0).abs() < 1e-15);
}

#[test]
fn single_source_limits_match_renewal_oracles() {
    for rho in [0.2, 0.5, 1.0, 2.0, 5.0] {
        let p = SystemParams::new(rho, 0.0, 1.0).unwrap();
        let nonpre = MgfOracle::for_policy(Policy::NonPreemptive, p).unwrap();
        let selfp = MgfOracle::for_policy(Policy::SelfPreemptive, p).unwrap();
        assert!((nonpre.average_aoi().unwrap() - blocking_mean(&p)).abs() / blocking_mean(&p) < 1e-12);
        assert!((selfp.average_aoi().unwrap() - preemptive_mean(&p)).abs() / preemptive_mean(&p) < 1e-12);
        for k in 0..10 {
            let s = -2.0 + k as f64 * (2.0 + 0.9 * rho.min(1.0)) / 9.0;
            let b = blocking_mgf(rho, s);
            let q = preemptive_mgf(rho, s);
            assert!((nonpre.mgf(s).unwrap() - b).abs() / b < 1e-9);
            assert!((selfp.mgf(s).unwrap() - q).abs() / q < 1e-9);
        }
    }
}

#[test]
fn blocking_queue_second_moment_is_nine() {
    let p = SystemParams::new(1.0, 0.0, 1.0).unwrap();
    let m = summarize_oracle(&MgfOracle::for_policy(Policy::NonPreemptive, p).unwrap()).unwrap();
    assert!((m.moments.mean - 2.5).abs() < 1e-12);
    assert!((m.moments.second_moment - 9.0).abs() < 1e-7);
    assert!((m.moments.std_dev - 2.75_f64.sqrt()).abs() < 1e-7);
}
