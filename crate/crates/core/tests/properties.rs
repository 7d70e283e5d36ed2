use aoi_core::closed_form::stationary_closed_form;
use aoi_core::moments::summarize_oracle;
use aoi_core::shs_solver::{default_s0, solve_mgf_correlations, stationary_distribution};
use aoi_core::{build_chain, mgf_source2_at, DiscreteState, MgfOracle, Policy, SDomain, ShsChain, SystemParams};
use proptest::prelude::*;

fn policy() -> impl Strategy<Value = Policy> {
    prop_oneof![Just(Policy::SelfPreemptive), Just(Policy::NonPreemptive)]
}

/// Loads with both sources active.
fn loads() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.1f64..5.0, 0.05f64..5.0, 0.5f64..3.0)
}

fn params((rho1, rho2, mu): (f64, f64, f64)) -> SystemParams {
    SystemParams::from_loads(rho1, rho2, mu).unwrap()
}

/// Sorted admissible arguments in `[-2 mu, 0.9 s0]`.
fn s_grid(p: &SystemParams, n: usize) -> Vec<f64> {
    let (lo, hi) = (-2.0 * p.mu(), 0.9 * default_s0(p));
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn swap_label(q: DiscreteState) -> DiscreteState {
    match q {
        DiscreteState::S00 => DiscreteState::S00,
        DiscreteState::S01 => DiscreteState::S02,
        DiscreteState::S02 => DiscreteState::S01,
        DiscreteState::S21 => DiscreteState::S12,
        DiscreteState::S12 => DiscreteState::S21,
    }
}

/// Off-diagonal generator of the discrete chain.
fn generator(chain: &ShsChain) -> [[f64; 5]; 5] {
    let mut g = [[0.0; 5]; 5];
    for t in chain.transitions() {
        if t.from != t.to {
            g[t.from.index()][t.to.index()] += chain.rate(t);
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reset_maps_preserve_one_component_per_column(pol in policy(), l in loads()) {
        let chain = build_chain(pol, params(l)).unwrap();
        for t in chain.transitions() {
            for j in 0..3 {
                let col: u8 = (0..3).map(|k| t.reset.a()[k][j]).sum::<u8>() + t.reset.hat()[j][j];
                prop_assert_eq!(col, 1, "transition {} column {}", t.id, j);
            }
        }
    }

    #[test]
    fn stationary_matches_closed_form(pol in policy(), l in loads()) {
        let p = params(l);
        let pi = stationary_distribution(&build_chain(pol, p).unwrap()).unwrap();
        prop_assert!(pi.max_abs_diff(&stationary_closed_form(&p)) < 1e-12);
    }

    #[test]
    fn correlations_at_zero_are_state_probabilities(pol in policy(), l in loads()) {
        let p = params(l);
        let chain = build_chain(pol, p).unwrap();
        let pi = stationary_distribution(&chain).unwrap();
        let sol = solve_mgf_correlations(&chain, &pi, &SDomain::new(0.0, &p).unwrap()).unwrap();
        for q in DiscreteState::ALL {
            for j in 0..3 {
                prop_assert!((sol.value(q, j).unwrap() - pi.prob(q)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mgf_is_monotone_log_convex_and_above_jensen(pol in policy(), l in loads()) {
        let p = params(l);
        let oracle = MgfOracle::for_policy(pol, p).unwrap();
        let mean = oracle.average_aoi().unwrap();
        let s = s_grid(&p, 25);
        let m: Vec<f64> = s.iter().map(|&s| oracle.mgf(s).unwrap()).collect();
        for i in 0..s.len() {
            prop_assert!(m[i] > 0.0);
            prop_assert!(m[i] >= (s[i] * mean).exp() * (1.0 - 1e-12), "Jensen at s={}", s[i]);
            if i > 0 {
                prop_assert!(m[i] > m[i - 1]);
            }
            if i > 0 && i + 1 < s.len() {
                let d2 = m[i + 1].ln() - 2.0 * m[i].ln() + m[i - 1].ln();
                prop_assert!(d2 >= -1e-8, "log-convexity at s={}: {}", s[i], d2);
            }
        }
    }

    #[test]
    fn moments_are_consistent(pol in policy(), l in loads()) {
        let summary = summarize_oracle(&MgfOracle::for_policy(pol, params(l)).unwrap()).unwrap();
        prop_assert!(summary.moments.variance >= 0.0);
        prop_assert!(summary.moments.is_consistent());
        prop_assert!(summary.mean_discrepancy() < 1e-6);
    }

    #[test]
    fn source_swap_symmetry(pol in policy(), l in loads(), frac in 0.0f64..1.0) {
        let p = params(l);
        let q = p.swapped().unwrap();
        let pi = stationary_distribution(&build_chain(pol, p).unwrap()).unwrap();
        let pi_swapped = stationary_distribution(&build_chain(pol, q).unwrap()).unwrap();
        for st in DiscreteState::ALL {
            prop_assert!((pi.prob(st) - pi_swapped.prob(swap_label(st))).abs() < 1e-12);
        }

        let g = generator(&build_chain(pol, p).unwrap());
        let gs = generator(&build_chain(pol, q).unwrap());
        for a in DiscreteState::ALL {
            for b in DiscreteState::ALL {
                prop_assert_eq!(g[a.index()][b.index()], gs[swap_label(a).index()][swap_label(b).index()]);
            }
        }

        let s = -2.0 * p.mu() + frac * (0.9 * default_s0(&q) + 2.0 * p.mu());
        let direct = MgfOracle::for_policy(pol, q).unwrap().mgf(s).unwrap();
        let relabeled = mgf_source2_at(&p, pol, s).unwrap();
        prop_assert!((direct - relabeled).abs() <= 1e-10 * direct.abs());
    }
}

#[test]
fn single_source_chain_is_solved_without_auxiliary_components() {
    let p = SystemParams::new(1.0, 0.0, 1.0).unwrap();
    for pol in Policy::ALL {
        let chain = build_chain(pol, p).unwrap();
        let pi = stationary_distribution(&chain).unwrap();
        let sol = solve_mgf_correlations(&chain, &pi, &SDomain::new(-0.5, &p).unwrap()).unwrap();
        for q in DiscreteState::ALL {
            assert!(sol.value(q, 0).unwrap().is_finite());
        }
    }
}

#[test]
fn inadmissible_s_is_rejected() {
    let p = SystemParams::new(0.5, 1.0, 2.0).unwrap();
    let oracle = MgfOracle::for_policy(Policy::NonPreemptive, p).unwrap();
    assert_eq!(oracle.s0(), 0.5);
    assert!(matches!(oracle.mgf(0.5), Err(aoi_core::AoiError::Domain { .. })));
    assert!(oracle.mgf(0.49).unwrap().is_finite());
}
