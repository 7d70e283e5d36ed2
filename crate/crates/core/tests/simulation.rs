use aoi_core::moments::summarize_oracle;
use aoi_core::simulator::sample_path;
use aoi_core::{simulate, simulate_replications, DiscreteState, MgfOracle, Policy, SimConfig, SystemParams};

const EVENTS: u64 = 2_000_000;

fn config(l1: f64, l2: f64, policy: Policy, seed: u64) -> SimConfig {
    SimConfig::new(SystemParams::new(l1, l2, 1.0).unwrap(), policy, seed, EVENTS)
}

#[test]
fn mean_second_moment_and_mgf_agree_with_oracle() {
    for (i, policy) in Policy::ALL.into_iter().enumerate() {
        for (j, (l1, l2)) in [(1.0, 1.0), (0.5, 2.0)].into_iter().enumerate() {
            let cfg = config(l1, l2, policy, 100 + 10 * i as u64 + j as u64).with_probes(vec![-1.0, -0.5, 0.2]);
            let sim = simulate(&cfg).unwrap();
            let oracle = MgfOracle::for_policy(policy, cfg.params).unwrap();
            let moments = summarize_oracle(&oracle).unwrap().moments;
            assert!(sim.mean_aoi.covers(moments.mean, 3.0), "{policy:?} ({l1},{l2}) mean");
            assert!(sim.second_moment_aoi.covers(moments.second_moment, 3.0), "{policy:?} ({l1},{l2}) second");
            for probe in &sim.empirical_mgf {
                assert!(probe.failure.is_none());
                let m = oracle.mgf(probe.s).unwrap();
                assert!(probe.as_estimate().covers(m, 3.0), "{policy:?} ({l1},{l2}) s={}", probe.s);
            }
        }
    }
}

#[test]
fn occupancy_matches_stationary_distribution() {
    for policy in Policy::ALL {
        let cfg = config(1.0, 4.0, policy, 5);
        let sim = simulate(&cfg).unwrap();
        let oracle = MgfOracle::for_policy(policy, cfg.params).unwrap();
        for q in DiscreteState::ALL {
            let est = sim.occupancy[q.index()];
            assert!(est.covers(oracle.stationary().prob(q), 3.0), "{policy:?} {q:?}");
        }
    }
}

#[test]
fn same_seed_is_reproducible() {
    let cfg = config(2.0, 1.0, Policy::NonPreemptive, 9).with_probes(vec![-0.5]);
    assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    assert_eq!(
        simulate_replications(&cfg, 4).unwrap(),
        simulate_replications(&cfg, 4).unwrap()
    );
    let other = SimConfig { seed: 10, ..cfg.clone() };
    assert_ne!(simulate(&cfg).unwrap().mean_aoi, simulate(&other).unwrap().mean_aoi);
}

#[test]
fn replications_pool_batches() {
    let cfg = config(2.5, 2.5, Policy::SelfPreemptive, 3);
    let single = simulate(&cfg).unwrap();
    let pooled = simulate_replications(&cfg, 4).unwrap();
    assert_eq!(pooled.replications, 4);
    assert_eq!(pooled.batches.len(), 4 * cfg.batch_count);
    // replication 0 is the single run
    assert_eq!(pooled.batches[..cfg.batch_count], single.batches[..]);
    assert!(pooled.mean_aoi.std_error <= single.mean_aoi.std_error);
    let mean = MgfOracle::for_policy(Policy::SelfPreemptive, cfg.params).unwrap().average_aoi().unwrap();
    assert!(pooled.mean_aoi.covers(mean, 3.0));
}

#[test]
fn age_path_is_a_sawtooth() {
    let cfg = config(1.0, 1.0, Policy::SelfPreemptive, 1);
    let path = sample_path(&cfg, 10_000).unwrap();
    let mut drops = 0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        assert!(b.time > a.time);
        if b.source1_delivery {
            drops += 1;
            assert!(b.age <= b.time - a.time + a.age);
        } else {
            assert!((b.age - (a.age + b.time - a.time)).abs() < 1e-9);
        }
    }
    assert!(drops > 1000);
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = config(1.0, 1.0, Policy::SelfPreemptive, 1);
    cfg.batch_count = 1;
    assert!(simulate(&cfg).is_err());
    let cfg = config(1.0, 1.0, Policy::SelfPreemptive, 1).with_probes(vec![1.0]);
    assert!(matches!(simulate(&cfg), Err(aoi_core::AoiError::Domain { .. })));
}
