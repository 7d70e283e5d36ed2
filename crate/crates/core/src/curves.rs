//! Tabulated MGF curves and the mean/std sweep over `lambda1` at fixed total load.

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{mgf_theorem, EvalPoint};
use crate::error::{AoiError, Result};
use crate::moments::summarize_oracle;
use crate::shs_model::{Policy, SystemParams};
use crate::shs_solver::{default_s0, MgfOracle};

/// Number of points in the default curve grid.
pub const DEFAULT_CURVE_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub s: f64,
    pub s_bar: f64,
    pub mgf_oracle: f64,
    pub mgf_printed: f64,
    pub rel_error: f64,
}

/// `steps` uniformly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![min],
        n => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default curve grid `s̄ ∈ [-2, 0.9 min(rho1, 1)]`, returned in units of `s`.
pub fn default_s_grid(params: &SystemParams) -> Vec<f64> {
    let top = 0.9 * params.rho1().min(1.0);
    linspace(-2.0, top, DEFAULT_CURVE_POINTS)
        .into_iter()
        .map(|s_bar| s_bar * params.mu())
        .collect()
}

/// Numeric and printed MGF of the source-1 age on a uniform grid of `s`.
pub fn mgf_curve(policy: Policy, params: SystemParams, s_min: f64, s_max: f64, steps: usize) -> Result<Vec<CurvePoint>> {
    if steps == 0 {
        return Err(AoiError::Validation("s-steps must be >= 1".into()));
    }
    if s_min > s_max {
        return Err(AoiError::Validation(format!("s-min {s_min} exceeds s-max {s_max}")));
    }
    let s0 = default_s0(&params);
    if s_max >= s0 {
        return Err(AoiError::Domain { s: s_max, s0 });
    }
    let oracle = MgfOracle::for_policy(policy, params)?;
    linspace(s_min, s_max, steps)
        .into_iter()
        .map(|s| {
            let mgf_oracle = oracle.mgf(s)?;
            let pt = EvalPoint::from_s(params, s);
            let mgf_printed = mgf_theorem(policy, &pt)?;
            Ok(CurvePoint {
                s,
                s_bar: pt.s_bar,
                mgf_oracle,
                mgf_printed,
                rel_error: (mgf_printed - mgf_oracle).abs() / mgf_oracle.abs(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda1: f64,
    pub policy: Policy,
    pub mean_oracle: f64,
    pub second_oracle: f64,
    pub std_oracle: f64,
    pub mean_plus_std: f64,
    pub mean_minus_std: f64,
}

/// Interior sweep points `lambda1 = k * lambda_total / (steps + 1)`, `k = 1..=steps`.
pub fn sweep_lambda1_values(lambda_total: f64, steps: usize) -> Vec<f64> {
    (1..=steps)
        .map(|k| lambda_total * k as f64 / (steps + 1) as f64)
        .collect()
}

/// Mean and standard deviation of the source-1 age as `lambda1` sweeps the
/// open interval `(0, lambda_total)` with `lambda2 = lambda_total - lambda1`.
/// Rows are grouped by policy, in the order given.
pub fn sweep(mu: f64, lambda_total: f64, steps: usize, policies: &[Policy]) -> Result<Vec<SweepRow>> {
    if !(lambda_total.is_finite() && lambda_total > 0.0) {
        return Err(AoiError::InvalidParams(format!("total arrival rate must be > 0, got {lambda_total}")));
    }
    let lambdas = sweep_lambda1_values(lambda_total, steps);
    let jobs: Vec<(Policy, f64)> = policies
        .iter()
        .flat_map(|&p| lambdas.iter().map(move |&l1| (p, l1)))
        .collect();
    jobs.par_iter()
        .map(|&(policy, lambda1)| {
            let params = SystemParams::new(lambda1, (lambda_total - lambda1).max(0.0), mu)?;
            let m = summarize_oracle(&MgfOracle::for_policy(policy, params)?)?.moments;
            Ok(SweepRow {
                lambda1,
                policy,
                mean_oracle: m.mean,
                second_oracle: m.second_moment,
                std_oracle: m.std_dev,
                mean_plus_std: m.mean + m.std_dev,
                mean_minus_std: m.mean - m.std_dev,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        assert_eq!(linspace(-2.0, 0.5, 6), vec![-2.0, -1.5, -1.0, -0.5, 0.0, 0.5]);
        assert_eq!(linspace(1.0, 3.0, 1), vec![1.0]);
    }

    #[test]
    fn default_grid_stays_admissible() {
        let p = SystemParams::new(0.4, 2.0, 2.0).unwrap();
        let grid = default_s_grid(&p);
        assert_eq!(grid.len(), DEFAULT_CURVE_POINTS);
        assert!(grid.iter().all(|&s| s < default_s0(&p)));
        assert_eq!(grid[0], -4.0);
    }

    #[test]
    fn curve_rejects_inadmissible_range() {
        let p = SystemParams::new(1.0, 1.0, 1.0).unwrap();
        match mgf_curve(Policy::SelfPreemptive, p, -1.0, 1.0, 3) {
            Err(AoiError::Domain { s0, .. }) => assert_eq!(s0, 1.0),
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn sweep_rows_and_order() {
        let rows = sweep(1.0, 5.0, 4, &Policy::ALL).unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].lambda1, 1.0);
        assert_eq!(rows[3].lambda1, 4.0);
        assert_eq!(rows[4].policy, Policy::NonPreemptive);
        assert!(rows.iter().all(|r| r.std_oracle > 0.0));
    }
}
