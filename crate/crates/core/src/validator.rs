//! Three-way cross-checks between the numeric SHS solution, the printed
//! closed forms and the simulator.
//!
//! Verdicts come from fixed thresholds. A disagreement between the two
//! independent engines (linear solve, Monte Carlo) or with a single-source
//! reference is a `FAIL`; a printed expression disagreeing with the numeric
//! solution is a `DOCUMENTED-DISCREPANCY`.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{
    appendix_sum, appendix_vq0, mgf_theorem, second_moment_theorem, stationary_closed_form, EvalPoint,
};
use crate::error::Result;
use crate::limits;
use crate::moments::summarize_oracle;
use crate::shs_model::{DiscreteState, Policy, SystemParams};
use crate::shs_solver::MgfOracle;
use crate::simulator::{simulate, SimConfig};

pub const STATIONARY_TOL: f64 = 1e-12;
pub const MGF_NORMALIZATION_TOL: f64 = 1e-10;
pub const MEAN_DERIVATIVE_REL_TOL: f64 = 1e-6;
pub const PRINTED_REL_TOL: f64 = 1e-9;
pub const LIMIT_REL_TOL: f64 = 1e-9;
pub const SIM_STD_ERRORS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "DOCUMENTED-DISCREPANCY")]
    DocumentedDiscrepancy,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::DocumentedDiscrepancy => "DOCUMENTED-DISCREPANCY",
        })
    }
}

/// Check identifiers, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    StationaryClosedForm,
    MgfNormalization,
    MeanVsMgfDerivative,
    SingleSourceLimitMean,
    SingleSourceLimitMgf,
    PrintedTheoremMgf,
    PrintedAppendixState,
    PrintedAppendixSum,
    PrintedAppendixSumVsTheorem,
    PrintedSecondMoment,
    SimulationMean,
    SimulationMgf,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = check_name(*self);
        f.write_str(s)
    }
}

fn check_name(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::StationaryClosedForm => "stationary_closed_form",
        CheckKind::MgfNormalization => "mgf_normalization",
        CheckKind::MeanVsMgfDerivative => "mean_vs_mgf_derivative",
        CheckKind::SingleSourceLimitMean => "single_source_limit_mean",
        CheckKind::SingleSourceLimitMgf => "single_source_limit_mgf",
        CheckKind::PrintedTheoremMgf => "printed_theorem_mgf",
        CheckKind::PrintedAppendixState => "printed_appendix_state",
        CheckKind::PrintedAppendixSum => "printed_appendix_sum",
        CheckKind::PrintedAppendixSumVsTheorem => "printed_appendix_sum_vs_theorem",
        CheckKind::PrintedSecondMoment => "printed_second_moment",
        CheckKind::SimulationMean => "simulation_mean",
        CheckKind::SimulationMgf => "simulation_mgf",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: CheckKind,
    pub policy: Policy,
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu: f64,
    /// Discrete state for per-state checks.
    pub state: Option<DiscreteState>,
    pub s: Option<f64>,
    pub oracle_value: f64,
    pub compared_value: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub verdict: Verdict,
    pub note: String,
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

impl CheckRecord {
    fn canonical_cmp(&self, other: &Self) -> Ordering {
        cmp_f64(self.lambda1, other.lambda1)
            .then(cmp_f64(self.lambda2, other.lambda2))
            .then(cmp_f64(self.mu, other.mu))
            .then(self.policy.cmp(&other.policy))
            .then(self.check.cmp(&other.check))
            .then(self.state.cmp(&other.state))
            .then(cmp_f64(self.s.unwrap_or(f64::NEG_INFINITY), other.s.unwrap_or(f64::NEG_INFINITY)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: Vec<CheckRecord>,
}

impl ValidationReport {
    pub fn count(&self, verdict: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == verdict).count()
    }

    pub fn find<'a>(&'a self, check: CheckKind) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.records.iter().filter(move |r| r.check == check)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<32} {:<7} {:>7} {:>7} {:>7} {:>5} {:>9} {:>14} {:>14} {:>10} verdict",
            "check", "policy", "lambda1", "lambda2", "mu", "state", "s", "oracle", "compared", "rel_err"
        )?;
        for r in &self.records {
            writeln!(
                f,
                "{:<32} {:<7} {:>7} {:>7} {:>7} {:>5} {:>9} {:>14.8e} {:>14.8e} {:>10.3e} {}",
                r.check.to_string(),
                r.policy.to_string(),
                r.lambda1,
                r.lambda2,
                r.mu,
                r.state.map_or("-", |q| q.label()),
                r.s.map_or("-".to_string(), |s| format!("{s:.4}")),
                r.oracle_value,
                r.compared_value,
                r.rel_error,
                r.verdict
            )?;
        }
        writeln!(
            f,
            "{} records: {} PASS, {} FAIL, {} DOCUMENTED-DISCREPANCY",
            self.records.len(),
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::DocumentedDiscrepancy)
        )
    }
}

/// One grid point: parameters and the MGF arguments to check them at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationPoint {
    pub params: SystemParams,
    pub s_values: Vec<f64>,
}

impl ValidationPoint {
    pub fn with_default_s(params: SystemParams) -> Self {
        ValidationPoint { s_values: default_check_s_values(&params), params }
    }
}

/// `s̄ ∈ {-2, -1, -0.5, 0, m/4, m/2}` with `m = min(rho1, 1)`, scaled by `mu`.
pub fn default_check_s_values(params: &SystemParams) -> Vec<f64> {
    let m = params.rho1().min(1.0);
    [-2.0, -1.0, -0.5, 0.0, 0.25 * m, 0.5 * m]
        .iter()
        .map(|s_bar| s_bar * params.mu())
        .collect()
}

/// `mu = 1`, `(lambda1, lambda2) ∈ {0.5, 1, 2} x {0, 0.5, 1, 2}`.
pub fn default_grid() -> Vec<ValidationPoint> {
    let mut grid = Vec::new();
    for &l1 in &[0.5, 1.0, 2.0] {
        for &l2 in &[0.0, 0.5, 1.0, 2.0] {
            let params = SystemParams::new(l1, l2, 1.0).expect("grid rates are valid");
            grid.push(ValidationPoint::with_default_s(params));
        }
    }
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimBudget {
    pub events: u64,
    pub seed: u64,
    pub batch_count: usize,
}

struct Recorder {
    policy: Policy,
    params: SystemParams,
    records: Vec<CheckRecord>,
}

impl Recorder {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        check: CheckKind,
        state: Option<DiscreteState>,
        s: Option<f64>,
        oracle_value: f64,
        compared_value: f64,
        verdict_of: impl Fn(f64, f64) -> Verdict,
        note: String,
    ) {
        let abs_error = (compared_value - oracle_value).abs();
        let rel_error = if oracle_value != 0.0 { abs_error / oracle_value.abs() } else { abs_error };
        let verdict = if abs_error.is_finite() {
            verdict_of(abs_error, rel_error)
        } else {
            Verdict::Fail
        };
        self.records.push(CheckRecord {
            check,
            policy: self.policy,
            lambda1: self.params.lambda1(),
            lambda2: self.params.lambda2(),
            mu: self.params.mu(),
            state,
            s,
            oracle_value,
            compared_value,
            abs_error,
            rel_error,
            verdict,
            note,
        });
    }

    fn failure(&mut self, check: CheckKind, state: Option<DiscreteState>, s: Option<f64>, err: impl fmt::Display) {
        self.records.push(CheckRecord {
            check,
            policy: self.policy,
            lambda1: self.params.lambda1(),
            lambda2: self.params.lambda2(),
            mu: self.params.mu(),
            state,
            s,
            oracle_value: f64::NAN,
            compared_value: f64::NAN,
            abs_error: f64::NAN,
            rel_error: f64::NAN,
            verdict: Verdict::Fail,
            note: format!("engine failure: {err}"),
        });
    }
}

fn abs_within(tol: f64) -> impl Fn(f64, f64) -> Verdict {
    move |abs, _| if abs <= tol { Verdict::Pass } else { Verdict::Fail }
}

fn rel_within(tol: f64) -> impl Fn(f64, f64) -> Verdict {
    move |_, rel| if rel <= tol { Verdict::Pass } else { Verdict::Fail }
}

fn printed(tol: f64) -> impl Fn(f64, f64) -> Verdict {
    move |_, rel| if rel <= tol { Verdict::Pass } else { Verdict::DocumentedDiscrepancy }
}

fn validate_point(point: &ValidationPoint, policy: Policy, sim: Option<(SimBudget, u64)>) -> Vec<CheckRecord> {
    let params = point.params;
    let mut rec = Recorder { policy, params, records: Vec::new() };

    let oracle = match MgfOracle::for_policy(policy, params) {
        Ok(o) => o,
        Err(e) => {
            rec.failure(CheckKind::StationaryClosedForm, None, None, e);
            return rec.records;
        }
    };

    // (1) stationary vector
    let closed = stationary_closed_form(&params);
    for q in DiscreteState::ALL {
        rec.push(
            CheckKind::StationaryClosedForm,
            Some(q),
            None,
            oracle.stationary().prob(q),
            closed.prob(q),
            abs_within(STATIONARY_TOL),
            "balance solve vs printed stationary vector".into(),
        );
    }

    // (2) M(0) = 1
    match oracle.mgf(0.0) {
        Ok(m0) => rec.push(
            CheckKind::MgfNormalization,
            None,
            Some(0.0),
            1.0,
            m0,
            abs_within(MGF_NORMALIZATION_TOL),
            "numeric MGF at s = 0".into(),
        ),
        Err(e) => rec.failure(CheckKind::MgfNormalization, None, Some(0.0), e),
    }

    // (3) linear-solve mean vs MGF derivative; also feeds (6)
    let summary = match summarize_oracle(&oracle) {
        Ok(s) => {
            rec.push(
                CheckKind::MeanVsMgfDerivative,
                None,
                None,
                s.moments.mean,
                s.mean_by_derivative.value,
                rel_within(MEAN_DERIVATIVE_REL_TOL),
                format!("Richardson step {:.3e}", s.step),
            );
            Some(s)
        }
        Err(e) => {
            rec.failure(CheckKind::MeanVsMgfDerivative, None, None, e);
            None
        }
    };

    // single-source references
    if params.lambda2() == 0.0 {
        let (mean_ref, mgf_ref): (f64, fn(f64, f64) -> f64) = match policy {
            Policy::NonPreemptive => (limits::blocking_mean(&params), limits::blocking_mgf),
            Policy::SelfPreemptive => (limits::preemptive_mean(&params), limits::preemptive_mgf),
        };
        if let Some(s) = &summary {
            rec.push(
                CheckKind::SingleSourceLimitMean,
                None,
                None,
                s.moments.mean,
                mean_ref,
                rel_within(LIMIT_REL_TOL),
                "renewal-reward single-source mean".into(),
            );
        }
        for &s in &point.s_values {
            match oracle.mgf(s) {
                Ok(m) => rec.push(
                    CheckKind::SingleSourceLimitMgf,
                    None,
                    Some(s),
                    m,
                    mgf_ref(params.rho1(), s / params.mu()),
                    rel_within(LIMIT_REL_TOL),
                    "renewal-reward single-source MGF".into(),
                ),
                Err(e) => rec.failure(CheckKind::SingleSourceLimitMgf, None, Some(s), e),
            }
        }
    }

    // (4), (5) printed MGF forms against the numeric solution
    for &s in &point.s_values {
        let pt = EvalPoint::from_s(params, s);
        let sol = match oracle.correlations(s) {
            Ok(sol) => sol,
            Err(e) => {
                rec.failure(CheckKind::PrintedTheoremMgf, None, Some(s), e);
                continue;
            }
        };
        let m = sol.age_sum();
        let theorem = mgf_theorem(policy, &pt);
        match &theorem {
            Ok(t) => rec.push(
                CheckKind::PrintedTheoremMgf,
                None,
                Some(s),
                m,
                *t,
                printed(PRINTED_REL_TOL),
                "printed MGF theorem, evaluated verbatim".into(),
            ),
            Err(e) => rec.failure(CheckKind::PrintedTheoremMgf, None, Some(s), e),
        }
        for q in DiscreteState::ALL {
            match appendix_vq0(policy, q.index(), &pt) {
                Ok(v) => rec.push(
                    CheckKind::PrintedAppendixState,
                    Some(q),
                    Some(s),
                    sol.row(q)[0],
                    v,
                    printed(PRINTED_REL_TOL),
                    "printed per-state value, evaluated verbatim".into(),
                ),
                Err(e) => rec.failure(CheckKind::PrintedAppendixState, Some(q), Some(s), e),
            }
        }
        match appendix_sum(policy, &pt) {
            Ok(sum) => {
                rec.push(
                    CheckKind::PrintedAppendixSum,
                    None,
                    Some(s),
                    m,
                    sum,
                    printed(PRINTED_REL_TOL),
                    "sum of printed per-state values vs numeric MGF".into(),
                );
                if let Ok(t) = theorem {
                    rec.push(
                        CheckKind::PrintedAppendixSumVsTheorem,
                        None,
                        Some(s),
                        t,
                        sum,
                        printed(PRINTED_REL_TOL),
                        "print vs print: reference column holds the printed theorem".into(),
                    );
                }
            }
            Err(e) => rec.failure(CheckKind::PrintedAppendixSum, None, Some(s), e),
        }
    }

    // (6) printed second moment
    if let Some(s) = &summary {
        rec.push(
            CheckKind::PrintedSecondMoment,
            None,
            None,
            s.moments.second_moment,
            second_moment_theorem(policy, &params),
            printed(PRINTED_REL_TOL),
            "printed second moment vs differentiated numeric MGF".into(),
        );
    }

    // (7) simulation
    if let Some((budget, seed)) = sim {
        let mut config = SimConfig::new(params, policy, seed, budget.events).with_probes(point.s_values.clone());
        config.batch_count = budget.batch_count;
        match simulate(&config) {
            Ok(result) => {
                if let Some(s) = &summary {
                    let est = result.mean_aoi;
                    rec.push(
                        CheckKind::SimulationMean,
                        None,
                        None,
                        s.moments.mean,
                        est.value,
                        |_, _| if est.covers(s.moments.mean, SIM_STD_ERRORS) { Verdict::Pass } else { Verdict::Fail },
                        format!("seed {seed}, std error {:.3e}", est.std_error),
                    );
                }
                for probe in &result.empirical_mgf {
                    if let Some(why) = &probe.failure {
                        rec.failure(CheckKind::SimulationMgf, None, Some(probe.s), why);
                        continue;
                    }
                    match oracle.mgf(probe.s) {
                        Ok(m) => {
                            let est = probe.as_estimate();
                            rec.push(
                                CheckKind::SimulationMgf,
                                None,
                                Some(probe.s),
                                m,
                                est.value,
                                |_, _| if est.covers(m, SIM_STD_ERRORS) { Verdict::Pass } else { Verdict::Fail },
                                format!("seed {seed}, std error {:.3e}", est.std_error),
                            );
                        }
                        Err(e) => rec.failure(CheckKind::SimulationMgf, None, Some(probe.s), e),
                    }
                }
            }
            Err(e) => rec.failure(CheckKind::SimulationMean, None, None, e),
        }
    }

    rec.records
}

/// Runs every check for each grid point and policy. Simulation seeds are
/// `budget.seed + 2 * point_index + policy_index`.
pub fn run_validation(grid: &[ValidationPoint], sim: Option<SimBudget>) -> Result<ValidationReport> {
    let jobs: Vec<(usize, Policy)> = (0..grid.len())
        .flat_map(|i| Policy::ALL.into_iter().map(move |p| (i, p)))
        .collect();
    let mut records: Vec<CheckRecord> = jobs
        .par_iter()
        .flat_map_iter(|&(i, policy)| {
            let sim = sim.map(|b| {
                let offset = 2 * i as u64 + if policy == Policy::SelfPreemptive { 0 } else { 1 };
                (b, b.seed.wrapping_add(offset))
            });
            validate_point(&grid[i], policy, sim)
        })
        .collect();
    records.sort_by(CheckRecord::canonical_cmp);
    Ok(ValidationReport { records })
}
