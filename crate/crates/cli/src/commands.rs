use aoi_core::curves::{default_s_grid, mgf_curve, sweep};
use aoi_core::moments::summarize_oracle;
use aoi_core::shs_solver::default_s0;
use aoi_core::simulator::{self, GENERATOR_NAME};
use aoi_core::validator::{default_grid, SimBudget};
use aoi_core::{run_validation, DiscreteState, MgfOracle, Policy, SimConfig, SystemParams};
use serde::Serialize;

use crate::args::{AnalyzeArgs, Format, MomentsArgs, Rates, ReportFormat, SimulateArgs, SweepArgs, ValidateArgs};
use crate::output::{csv_document, emit, json_document, opt_real, real};
use crate::CliError;

fn params(rates: &Rates) -> Result<SystemParams, CliError> {
    Ok(SystemParams::new(rates.lambda1, rates.lambda2, rates.mu)?)
}

#[derive(Serialize)]
struct AnalyzeConfig {
    policy: &'static str,
    lambda1: f64,
    lambda2: f64,
    mu: f64,
    s_min: f64,
    s_max: f64,
    s_steps: usize,
    s0: f64,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let policy = Policy::from(args.policy);
    let p = params(&args.rates)?;
    let s0 = default_s0(&p);
    let grid = default_s_grid(&p);
    let s_min = args.s_min.unwrap_or(grid[0]);
    let s_max = args.s_max.unwrap_or(grid[grid.len() - 1]);
    if !(s_min.is_finite() && s_max.is_finite()) {
        return Err(CliError::Usage("s-min and s-max must be finite".into()));
    }
    if s_max >= s0 {
        return Err(CliError::Usage(format!(
            "s-max = {s_max} is outside the admissible domain s < s0 = {s0}"
        )));
    }
    let points = mgf_curve(policy, p, s_min, s_max, args.s_steps)?;
    let config = AnalyzeConfig {
        policy: policy.short_name(),
        lambda1: p.lambda1(),
        lambda2: p.lambda2(),
        mu: p.mu(),
        s_min,
        s_max,
        s_steps: args.s_steps,
        s0,
    };
    let text = match args.format {
        Format::Json => json_document("analyze", &config, &points)?,
        Format::Csv => csv_document(
            "analyze",
            &config,
            &["s", "sBar", "mgf_oracle", "mgf_printed", "relError"],
            points
                .iter()
                .map(|c| vec![real(c.s), real(c.s_bar), real(c.mgf_oracle), real(c.mgf_printed), real(c.rel_error)]),
        )?,
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct MomentsConfig {
    policy: &'static str,
    lambda1: f64,
    lambda2: f64,
    mu: f64,
    source: u8,
}

#[derive(Serialize)]
struct MomentsOut {
    mean: f64,
    second_moment: f64,
    variance: f64,
    std_dev: f64,
    /// MGF derivative at 0, for comparison with the linear-solve mean.
    mean_by_derivative: f64,
    step: f64,
    s0: f64,
}

pub fn moments(args: &MomentsArgs) -> Result<(), CliError> {
    let policy = Policy::from(args.policy);
    let p = params(&args.rates)?;
    let solved = if args.source == 1 { p } else { p.swapped()? };
    let oracle = MgfOracle::for_policy(policy, solved)?;
    let summary = summarize_oracle(&oracle)?;
    let m = summary.moments;
    let out = MomentsOut {
        mean: m.mean,
        second_moment: m.second_moment,
        variance: m.variance,
        std_dev: m.std_dev,
        mean_by_derivative: summary.mean_by_derivative.value,
        step: summary.step,
        s0: oracle.s0(),
    };
    let config = MomentsConfig {
        policy: policy.short_name(),
        lambda1: p.lambda1(),
        lambda2: p.lambda2(),
        mu: p.mu(),
        source: args.source,
    };
    let text = match args.format {
        Format::Json => json_document("moments", &config, &out)?,
        Format::Csv => csv_document(
            "moments",
            &config,
            &["quantity", "value"],
            [
                ("mean", out.mean),
                ("second_moment", out.second_moment),
                ("variance", out.variance),
                ("std_dev", out.std_dev),
                ("mean_by_derivative", out.mean_by_derivative),
                ("step", out.step),
                ("s0", out.s0),
            ]
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), real(v)]),
        )?,
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct SweepConfig {
    mu: f64,
    lambda_total: f64,
    steps: usize,
    policies: Vec<&'static str>,
}

pub fn sweep_cmd(args: &SweepArgs) -> Result<(), CliError> {
    if args.steps == 0 {
        return Err(CliError::Usage("steps must be >= 1".into()));
    }
    let policies = args.policy.policies();
    let rows = sweep(args.mu, args.lambda_total, args.steps, &policies)?;
    let config = SweepConfig {
        mu: args.mu,
        lambda_total: args.lambda_total,
        steps: args.steps,
        policies: policies.iter().map(|p| p.short_name()).collect(),
    };
    let text = match args.format {
        Format::Json => json_document("sweep", &config, &rows)?,
        Format::Csv => csv_document(
            "sweep",
            &config,
            &[
                "lambda1",
                "policy",
                "mean_oracle",
                "second_oracle",
                "std_oracle",
                "mean_plus_std",
                "mean_minus_std",
            ],
            rows.iter().map(|r| {
                vec![
                    real(r.lambda1),
                    r.policy.short_name().to_string(),
                    real(r.mean_oracle),
                    real(r.second_oracle),
                    real(r.std_oracle),
                    real(r.mean_plus_std),
                    real(r.mean_minus_std),
                ]
            }),
        )?,
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct SimulateConfig {
    policy: &'static str,
    lambda1: f64,
    lambda2: f64,
    mu: f64,
    seed: u64,
    events: u64,
    batches: usize,
    warmup: f64,
    replications: usize,
    s: Vec<f64>,
    generator: &'static str,
}

#[derive(Serialize)]
struct OracleValues {
    mean_aoi: f64,
    second_moment_aoi: f64,
    mgf: Vec<f64>,
    occupancy: Vec<f64>,
}

#[derive(Serialize)]
struct SimulateOut {
    simulation: simulator::SimResult,
    oracle: OracleValues,
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let policy = Policy::from(args.policy);
    let p = params(&args.rates)?;
    if args.replications == 0 {
        return Err(CliError::Usage("replications must be >= 1".into()));
    }
    let mut cfg = SimConfig::new(p, policy, args.seed, args.events).with_probes(args.s_probes.clone());
    cfg.batch_count = args.batches;
    cfg.warmup_fraction = args.warmup;
    cfg.validate()?;

    let oracle = MgfOracle::for_policy(policy, p)?;
    let summary = summarize_oracle(&oracle)?;
    let oracle_values = OracleValues {
        mean_aoi: summary.moments.mean,
        second_moment_aoi: summary.moments.second_moment,
        mgf: args.s_probes.iter().map(|&s| oracle.mgf(s)).collect::<Result<_, _>>()?,
        occupancy: oracle.stationary().probs().to_vec(),
    };
    let sim = aoi_core::simulate_replications(&cfg, args.replications)?;

    let config = SimulateConfig {
        policy: policy.short_name(),
        lambda1: p.lambda1(),
        lambda2: p.lambda2(),
        mu: p.mu(),
        seed: args.seed,
        events: args.events,
        batches: args.batches,
        warmup: args.warmup,
        replications: args.replications,
        s: args.s_probes.clone(),
        generator: GENERATOR_NAME,
    };
    let text = match args.format {
        Format::Json => json_document(
            "simulate",
            &config,
            &SimulateOut { simulation: sim, oracle: oracle_values },
        )?,
        Format::Csv => {
            let row = |metric: &str, s: Option<f64>, est: f64, se: f64, oracle: f64| {
                vec![
                    metric.to_string(),
                    opt_real(s),
                    real(est),
                    real(se),
                    real(oracle),
                    real((est - oracle).abs() / se),
                ]
            };
            let mut rows = vec![
                row("mean_aoi", None, sim.mean_aoi.value, sim.mean_aoi.std_error, oracle_values.mean_aoi),
                row(
                    "second_moment_aoi",
                    None,
                    sim.second_moment_aoi.value,
                    sim.second_moment_aoi.std_error,
                    oracle_values.second_moment_aoi,
                ),
            ];
            for (probe, &m) in sim.empirical_mgf.iter().zip(&oracle_values.mgf) {
                rows.push(row("mgf", Some(probe.s), probe.estimate, probe.std_error, m));
            }
            for (q, (est, &pi)) in DiscreteState::ALL.iter().zip(sim.occupancy.iter().zip(&oracle_values.occupancy)) {
                rows.push(row(&format!("occupancy_{}", q.label()), None, est.value, est.std_error, pi));
            }
            csv_document(
                "simulate",
                &config,
                &["metric", "s", "estimate", "std_error", "oracle", "z_score"],
                rows,
            )?
        }
    };
    emit(args.output.out.as_deref(), &text)
}

#[derive(Serialize)]
struct ValidateConfig {
    grid: Vec<[f64; 3]>,
    simulation: Option<SimBudget>,
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let grid = default_grid();
    let budget = (args.sim_events > 0).then_some(SimBudget {
        events: args.sim_events,
        seed: args.seed,
        batch_count: args.batches,
    });
    let report = run_validation(&grid, budget)?;
    let config = ValidateConfig {
        grid: grid
            .iter()
            .map(|g| [g.params.lambda1(), g.params.lambda2(), g.params.mu()])
            .collect(),
        simulation: budget,
    };
    let text = match args.format {
        ReportFormat::Table => report.to_string(),
        ReportFormat::Json => json_document("validate", &config, &report.records)?,
        ReportFormat::Csv => csv_document(
            "validate",
            &config,
            &[
                "check",
                "policy",
                "lambda1",
                "lambda2",
                "mu",
                "state",
                "s",
                "oracle_value",
                "compared_value",
                "abs_error",
                "rel_error",
                "verdict",
                "note",
            ],
            report.records.iter().map(|r| {
                vec![
                    r.check.to_string(),
                    r.policy.short_name().to_string(),
                    real(r.lambda1),
                    real(r.lambda2),
                    real(r.mu),
                    r.state.map(|q| q.label().to_string()).unwrap_or_default(),
                    opt_real(r.s),
                    real(r.oracle_value),
                    real(r.compared_value),
                    real(r.abs_error),
                    real(r.rel_error),
                    r.verdict.to_string(),
                    r.note.clone(),
                ]
            }),
        )?,
    };
    emit(args.output.out.as_deref(), &text)
}
