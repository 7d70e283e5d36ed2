//! Event-driven Monte Carlo of the physical two-source queue.
//!
//! Events are drawn as a race of exponentials: the next event time is
//! exponential with the total rate `lambda1 + lambda2 (+ mu when busy)` and the
//! event type is picked in proportion to the individual rates. Service restarts
//! after preemption need no bookkeeping since the service time is memoryless.
//!
//! The source-1 age is piecewise linear with slope 1, so all time averages
//! (mean, second moment, `E[e^{s age}]`) are integrated exactly per segment.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AoiError, Result};
use crate::shs_model::{DiscreteState, Policy, SystemParams};
use crate::shs_solver::default_s0;

pub const GENERATOR_NAME: &str =
    "xoshiro256++ (state from SplitMix64(seed); replication r advanced by r jumps of 2^128)";

pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;
pub const DEFAULT_BATCH_COUNT: usize = 20;

/// Exponent beyond which `e^{s age}` is treated as overflow.
const MAX_EXPONENT: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: SystemParams,
    pub policy: Policy,
    pub seed: u64,
    /// Total number of events, warmup included.
    pub horizon_events: u64,
    pub warmup_fraction: f64,
    pub batch_count: usize,
    /// MGF arguments at which the empirical MGF is estimated.
    pub s_probes: Vec<f64>,
    /// Source-1 age at time 0; `None` means `1/lambda1 + 1/mu`.
    pub initial_age: Option<f64>,
}

impl SimConfig {
    pub fn new(params: SystemParams, policy: Policy, seed: u64, horizon_events: u64) -> Self {
        SimConfig {
            params,
            policy,
            seed,
            horizon_events,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            batch_count: DEFAULT_BATCH_COUNT,
            s_probes: Vec::new(),
            initial_age: None,
        }
    }

    pub fn with_probes(mut self, s_probes: Vec<f64>) -> Self {
        self.s_probes = s_probes;
        self
    }

    pub fn initial_age(&self) -> f64 {
        self.initial_age
            .unwrap_or(1.0 / self.params.lambda1() + 1.0 / self.params.mu())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.batch_count < 2 {
            return Err(AoiError::Validation(format!(
                "batch count must be >= 2, got {}",
                self.batch_count
            )));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(AoiError::Validation(format!(
                "warmup fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        if self.horizon_events < 10 * self.batch_count as u64 {
            return Err(AoiError::Validation(format!(
                "horizon of {} events is shorter than 10 x {} batches",
                self.horizon_events, self.batch_count
            )));
        }
        if self.measured_events() < self.batch_count as u64 {
            return Err(AoiError::Validation("warmup leaves fewer events than batches".into()));
        }
        if let Some(age) = self.initial_age {
            if !(age.is_finite() && age >= 0.0) {
                return Err(AoiError::Validation(format!("initial age must be >= 0, got {age}")));
            }
        }
        let s0 = default_s0(&self.params);
        if let Some(&s) = self.s_probes.iter().find(|&&s| !s.is_finite() || s >= s0) {
            return Err(AoiError::Domain { s, s0 });
        }
        Ok(())
    }

    fn warmup_events(&self) -> u64 {
        (self.horizon_events as f64 * self.warmup_fraction).floor() as u64
    }

    fn measured_events(&self) -> u64 {
        self.horizon_events - self.warmup_events()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// `|value - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.std_error
    }

    pub fn covers(&self, reference: f64, n_std_errors: f64) -> bool {
        (self.value - reference).abs() <= n_std_errors * self.std_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MgfProbe {
    pub s: f64,
    pub estimate: f64,
    pub std_error: f64,
    /// Set when `e^{s age}` overflowed; the estimate is then meaningless.
    pub failure: Option<String>,
}

impl MgfProbe {
    pub fn as_estimate(&self) -> Estimate {
        Estimate { value: self.estimate, std_error: self.std_error }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub duration: f64,
    pub mean_aoi: f64,
    pub second_moment: f64,
    pub mgf: Vec<f64>,
    /// Fraction of the batch spent in each discrete state.
    pub occupancy: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub config: SimConfig,
    pub generator: &'static str,
    pub replications: usize,
    pub mean_aoi: Estimate,
    pub second_moment_aoi: Estimate,
    pub empirical_mgf: Vec<MgfProbe>,
    /// Long-run fraction of time per discrete state, stationary-vector order.
    pub occupancy: Vec<Estimate>,
    pub batches: Vec<BatchSummary>,
    pub total_sim_time: f64,
    pub measured_time: f64,
    pub source1_deliveries: u64,
}

impl SimResult {
    pub fn std_dev_aoi(&self) -> f64 {
        (self.second_moment_aoi.value - self.mean_aoi.value.powi(2)).max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Packet {
    source: u8,
    generated: f64,
}

/// Running integrals over one batch.
#[derive(Debug, Clone)]
struct BatchAccum {
    duration: f64,
    age: f64,
    age_sq: f64,
    mgf: Vec<f64>,
    overflow: Vec<bool>,
    occupancy: [f64; 5],
}

impl BatchAccum {
    fn new(probes: usize) -> Self {
        BatchAccum {
            duration: 0.0,
            age: 0.0,
            age_sq: 0.0,
            mgf: vec![0.0; probes],
            overflow: vec![false; probes],
            occupancy: [0.0; 5],
        }
    }

    fn summary(&self) -> BatchSummary {
        let d = self.duration;
        BatchSummary {
            duration: d,
            mean_aoi: self.age / d,
            second_moment: self.age_sq / d,
            mgf: self.mgf.iter().map(|m| m / d).collect(),
            occupancy: self.occupancy.map(|o| o / d),
        }
    }
}

/// One point of the age sample path, recorded right after an event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathPoint {
    pub time: f64,
    pub age: f64,
    pub state: DiscreteState,
    pub source1_delivery: bool,
}

struct Queue<'a> {
    config: &'a SimConfig,
    rng: Xoshiro256PlusPlus,
    time: f64,
    server: Option<Packet>,
    waiting: Option<Packet>,
    /// Generation time of the last delivered source-1 packet; age = time - this.
    last_generated: f64,
    /// Start of the age segment not yet integrated.
    pending_from: f64,
    source1_deliveries: u64,
}

enum Event {
    Arrival(u8),
    Completion,
}

fn stream_rng(seed: u64, replication: usize) -> Xoshiro256PlusPlus {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..replication {
        rng.jump();
    }
    rng
}

impl<'a> Queue<'a> {
    fn new(config: &'a SimConfig, replication: usize) -> Self {
        Queue {
            config,
            rng: stream_rng(config.seed, replication),
            time: 0.0,
            server: None,
            waiting: None,
            last_generated: -config.initial_age(),
            pending_from: 0.0,
            source1_deliveries: 0,
        }
    }

    fn state(&self) -> DiscreteState {
        let waiting = self.waiting.map_or(0, |p| p.source);
        let serving = self.server.map_or(0, |p| p.source);
        DiscreteState::from_occupancy(waiting, serving)
            .expect("queue holds at most one packet per source")
    }

    fn age(&self) -> f64 {
        self.time - self.last_generated
    }

    /// Integrates the age over `[pending_from, time]` into `acc`.
    fn flush(&mut self, acc: Option<&mut BatchAccum>) {
        if let Some(acc) = acc {
            let tau = self.time - self.pending_from;
            let a0 = self.pending_from - self.last_generated;
            let a1 = self.time - self.last_generated;
            acc.age += 0.5 * (a0 + a1) * tau;
            acc.age_sq += tau * (a0 * a0 + a0 * a1 + a1 * a1) / 3.0;
            for (i, &s) in self.config.s_probes.iter().enumerate() {
                if s * a1 > MAX_EXPONENT {
                    acc.overflow[i] = true;
                    continue;
                }
                acc.mgf[i] += if s == 0.0 {
                    tau
                } else {
                    (s * a0).exp() * (s * tau).exp_m1() / s
                };
            }
        }
        self.pending_from = self.time;
    }

    fn exponential(&mut self, rate: f64) -> f64 {
        let u: f64 = self.rng.gen();
        -(1.0 - u).ln() / rate
    }

    /// Advances by one event. Returns whether a source-1 packet was delivered.
    fn step(&mut self, mut acc: Option<&mut BatchAccum>) -> bool {
        let (l1, l2, mu) = (self.config.params.lambda1(), self.config.params.lambda2(), self.config.params.mu());
        let service = if self.server.is_some() { mu } else { 0.0 };
        let total = l1 + l2 + service;
        let dt = self.exponential(total);
        if let Some(acc) = acc.as_deref_mut() {
            acc.occupancy[self.state().index()] += dt;
            acc.duration += dt;
        }
        self.time += dt;

        let pick = self.rng.gen::<f64>() * total;
        let event = if pick < l1 {
            Event::Arrival(1)
        } else if pick < l1 + l2 {
            Event::Arrival(2)
        } else {
            Event::Completion
        };

        match event {
            Event::Arrival(source) => {
                let fresh = Packet { source, generated: self.time };
                match self.server {
                    None => self.server = Some(fresh),
                    Some(current) if current.source == source => {
                        if self.config.policy == Policy::SelfPreemptive {
                            self.server = Some(fresh);
                        }
                    }
                    // the waiting slot can only hold this source, so this also
                    // replaces an older same-source packet
                    Some(_) => self.waiting = Some(fresh),
                }
                false
            }
            Event::Completion => {
                let delivered = self.server.take().expect("completion only fires when busy");
                self.server = self.waiting.take();
                if delivered.source == 1 {
                    self.flush(acc);
                    self.last_generated = delivered.generated;
                    self.source1_deliveries += 1;
                    true
                } else {
                    false
                }
            }
        }
    }
}

/// Runs replication `replication` of `config` and returns its raw batches.
fn run_stream(config: &SimConfig, replication: usize) -> (Vec<BatchAccum>, f64, u64) {
    let mut queue = Queue::new(config, replication);
    for _ in 0..config.warmup_events() {
        queue.step(None);
    }
    queue.flush(None);

    let measured = config.measured_events();
    let per_batch = measured / config.batch_count as u64;
    let mut batches = Vec::with_capacity(config.batch_count);
    for b in 0..config.batch_count {
        let events = if b + 1 == config.batch_count {
            measured - per_batch * (config.batch_count as u64 - 1)
        } else {
            per_batch
        };
        let mut acc = BatchAccum::new(config.s_probes.len());
        for _ in 0..events {
            queue.step(Some(&mut acc));
        }
        queue.flush(Some(&mut acc));
        batches.push(acc);
    }
    (batches, queue.time, queue.source1_deliveries)
}

fn batch_estimate(batches: &[BatchAccum], integral: impl Fn(&BatchAccum) -> f64) -> Estimate {
    let total_time: f64 = batches.iter().map(|b| b.duration).sum();
    let value = batches.iter().map(&integral).sum::<f64>() / total_time;
    let means: Vec<f64> = batches.iter().map(|b| integral(b) / b.duration).collect();
    let n = means.len() as f64;
    let avg = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|m| (m - avg).powi(2)).sum::<f64>() / (n - 1.0);
    Estimate { value, std_error: (var / n).sqrt() }
}

fn assemble(config: &SimConfig, runs: Vec<(Vec<BatchAccum>, f64, u64)>) -> SimResult {
    let replications = runs.len();
    let total_sim_time = runs.iter().map(|r| r.1).sum();
    let source1_deliveries = runs.iter().map(|r| r.2).sum();
    let batches: Vec<BatchAccum> = runs.into_iter().flat_map(|r| r.0).collect();

    let empirical_mgf = config
        .s_probes
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let est = batch_estimate(&batches, |b| b.mgf[i]);
            let failure = batches
                .iter()
                .any(|b| b.overflow[i])
                .then(|| format!("e^(s*age) overflowed at s = {s} (exponent above {MAX_EXPONENT})"));
            MgfProbe { s, estimate: est.value, std_error: est.std_error, failure }
        })
        .collect();

    SimResult {
        config: config.clone(),
        generator: GENERATOR_NAME,
        replications,
        mean_aoi: batch_estimate(&batches, |b| b.age),
        second_moment_aoi: batch_estimate(&batches, |b| b.age_sq),
        empirical_mgf,
        occupancy: (0..5).map(|q| batch_estimate(&batches, |b| b.occupancy[q])).collect(),
        measured_time: batches.iter().map(|b| b.duration).sum(),
        batches: batches.iter().map(BatchAccum::summary).collect(),
        total_sim_time,
        source1_deliveries,
    }
}

pub fn simulate(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    Ok(assemble(config, vec![run_stream(config, 0)]))
}

/// Independent replications; replication `r` uses the generator stream
/// advanced by `r` jumps. Batches of all replications are pooled in
/// replication order, whatever order the replications finish in.
pub fn simulate_replications(config: &SimConfig, replications: usize) -> Result<SimResult> {
    config.validate()?;
    if replications == 0 {
        return Err(AoiError::Validation("replication count must be >= 1".into()));
    }
    let runs = (0..replications)
        .into_par_iter()
        .map(|r| run_stream(config, r))
        .collect();
    Ok(assemble(config, runs))
}

/// The first `events` points of the age sample path, warmup not skipped.
pub fn sample_path(config: &SimConfig, events: usize) -> Result<Vec<PathPoint>> {
    config.validate()?;
    let mut queue = Queue::new(config, 0);
    let mut path = Vec::with_capacity(events);
    for _ in 0..events {
        let delivered = queue.step(None);
        path.push(PathPoint {
            time: queue.time,
            age: queue.age(),
            state: queue.state(),
            source1_delivery: delivered,
        });
    }
    Ok(path)
}
