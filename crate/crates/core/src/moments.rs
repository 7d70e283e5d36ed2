//! Moments of the age from its MGF: the i-th moment is the i-th derivative at 0.

use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};
use crate::shs_model::{Policy, ShsChain, SystemParams};
use crate::shs_solver::MgfOracle;

/// Default differentiation step as a fraction of the admissible bound `s0`.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-3;

/// Relative variance slack tolerated as rounding noise.
pub const VARIANCE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentOrder {
    First,
    Second,
}

impl MomentOrder {
    pub fn from_index(i: u32) -> Result<Self> {
        match i {
            1 => Ok(MomentOrder::First),
            2 => Ok(MomentOrder::Second),
            other => Err(AoiError::Validation(format!(
                "only moments of order 1 and 2 are supported, got {other}"
            ))),
        }
    }
}

/// A Richardson-extrapolated derivative and its half-step recomputation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub half_step_value: f64,
}

impl DerivativeEstimate {
    pub fn relative_discrepancy(&self) -> f64 {
        let scale = self.value.abs().max(f64::MIN_POSITIVE);
        (self.value - self.half_step_value).abs() / scale
    }
}

fn central_difference<F>(f: &F, order: MomentOrder, h: f64, f0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let plus = f(h)?;
    let minus = f(-h)?;
    Ok(match order {
        MomentOrder::First => (plus - minus) / (2.0 * h),
        MomentOrder::Second => (plus - 2.0 * f0 + minus) / (h * h),
    })
}

fn richardson<F>(f: &F, order: MomentOrder, h: f64, f0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = central_difference(f, order, h, f0)?;
    let fine = central_difference(f, order, h / 2.0, f0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Derivative of `mgf` at 0 by symmetric central differences with one
/// Richardson step (steps `h` and `h/2`), plus the same estimate at `h/2`.
pub fn moment_from_mgf<F>(mgf: F, order: MomentOrder, h: f64) -> Result<DerivativeEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(AoiError::Validation(format!("differentiation step must be > 0, got {h}")));
    }
    let f0 = match order {
        MomentOrder::First => 0.0,
        MomentOrder::Second => mgf(0.0)?,
    };
    Ok(DerivativeEstimate {
        value: richardson(&mgf, order, h, f0)?,
        half_step_value: richardson(&mgf, order, h / 2.0, f0)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentSource {
    Oracle,
    ClosedForm,
    Simulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub std_dev: f64,
    pub source: MomentSource,
}

impl MomentSet {
    pub fn new(mean: f64, second_moment: f64, source: MomentSource) -> Self {
        let variance = second_moment - mean * mean;
        MomentSet {
            mean,
            second_moment,
            variance,
            std_dev: variance.max(0.0).sqrt(),
            source,
        }
    }

    /// Whether the variance is nonnegative up to rounding.
    pub fn is_consistent(&self) -> bool {
        self.variance >= -VARIANCE_SLACK * self.second_moment.abs()
    }
}

/// Oracle moments with the differentiation diagnostics that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub moments: MomentSet,
    /// First derivative of the MGF at 0, to cross-check the linear-solve mean.
    pub mean_by_derivative: DerivativeEstimate,
    pub second_by_derivative: DerivativeEstimate,
    pub step: f64,
}

impl MomentSummary {
    pub fn mean_discrepancy(&self) -> f64 {
        (self.moments.mean - self.mean_by_derivative.value).abs() / self.moments.mean.abs()
    }
}

pub fn summarize_oracle(oracle: &MgfOracle) -> Result<MomentSummary> {
    let step = DEFAULT_STEP_FRACTION * oracle.s0();
    let mean = oracle.average_aoi()?;
    let mgf = |s: f64| oracle.mgf(s);
    let mean_by_derivative = moment_from_mgf(mgf, MomentOrder::First, step)?;
    let second_by_derivative = moment_from_mgf(mgf, MomentOrder::Second, step)?;
    let moments = MomentSet::new(mean, second_by_derivative.value, MomentSource::Oracle);
    if !moments.is_consistent() {
        return Err(AoiError::ModelViolation(format!(
            "negative variance {} from mean {mean} and second moment {}",
            moments.variance, moments.second_moment
        )));
    }
    Ok(MomentSummary { moments, mean_by_derivative, second_by_derivative, step })
}

/// Mean from the first-moment linear solve, second moment by differentiating the MGF.
pub fn summarize(chain: &ShsChain) -> Result<MomentSet> {
    Ok(summarize_oracle(&MgfOracle::new(chain.clone())?)?.moments)
}

pub fn summarize_source2(params: &SystemParams, policy: Policy) -> Result<MomentSet> {
    Ok(summarize_oracle(&MgfOracle::for_policy(policy, params.swapped()?)?)?.moments)
}
