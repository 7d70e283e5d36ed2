//! Single-source (`lambda2 = 0`) reference results, derived independently of
//! the SHS machinery from renewal-reward arguments.

use crate::shs_model::SystemParams;

/// Age MGF of the M/M/1/1 blocking queue (non-preemptive, one source):
/// `rho (1 + rho - s̄) / ((1 + rho) (rho - s̄) (1 - s̄)^2)`.
pub fn blocking_mgf(rho: f64, s_bar: f64) -> f64 {
    rho * (1.0 + rho - s_bar) / ((1.0 + rho) * (rho - s_bar) * (1.0 - s_bar).powi(2))
}

/// Mean age of the M/M/1/1 blocking queue: `1/lambda + 2/mu - 1/(lambda + mu)`.
pub fn blocking_mean(params: &SystemParams) -> f64 {
    let (l, mu) = (params.lambda1(), params.mu());
    1.0 / l + 2.0 / mu - 1.0 / (l + mu)
}

/// Age MGF of the single-source preemptive queue. The age is the sum of an
/// Exp(lambda) and an independent Exp(mu) variable.
pub fn preemptive_mgf(rho: f64, s_bar: f64) -> f64 {
    rho / ((rho - s_bar) * (1.0 - s_bar))
}

/// `(1/mu)(1 + 1/rho1)`.
pub fn preemptive_mean(params: &SystemParams) -> f64 {
    (1.0 + 1.0 / params.rho1()) / params.mu()
}
