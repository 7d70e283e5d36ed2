//! The stochastic hybrid system (SHS) for source 1 of the two-source queue.
//!
//! The discrete state records queue occupancy as `a1a2`, where `a2` is the
//! source of the packet in service and `a1` the source of the waiting packet
//! (`0` meaning empty). The continuous state `x = [x0, x1, x2]` holds the
//! current source-1 age, the age source 1 would have if the packet in service
//! were delivered now, and the same for the waiting packet. A transition `l`
//! resets `x` to `x * A_l`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AoiError, Result};

/// Dimension of the continuous state.
pub const DIM: usize = 3;

/// 3x3 binary matrix, row-major. Entry `[k][j]` is 1 when `x'_j = x_k`.
pub type BinaryMatrix = [[u8; DIM]; DIM];

/// Arrival rates of the two sources and the service rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    lambda1: f64,
    lambda2: f64,
    mu: f64,
}

impl SystemParams {
    pub fn new(lambda1: f64, lambda2: f64, mu: f64) -> Result<Self> {
        let params = SystemParams { lambda1, lambda2, mu };
        params.validate()?;
        Ok(params)
    }

    /// Parameters from the loads `rho1`, `rho2` and service rate `mu`.
    pub fn from_loads(rho1: f64, rho2: f64, mu: f64) -> Result<Self> {
        Self::new(rho1 * mu, rho2 * mu, mu)
    }

    pub fn validate(&self) -> Result<()> {
        let SystemParams { lambda1, lambda2, mu } = *self;
        if !(lambda1.is_finite() && lambda1 > 0.0) {
            return Err(AoiError::InvalidParams(format!(
                "lambda1 must be finite and > 0 (source-1 age is unbounded otherwise), got {lambda1}"
            )));
        }
        if !(lambda2.is_finite() && lambda2 >= 0.0) {
            return Err(AoiError::InvalidParams(format!(
                "lambda2 must be finite and >= 0, got {lambda2}"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(AoiError::InvalidParams(format!(
                "mu must be finite and > 0, got {mu}"
            )));
        }
        Ok(())
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda1 + self.lambda2
    }

    pub fn rho1(&self) -> f64 {
        self.lambda1 / self.mu
    }

    pub fn rho2(&self) -> f64 {
        self.lambda2 / self.mu
    }

    pub fn rho(&self) -> f64 {
        self.rho1() + self.rho2()
    }

    /// The same system seen from source 2. Fails when `lambda2 = 0`.
    pub fn swapped(&self) -> Result<Self> {
        Self::new(self.lambda2, self.lambda1, self.mu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    /// A new arrival replaces an in-service packet of the same source.
    SelfPreemptive,
    /// A new arrival finding a same-source packet in service is dropped.
    NonPreemptive,
}

impl Policy {
    pub const ALL: [Policy; 2] = [Policy::SelfPreemptive, Policy::NonPreemptive];

    pub fn short_name(&self) -> &'static str {
        match self {
            Policy::SelfPreemptive => "self",
            Policy::NonPreemptive => "nonpre",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Policy {
    type Err = AoiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "self" | "self-preemptive" | "selfpreemptive" => Ok(Policy::SelfPreemptive),
            "nonpre" | "non-preemptive" | "nonpreemptive" => Ok(Policy::NonPreemptive),
            other => Err(AoiError::Validation(format!(
                "unknown policy '{other}' (expected 'self' or 'nonpre')"
            ))),
        }
    }
}

/// Queue occupancy. The index order is the order of the stationary vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiscreteState {
    /// Empty system.
    S00,
    /// Source-1 packet in service, nothing waiting.
    S01,
    /// Source-2 packet in service, nothing waiting.
    S02,
    /// Source-1 packet in service, source-2 packet waiting.
    S21,
    /// Source-2 packet in service, source-1 packet waiting.
    S12,
}

impl DiscreteState {
    pub const ALL: [DiscreteState; 5] = [
        DiscreteState::S00,
        DiscreteState::S01,
        DiscreteState::S02,
        DiscreteState::S21,
        DiscreteState::S12,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            DiscreteState::S00 => "00",
            DiscreteState::S01 => "01",
            DiscreteState::S02 => "02",
            DiscreteState::S21 => "21",
            DiscreteState::S12 => "12",
        }
    }

    /// State from the waiting and in-service sources (`0` = empty, else 1 or 2).
    pub fn from_occupancy(waiting: u8, in_service: u8) -> Option<Self> {
        match (waiting, in_service) {
            (0, 0) => Some(DiscreteState::S00),
            (0, 1) => Some(DiscreteState::S01),
            (0, 2) => Some(DiscreteState::S02),
            (2, 1) => Some(DiscreteState::S21),
            (1, 2) => Some(DiscreteState::S12),
            _ => None,
        }
    }
}

impl fmt::Display for DiscreteState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateKind {
    Lambda1,
    Lambda2,
    Mu,
}

/// Reset matrix `A` together with the derived diagonal `Â`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResetMap {
    a: BinaryMatrix,
    hat: BinaryMatrix,
}

impl ResetMap {
    /// Checks that `a` is binary with at most one 1 per column.
    pub fn new(a: BinaryMatrix) -> Result<Self> {
        let hat = derive_hat_matrix(&a)?;
        for j in 0..DIM {
            let ones = (0..DIM).filter(|&k| a[k][j] == 1).count();
            if ones > 1 {
                return Err(AoiError::Validation(format!(
                    "column {j} of reset map has {ones} nonzero entries"
                )));
            }
        }
        Ok(ResetMap { a, hat })
    }

    /// Reset map copying old components: `x'_j = x_{sources[j]}`, or 0 for `None`.
    pub fn from_sources(sources: [Option<usize>; DIM]) -> Result<Self> {
        let mut a = [[0u8; DIM]; DIM];
        for (j, src) in sources.iter().enumerate() {
            if let Some(k) = *src {
                if k >= DIM {
                    return Err(AoiError::Validation(format!("component index {k} out of range")));
                }
                a[k][j] = 1;
            }
        }
        Self::new(a)
    }

    pub fn a(&self) -> &BinaryMatrix {
        &self.a
    }

    pub fn hat(&self) -> &BinaryMatrix {
        &self.hat
    }

    /// `x * A` for a row vector `x`.
    pub fn apply(&self, x: &[f64; DIM]) -> [f64; DIM] {
        let mut out = [0.0; DIM];
        for (j, o) in out.iter_mut().enumerate() {
            for (k, xk) in x.iter().enumerate() {
                if self.a[k][j] == 1 {
                    *o += xk;
                }
            }
        }
        out
    }
}

/// `Â(j, j) = 1` iff column `j` of `a` is all zero; off-diagonal entries are 0.
pub fn derive_hat_matrix(a: &BinaryMatrix) -> Result<BinaryMatrix> {
    if let Some(bad) = a.iter().flatten().find(|&&v| v > 1) {
        return Err(AoiError::Validation(format!(
            "reset map must be binary, found entry {bad}"
        )));
    }
    let mut hat = [[0u8; DIM]; DIM];
    for j in 0..DIM {
        if (0..DIM).all(|k| a[k][j] == 0) {
            hat[j][j] = 1;
        }
    }
    Ok(hat)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// Row number in the transition table, 1..=11.
    pub id: u8,
    pub from: DiscreteState,
    pub to: DiscreteState,
    pub rate: RateKind,
    pub reset: ResetMap,
}

pub fn rate_value(t: &Transition, params: &SystemParams) -> f64 {
    match t.rate {
        RateKind::Lambda1 => params.lambda1(),
        RateKind::Lambda2 => params.lambda2(),
        RateKind::Mu => params.mu(),
    }
}

/// Discrete chain plus reset maps for one policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ShsChain {
    params: SystemParams,
    policy: Policy,
    states: Vec<DiscreteState>,
    transitions: Vec<Transition>,
}

impl ShsChain {
    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn states(&self) -> &[DiscreteState] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: u8) -> Option<&Transition> {
        self.transitions.iter().find(|t| t.id == id)
    }

    pub fn rate(&self, t: &Transition) -> f64 {
        rate_value(t, &self.params)
    }

    /// Outgoing transitions `L_q`.
    pub fn outgoing(&self, q: DiscreteState) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.from == q)
    }

    /// Incoming transitions `L'_q`.
    pub fn incoming(&self, q: DiscreteState) -> impl Iterator<Item = &Transition> {
        self.transitions.iter().filter(move |t| t.to == q)
    }

    /// Total outflow rate of state `q`, self-transitions included.
    pub fn exit_rate(&self, q: DiscreteState) -> f64 {
        self.outgoing(q).map(|t| self.rate(t)).sum()
    }
}

fn transition(id: u8, from: DiscreteState, to: DiscreteState, rate: RateKind, a: BinaryMatrix) -> Transition {
    Transition {
        id,
        from,
        to,
        rate,
        reset: ResetMap::new(a).expect("transition tables hold valid reset maps"),
    }
}

pub fn build_chain(policy: Policy, params: SystemParams) -> Result<ShsChain> {
    use DiscreteState::*;
    use RateKind::*;
    params.validate()?;

    let row3 = match policy {
        // in-service source-1 packet replaced: [x0, 0, x2]
        Policy::SelfPreemptive => [[1, 0, 0], [0, 0, 0], [0, 0, 1]],
        // arrival dropped: [x0, x1, x2]
        Policy::NonPreemptive => [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    };
    let row6 = match policy {
        // [x0, 0, 0]
        Policy::SelfPreemptive => [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
        // [x0, x1, x1]
        Policy::NonPreemptive => [[1, 0, 0], [0, 1, 1], [0, 0, 0]],
    };

    let transitions = vec![
        transition(1, S00, S01, Lambda1, [[1, 0, 0], [0, 0, 0], [0, 0, 1]]),
        transition(2, S00, S02, Lambda2, [[1, 1, 0], [0, 0, 0], [0, 0, 1]]),
        transition(3, S01, S01, Lambda1, row3),
        transition(4, S01, S21, Lambda2, [[1, 0, 0], [0, 1, 1], [0, 0, 0]]),
        transition(5, S02, S12, Lambda1, [[1, 1, 0], [0, 0, 0], [0, 0, 0]]),
        transition(6, S21, S21, Lambda1, row6),
        transition(7, S12, S12, Lambda1, [[1, 1, 0], [0, 0, 0], [0, 0, 0]]),
        transition(8, S01, S00, Mu, [[0, 0, 0], [1, 1, 0], [0, 0, 1]]),
        transition(9, S02, S00, Mu, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
        transition(10, S21, S02, Mu, [[0, 0, 0], [1, 1, 0], [0, 0, 1]]),
        transition(11, S12, S01, Mu, [[1, 0, 0], [0, 0, 0], [0, 1, 1]]),
    ];

    Ok(ShsChain {
        params,
        policy,
        states: DiscreteState::ALL.to_vec(),
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SystemParams {
        SystemParams::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn params_reject_bad_rates() {
        assert!(SystemParams::new(0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, -0.1, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0).is_err());
        assert!(SystemParams::new(f64::NAN, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0).is_ok());
    }

    #[test]
    fn derived_loads() {
        let p = SystemParams::new(2.5, 1.5, 2.0).unwrap();
        assert_eq!(p.rho1(), 1.25);
        assert_eq!(p.rho2(), 0.75);
        assert_eq!(p.rho(), p.rho1() + p.rho2());
        assert_eq!(p.lambda(), 4.0);
    }

    #[test]
    fn self_preemptive_row4() {
        let chain = build_chain(Policy::SelfPreemptive, unit()).unwrap();
        let t = chain.transition(4).unwrap();
        assert_eq!((t.from, t.to, t.rate), (DiscreteState::S01, DiscreteState::S21, RateKind::Lambda2));
        assert_eq!(t.reset.apply(&[10.0, 20.0, 30.0]), [10.0, 20.0, 20.0]);
    }

    #[test]
    fn row3_differs_by_policy() {
        let x = [10.0, 20.0, 30.0];
        let sp = build_chain(Policy::SelfPreemptive, unit()).unwrap();
        let np = build_chain(Policy::NonPreemptive, unit()).unwrap();
        let t3s = sp.transition(3).unwrap();
        let t3n = np.transition(3).unwrap();
        assert_eq!((t3s.from, t3s.to), (DiscreteState::S01, DiscreteState::S01));
        assert_eq!(t3s.reset.apply(&x), [10.0, 0.0, 30.0]);
        assert_eq!(t3n.reset.apply(&x), [10.0, 20.0, 30.0]);
        assert_eq!(np.transition(6).unwrap().reset.apply(&x), [10.0, 20.0, 20.0]);
        assert_eq!(sp.transition(6).unwrap().reset.apply(&x), [10.0, 0.0, 0.0]);
    }

    #[test]
    fn policies_differ_only_in_rows_3_and_6() {
        let sp = build_chain(Policy::SelfPreemptive, unit()).unwrap();
        let np = build_chain(Policy::NonPreemptive, unit()).unwrap();
        for (a, b) in sp.transitions().iter().zip(np.transitions()) {
            assert_eq!(a.id, b.id);
            if a.id == 3 || a.id == 6 {
                assert_ne!(a, b);
            } else {
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn hat_matrix_examples() {
        let a1 = [[1, 0, 0], [0, 0, 0], [0, 0, 1]];
        assert_eq!(derive_hat_matrix(&a1).unwrap(), [[0, 0, 0], [0, 1, 0], [0, 0, 0]]);
        let a2 = [[1, 1, 0], [0, 0, 0], [0, 0, 1]];
        assert_eq!(derive_hat_matrix(&a2).unwrap(), [[0; 3]; 3]);
        let id = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        assert_eq!(derive_hat_matrix(&id).unwrap(), [[0; 3]; 3]);
        assert!(derive_hat_matrix(&[[2, 0, 0], [0, 0, 0], [0, 0, 0]]).is_err());
    }

    #[test]
    fn hat_matrices_match_table() {
        // transitions with a nonzero hat matrix and its diagonal
        let expected: [(u8, [u8; 3]); 5] = [
            (1, [0, 1, 0]),
            (3, [0, 1, 0]),
            (5, [0, 0, 1]),
            (6, [0, 1, 1]),
            (7, [0, 0, 1]),
        ];
        let chain = build_chain(Policy::SelfPreemptive, unit()).unwrap();
        for t in chain.transitions() {
            let diag = expected
                .iter()
                .find(|(id, _)| *id == t.id)
                .map(|(_, d)| *d)
                .unwrap_or([0, 0, 0]);
            for j in 0..DIM {
                assert_eq!(t.reset.hat()[j][j], diag[j], "transition {}", t.id);
            }
        }
    }

    #[test]
    fn column_with_two_ones_rejected() {
        assert!(ResetMap::new([[1, 0, 0], [1, 0, 0], [0, 0, 0]]).is_err());
        assert!(ResetMap::from_sources([Some(0), None, Some(3)]).is_err());
    }

    #[test]
    fn reset_plus_hat_preserves_ones() {
        for policy in Policy::ALL {
            let chain = build_chain(policy, unit()).unwrap();
            for t in chain.transitions() {
                for j in 0..DIM {
                    let col: u8 = (0..DIM).map(|k| t.reset.a()[k][j] + t.reset.hat()[k][j]).sum();
                    assert_eq!(col, 1, "transition {} column {j}", t.id);
                }
            }
        }
    }

    #[test]
    fn every_transition_in_one_incoming_and_one_outgoing_set() {
        let chain = build_chain(Policy::NonPreemptive, unit()).unwrap();
        for t in chain.transitions() {
            let out = chain.states().iter().filter(|&&q| chain.outgoing(q).any(|u| u.id == t.id)).count();
            let inc = chain.states().iter().filter(|&&q| chain.incoming(q).any(|u| u.id == t.id)).count();
            assert_eq!((out, inc), (1, 1));
        }
        assert_eq!(chain.transitions().len(), 11);
    }

    #[test]
    fn rate_values() {
        let p = SystemParams::new(2.5, 0.0, 1.0).unwrap();
        let chain = build_chain(Policy::SelfPreemptive, p).unwrap();
        assert_eq!(chain.rate(chain.transition(8).unwrap()), 1.0);
        assert_eq!(chain.rate(chain.transition(1).unwrap()), 2.5);
        assert_eq!(chain.rate(chain.transition(2).unwrap()), 0.0);
    }

    #[test]
    fn positive_rate_chain_is_irreducible() {
        let chain = build_chain(Policy::SelfPreemptive, SystemParams::new(0.3, 0.7, 1.1).unwrap()).unwrap();
        let n = chain.num_states();
        for start in chain.states() {
            let mut seen = vec![false; n];
            let mut stack = vec![*start];
            seen[start.index()] = true;
            while let Some(q) = stack.pop() {
                for t in chain.outgoing(q).filter(|t| chain.rate(t) > 0.0) {
                    if !seen[t.to.index()] {
                        seen[t.to.index()] = true;
                        stack.push(t.to);
                    }
                }
            }
            assert!(seen.iter().all(|&s| s), "not all states reachable from {start}");
        }
    }

    #[test]
    fn occupancy_labels() {
        assert_eq!(DiscreteState::from_occupancy(1, 2), Some(DiscreteState::S12));
        assert_eq!(DiscreteState::from_occupancy(1, 1), None);
        for (i, q) in DiscreteState::ALL.iter().enumerate() {
            assert_eq!(q.index(), i);
            assert_eq!(DiscreteState::from_index(i), Some(*q));
        }
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("self".parse::<Policy>().unwrap(), Policy::SelfPreemptive);
        assert_eq!("NonPre".parse::<Policy>().unwrap(), Policy::NonPreemptive);
        assert!("lcfs".parse::<Policy>().is_err());
    }
}
