//! Numeric solution of the SHS stationary equations.
//!
//! Unknowns of the correlation systems are indexed `q * DIM + j` (state `q`,
//! component `j`). Only component 0 matters for the age, so each system is
//! solved in two stages: first the closure of unknowns that the component-0
//! entries depend on, then the remaining auxiliary entries. The matrix is block
//! triangular in this split, so the result equals a full solve whenever the full
//! system is regular. When it is not (for instance `lambda2 = 0`, where the
//! waiting-slot component of states 00/01 is never reset) the auxiliary entries
//! are reported as unresolved instead of failing the age computation.

use std::collections::VecDeque;

use crate::error::{AoiError, Result};
use crate::linalg::{DenseSystem, PivotFailure};
use crate::shs_model::{build_chain, DiscreteState, Policy, ShsChain, SystemParams, DIM};

/// Entries of the first-moment solution in `[-NEGATIVE_TOLERANCE, 0)` are clamped to 0.
pub const NEGATIVE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDist {
    pi: Vec<f64>,
}

impl StationaryDist {
    pub fn new(pi: Vec<f64>) -> Self {
        StationaryDist { pi }
    }

    pub fn probs(&self) -> &[f64] {
        &self.pi
    }

    pub fn prob(&self, q: DiscreteState) -> f64 {
        self.pi[q.index()]
    }

    pub fn max_abs_diff(&self, other: &StationaryDist) -> f64 {
        self.pi
            .iter()
            .zip(&other.pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of the global balance equations.
    pub fn balance_residual(&self, chain: &ShsChain) -> f64 {
        chain
            .states()
            .iter()
            .map(|&q| {
                let out = self.pi[q.index()] * chain.exit_rate(q);
                let inflow: f64 = chain.incoming(q).map(|t| chain.rate(t) * self.pi[t.from.index()]).sum();
                (out - inflow).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Stationary correlation vectors, one row of `DIM` components per state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSolution {
    rows: Vec<[f64; DIM]>,
    resolved: Vec<[bool; DIM]>,
    min_pivot_ratio: f64,
}

impl CorrelationSolution {
    /// Row for state `q`; unresolved components are NaN.
    pub fn row(&self, q: DiscreteState) -> [f64; DIM] {
        self.rows[q.index()]
    }

    pub fn rows(&self) -> &[[f64; DIM]] {
        &self.rows
    }

    pub fn value(&self, q: DiscreteState, j: usize) -> Option<f64> {
        self.resolved[q.index()][j].then(|| self.rows[q.index()][j])
    }

    pub fn is_fully_resolved(&self) -> bool {
        self.resolved.iter().flatten().all(|&r| r)
    }

    /// `sum_q v_{q0}`: the mean age for the first-moment system, the MGF for the other.
    pub fn age_sum(&self) -> f64 {
        self.rows.iter().map(|r| r[0]).sum()
    }

    /// Smallest relative pivot met while solving the age closure.
    pub fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }
}

/// An MGF argument checked against the admissible bound `s0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SDomain {
    s: f64,
    mu: f64,
    s0: f64,
}

/// Default admissible bound `mu * min(rho1, 1)`, the smallest positive pole of
/// the closed forms in unnormalized units.
pub fn default_s0(params: &SystemParams) -> f64 {
    params.mu() * params.rho1().min(1.0)
}

impl SDomain {
    pub fn new(s: f64, params: &SystemParams) -> Result<Self> {
        Self::with_bound(s, params.mu(), default_s0(params))
    }

    pub fn with_bound(s: f64, mu: f64, s0: f64) -> Result<Self> {
        if !s.is_finite() || s >= s0 {
            return Err(AoiError::Domain { s, s0 });
        }
        Ok(SDomain { s, mu, s0 })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn s_bar(&self) -> f64 {
        self.s / self.mu
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }
}

fn pivot_error(stage: &str, unknown: usize, failure: PivotFailure) -> AoiError {
    let q = DiscreteState::from_index(unknown / DIM).map_or("?", |q| q.label());
    let detail = format!(
        "{stage}: pivot for state {q} component {} vanished",
        unknown % DIM
    );
    if failure.pivot_ratio == 0.0 {
        AoiError::Singular(detail)
    } else {
        AoiError::Conditioning { detail, pivot_ratio: failure.pivot_ratio }
    }
}

pub fn stationary_distribution(chain: &ShsChain) -> Result<StationaryDist> {
    let n = chain.num_states();
    let mut sys = DenseSystem::zeros(n);
    for &q in chain.states() {
        let row = q.index();
        sys.add(row, row, chain.exit_rate(q));
        for t in chain.incoming(q) {
            sys.add(row, t.from.index(), -chain.rate(t));
        }
    }
    // one balance equation is redundant; replace it by the normalization
    sys.set_row(n - 1, &vec![1.0; n], 1.0);
    let (mut pi, _) = sys
        .solve()
        .map_err(|f| pivot_error("stationary distribution (reducible chain?)", f.column * DIM, f))?;
    for p in pi.iter_mut() {
        if *p < -NEGATIVE_TOLERANCE {
            return Err(AoiError::ModelViolation(format!("negative stationary probability {p}")));
        }
        *p = p.max(0.0);
    }
    Ok(StationaryDist { pi })
}

enum Moment {
    First,
    Mgf(f64),
}

/// Unknowns reachable from the component-0 entries along positive-rate resets.
fn age_closure(chain: &ShsChain) -> Vec<bool> {
    let n = chain.num_states() * DIM;
    let mut in_closure = vec![false; n];
    let mut queue: VecDeque<usize> = chain.states().iter().map(|q| q.index() * DIM).collect();
    for &u in &queue {
        in_closure[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        let q = chain.states()[u / DIM];
        let j = u % DIM;
        for t in chain.incoming(q).filter(|t| chain.rate(t) > 0.0) {
            for k in 0..DIM {
                let dep = t.from.index() * DIM + k;
                if t.reset.a()[k][j] == 1 && !in_closure[dep] {
                    in_closure[dep] = true;
                    queue.push_back(dep);
                }
            }
        }
    }
    in_closure
}

/// Full coefficient matrix (row-major, `n x n`) and right-hand side.
fn assemble(chain: &ShsChain, pi: &StationaryDist, moment: &Moment) -> (Vec<f64>, Vec<f64>) {
    let n = chain.num_states() * DIM;
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for &q in chain.states() {
        let exit = chain.exit_rate(q);
        for j in 0..DIM {
            let row = q.index() * DIM + j;
            a[row * n + row] += match moment {
                Moment::First => exit,
                Moment::Mgf(s) => exit - s,
            };
            if let Moment::First = moment {
                b[row] = pi.prob(q);
            }
            for t in chain.incoming(q) {
                let rate = chain.rate(t);
                if rate == 0.0 {
                    continue;
                }
                for k in 0..DIM {
                    if t.reset.a()[k][j] == 1 {
                        a[row * n + t.from.index() * DIM + k] -= rate;
                    }
                }
                if let Moment::Mgf(_) = moment {
                    if t.reset.hat()[j][j] == 1 {
                        b[row] += rate * pi.prob(t.from);
                    }
                }
            }
        }
    }
    (a, b)
}

fn solve_two_stage(chain: &ShsChain, pi: &StationaryDist, moment: Moment) -> Result<CorrelationSolution> {
    let n = chain.num_states() * DIM;
    let (a, b) = assemble(chain, pi, &moment);
    let closure = age_closure(chain);
    let primary: Vec<usize> = (0..n).filter(|&u| closure[u]).collect();
    let auxiliary: Vec<usize> = (0..n).filter(|&u| !closure[u]).collect();

    let mut values = vec![f64::NAN; n];
    let mut resolved = vec![false; n];

    let solve_block = |block: &[usize], values: &[f64], known: &[bool]| {
        let mut sys = DenseSystem::zeros(block.len());
        for (r, &u) in block.iter().enumerate() {
            let mut rhs = b[u];
            for v in 0..n {
                let coeff = a[u * n + v];
                if coeff == 0.0 {
                    continue;
                }
                if let Some(c) = block.iter().position(|&w| w == v) {
                    sys.add(r, c, coeff);
                } else if known[v] {
                    rhs -= coeff * values[v];
                }
            }
            sys.add_rhs(r, rhs);
        }
        sys.solve()
    };

    let (x, min_pivot_ratio) = solve_block(&primary, &values, &resolved)
        .map_err(|f| pivot_error("age closure", primary[f.column], f))?;
    for (&u, v) in primary.iter().zip(x) {
        values[u] = v;
        resolved[u] = true;
    }
    if !auxiliary.is_empty() {
        if let Ok((x, _)) = solve_block(&auxiliary, &values, &resolved) {
            for (&u, v) in auxiliary.iter().zip(x) {
                values[u] = v;
                resolved[u] = true;
            }
        }
    }

    let rows = values.chunks(DIM).map(|c| [c[0], c[1], c[2]]).collect();
    let resolved = resolved.chunks(DIM).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(CorrelationSolution { rows, resolved, min_pivot_ratio })
}

/// Solves `v_q * sum_{L_q} rate = pi_q * 1 + sum_{L'_q} rate * v_{q_l} * A_l`.
pub fn solve_first_moment(chain: &ShsChain, pi: &StationaryDist) -> Result<CorrelationSolution> {
    let mut sol = solve_two_stage(chain, pi, Moment::First)?;
    for (q, (row, res)) in sol.rows.iter_mut().zip(&sol.resolved).enumerate() {
        for j in 0..DIM {
            if !res[j] {
                continue;
            }
            if row[j] < -NEGATIVE_TOLERANCE {
                return Err(AoiError::ModelViolation(format!(
                    "first-moment correlation v[{}][{j}] = {} is negative",
                    DiscreteState::ALL[q].label(),
                    row[j]
                )));
            }
            row[j] = row[j].max(0.0);
        }
    }
    Ok(sol)
}

/// Solves `v^s_q * sum_{L_q} rate = s v^s_q + sum_{L'_q} rate * (v^s_{q_l} A_l + pi_{q_l} 1 Â_l)`.
pub fn solve_mgf_correlations(chain: &ShsChain, pi: &StationaryDist, s: &SDomain) -> Result<CorrelationSolution> {
    if s.s() >= s.s0() {
        return Err(AoiError::Domain { s: s.s(), s0: s.s0() });
    }
    solve_two_stage(chain, pi, Moment::Mgf(s.s())).map_err(|e| match e {
        AoiError::Conditioning { detail, pivot_ratio } => AoiError::Conditioning {
            detail: format!("{detail} at s = {} (pole nearby?)", s.s()),
            pivot_ratio,
        },
        other => other,
    })
}

/// Mean source-1 age, `sum_q v_{q0}` of the first-moment system.
pub fn average_aoi(chain: &ShsChain) -> Result<f64> {
    let pi = stationary_distribution(chain)?;
    Ok(solve_first_moment(chain, &pi)?.age_sum())
}

/// Source-1 age MGF, `sum_q v^s_{q0}`.
pub fn mgf_at(chain: &ShsChain, s: &SDomain) -> Result<f64> {
    let pi = stationary_distribution(chain)?;
    Ok(solve_mgf_correlations(chain, &pi, s)?.age_sum())
}

/// Source-2 age MGF, obtained by relabeling the sources.
pub fn mgf_source2_at(params: &SystemParams, policy: Policy, s: f64) -> Result<f64> {
    let swapped = params.swapped()?;
    let chain = build_chain(policy, swapped)?;
    mgf_at(&chain, &SDomain::new(s, &swapped)?)
}

/// A chain with its stationary distribution cached, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct MgfOracle {
    chain: ShsChain,
    pi: StationaryDist,
}

impl MgfOracle {
    pub fn new(chain: ShsChain) -> Result<Self> {
        let pi = stationary_distribution(&chain)?;
        Ok(MgfOracle { chain, pi })
    }

    pub fn for_policy(policy: Policy, params: SystemParams) -> Result<Self> {
        Self::new(build_chain(policy, params)?)
    }

    pub fn chain(&self) -> &ShsChain {
        &self.chain
    }

    pub fn stationary(&self) -> &StationaryDist {
        &self.pi
    }

    pub fn s0(&self) -> f64 {
        default_s0(self.chain.params())
    }

    pub fn domain(&self, s: f64) -> Result<SDomain> {
        SDomain::new(s, self.chain.params())
    }

    pub fn first_moment(&self) -> Result<CorrelationSolution> {
        solve_first_moment(&self.chain, &self.pi)
    }

    pub fn average_aoi(&self) -> Result<f64> {
        Ok(self.first_moment()?.age_sum())
    }

    pub fn correlations(&self, s: f64) -> Result<CorrelationSolution> {
        solve_mgf_correlations(&self.chain, &self.pi, &self.domain(s)?)
    }

    pub fn mgf(&self, s: f64) -> Result<f64> {
        Ok(self.correlations(s)?.age_sum())
    }
}
