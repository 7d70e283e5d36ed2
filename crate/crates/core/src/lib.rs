//! Age of information (AoI) of source 1 in a two-source status-update queue
//! with source-aware packet management.
//!
//! The crate offers three independent views of the same quantity:
//!
//! * [`shs_solver`]: the stochastic hybrid system model of [`shs_model`]
//!   solved numerically, giving the exact mean and MGF of the age;
//! * [`closed_form`]: printed closed-form expressions evaluated verbatim;
//! * [`simulator`]: a discrete-event simulation of the physical queue.
//!
//! [`validator`] cross-checks them and records every disagreement.

pub mod closed_form;
pub mod curves;
pub mod error;
pub mod limits;
mod linalg;
pub mod moments;
pub mod shs_model;
pub mod shs_solver;
pub mod simulator;
pub mod validator;

pub use error::{AoiError, ErrorClass, Result};
pub use moments::{MomentSet, MomentSource};
pub use shs_model::{build_chain, DiscreteState, Policy, ShsChain, SystemParams};
pub use shs_solver::{average_aoi, mgf_at, mgf_source2_at, MgfOracle, SDomain, StationaryDist};
pub use simulator::{simulate, simulate_replications, SimConfig, SimResult};
pub use validator::{run_validation, ValidationReport, Verdict};

/// Version of this crate, echoed into every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
