//! Classical simulation of quantum stochastic optimization.
//!
//! Quantum mean estimation is modeled by its contract and a query ledger;
//! on top of it sit multilevel variance reduction, accelerated stochastic
//! approximation on a Gaussian-smoothed objective, a stochastic cutting-plane
//! method with a line-search tournament, and two non-convex solvers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acsa;
pub mod baseline;
pub mod cutting_plane;
pub mod error;
pub mod estimate;
pub mod fixtures;
pub mod ledger;
pub mod linalg;
pub mod nonconvex;
pub mod oracle;
pub mod par;
pub mod record;
pub mod rng;
pub mod stats;
pub mod tournament;

pub use error::{Error, Result};
pub use ledger::{charge_cost, CostModel, QueryLedger};
pub use linalg::Vector;
pub use oracle::{GradientOracle, OracleBounds};
pub use record::{run_trial, Algorithm, RunRecord};
pub use rng::Rng;
