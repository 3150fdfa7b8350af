//! Minimum probability of lifetime ruin for a retiree who consumes at a
//! fixed or proportional rate, invests in a riskless and a risky asset, and
//! faces one of three borrowing regimes: unrestricted borrowing at the
//! lending rate, no borrowing, or borrowing at a higher rate.
//!
//! The constant-consumption solvers combine a closed-form tail, a Riccati
//! integration over the fully-invested band and, when borrowing is costly, a
//! Legendre-dual solution on the leveraged band. [`simulator`] estimates the
//! same probabilities by Monte Carlo.

// `!(x > y)` also rejects NaN in input validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembler;
pub mod closedform;
pub mod dual;
pub mod error;
pub mod interp;
pub mod model;
pub mod ode;
pub mod riccati;
pub mod roots;
pub mod simulator;

pub use assembler::{compare_regimes, limit_sweep, solve, Evaluation, RegimeSet, RuinSolution};

pub use error::{Result, RuinError};
pub use model::{
    derive_constants, validate, ConsumptionSpec, DerivedConstants, MarketParams, Model, Regime,
};
