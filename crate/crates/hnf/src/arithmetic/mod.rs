//! Diophantine diagnostics: arithmetic sequences σ(β), Bruno sequences,
//! arithmetic classes, the shrinking parameter sets Z_n, absorption of small
//! denominators by a choice of ρ, and Monte-Carlo density estimates.
//!
//! Everything here is numeric. Inner products `(β, J)` are evaluated in
//! double precision in coordinate order, so two enumerations that visit the
//! same `J` agree bit for bit.

mod absorb;
mod classes;
mod lattice;
mod sequence;


use thiserror::Error;

pub use absorb::{absorb_rho, Absorption, BoundClass};
pub use classes::{
    class_membership, density_estimate, ArithParams, DensityEstimate, ShrinkReport,
};
pub use lattice::{sigma_sequence, EnumerationBudget, LatticeNorm};
pub use sequence::{bruno_report, BrunoReport, BrunoVerdict, SequenceSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("enumeration budget exceeded: d = {dim}, k = {k} (limits d <= {max_dim}, k <= {max_k})")]
    BudgetExceeded {
        dim: usize,
        k: u32,
        max_dim: usize,
        max_k: u32,
    },
    #[error("bound class has k = 0 and cannot be absorbed")]
    NotStrictClass,
    #[error("invalid sequence: {0}")]
    BadSequence(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}
