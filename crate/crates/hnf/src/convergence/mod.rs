//! Scalar skeleton of the convergence argument: the majorant recursions, the
//! estimate budget that a choice of ρ must meet, and executable checks of
//! the Cauchy–Nagumo, local equivalence, Borel and Arnold–Moser lemmas on
//! concrete polynomials.

mod budget;
mod lemmas;
mod majorant;

#[cfg(test)]
mod tests;

use thiserror::Error;

use crate::arithmetic::ArithError;

pub use budget::{budget_check, BudgetReport, BudgetSetting, EstimateBudget, InequalityReport};
pub use lemmas::{
    arnold_moser_check, ball_gap, borel_check, cauchy_nagumo_check, hamiltonian_derivation_check,
    local_equiv_check, poisson_bracket, polydisc_gap, ArnoldMoserReport, BorelReport, DiffOperator,
    Poly, PowerSeries, RationalPoly, SampledReport,
};
pub use majorant::{beta_n, gamma_n, majorant_run, MajorantParams, MajorantRun, StartMode, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvergenceError {
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("polynomial has a term of order {found} below the declared order {order}")]
    OrderMismatch { found: u32, order: u32 },
    #[error("Borel argument {x} is outside the radius of convergence {radius}")]
    RadiusExceeded { x: f64, radius: f64 },
    #[error(transparent)]
    Arith(#[from] ArithError),
}
