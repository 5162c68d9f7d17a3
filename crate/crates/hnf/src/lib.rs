//! Exact Hamiltonian normal forms near an elliptic or hyperbolic fixed point.
//!
//! The crate is layered bottom-up: exact coefficient rings ([`scalar`]), a
//! truncated graded Poisson algebra ([`series`]), the normal form engines
//! ([`normalform`]), diophantine diagnostics ([`arithmetic`]), scalar
//! convergence checks ([`convergence`]) and numerical torus verification
//! ([`tori`]).

// NaN must fail the `!(x <= bound)` style checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod scalar;
pub mod sample;
pub mod series;
pub mod normalform;
pub mod arithmetic;
pub mod convergence;
pub mod tori;
pub mod precise;
