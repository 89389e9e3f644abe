//! Exact conversions among scalar equations, matrix systems `Y' = AY` and
//! differential modules over `C(z)`, plus gauge transformations.
//!
//! All arithmetic is exact: coefficients are pairs of arbitrary-precision
//! rationals and every rational function is kept reduced with a monic
//! denominator, so equality is structural.

mod matrix;
mod parse;
mod poly;
mod polymat;
mod rational;

use thiserror::Error;

pub use matrix::{
    companion_of_scalar, gauge_transform, matrix_from_module, module_from_matrix,
    scalar_solution_transfer, DifferentialModule, ModuleConvention, NumericMatrix, RationalMatrix,
    ScalarEquation,
};
pub use parse::parse_rational;
pub use poly::{Poly, QComplex};
pub use rational::RationalFunction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("division by the zero rational function")]
    DivisionByZero,
    #[error("matrix is singular over C(z)")]
    Singular,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} values, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("matrix must have at least one row and be square")]
    EmptyMatrix,
    #[error("scalar equation must have order at least 1")]
    ZeroOrder,
}
