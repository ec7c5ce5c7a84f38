//! Exact scalar ring over group coordinates.
//!
//! A term is a rational coefficient times a Laurent monomial in parameter
//! symbols times a coordinate monomial, exponentials `e^{λ x_i}` and at most one
//! `sin`/`cos(μ x_i)` per coordinate. Trig products are linearized eagerly, so
//! the term map is a canonical form and zero testing is complete.
//!
//! Coordinates are zero-based in the API (`Expression::coord(0)` is `x1`) and
//! one-based in text.

mod expression;
mod key;
mod matrix;
mod parse;
mod rational;
mod symbol;


pub use expression::{rat, Expression, LinearForm};
pub use key::{Basis, Key, ParamMonomial, Trig, TrigKind};
pub use matrix::{ExprMatrix, RationalMatrix};
pub use parse::parse_rational;
pub use rational::RationalExpression;
pub use symbol::Symbol;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("unbound coordinate x{0}")]
    UnboundCoordinate(usize),
    #[error("division by a non-unit `{0}`")]
    NonUnitDivisor(String),
    #[error("term `{0}` is not affine in the unknowns")]
    Nonlinear(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("expression `{0}` has no exact rational value at this point")]
    Transcendental(String),
}
