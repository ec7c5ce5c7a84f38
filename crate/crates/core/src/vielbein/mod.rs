//! Left-invariant frames from the product-of-exponentials parameterization
//! `g = e^{x_1 X_1} ⋯ e^{x_m X_m}`.

mod exp;

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::LieAlgebra;
use crate::expr::{ExprError, ExprMatrix, Expression, Symbol};

pub use exp::{characteristic_polynomial, eigenvalues, matrix_exponential, nilpotent_exponential};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VielbeinError {
    #[error("unsupported spectrum: characteristic factor `{factor}` has roots outside ℚ ∪ (ℚ + iℚ)")]
    UnsupportedSpectrum { factor: String },
    #[error("adjoint matrix of x{index} is not nilpotent and depends on unbound parameters")]
    SymbolicSpectrum { index: usize },
    #[error("recovered C_{{{i}{j}}}^{k} = `{value}` depends on the coordinates")]
    NonConstant { i: usize, j: usize, k: usize, value: String },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Frame `e_α^μ` (row α) and its inverse, both with zero-based indexing.
#[derive(Clone, Debug)]
pub struct VielbeinMatrix {
    pub algebra: String,
    pub frame: ExprMatrix,
    pub dual: ExprMatrix,
}

impl VielbeinMatrix {
    pub fn dim(&self) -> usize {
        self.frame.rows()
    }

    /// Wraps a given frame, inverting it exactly.
    pub fn from_frame(algebra: &str, frame: ExprMatrix) -> Result<Self, VielbeinError> {
        let dual = frame.inverse_unit_det()?;
        Ok(VielbeinMatrix { algebra: algebra.to_string(), frame, dual })
    }

    pub fn identity(dim: usize) -> Self {
        VielbeinMatrix { algebra: format!("abelian{dim}"), frame: ExprMatrix::identity(dim), dual: ExprMatrix::identity(dim) }
    }
}

/// `e^{x_{t+1} 𝒳}` for an adjoint matrix that may carry algebra parameters.
fn adjoint_exponential(x: &ExprMatrix, t: usize) -> Result<ExprMatrix, VielbeinError> {
    let rational: Option<Vec<Vec<BigRational>>> =
        (0..x.rows()).map(|i| x.row(i).iter().map(Expression::as_rational).collect()).collect();
    match rational {
        Some(r) => matrix_exponential(&r, t),
        None => nilpotent_exponential(x, t).ok_or(VielbeinError::SymbolicSpectrum { index: t + 1 }),
    }
}

/// Row α is the α-th basis row pushed through `e^{x_j 𝒳_j}` for every `j > α`.
pub fn compute_vielbein(alg: &LieAlgebra) -> Result<VielbeinMatrix, VielbeinError> {
    let m = alg.dim();
    let ad = alg.adjoint();
    let exps = ad.x_mats.iter().enumerate().map(|(j, x)| adjoint_exponential(x, j)).collect::<Result<Vec<_>, _>>()?;
    let mut suffix = ExprMatrix::identity(m);
    let mut frame = ExprMatrix::zeros(m, m);
    for a in (0..m).rev() {
        for c in 0..m {
            frame[(a, c)] = suffix[(a, c)].clone();
        }
        suffix = exps[a].mul(&suffix);
    }
    VielbeinMatrix::from_frame(alg.name(), frame)
}

/// Structure constants from the frame: with vector fields `V_i = dual_i^μ ∂_μ` and
/// one-forms `θ^k = frame_ν^k dx^ν`, `C_{ij}^k = θ^k([V_i, V_j])`. One-based keys,
/// zero entries omitted.
pub fn recover_structure_constants(
    v: &VielbeinMatrix,
) -> Result<BTreeMap<(usize, usize, usize), Expression>, VielbeinError> {
    let m = v.dim();
    let d = &v.dual;
    let partials: Vec<ExprMatrix> = (0..m).map(|mu| d.partial(mu)).collect();
    let mut out = BTreeMap::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut bracket = vec![Expression::zero(); m];
            for (nu, slot) in bracket.iter_mut().enumerate() {
                let mut acc = Expression::zero();
                for (mu, pm) in partials.iter().enumerate() {
                    let a = &d[(i, mu)];
                    if !a.is_zero() {
                        acc = acc + a * &pm[(j, nu)];
                    }
                    let b = &d[(j, mu)];
                    if !b.is_zero() {
                        acc = acc - b * &pm[(i, nu)];
                    }
                }
                *slot = acc;
            }
            for k in 0..m {
                let mut c = Expression::zero();
                for (nu, bn) in bracket.iter().enumerate() {
                    if !bn.is_zero() {
                        c = c + &v.frame[(nu, k)] * bn;
                    }
                }
                if !c.free_coordinates().is_empty() {
                    return Err(VielbeinError::NonConstant { i: i + 1, j: j + 1, k: k + 1, value: c.to_string() });
                }
                if !c.is_zero() {
                    out.insert((i + 1, j + 1, k + 1), c);
                }
            }
        }
    }
    Ok(out)
}

const FIXTURES: &str = include_str!("../../data/vielbeins.json");

/// Known discrepancy between a printed matrix entry and the computed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureFlag {
    pub entry: String,
    pub printed: String,
    pub computed: String,
}

/// Reference frame stored as its off-identity entries (`"row,col"`, one-based).
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct VielbeinFixture {
    pub algebra: String,
    pub off_identity: BTreeMap<String, String>,
    pub flags: Vec<FixtureFlag>,
}

pub fn fixtures() -> Vec<VielbeinFixture> {
    serde_json::from_str(FIXTURES).expect("bundled vielbein fixtures parse")
}

pub(crate) fn parse_entry_key(key: &str) -> Option<(usize, usize)> {
    let (a, b) = key.split_once(',')?;
    let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a >= 1 && b >= 1).then(|| (a - 1, b - 1))
}

impl VielbeinFixture {
    fn build(&self, dim: usize, overrides: &BTreeMap<(usize, usize), String>) -> Result<ExprMatrix, ExprError> {
        let mut m = ExprMatrix::identity(dim);
        for (key, text) in &self.off_identity {
            let (i, j) = parse_entry_key(key).ok_or(ExprError::Parse { pos: 0, msg: format!("bad entry key `{key}`") })?;
            let text = overrides.get(&(i, j)).unwrap_or(text);
            m[(i, j)] = Expression::parse_with(text, &BTreeMap::<Symbol, BigRational>::new())?;
        }
        Ok(m)
    }

    /// Frame with the computed values in flagged slots.
    pub fn matrix(&self, dim: usize) -> Result<ExprMatrix, ExprError> {
        self.build(dim, &BTreeMap::new())
    }

    /// Frame exactly as printed; fails when a printed entry is not a valid expression.
    pub fn printed_matrix(&self, dim: usize) -> Result<ExprMatrix, ExprError> {
        let overrides = self
            .flags
            .iter()
            .filter_map(|f| parse_entry_key(&f.entry).map(|k| (k, f.printed.clone())))
            .collect();
        self.build(dim, &overrides)
    }
}

/// Entry-by-entry comparison of a computed frame with a fixture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureComparison {
    pub mismatches: Vec<(usize, usize, String, String)>,
    pub flagged: Vec<FixtureFlag>,
}

impl FixtureComparison {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub fn compare_with_fixture(v: &VielbeinMatrix, fx: &VielbeinFixture) -> Result<FixtureComparison, ExprError> {
    let expected = fx.matrix(v.dim())?;
    let mut mismatches = Vec::new();
    for i in 0..v.dim() {
        for j in 0..v.dim() {
            if expected[(i, j)] != v.frame[(i, j)] {
                mismatches.push((i + 1, j + 1, expected[(i, j)].to_string(), v.frame[(i, j)].to_string()));
            }
        }
    }
    Ok(FixtureComparison { mismatches, flagged: fx.flags.clone() })
}
