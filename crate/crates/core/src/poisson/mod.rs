//! Bivector fields, Schouten brackets and Poisson brackets.

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{ExprMatrix, Expression};
use crate::vielbein::VielbeinMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PoissonError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("matrix is not antisymmetric at ({0}, {1})")]
    NotAntisymmetric(usize, usize),
}

/// Antisymmetric matrix of expressions `𝐏^{μν}`, zero-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivectorField {
    entries: ExprMatrix,
}

impl BivectorField {
    pub fn new(entries: ExprMatrix) -> Result<Self, PoissonError> {
        if !entries.is_square() {
            return Err(PoissonError::DimensionMismatch(entries.rows(), entries.cols()));
        }
        for i in 0..entries.rows() {
            for j in i..entries.cols() {
                if !(&entries[(i, j)] + &entries[(j, i)]).is_zero() {
                    return Err(PoissonError::NotAntisymmetric(i + 1, j + 1));
                }
            }
        }
        Ok(BivectorField { entries })
    }

    /// From upper-triangle entries keyed by zero-based `(i, j)` with `i < j`.
    pub fn from_upper(dim: usize, upper: &BTreeMap<(usize, usize), Expression>) -> Result<Self, PoissonError> {
        let mut m = ExprMatrix::zeros(dim, dim);
        for (&(i, j), v) in upper {
            if i >= dim || j >= dim {
                return Err(PoissonError::DimensionMismatch(i.max(j) + 1, dim));
            }
            if i == j {
                if !v.is_zero() {
                    return Err(PoissonError::NotAntisymmetric(i + 1, j + 1));
                }
                continue;
            }
            m[(i, j)] = v.clone();
            m[(j, i)] = -v;
        }
        Ok(BivectorField { entries: m })
    }

    pub fn zero(dim: usize) -> Self {
        BivectorField { entries: ExprMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &ExprMatrix {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Expression {
        &self.entries[(i, j)]
    }

    pub fn map(&self, f: impl Fn(&Expression) -> Expression) -> BivectorField {
        BivectorField { entries: self.entries.map(f) }
    }

    pub fn add(&self, other: &BivectorField) -> BivectorField {
        BivectorField { entries: self.entries.add(&other.entries) }
    }

    /// Nonzero upper-triangle entries, zero-based.
    pub fn upper(&self) -> BTreeMap<(usize, usize), Expression> {
        let n = self.dim();
        let mut out = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                if !self.entries[(i, j)].is_zero() {
                    out.insert((i, j), self.entries[(i, j)].clone());
                }
            }
        }
        out
    }
}

/// Totally antisymmetric rank-3 field stored on `λ < μ < ν` (zero-based), zeros omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrivectorField {
    dim: usize,
    entries: BTreeMap<(usize, usize, usize), Expression>,
}

impl TrivectorField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn components(&self) -> &BTreeMap<(usize, usize, usize), Expression> {
        &self.entries
    }

    /// Component for any index order, with the permutation sign applied.
    pub fn get(&self, a: usize, b: usize, c: usize) -> Expression {
        if a == b || b == c || a == c {
            return Expression::zero();
        }
        let mut idx = [a, b, c];
        let mut sign = false;
        for i in 0..3 {
            for j in 0..2 - i {
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = !sign;
                }
            }
        }
        match self.entries.get(&(idx[0], idx[1], idx[2])) {
            Some(v) if sign => -v,
            Some(v) => v.clone(),
            None => Expression::zero(),
        }
    }
}

/// `𝐏^{μν} = Σ e_i^μ e_j^ν P^{ij}`.
pub fn bivector_from_frame(p_frame: &ExprMatrix, v: &VielbeinMatrix) -> Result<BivectorField, PoissonError> {
    if p_frame.rows() != v.dim() || p_frame.cols() != v.dim() {
        return Err(PoissonError::DimensionMismatch(p_frame.rows(), v.dim()));
    }
    BivectorField::new(p_frame.clone())?;
    let m = v.frame.transpose().mul(p_frame).mul(&v.frame);
    Ok(BivectorField { entries: m })
}

fn triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// `Σ_ρ (P^{ρλ} ∂_ρ Q^{μν} + P^{ρν} ∂_ρ Q^{λμ} + P^{ρμ} ∂_ρ Q^{νλ})`.
fn cyclic_term(p: &ExprMatrix, dq: &[ExprMatrix], l: usize, m: usize, n: usize) -> Expression {
    let mut acc = Expression::zero();
    for (rho, d) in dq.iter().enumerate() {
        for (a, b, c) in [(l, m, n), (n, l, m), (m, n, l)] {
            let x = &p[(rho, a)];
            if x.is_zero() {
                continue;
            }
            let y = &d[(b, c)];
            if !y.is_zero() {
                acc = acc + x * y;
            }
        }
    }
    acc
}

fn derivatives(p: &BivectorField) -> Vec<ExprMatrix> {
    (0..p.dim()).map(|rho| p.entries.partial(rho)).collect()
}

fn assemble(dim: usize, f: impl Fn(usize, usize, usize) -> Expression + Sync) -> TrivectorField {
    let entries = triples(dim)
        .into_par_iter()
        .map(|(a, b, c)| ((a, b, c), f(a, b, c)))
        .filter(|(_, v)| !v.is_zero())
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    TrivectorField { dim, entries }
}

/// Three-term bracket `[𝐏, 𝐏]`.
pub fn schouten_self(p: &BivectorField) -> TrivectorField {
    let dp = derivatives(p);
    assemble(p.dim(), |a, b, c| cyclic_term(&p.entries, &dp, a, b, c))
}

/// Six-term mixed bracket `[𝐏, 𝐐]`.
pub fn schouten_mixed(p: &BivectorField, q: &BivectorField) -> Result<TrivectorField, PoissonError> {
    if p.dim() != q.dim() {
        return Err(PoissonError::DimensionMismatch(p.dim(), q.dim()));
    }
    let dp = derivatives(p);
    let dq = derivatives(q);
    Ok(assemble(p.dim(), |a, b, c| cyclic_term(&p.entries, &dq, a, b, c) + cyclic_term(&q.entries, &dp, a, b, c)))
}

/// Self bracket when both arguments coincide, mixed bracket otherwise.
pub fn schouten(p: &BivectorField, q: &BivectorField) -> Result<TrivectorField, PoissonError> {
    if p == q {
        Ok(schouten_self(p))
    } else {
        schouten_mixed(p, q)
    }
}

/// `{f, g} = 𝐏^{μν} ∂_μ f ∂_ν g`.
pub fn poisson_bracket(p: &BivectorField, f: &Expression, g: &Expression) -> Expression {
    let n = p.dim();
    let df: Vec<Expression> = (0..n).map(|i| f.partial(i)).collect();
    let dg: Vec<Expression> = (0..n).map(|i| g.partial(i)).collect();
    let mut acc = Expression::zero();
    for (mu, a) in df.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (nu, b) in dg.iter().enumerate() {
            let e = &p.entries[(mu, nu)];
            if !b.is_zero() && !e.is_zero() {
                acc = acc + &(a * b) * e;
            }
        }
    }
    acc
}

/// Outcome of one bracket identity; residual components are one-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub holds: bool,
    pub residual: Vec<((usize, usize, usize), String)>,
}

impl IdentityCheck {
    pub fn from_trivector(t: &TrivectorField) -> Self {
        IdentityCheck {
            holds: t.is_zero(),
            residual: t.components().iter().map(|(&(a, b, c), v)| ((a + 1, b + 1, c + 1), v.to_string())).collect(),
        }
    }

    /// Residual component with the fewest terms, if any.
    pub fn minimal_residual(&self) -> Option<&((usize, usize, usize), String)> {
        self.residual.iter().min_by_key(|(_, s)| s.len())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompatibilityReport {
    pub p_p: IdentityCheck,
    pub pprime_pprime: IdentityCheck,
    pub p_pprime: IdentityCheck,
}

impl CompatibilityReport {
    pub fn all_hold(&self) -> bool {
        self.p_p.holds && self.pprime_pprime.holds && self.p_pprime.holds
    }
}

/// `[𝐏, 𝐏] = [𝐏′, 𝐏′] = [𝐏, 𝐏′] = 0`, each tested exactly.
pub fn check_compatibility(p: &BivectorField, q: &BivectorField) -> Result<CompatibilityReport, PoissonError> {
    Ok(CompatibilityReport {
        p_p: IdentityCheck::from_trivector(&schouten_self(p)),
        pprime_pprime: IdentityCheck::from_trivector(&schouten_self(q)),
        p_pprime: IdentityCheck::from_trivector(&schouten_mixed(p, q)?),
    })
}
