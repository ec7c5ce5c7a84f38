//! Frame-index form of the Schouten identities built from the adjoint matrices
//! `𝒳_i` and `𝒴^γ`.

use std::collections::{BTreeMap, BTreeSet};

use crate::catalog::{AdjointRep, LieAlgebra};
use crate::expr::{ExprMatrix, Expression};
use crate::vielbein::VielbeinMatrix;

/// `Σ_i P^{iγ} P𝒳_i + P𝒴^γP + Σ_i P^{iγ} 𝒳_iᵀP` for constant `P`.
pub fn jacobi_matrix(adj: &AdjointRep, p: &ExprMatrix, gamma: usize) -> ExprMatrix {
    let mut out = p.mul(&adj.y_mats[gamma]).mul(p);
    for (i, x) in adj.x_mats.iter().enumerate() {
        let c = &p[(i, gamma)];
        if c.is_zero() {
            continue;
        }
        out = out.add(&p.mul(x).scale_expr(c)).add(&x.transpose().mul(p).scale_expr(c));
    }
    out
}

/// Polarization of [`jacobi_matrix`]: the part of the mixed identity that does
/// not differentiate `Q`.
pub fn mixed_jacobi_matrix(adj: &AdjointRep, p: &ExprMatrix, q: &ExprMatrix, gamma: usize) -> ExprMatrix {
    let y = &adj.y_mats[gamma];
    let mut out = p.mul(y).mul(q).add(&q.mul(y).mul(p));
    for (i, x) in adj.x_mats.iter().enumerate() {
        let (a, b) = (&p[(i, gamma)], &q[(i, gamma)]);
        if !a.is_zero() {
            out = out.add(&q.mul(x).scale_expr(a)).add(&x.transpose().mul(q).scale_expr(a));
        }
        if !b.is_zero() {
            out = out.add(&p.mul(x).scale_expr(b)).add(&x.transpose().mul(p).scale_expr(b));
        }
    }
    out
}

/// Derivative part of the mixed identity for constant `P`:
/// `(MᵀP)^{kγ}∂_kQ + A′ + B′` with `A′_{sz} = (MᵀP)^{ks}∂_kQ^{zγ}` and
/// `B′_{sz} = (MᵀP)^{kz}∂_kQ^{γs}`.
pub fn derivative_matrix(mtp: &ExprMatrix, dq: &[ExprMatrix], gamma: usize) -> ExprMatrix {
    let m = mtp.rows();
    let along = |col: usize, f: &dyn Fn(&ExprMatrix) -> Expression| {
        (0..m).fold(Expression::zero(), |acc, k| {
            let c = &mtp[(k, col)];
            if c.is_zero() {
                acc
            } else {
                acc + c * &f(&dq[k])
            }
        })
    };
    let mut out = ExprMatrix::zeros(m, m);
    for s in 0..m {
        for z in 0..m {
            let main = along(gamma, &|d| d[(s, z)].clone());
            let a = along(s, &|d| d[(z, gamma)].clone());
            let b = along(z, &|d| d[(gamma, s)].clone());
            out[(s, z)] = main + a + b;
        }
    }
    out
}

/// Quadratic polynomials in the entries of a constant `P` whose common zero set
/// is the set of Poisson bivectors `MᵀPM`, one per independent component.
pub fn jacobi_constraints_constant(alg: &LieAlgebra, p: &ExprMatrix) -> Vec<Expression> {
    let adj = alg.adjoint();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for gamma in 0..alg.dim() {
        let j = jacobi_matrix(&adj, p, gamma);
        for s in 0..alg.dim() {
            for z in 0..alg.dim() {
                let e = &j[(s, z)];
                if e.is_zero() {
                    continue;
                }
                let canon = if e.leading_sign() < 0 { -e } else { e.clone() };
                if seen.insert(canon.clone()) {
                    out.push(canon);
                }
            }
        }
    }
    out
}

/// `[𝐏, 𝐏′]` for constant `P` and coordinate-dependent `P′`, assembled in
/// frame indices and pushed to coordinates as `Σ M^s_λ M^z_μ M^γ_ν L(γ)_{sz}`.
/// Returns the nonzero components on `λ < μ < ν`.
pub fn mixed_bracket_via_frame(
    alg: &LieAlgebra,
    v: &VielbeinMatrix,
    p: &ExprMatrix,
    q: &ExprMatrix,
) -> BTreeMap<(usize, usize, usize), Expression> {
    let m = alg.dim();
    let adj = alg.adjoint();
    let mtp = v.frame.transpose().mul(p);
    let dq: Vec<ExprMatrix> = (0..m).map(|k| q.partial(k)).collect();
    let ls: Vec<ExprMatrix> =
        (0..m).map(|g| mixed_jacobi_matrix(&adj, p, q, g).add(&derivative_matrix(&mtp, &dq, g))).collect();
    let f = &v.frame;
    let mut out = BTreeMap::new();
    for l in 0..m {
        for mu in l + 1..m {
            for nu in mu + 1..m {
                let mut acc = Expression::zero();
                for (g, lg) in ls.iter().enumerate() {
                    let fg = &f[(g, nu)];
                    if fg.is_zero() {
                        continue;
                    }
                    for s in 0..m {
                        let fs = &f[(s, l)];
                        if fs.is_zero() {
                            continue;
                        }
                        for z in 0..m {
                            let e = &lg[(s, z)];
                            let fz = &f[(z, mu)];
                            if e.is_zero() || fz.is_zero() {
                                continue;
                            }
                            acc = acc + &(&(fs * fz) * fg) * e;
                        }
                    }
                }
                if !acc.is_zero() {
                    out.insert((l, mu, nu), acc);
                }
            }
        }
    }
    out
}
