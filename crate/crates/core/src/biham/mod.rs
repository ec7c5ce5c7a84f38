//! Recursion operator `N = 𝐏′𝐏⁻¹`, trace integrals, Nijenhuis torsion, the
//! Lenard chain, involution and functional independence.

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{rat, ExprError, ExprMatrix, Expression, RationalExpression, RationalMatrix, Symbol};
use crate::poisson::BivectorField;
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BihamError {
    #[error("bivector is degenerate: its determinant vanishes identically")]
    Singular,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("need at least {needed} integrals, got {got}")]
    TooFewIntegrals { needed: usize, got: usize },
    #[error("every sample point hits a vanishing denominator")]
    AllPointsSingular,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// `𝐏⁻¹ = adj(𝐏) / det 𝐏` with one shared denominator.
pub fn invert_bivector(p: &BivectorField) -> Result<RationalMatrix, BihamError> {
    let det = p.matrix().determinant();
    if det.is_zero() {
        return Err(BihamError::Singular);
    }
    Ok(RationalMatrix::new(p.matrix().adjugate(), det)?)
}

/// `N = 𝐏′𝐏⁻¹` with a shared denominator.
#[derive(Clone, Debug)]
pub struct RecursionOperator {
    pub matrix: RationalMatrix,
}

impl RecursionOperator {
    pub fn from_matrix(matrix: RationalMatrix) -> Self {
        RecursionOperator { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> RationalExpression {
        self.matrix.entry(i, j)
    }

    /// `N·𝐏 = 𝐏′`, cross-multiplied.
    pub fn reproduces(&self, p: &BivectorField, q: &BivectorField) -> bool {
        self.matrix.num.mul(p.matrix()) == q.matrix().scale_expr(&self.matrix.den)
    }

    fn apply(&self, v: &[RationalExpression]) -> Vec<RationalExpression> {
        self.matrix.apply(v)
    }
}

pub fn recursion_operator(p: &BivectorField, q: &BivectorField) -> Result<RecursionOperator, BihamError> {
    if p.dim() != q.dim() {
        return Err(BihamError::DimensionMismatch(p.dim(), q.dim()));
    }
    let inv = invert_bivector(p)?;
    Ok(RecursionOperator { matrix: RationalMatrix::new(q.matrix().mul(&inv.num), inv.den)? })
}

/// Ordered integrals `H_1, …, H_k`.
#[derive(Clone, Debug)]
pub struct IntegralSet {
    pub integrals: Vec<RationalExpression>,
    pub k_max: usize,
}

impl IntegralSet {
    pub fn from_expressions(hs: Vec<Expression>) -> Self {
        let k_max = hs.len();
        IntegralSet { integrals: hs.into_iter().map(RationalExpression::from).collect(), k_max }
    }

    pub fn len(&self) -> usize {
        self.integrals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.integrals.is_empty()
    }

    pub fn rendered(&self) -> Vec<String> {
        self.integrals.iter().map(|h| h.to_string()).collect()
    }

    pub fn bind(&self, values: &BTreeMap<Symbol, BigRational>) -> Result<IntegralSet, BihamError> {
        let integrals = self.integrals.iter().map(|h| h.bind(values)).collect::<Result<_, _>>()?;
        Ok(IntegralSet { integrals, k_max: self.k_max })
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        self.integrals.iter().flat_map(|h| h.num().free_symbols().into_iter().chain(h.den().free_symbols())).collect()
    }
}

/// `H_k = Tr(Nᵏ) / (2k)` for `k = 1..=k_max`.
pub fn integrals(n: &RecursionOperator, k_max: usize) -> IntegralSet {
    let mut out = Vec::with_capacity(k_max);
    let mut power = n.matrix.num.clone();
    let mut den = n.matrix.den.clone();
    for k in 1..=k_max {
        let h = RationalExpression::new(power.trace(), den.clone()).expect("nonzero denominator");
        out.push(h.scale(&rat(1, 2 * k as i64)));
        if k < k_max {
            power = power.mul(&n.matrix.num);
            den = &den * &n.matrix.den;
        }
    }
    IntegralSet { integrals: out, k_max }
}

/// `[X, Y]^μ = Xᵛ∂ᵥY^μ − Yᵛ∂ᵥX^μ`.
pub fn vector_field_commutator(x: &[Expression], y: &[Expression]) -> Vec<Expression> {
    (0..x.len())
        .map(|mu| {
            let mut acc = Expression::zero();
            for nu in 0..x.len() {
                if !x[nu].is_zero() {
                    acc = acc + &x[nu] * &y[mu].partial(nu);
                }
                if !y[nu].is_zero() {
                    acc = acc - &y[nu] * &x[mu].partial(nu);
                }
            }
            acc
        })
        .collect()
}

fn rational_commutator(x: &[RationalExpression], y: &[RationalExpression]) -> Vec<RationalExpression> {
    (0..x.len())
        .map(|mu| {
            let mut acc = RationalExpression::zero();
            for nu in 0..x.len() {
                if !x[nu].is_zero() {
                    acc = acc.add(&x[nu].mul(&y[mu].partial(nu)));
                }
                if !y[nu].is_zero() {
                    acc = acc.sub(&y[nu].mul(&x[mu].partial(nu)));
                }
            }
            acc
        })
        .collect()
}

fn add_vec(a: &[RationalExpression], b: &[RationalExpression]) -> Vec<RationalExpression> {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

fn sub_vec(a: &[RationalExpression], b: &[RationalExpression]) -> Vec<RationalExpression> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

/// `T_N(X,Y) = [NX,NY] − N[NX,Y] − N[X,NY] + N²[X,Y]`.
pub fn nijenhuis_torsion(n: &RecursionOperator, x: &[RationalExpression], y: &[RationalExpression]) -> Vec<RationalExpression> {
    let nx = n.apply(x);
    let ny = n.apply(y);
    let t1 = rational_commutator(&nx, &ny);
    let t2 = n.apply(&rational_commutator(&nx, y));
    let t3 = n.apply(&rational_commutator(x, &ny));
    let t4 = n.apply(&n.apply(&rational_commutator(x, y)));
    add_vec(&sub_vec(&sub_vec(&t1, &t2), &t3), &t4)
}

/// Torsion on coordinate pairs `(∂_μ, ∂_ν)`, failing pairs one-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TorsionReport {
    pub holds: bool,
    pub failing_pairs: Vec<(usize, usize)>,
}

/// Torsion of the numerator `Ñ` on `(∂_μ, ∂_ν)`: `[Ñe_μ, Ñe_ν] + Ñ∂_νÑe_μ − Ñ∂_μÑe_ν`.
fn numerator_torsion(m: &ExprMatrix, mu: usize, nu: usize) -> Vec<Expression> {
    let a = m.column(mu);
    let b = m.column(nu);
    let da: Vec<Expression> = a.iter().map(|e| e.partial(nu)).collect();
    let db: Vec<Expression> = b.iter().map(|e| e.partial(mu)).collect();
    let diff: Vec<Expression> = da.iter().zip(&db).map(|(x, y)| x - y).collect();
    vector_field_commutator(&a, &b).into_iter().zip(m.mul_vec(&diff)).map(|(x, y)| x + y).collect()
}

pub fn torsion_on_basis(n: &RecursionOperator) -> TorsionReport {
    let dim = n.dim();
    let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|a| (a + 1..dim).map(move |b| (a, b))).collect();
    let fast = n.matrix.den.is_coordinate_free();
    let failing_pairs: Vec<(usize, usize)> = pairs
        .into_iter()
        .filter(|&(mu, nu)| {
            if fast {
                numerator_torsion(&n.matrix.num, mu, nu).iter().any(|e| !e.is_zero())
            } else {
                let basis = |k: usize| -> Vec<RationalExpression> {
                    (0..dim).map(|i| if i == k { RationalExpression::one() } else { RationalExpression::zero() }).collect()
                };
                nijenhuis_torsion(n, &basis(mu), &basis(nu)).iter().any(|e| !e.is_zero())
            }
        })
        .map(|(a, b)| (a + 1, b + 1))
        .collect();
    TorsionReport { holds: failing_pairs.is_empty(), failing_pairs }
}

pub fn gradient(h: &RationalExpression, dim: usize) -> Vec<RationalExpression> {
    (0..dim).map(|i| h.partial(i)).collect()
}

fn apply_bivector(p: &BivectorField, v: &[RationalExpression]) -> Vec<RationalExpression> {
    (0..p.dim())
        .map(|mu| {
            v.iter().enumerate().fold(RationalExpression::zero(), |acc, (nu, g)| {
                let e = p.get(mu, nu);
                if e.is_zero() || g.is_zero() {
                    acc
                } else {
                    acc.add(&g.mul_expr(e))
                }
            })
        })
        .collect()
}

/// `{f, g} = ∂_μf 𝐏^{μν} ∂_νg` on precomputed gradients.
fn bracket_of_gradients(p: &BivectorField, df: &[RationalExpression], dg: &[RationalExpression]) -> RationalExpression {
    let pg = apply_bivector(p, dg);
    df.iter().zip(&pg).fold(RationalExpression::zero(), |acc, (a, b)| {
        if a.is_zero() || b.is_zero() {
            acc
        } else {
            acc.add(&a.mul(b))
        }
    })
}

pub fn poisson_bracket_rational(p: &BivectorField, f: &RationalExpression, g: &RationalExpression) -> RationalExpression {
    bracket_of_gradients(p, &gradient(f, p.dim()), &gradient(g, p.dim()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LenardLink {
    pub k: usize,
    pub holds: bool,
    pub residual: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LenardReport {
    pub holds: bool,
    pub links: Vec<LenardLink>,
}

/// `𝐏′dH_k − 𝐏dH_{k+1}` for each consecutive pair.
pub fn lenard_check(p: &BivectorField, q: &BivectorField, h: &IntegralSet) -> Result<LenardReport, BihamError> {
    if h.len() < 2 {
        return Err(BihamError::TooFewIntegrals { needed: 2, got: h.len() });
    }
    let grads: Vec<Vec<RationalExpression>> = h.integrals.iter().map(|f| gradient(f, p.dim())).collect();
    let links: Vec<LenardLink> = (0..h.len() - 1)
        .map(|k| {
            let res = sub_vec(&apply_bivector(q, &grads[k]), &apply_bivector(p, &grads[k + 1]));
            let residual: Vec<String> = res.iter().filter(|r| !r.is_zero()).map(|r| r.to_string()).collect();
            LenardLink { k: k + 1, holds: residual.is_empty(), residual }
        })
        .collect();
    Ok(LenardReport { holds: links.iter().all(|l| l.holds), links })
}

/// Pairwise brackets of two integral lists under both structures.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InvolutionReport {
    pub holds: bool,
    pub p: Vec<Vec<bool>>,
    pub pprime: Vec<Vec<bool>>,
}

pub fn cross_involution(p: &BivectorField, q: &BivectorField, a: &IntegralSet, b: &IntegralSet) -> InvolutionReport {
    let ga: Vec<Vec<RationalExpression>> = a.integrals.iter().map(|f| gradient(f, p.dim())).collect();
    let gb: Vec<Vec<RationalExpression>> = b.integrals.iter().map(|f| gradient(f, p.dim())).collect();
    let table = |bv: &BivectorField| -> Vec<Vec<bool>> {
        ga.iter().map(|x| gb.iter().map(|y| bracket_of_gradients(bv, x, y).is_zero()).collect()).collect()
    };
    let (tp, tq) = (table(p), table(q));
    let holds = tp.iter().chain(&tq).all(|r| r.iter().all(|&v| v));
    InvolutionReport { holds, p: tp, pprime: tq }
}

pub fn involution_check(p: &BivectorField, q: &BivectorField, h: &IntegralSet) -> InvolutionReport {
    cross_involution(p, q, h, h)
}

fn rank_exact(mut rows: Vec<Vec<BigRational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let pr = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pr[c];
            for (v, p) in row.iter_mut().zip(&pr) {
                *v -= &f * p;
            }
        }
        rank += 1;
    }
    rank
}

fn rank_float(mut rows: Vec<Vec<f64>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())) else {
            break;
        };
        if rows[piv][c].abs() <= 1e-9 * scale {
            continue;
        }
        rows.swap(rank, piv);
        let pr = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let f = row[c] / pr[c];
            for (v, p) in row.iter_mut().zip(&pr) {
                *v -= f * p;
            }
        }
        rank += 1;
    }
    rank
}

enum PointGradient {
    Exact(Vec<Vec<BigRational>>),
    Float(Vec<Vec<f64>>),
    Singular,
}

fn gradients_at(grads: &[Vec<RationalExpression>], point: &[BigRational]) -> Result<PointGradient, BihamError> {
    let none = BTreeMap::new();
    let exact: Result<Vec<Vec<BigRational>>, ExprError> =
        grads.iter().map(|g| g.iter().map(|e| e.evaluate_exact(point, &none)).collect()).collect();
    match exact {
        Ok(rows) => Ok(PointGradient::Exact(rows)),
        Err(ExprError::DivisionByZero) => Ok(PointGradient::Singular),
        Err(ExprError::Transcendental(_)) => {
            let pt: Vec<f64> = point.iter().map(|v| num_traits::ToPrimitive::to_f64(v).unwrap_or(0.0)).collect();
            let no_params = BTreeMap::new();
            let rows: Result<Vec<Vec<f64>>, ExprError> =
                grads.iter().map(|g| g.iter().map(|e| e.evaluate(&pt, &no_params)).collect()).collect();
            match rows {
                Ok(r) => Ok(PointGradient::Float(r)),
                Err(ExprError::DivisionByZero) => Ok(PointGradient::Singular),
                Err(e) => Err(e.into()),
            }
        }
        Err(e) => Err(e.into()),
    }
}

/// Largest rank of the gradient matrix over the points. Integrals must be free
/// of parameters; exponential entries fall back to a pivoted float rank.
pub fn independence_rank(h: &IntegralSet, points: &[Vec<BigRational>]) -> Result<usize, BihamError> {
    let dim = points.first().map_or(0, Vec::len);
    let grads: Vec<Vec<RationalExpression>> = h.integrals.iter().map(|f| gradient(f, dim)).collect();
    let mut best: Option<usize> = None;
    for pt in points {
        let r = match gradients_at(&grads, pt)? {
            PointGradient::Exact(rows) => rank_exact(rows),
            PointGradient::Float(rows) => rank_float(rows),
            PointGradient::Singular => continue,
        };
        best = Some(best.map_or(r, |b: usize| b.max(r)));
    }
    best.ok_or(BihamError::AllPointsSingular)
}

/// `count` seeded points where every integral's denominator is nonzero.
pub fn sample_points(h: &IntegralSet, dim: usize, count: usize, seed: u64) -> Vec<Vec<BigRational>> {
    let mut rng = sampling::rng(seed);
    let none = BTreeMap::new();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count * 50 {
        if out.len() == count {
            break;
        }
        let pt = sampling::point(&mut rng, dim);
        let ok = h.integrals.iter().all(|f| match f.den().evaluate_exact(&pt, &none) {
            Ok(v) => !v.is_zero(),
            Err(ExprError::Transcendental(_)) => true,
            Err(_) => false,
        });
        if ok {
            out.push(pt);
        }
    }
    out
}

/// Residual of one identity evaluated in floating point at seeded points.
pub fn max_abs_at_points(
    e: &RationalExpression,
    params: &BTreeMap<Symbol, f64>,
    points: &[Vec<f64>],
) -> Result<f64, BihamError> {
    let mut worst = 0.0f64;
    for pt in points {
        worst = worst.max(e.evaluate(pt, params)?.abs());
    }
    Ok(worst)
}

/// `a − b` has vanishing gradient.
pub fn differs_by_constant(a: &RationalExpression, b: &RationalExpression, dim: usize) -> bool {
    let d = a.sub(b);
    (0..dim).all(|i| d.partial(i).is_zero())
}

/// Nonzero random rationals for every parameter appearing in the integrals.
pub fn parameter_sample(h: &IntegralSet, seed: u64) -> BTreeMap<Symbol, BigRational> {
    sampling::bind_symbols(&mut sampling::rng(seed), &h.free_symbols())
}

/// Every integral has a vanishing gradient.
pub fn all_constant(h: &IntegralSet, dim: usize) -> bool {
    h.integrals.iter().all(|f| (0..dim).all(|i| f.partial(i).is_zero()))
}


/// Checks of printed closed-form integrals against a pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrintedIntegralReport {
    pub integrals: Vec<String>,
    pub self_involution: InvolutionReport,
    pub with_computed: InvolutionReport,
    /// Whether printed `H_k` equals the computed trace integral up to a constant.
    pub agrees_with_trace: Vec<bool>,
    pub lenard: Option<LenardReport>,
    pub independence_rank: usize,
    pub expected_rank: usize,
    pub sample_points: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BihamReport {
    pub dim: usize,
    pub k_max: usize,
    pub seed: u64,
    pub determinant: String,
    pub n_reproduces_pprime: bool,
    pub recursion_operator: Vec<Vec<String>>,
    pub integrals: Vec<String>,
    pub torsion: TorsionReport,
    pub lenard: Option<LenardReport>,
    pub involution: InvolutionReport,
    pub printed: Option<PrintedIntegralReport>,
}

impl BihamReport {
    /// Every check on the computed integrals passed.
    pub fn passes(&self) -> bool {
        self.n_reproduces_pprime
            && self.torsion.holds
            && self.lenard.as_ref().is_none_or(|l| l.holds)
            && self.involution.holds
    }
}

/// Full bi-Hamiltonian analysis of `(𝐏, 𝐏′)`, optionally against printed integrals.
pub fn analyze(
    p: &BivectorField,
    q: &BivectorField,
    k_max: usize,
    printed: Option<Vec<Expression>>,
    seed: u64,
) -> Result<BihamReport, BihamError> {
    let n = recursion_operator(p, q)?;
    let hs = integrals(&n, k_max);
    let lenard = if hs.len() >= 2 { Some(lenard_check(p, q, &hs)?) } else { None };
    let printed = match printed {
        Some(list) if !list.is_empty() => {
            let ph = IntegralSet::from_expressions(list);
            let params = parameter_sample(&ph, seed);
            let bound = ph.bind(&params)?;
            let points = sample_points(&bound, p.dim(), 5, seed);
            Some(PrintedIntegralReport {
                integrals: ph.rendered(),
                self_involution: involution_check(p, q, &ph),
                with_computed: cross_involution(p, q, &ph, &hs),
                agrees_with_trace: ph.integrals.iter().zip(&hs.integrals).map(|(a, b)| differs_by_constant(a, b, p.dim())).collect(),
                lenard: if ph.len() >= 2 { Some(lenard_check(p, q, &ph)?) } else { None },
                independence_rank: independence_rank(&bound, &points)?,
                expected_rank: ph.len(),
                sample_points: points.iter().map(|pt| pt.iter().map(|v| v.to_string()).collect()).collect(),
            })
        }
        _ => None,
    };
    Ok(BihamReport {
        dim: p.dim(),
        k_max,
        seed,
        determinant: p.matrix().determinant().to_string(),
        n_reproduces_pprime: n.reproduces(p, q),
        recursion_operator: (0..n.dim()).map(|i| (0..n.dim()).map(|j| n.entry(i, j).to_string()).collect()).collect(),
        integrals: hs.rendered(),
        torsion: torsion_on_basis(&n),
        lenard,
        involution: involution_check(p, q, &hs),
        printed,
    })
}
