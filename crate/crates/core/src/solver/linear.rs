//! Exact fraction-free Gauss-Jordan elimination over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use super::SolverError;
use crate::expr::Symbol;

/// Rows `Σ_j rows[r][j]·u_j = rhs[r]` over the ordered unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub unknowns: Vec<Symbol>,
    pub rows: Vec<Vec<BigRational>>,
    pub rhs: Vec<BigRational>,
}

/// Affine solution set: pivots are expressed through the free unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionFamily {
    pub unknowns: Vec<Symbol>,
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub free: Vec<usize>,
    pub particular: Vec<BigRational>,
    pub basis: Vec<Vec<BigRational>>,
    /// `(pivot, coefficients with pivot coefficient 1, rhs)`.
    pub reduced: Vec<(usize, Vec<BigRational>, BigRational)>,
}

impl SolutionFamily {
    pub fn nullity(&self) -> usize {
        self.free.len()
    }
}

fn primitive(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for v in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

fn to_integer_row(coeffs: &[BigRational], rhs: &BigRational) -> Vec<BigInt> {
    let lcm = coeffs.iter().chain(std::iter::once(rhs)).fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let mut row: Vec<BigInt> = coeffs
        .iter()
        .chain(std::iter::once(rhs))
        .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    primitive(&mut row);
    row
}

impl LinearSystem {
    pub fn new(unknowns: Vec<Symbol>) -> Self {
        LinearSystem { unknowns, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<BigRational>, rhs: BigRational) {
        self.rows.push(coeffs);
        self.rhs.push(rhs);
    }

    /// Drops zero rows and duplicates up to a scalar factor.
    pub fn deduplicated(&self) -> LinearSystem {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = LinearSystem::new(self.unknowns.clone());
        for (row, rhs) in self.rows.iter().zip(&self.rhs) {
            let mut ir = to_integer_row(row, rhs);
            if ir.iter().all(Zero::is_zero) {
                continue;
            }
            if ir.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
                for v in ir.iter_mut() {
                    *v = -&*v;
                }
            }
            if seen.insert(ir) {
                out.push(row.clone(), rhs.clone());
            }
        }
        out
    }

    /// Reduced row echelon form with the smallest unknown index pivoted first.
    pub fn solve(&self) -> Result<SolutionFamily, SolverError> {
        let n = self.unknowns.len();
        let mut rows: Vec<Vec<BigInt>> = self.rows.iter().zip(&self.rhs).map(|(r, b)| to_integer_row(r, b)).collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(found) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, found);
            let pivot_row = rows[rank].clone();
            let pv = pivot_row[col].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r == rank || row[col].is_zero() {
                    continue;
                }
                let f = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v = &pv * &*v - &f * p;
                }
                primitive(row);
            }
            pivots.push(col);
            rank += 1;
        }
        if let Some(r) = rows[rank..].iter().position(|row| !row[n].is_zero()) {
            return Err(SolverError::Inconsistent { row: rank + r });
        }
        let reduced: Vec<(usize, Vec<BigRational>, BigRational)> = pivots
            .iter()
            .enumerate()
            .map(|(r, &col)| {
                let pv = rows[r][col].clone();
                let scaled: Vec<BigRational> = rows[r].iter().map(|v| BigRational::new(v.clone(), pv.clone())).collect();
                (col, scaled[..n].to_vec(), scaled[n].clone())
            })
            .collect();
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut particular = vec![BigRational::zero(); n];
        for (col, _, b) in &reduced {
            particular[*col] = b.clone();
        }
        let basis = free
            .iter()
            .map(|&f| {
                let mut v = vec![BigRational::zero(); n];
                v[f] = BigRational::one();
                for (col, coeffs, _) in &reduced {
                    v[*col] = -coeffs[f].clone();
                }
                v
            })
            .collect();
        Ok(SolutionFamily { unknowns: self.unknowns.clone(), rank, pivots, free, particular, basis, reduced })
    }

    /// `rows·x − rhs` for a candidate vector.
    pub fn residuals(&self, x: &[BigRational]) -> Vec<BigRational> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| row.iter().zip(x).fold(-b.clone(), |acc, (a, v)| acc + a * v))
            .collect()
    }
}
