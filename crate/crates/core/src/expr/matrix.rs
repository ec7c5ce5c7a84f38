use std::collections::BTreeMap;
use std::ops::{Index, IndexMut};

use num_rational::BigRational;

use super::{ExprError, Expression, RationalExpression, Symbol};

/// Dense row-major matrix of expressions with zero-based indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Expression>,
}

impl ExprMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExprMatrix { rows, cols, data: vec![Expression::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExprMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Expression::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Expression) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ExprMatrix { rows, cols, data }
    }

    pub fn from_rational(m: &[Vec<BigRational>]) -> Self {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        ExprMatrix::from_fn(rows, cols, |i, j| Expression::constant(m[i][j].clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Expression] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Expression> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> ExprMatrix {
        ExprMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn map(&self, f: impl Fn(&Expression) -> Expression) -> ExprMatrix {
        ExprMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&Expression) -> Result<Expression, ExprError>) -> Result<ExprMatrix, ExprError> {
        let data = self.data.iter().map(f).collect::<Result<_, _>>()?;
        Ok(ExprMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn mul(&self, other: &ExprMatrix) -> ExprMatrix {
        assert_eq!(self.cols, other.rows, "matrix dimension mismatch");
        let mut out = ExprMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if b.is_zero() {
                        continue;
                    }
                    let prod = a * b;
                    let cell = &mut out[(i, j)];
                    *cell = std::mem::take(cell) + prod;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &ExprMatrix) -> ExprMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix dimension mismatch");
        ExprMatrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn sub(&self, other: &ExprMatrix) -> ExprMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix dimension mismatch");
        ExprMatrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn scale_expr(&self, e: &Expression) -> ExprMatrix {
        self.map(|x| x * e)
    }

    pub fn mul_vec(&self, v: &[Expression]) -> Vec<Expression> {
        assert_eq!(self.cols, v.len(), "matrix dimension mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = Expression::zero();
                for (j, vj) in v.iter().enumerate() {
                    let a = &self[(i, j)];
                    if !a.is_zero() && !vj.is_zero() {
                        acc = acc + a * vj;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> Expression {
        let mut acc = Expression::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = &acc + &self[(i, i)];
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expression::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        *self == ExprMatrix::identity(self.rows) && self.is_square()
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i..self.cols).all(|j| (&self[(i, j)] + &self[(j, i)]).is_zero()))
    }

    pub fn partial(&self, i: usize) -> ExprMatrix {
        self.map(|e| e.partial(i))
    }

    pub fn bind(&self, values: &BTreeMap<Symbol, BigRational>) -> Result<ExprMatrix, ExprError> {
        self.try_map(|e| e.bind(values))
    }

    /// Determinant by dynamic programming over column subsets.
    pub fn determinant(&self) -> Expression {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Expression::one();
        }
        let mut dp: Vec<Expression> = vec![Expression::zero(); 1 << n];
        dp[0] = Expression::one();
        for mask in 0usize..(1 << n) {
            if dp[mask].is_zero() {
                continue;
            }
            let row = mask.count_ones() as usize;
            if row == n {
                continue;
            }
            let current = dp[mask].clone();
            for c in 0..n {
                if mask & (1 << c) != 0 {
                    continue;
                }
                let a = &self[(row, c)];
                if a.is_zero() {
                    continue;
                }
                let larger = (mask >> (c + 1)).count_ones();
                let mut term = &current * a;
                if larger % 2 == 1 {
                    term = -term;
                }
                let next = mask | (1 << c);
                dp[next] = std::mem::take(&mut dp[next]) + term;
            }
        }
        dp[(1 << n) - 1].clone()
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> ExprMatrix {
        let n = self.rows;
        ExprMatrix::from_fn(n - 1, n - 1, |i, j| {
            let r = if i < skip_row { i } else { i + 1 };
            let c = if j < skip_col { j } else { j + 1 };
            self[(r, c)].clone()
        })
    }

    /// Classical adjugate: `adj(A)·A = A·adj(A) = det(A)·I`.
    pub fn adjugate(&self) -> ExprMatrix {
        assert!(self.is_square(), "adjugate of a non-square matrix");
        let n = self.rows;
        if n == 1 {
            return ExprMatrix::identity(1);
        }
        ExprMatrix::from_fn(n, n, |i, j| {
            let d = self.minor(j, i).determinant();
            if (i + j) % 2 == 1 {
                -d
            } else {
                d
            }
        })
    }

    /// Exact inverse when the determinant is a unit of the ring.
    pub fn inverse_unit_det(&self) -> Result<ExprMatrix, ExprError> {
        let det = self.determinant();
        let inv = det.inverse_unit().ok_or_else(|| ExprError::NonUnitDivisor(det.to_string()))?;
        Ok(self.adjugate().scale_expr(&inv))
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|e| e.to_string()).collect()).collect()
    }
}

impl Index<(usize, usize)> for ExprMatrix {
    type Output = Expression;
    fn index(&self, (i, j): (usize, usize)) -> &Expression {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ExprMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Expression {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix with a single shared denominator.
#[derive(Clone, Debug)]
pub struct RationalMatrix {
    pub num: ExprMatrix,
    pub den: Expression,
}

impl RationalMatrix {
    pub fn new(num: ExprMatrix, den: Expression) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let mut m = RationalMatrix { num, den };
        m.cancel_unit();
        Ok(m)
    }

    fn cancel_unit(&mut self) {
        if let Some(inv) = self.den.inverse_unit() {
            if !self.den.is_one() {
                self.num = self.num.scale_expr(&inv);
                self.den = Expression::one();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.num.rows()
    }

    pub fn entry(&self, i: usize, j: usize) -> RationalExpression {
        RationalExpression::new(self.num[(i, j)].clone(), self.den.clone()).expect("nonzero denominator")
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        let mut m = RationalMatrix { num: self.num.mul(&other.num), den: &self.den * &other.den };
        m.cancel_unit();
        m
    }

    pub fn mul_expr_matrix(&self, other: &ExprMatrix) -> RationalMatrix {
        RationalMatrix { num: self.num.mul(other), den: self.den.clone() }
    }

    pub fn trace(&self) -> RationalExpression {
        RationalExpression::new(self.num.trace(), self.den.clone()).expect("nonzero denominator")
    }

    pub fn apply(&self, v: &[RationalExpression]) -> Vec<RationalExpression> {
        (0..self.num.rows())
            .map(|i| {
                let mut acc = RationalExpression::zero();
                for (j, vj) in v.iter().enumerate() {
                    if vj.is_zero() || self.num[(i, j)].is_zero() {
                        continue;
                    }
                    acc = acc.add(&vj.mul_expr(&self.num[(i, j)]));
                }
                RationalExpression::new(acc.num().clone(), acc.den() * &self.den).expect("nonzero denominator")
            })
            .collect()
    }
}
