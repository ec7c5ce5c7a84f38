use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::key::{Basis, Key, ParamMonomial};
use super::{ExprError, Expression, Symbol};

/// Quotient `num / den` of expressions. Only units are cancelled; equality is
/// decided by cross-multiplication.
#[derive(Clone, Debug)]
pub struct RationalExpression {
    num: Expression,
    den: Expression,
}

impl RationalExpression {
    pub fn new(num: Expression, den: Expression) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(RationalExpression::normalized(num, den))
    }

    pub fn from_expression(e: Expression) -> Self {
        RationalExpression { num: e, den: Expression::one() }
    }

    pub fn zero() -> Self {
        RationalExpression::from_expression(Expression::zero())
    }

    pub fn one() -> Self {
        RationalExpression::from_expression(Expression::one())
    }

    pub fn num(&self) -> &Expression {
        &self.num
    }

    pub fn den(&self) -> &Expression {
        &self.den
    }

    /// The numerator when the denominator has been cancelled completely.
    pub fn as_expression(&self) -> Option<&Expression> {
        self.den.is_one().then_some(&self.num)
    }

    fn normalized(num: Expression, den: Expression) -> Self {
        if num.is_zero() {
            return RationalExpression::zero();
        }
        if let Some(inv) = den.inverse_unit() {
            return RationalExpression { num: &num * &inv, den: Expression::one() };
        }
        // Pull out a common exponential factor and make the leading coefficient one.
        let mut num = num;
        let mut den = den;
        if let Some(common) = common_unit_basis(&den) {
            let inv = Expression::from_term(
                BigRational::one(),
                Key { basis: common.inverse_unit().expect("unit"), params: ParamMonomial::one() },
            );
            num = &num * &inv;
            den = &den * &inv;
        }
        if let Some(c) = den.leading_coefficient().cloned() {
            if !c.is_one() {
                let r = c.recip();
                num = num.scale(&r);
                den = den.scale(&r);
            }
        }
        RationalExpression { num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator has no coordinate dependence.
    pub fn has_constant_denominator(&self) -> bool {
        self.den.is_coordinate_free()
    }

    pub fn add(&self, other: &RationalExpression) -> RationalExpression {
        if self.den == other.den {
            return RationalExpression::normalized(&self.num + &other.num, self.den.clone());
        }
        RationalExpression::normalized(&self.num * &other.den + &other.num * &self.den, &self.den * &other.den)
    }

    pub fn sub(&self, other: &RationalExpression) -> RationalExpression {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RationalExpression {
        RationalExpression { num: -&self.num, den: self.den.clone() }
    }

    pub fn mul(&self, other: &RationalExpression) -> RationalExpression {
        RationalExpression::normalized(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn mul_expr(&self, e: &Expression) -> RationalExpression {
        RationalExpression::normalized(&self.num * e, self.den.clone())
    }

    pub fn scale(&self, c: &BigRational) -> RationalExpression {
        RationalExpression::normalized(self.num.scale(c), self.den.clone())
    }

    /// Quotient rule; skips the denominator derivative when it vanishes.
    pub fn partial(&self, i: usize) -> RationalExpression {
        let dd = self.den.partial(i);
        if dd.is_zero() {
            return RationalExpression::normalized(self.num.partial(i), self.den.clone());
        }
        let top = &self.num.partial(i) * &self.den - &self.num * &dd;
        RationalExpression::normalized(top, &self.den * &self.den)
    }

    /// `a/b == c/d` iff `a·d − c·b` is zero.
    pub fn equals(&self, other: &RationalExpression) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        (&self.num * &other.den - &other.num * &self.den).is_zero()
    }

    pub fn evaluate(&self, coords: &[f64], params: &BTreeMap<Symbol, f64>) -> Result<f64, ExprError> {
        let d = self.den.evaluate(coords, params)?;
        if d == 0.0 {
            return Err(ExprError::DivisionByZero);
        }
        Ok(self.num.evaluate(coords, params)? / d)
    }

    pub fn evaluate_exact(
        &self,
        coords: &[BigRational],
        params: &BTreeMap<Symbol, BigRational>,
    ) -> Result<BigRational, ExprError> {
        let d = self.den.evaluate_exact(coords, params)?;
        if d.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(self.num.evaluate_exact(coords, params)? / d)
    }

    pub fn bind(&self, values: &BTreeMap<Symbol, BigRational>) -> Result<RationalExpression, ExprError> {
        RationalExpression::new(self.num.bind(values)?, self.den.bind(values)?)
    }
}

/// If every term of `e` shares one exponential-only basis factor, returns it.
fn common_unit_basis(e: &Expression) -> Option<Basis> {
    let mut it = e.keys();
    let first = it.next()?;
    if !first.basis.is_unit() || first.basis.is_one() {
        return None;
    }
    e.keys().all(|k| k.basis == first.basis).then(|| first.basis.clone())
}

impl From<Expression> for RationalExpression {
    fn from(e: Expression) -> Self {
        RationalExpression::from_expression(e)
    }
}

impl fmt::Display for RationalExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl PartialEq for RationalExpression {
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}
