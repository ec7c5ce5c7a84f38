use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::key::{mul_keys, normalize_trig, Basis, Key, ParamMonomial, Trig, TrigKind};
use super::{ExprError, Symbol};

/// Canonical sum of terms `coeff * params * basis`. Two expressions are equal
/// iff their term maps are identical.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expression {
    terms: BTreeMap<Key, BigRational>,
}

/// Affine form over a set of unknowns with expression coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearForm {
    pub coeffs: BTreeMap<Symbol, Expression>,
    pub constant: Expression,
}

impl LinearForm {
    /// Reassembles `Σ coeff·unknown + constant`.
    pub fn to_expression(&self) -> Expression {
        let mut out = self.constant.clone();
        for (s, c) in &self.coeffs {
            out = out + c * &Expression::symbol(s.clone());
        }
        out
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Expression {
    pub fn zero() -> Self {
        Expression::default()
    }

    pub fn one() -> Self {
        Expression::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Expression::from_term(c, Key::one())
    }

    pub fn integer(n: i64) -> Self {
        Expression::constant(BigRational::from_integer(n.into()))
    }

    /// Coordinate function `x_{i+1}` (zero-based index `i`).
    pub fn coord(i: usize) -> Self {
        Expression::from_term(BigRational::one(), Key { basis: Basis::coordinate(i), params: ParamMonomial::one() })
    }

    pub fn symbol(s: Symbol) -> Self {
        Expression::from_term(BigRational::one(), Key { basis: Basis::one(), params: ParamMonomial::symbol(s) })
    }

    pub fn param(name: &str) -> Self {
        Expression::symbol(Symbol::new(name))
    }

    /// `e^{lambda * x_i}`.
    pub fn exp(i: usize, lambda: BigRational) -> Self {
        if lambda.is_zero() {
            return Expression::one();
        }
        let mut basis = Basis::one();
        basis.exp.insert(i, lambda);
        Expression::from_term(BigRational::one(), Key { basis, params: ParamMonomial::one() })
    }

    pub fn sin(i: usize, freq: BigRational) -> Self {
        Expression::trig(i, TrigKind::Sin, freq)
    }

    pub fn cos(i: usize, freq: BigRational) -> Self {
        Expression::trig(i, TrigKind::Cos, freq)
    }

    fn trig(i: usize, kind: TrigKind, freq: BigRational) -> Self {
        match normalize_trig(kind, freq) {
            None => Expression::zero(),
            Some((sign, None)) => Expression::integer(sign as i64),
            Some((sign, Some(t))) => {
                let mut basis = Basis::one();
                basis.trig.insert(i, t);
                let c = BigRational::from_integer(sign.into());
                Expression::from_term(c, Key { basis, params: ParamMonomial::one() })
            }
        }
    }

    pub fn from_term(coeff: BigRational, key: Key) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(key, coeff);
        }
        Expression { terms }
    }

    /// Builds an expression from arbitrary (possibly repeated) terms.
    pub fn from_terms<I: IntoIterator<Item = (BigRational, Key)>>(items: I) -> Self {
        let mut e = Expression::zero();
        for (c, k) in items {
            e.add_term(k, c);
        }
        e
    }

    fn add_term(&mut self, key: Key, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, coeff);
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Key::one()).is_some_and(|c| c.is_one())
    }

    /// True when no coordinate appears (parameters may).
    pub fn is_coordinate_free(&self) -> bool {
        self.terms.keys().all(|k| k.basis.is_one())
    }

    /// The rational value when the expression has no coordinates and no parameters.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                (k.basis.is_one() && k.params.is_one()).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Inverse of a single exponential-and-parameter term.
    pub fn inverse_unit(&self) -> Option<Expression> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        let basis = k.basis.inverse_unit()?;
        Some(Expression::from_term(c.recip(), Key { basis, params: k.params.inverse() }))
    }

    pub fn scale(&self, c: &BigRational) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn pow(&self, n: u32) -> Expression {
        let mut result = Expression::one();
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Integer power; negative exponents require a unit.
    pub fn powi(&self, n: i32) -> Result<Expression, ExprError> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            let inv = self.inverse_unit().ok_or_else(|| ExprError::NonUnitDivisor(self.to_string()))?;
            Ok(inv.pow(n.unsigned_abs()))
        }
    }

    /// Exact partial derivative with respect to zero-based coordinate `i`.
    pub fn partial(&self, i: usize) -> Expression {
        let mut out = Expression::zero();
        for (k, c) in &self.terms {
            if let Some(&n) = k.basis.mono.get(&i) {
                let mut nk = k.clone();
                if n == 1 {
                    nk.basis.mono.remove(&i);
                } else {
                    nk.basis.mono.insert(i, n - 1);
                }
                out.add_term(nk, c * BigRational::from_integer(n.into()));
            }
            if let Some(l) = k.basis.exp.get(&i) {
                out.add_term(k.clone(), c * l);
            }
            if let Some(t) = k.basis.trig.get(&i) {
                let mut nk = k.clone();
                let (kind, sign) = match t.kind {
                    TrigKind::Sin => (TrigKind::Cos, BigRational::one()),
                    TrigKind::Cos => (TrigKind::Sin, -BigRational::one()),
                };
                nk.basis.trig.insert(i, Trig { kind, freq: t.freq.clone() });
                out.add_term(nk, c * &t.freq * sign);
            }
        }
        out
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|k| k.params.0.keys().cloned()).collect()
    }

    pub fn free_coordinates(&self) -> BTreeSet<usize> {
        self.terms.keys().flat_map(|k| k.basis.coordinates()).collect()
    }

    /// Largest coordinate index present plus one.
    pub fn coordinate_span(&self) -> usize {
        self.free_coordinates().iter().next_back().map_or(0, |&i| i + 1)
    }

    /// True if every trig and exponential factor is absent.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|k| k.basis.exp.is_empty() && k.basis.trig.is_empty())
    }

    /// Floating-point value at a point; `coords[i]` binds `x_{i+1}`.
    pub fn evaluate(&self, coords: &[f64], params: &BTreeMap<Symbol, f64>) -> Result<f64, ExprError> {
        let mut total = 0.0;
        for (k, c) in &self.terms {
            let mut v = c.to_f64().unwrap_or(f64::NAN);
            for (s, &e) in &k.params.0 {
                let p = *params.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.to_string()))?;
                v *= p.powi(e);
            }
            for (&i, &n) in &k.basis.mono {
                v *= coord_value(coords, i)?.powi(n as i32);
            }
            for (&i, l) in &k.basis.exp {
                v *= (l.to_f64().unwrap_or(f64::NAN) * coord_value(coords, i)?).exp();
            }
            for (&i, t) in &k.basis.trig {
                let arg = t.freq.to_f64().unwrap_or(f64::NAN) * coord_value(coords, i)?;
                v *= match t.kind {
                    TrigKind::Sin => arg.sin(),
                    TrigKind::Cos => arg.cos(),
                };
            }
            total += v;
        }
        Ok(total)
    }

    /// Exact rational value. Exponential and trig factors are only allowed where
    /// their argument vanishes.
    pub fn evaluate_exact(
        &self,
        coords: &[BigRational],
        params: &BTreeMap<Symbol, BigRational>,
    ) -> Result<BigRational, ExprError> {
        let mut total = BigRational::zero();
        for (k, c) in &self.terms {
            let mut v = c.clone();
            for (s, &e) in &k.params.0 {
                let p = params.get(s).ok_or_else(|| ExprError::UnboundSymbol(s.to_string()))?;
                v *= rational_powi(p, e)?;
            }
            for (&i, &n) in &k.basis.mono {
                v *= rational_powi(exact_coord(coords, i)?, n as i32)?;
            }
            for &i in k.basis.exp.keys() {
                if !exact_coord(coords, i)?.is_zero() {
                    return Err(ExprError::Transcendental(self.to_string()));
                }
            }
            for (&i, t) in &k.basis.trig {
                if !exact_coord(coords, i)?.is_zero() {
                    return Err(ExprError::Transcendental(self.to_string()));
                }
                if t.kind == TrigKind::Sin {
                    v = BigRational::zero();
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Simultaneous substitution of parameter symbols. Negative powers of a
    /// substituted symbol require its replacement to be a unit.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Expression>) -> Result<Expression, ExprError> {
        let mut out = Expression::zero();
        let mut cache: BTreeMap<(Symbol, i32), Expression> = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut kept = BTreeMap::new();
            let mut factor = Expression::one();
            for (s, &e) in &k.params.0 {
                match map.get(s) {
                    Some(value) => {
                        let key = (s.clone(), e);
                        if !cache.contains_key(&key) {
                            let p = value.powi(e).map_err(|_| ExprError::NonUnitDivisor(format!("{s} := {value}")))?;
                            cache.insert(key.clone(), p);
                        }
                        factor = &factor * &cache[&key];
                    }
                    None => {
                        kept.insert(s.clone(), e);
                    }
                }
            }
            let base = Expression::from_term(c.clone(), Key { basis: k.basis.clone(), params: ParamMonomial(kept) });
            out = out + &base * &factor;
        }
        Ok(out)
    }

    /// Substitutes rational values for parameters.
    pub fn bind(&self, values: &BTreeMap<Symbol, BigRational>) -> Result<Expression, ExprError> {
        let mut out = Expression::zero();
        for (k, c) in &self.terms {
            let mut coeff = c.clone();
            let mut kept = BTreeMap::new();
            for (s, &e) in &k.params.0 {
                match values.get(s) {
                    Some(v) => coeff *= rational_powi(v, e)?,
                    None => {
                        kept.insert(s.clone(), e);
                    }
                }
            }
            out.add_term(Key { basis: k.basis.clone(), params: ParamMonomial(kept) }, coeff);
        }
        Ok(out)
    }

    /// Groups terms by basis function; each value is coordinate-free.
    pub fn collect_by_basis(&self) -> BTreeMap<Basis, Expression> {
        let mut out: BTreeMap<Basis, Expression> = BTreeMap::new();
        for (k, c) in &self.terms {
            out.entry(k.basis.clone())
                .or_default()
                .add_term(Key { basis: Basis::one(), params: k.params.clone() }, c.clone());
        }
        out
    }

    /// Groups terms by basis function and splits each coefficient into an
    /// affine form over `unknowns`.
    pub fn collect_linear(&self, unknowns: &BTreeSet<Symbol>) -> Result<BTreeMap<Basis, LinearForm>, ExprError> {
        let mut out: BTreeMap<Basis, LinearForm> = BTreeMap::new();
        for (k, c) in &self.terms {
            let mut found: Option<&Symbol> = None;
            for (s, &e) in &k.params.0 {
                if unknowns.contains(s) {
                    if e != 1 || found.is_some() {
                        return Err(ExprError::Nonlinear(self.term_string(k, c)));
                    }
                    found = Some(s);
                }
            }
            let form = out.entry(k.basis.clone()).or_default();
            match found {
                Some(s) => {
                    let key = Key { basis: Basis::one(), params: k.params.without(s) };
                    form.coeffs.entry(s.clone()).or_default().add_term(key, c.clone());
                    if form.coeffs[s].is_zero() {
                        form.coeffs.remove(s);
                    }
                }
                None => {
                    let key = Key { basis: Basis::one(), params: k.params.clone() };
                    form.constant.add_term(key, c.clone());
                }
            }
        }
        out.retain(|_, f| !(f.coeffs.is_empty() && f.constant.is_zero()));
        Ok(out)
    }

    fn term_string(&self, k: &Key, c: &BigRational) -> String {
        Expression::from_term(c.clone(), k.clone()).to_string()
    }

    /// Multiplies every term by the basis function `b`.
    pub fn mul_basis(&self, b: &Basis) -> Expression {
        self * &Expression::from_term(BigRational::one(), Key { basis: b.clone(), params: ParamMonomial::one() })
    }

    /// Sign of the leading coefficient (canonical order); zero for zero.
    pub fn leading_sign(&self) -> i32 {
        match self.terms.values().next() {
            None => 0,
            Some(c) if c.is_negative() => -1,
            Some(_) => 1,
        }
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.values().next()
    }

    pub(crate) fn keys(&self) -> impl Iterator<Item = &Key> {
        self.terms.keys()
    }
}

fn coord_value(coords: &[f64], i: usize) -> Result<f64, ExprError> {
    coords.get(i).copied().ok_or(ExprError::UnboundCoordinate(i + 1))
}

fn exact_coord(coords: &[BigRational], i: usize) -> Result<&BigRational, ExprError> {
    coords.get(i).ok_or(ExprError::UnboundCoordinate(i + 1))
}

pub(crate) fn rational_powi(v: &BigRational, e: i32) -> Result<BigRational, ExprError> {
    if e < 0 && v.is_zero() {
        return Err(ExprError::DivisionByZero);
    }
    let mut out = BigRational::one();
    for _ in 0..e.unsigned_abs() {
        out *= v;
    }
    Ok(if e < 0 { out.recip() } else { out })
}

impl Add for Expression {
    type Output = Expression;
    fn add(mut self, rhs: Expression) -> Expression {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl Add for &Expression {
    type Output = Expression;
    fn add(self, rhs: &Expression) -> Expression {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression { terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect() }
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        self.clone().neg()
    }
}

impl Sub for Expression {
    type Output = Expression;
    fn sub(mut self, rhs: Expression) -> Expression {
        for (k, c) in rhs.terms {
            self.add_term(k, -c);
        }
        self
    }
}

impl Sub for &Expression {
    type Output = Expression;
    fn sub(self, rhs: &Expression) -> Expression {
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Expression {
    type Output = Expression;
    fn mul(self, rhs: &Expression) -> Expression {
        let mut out = Expression::zero();
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                let c = ca * cb;
                if ka.basis.trig.is_empty() || kb.basis.trig.is_empty() {
                    let mut parts = mul_keys(ka, kb);
                    let (f, k) = parts.pop().expect("single product");
                    out.add_term(k, c * f);
                } else {
                    for (f, k) in mul_keys(ka, kb) {
                        out.add_term(k, &c * f);
                    }
                }
            }
        }
        out
    }
}

impl Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        &self * &rhs
    }
}

impl From<BigRational> for Expression {
    fn from(c: BigRational) -> Self {
        Expression::constant(c)
    }
}

impl From<i64> for Expression {
    fn from(n: i64) -> Self {
        Expression::integer(n)
    }
}

fn fmt_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn fmt_linear_arg(lambda: &BigRational, i: usize) -> String {
    if lambda.is_one() {
        format!("x{}", i + 1)
    } else if *lambda == -BigRational::one() {
        format!("-x{}", i + 1)
    } else {
        format!("{}*x{}", fmt_rational(lambda), i + 1)
    }
}

/// Renders the non-coefficient factors of a key in deterministic order:
/// parameters, then coordinates ascending with monomial, exponential and trig factors.
fn key_factors(k: &Key) -> Vec<String> {
    let mut f = Vec::new();
    for (s, &e) in &k.params.0 {
        if e == 1 {
            f.push(s.to_string());
        } else {
            f.push(format!("{s}^{e}"));
        }
    }
    let coords: BTreeSet<usize> = k.basis.coordinates().collect();
    for i in coords {
        if let Some(&n) = k.basis.mono.get(&i) {
            if n == 1 {
                f.push(format!("x{}", i + 1));
            } else {
                f.push(format!("x{}^{}", i + 1, n));
            }
        }
        if let Some(l) = k.basis.exp.get(&i) {
            f.push(format!("exp({})", fmt_linear_arg(l, i)));
        }
        if let Some(t) = k.basis.trig.get(&i) {
            let name = match t.kind {
                TrigKind::Sin => "sin",
                TrigKind::Cos => "cos",
            };
            f.push(format!("{name}({})", fmt_linear_arg(&t.freq, i)));
        }
    }
    f
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (k, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if negative {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            let factors = key_factors(k);
            if factors.is_empty() {
                f.write_str(&fmt_rational(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", fmt_rational(&mag))?;
                }
                f.write_str(&factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expression({self})")
    }
}
