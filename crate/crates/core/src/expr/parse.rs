use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{ExprError, Expression, Symbol};

/// Zero-based coordinate index for names of the form `x<digits>` with digits >= 1.
pub(crate) fn coordinate_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse::<usize>().ok().map(|n| n - 1)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = bytes[start..i].iter().collect();
            out.push((start, Tok::Num(text.parse().expect("digits"))));
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '\'') {
                i += 1;
            }
            out.push((start, Tok::Ident(bytes[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ExprError::Parse { pos: i, msg: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    bindings: &'a BTreeMap<Symbol, BigRational>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.here(), msg: msg.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<(), ExprError> {
        if self.eat(op) {
            Ok(())
        } else {
            self.err(format!("expected `{op}`"))
        }
    }

    fn expr(&mut self) -> Result<Expression, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat('/') {
                let at = self.here();
                let d = self.unary()?;
                if d.is_zero() {
                    return Err(ExprError::Parse { pos: at, msg: "division by zero".into() });
                }
                let inv = d.inverse_unit().ok_or_else(|| ExprError::NonUnitDivisor(d.to_string()))?;
                acc = &acc * &inv;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expression, ExprError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression, ExprError> {
        let base = self.atom()?;
        if self.eat('^') {
            let negative = self.eat('-');
            let n = match self.peek() {
                Some(Tok::Num(n)) => n.clone(),
                _ => return self.err("expected integer exponent"),
            };
            self.pos += 1;
            let n: i32 = i32::try_from(n).or_else(|_| self.err("exponent too large"))?;
            let n = if negative { -n } else { n };
            return base.powi(n);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expression, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expression::constant(BigRational::from_integer(n)))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if matches!(name.as_str(), "exp" | "sin" | "cos") {
                    self.expect('(')?;
                    let at = self.here();
                    let arg = self.expr()?;
                    self.expect(')')?;
                    let (i, lambda) = linear_argument(&arg)
                        .ok_or(ExprError::Parse { pos: at, msg: format!("unsupported argument `{arg}`") })?;
                    return Ok(match (name.as_str(), i) {
                        (_, None) if name == "sin" => Expression::zero(),
                        (_, None) => Expression::one(),
                        ("exp", Some(i)) => Expression::exp(i, lambda),
                        ("sin", Some(i)) => Expression::sin(i, lambda),
                        (_, Some(i)) => Expression::cos(i, lambda),
                    });
                }
                if let Some(i) = coordinate_index(&name) {
                    return Ok(Expression::coord(i));
                }
                if name.starts_with('x') && name[1..].bytes().all(|b| b.is_ascii_digit()) {
                    return self.err(format!("invalid coordinate `{name}`"));
                }
                let sym = Symbol::new(&name);
                match self.bindings.get(&sym) {
                    Some(v) => Ok(Expression::constant(v.clone())),
                    None => Ok(Expression::symbol(sym)),
                }
            }
            Some(Tok::Op(c)) => self.err(format!("unexpected `{c}`")),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Recognizes `lambda * x_i` with rational lambda; `None` coordinate for the zero argument.
fn linear_argument(arg: &Expression) -> Option<(Option<usize>, BigRational)> {
    if arg.is_zero() {
        return Some((None, BigRational::zero()));
    }
    if arg.len() != 1 {
        return None;
    }
    let (k, c) = arg.terms().next()?;
    if !k.params.is_one() {
        return None;
    }
    let i = k.basis.as_linear_coordinate()?;
    Some((Some(i), c.clone()))
}

impl Expression {
    /// Parses `+ - * / ^`, parentheses, `exp`, `sin`, `cos`, coordinates `x1, x2, …`,
    /// integer literals and parameter names such as `p'12`. Division is only by units.
    pub fn parse(text: &str) -> Result<Expression, ExprError> {
        Expression::parse_with(text, &BTreeMap::new())
    }

    /// Like [`Expression::parse`], replacing bound parameters by their values while parsing.
    pub fn parse_with(text: &str, bindings: &BTreeMap<Symbol, BigRational>) -> Result<Expression, ExprError> {
        let toks = tokenize(text)?;
        let mut p = Parser { toks, pos: 0, end: text.len(), bindings };
        if p.toks.is_empty() {
            return p.err("empty expression");
        }
        let e = p.expr()?;
        if p.pos != p.toks.len() {
            return p.err("trailing input");
        }
        Ok(e)
    }
}

impl std::str::FromStr for Expression {
    type Err = ExprError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expression::parse(s)
    }
}

/// Parses a rational literal `n` or `n/d` with optional sign.
pub fn parse_rational(text: &str) -> Result<BigRational, ExprError> {
    let e = Expression::parse(text)?;
    e.as_rational().ok_or(ExprError::Parse { pos: 0, msg: format!("`{text}` is not a rational number") })
}
