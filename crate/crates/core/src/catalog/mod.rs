//! Structure constants of real Lie algebras.
//!
//! The built-in catalog covers the symplectic four-dimensional algebras and the
//! nilpotent six-dimensional algebras used by the tables. User algebras load
//! through the same JSON format. Basis indices are one-based.

mod spec;


use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse_rational, ExprError, ExprMatrix, Expression, Symbol};

pub use spec::{parse_specs, write_specs, AlgebraSpec, BracketSpec, ParamSpec};

const BUILTIN: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown algebra `{0}`")]
    UnknownName(String),
    #[error("algebra `{algebra}` needs a value for parameter `{symbol}`")]
    MissingParameter { algebra: String, symbol: String },
    #[error("parameter `{symbol}` = {value} of `{algebra}` violates `{constraint}`")]
    ConstraintViolation { algebra: String, symbol: String, value: String, constraint: String },
    #[error("invalid algebra spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Nonzero,
    OneOf(Vec<BigRational>),
}

impl Constraint {
    pub fn parse(text: &str) -> Result<Constraint, CatalogError> {
        let mut words = text.split_whitespace();
        match words.next() {
            Some("nonzero") if words.next().is_none() => Ok(Constraint::Nonzero),
            Some("one_of") => {
                let vals = words.map(parse_rational).collect::<Result<Vec<_>, _>>()?;
                if vals.is_empty() {
                    return Err(CatalogError::InvalidSpec(format!("empty constraint `{text}`")));
                }
                Ok(Constraint::OneOf(vals))
            }
            _ => Err(CatalogError::InvalidSpec(format!("unknown constraint `{text}`"))),
        }
    }

    pub fn admits(&self, v: &BigRational) -> bool {
        match self {
            Constraint::Nonzero => !v.is_zero(),
            Constraint::OneOf(vals) => vals.contains(v),
        }
    }
}

/// A Lie algebra with structure constants `C_{ij}^k`, stored for `i < j`.
///
/// Coefficients are expressions in the algebra parameters. Bound parameters are
/// substituted; unbound ones stay symbolic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieAlgebra {
    name: String,
    dim: usize,
    symplectic: bool,
    params: BTreeMap<Symbol, BigRational>,
    free_params: Vec<Symbol>,
    structure: BTreeMap<(usize, usize, usize), Expression>,
    declared: Vec<(usize, usize, usize, Expression)>,
}

/// Matrices `(𝒳_i)_j^k = −C_{ij}^k` and `(𝒴^k)_{ij} = −C_{ij}^k`, zero-based storage.
#[derive(Clone, Debug)]
pub struct AdjointRep {
    pub x_mats: Vec<ExprMatrix>,
    pub y_mats: Vec<ExprMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Antisymmetry { i: usize, j: usize, k: usize, residual: String },
    Jacobi { i: usize, j: usize, k: usize, s: usize, residual: String },
    OddSymplecticDimension { dim: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LieAlgebra {
    /// Builds the algebra from a spec, substituting `values` (and spec defaults).
    /// Parameters without a value stay symbolic.
    pub fn from_spec(spec: &AlgebraSpec, values: &BTreeMap<Symbol, BigRational>) -> Result<Self, CatalogError> {
        if spec.dim == 0 {
            return Err(CatalogError::InvalidSpec(format!("`{}` has dimension 0", spec.name)));
        }
        let mut params = BTreeMap::new();
        let mut free_params = Vec::new();
        for p in &spec.params {
            if !Symbol::is_valid_name(&p.symbol) {
                return Err(CatalogError::InvalidSpec(format!("bad parameter name `{}`", p.symbol)));
            }
            let sym = Symbol::new(&p.symbol);
            let value = match values.get(&sym) {
                Some(v) => Some(v.clone()),
                None => p.value.as_deref().map(parse_rational).transpose()?,
            };
            match value {
                Some(v) => {
                    for c in &p.constraints {
                        if !Constraint::parse(c)?.admits(&v) {
                            return Err(CatalogError::ConstraintViolation {
                                algebra: spec.name.clone(),
                                symbol: p.symbol.clone(),
                                value: v.to_string(),
                                constraint: c.clone(),
                            });
                        }
                    }
                    params.insert(sym, v);
                }
                None => {
                    for c in &p.constraints {
                        Constraint::parse(c)?;
                    }
                    free_params.push(sym);
                }
            }
        }
        let mut declared = Vec::with_capacity(spec.brackets.len());
        for BracketSpec(i, j, k, coef) in &spec.brackets {
            for idx in [i, j, k] {
                if *idx == 0 || *idx > spec.dim {
                    return Err(CatalogError::InvalidSpec(format!(
                        "`{}`: index {idx} outside 1..={}",
                        spec.name, spec.dim
                    )));
                }
            }
            let c = Expression::parse_with(coef, &params)?;
            if !c.free_coordinates().is_empty() {
                return Err(CatalogError::InvalidSpec(format!("coefficient `{coef}` depends on coordinates")));
            }
            if let Some(s) = c.free_symbols().into_iter().find(|s| !free_params.contains(s)) {
                return Err(CatalogError::InvalidSpec(format!("`{}`: undeclared parameter `{s}`", spec.name)));
            }
            declared.push((*i, *j, *k, c));
        }
        Ok(LieAlgebra::assemble(spec.name.clone(), spec.dim, spec.symplectic, params, free_params, declared))
    }

    /// Algebra from one-based `(i, j, k, C_{ij}^k)` entries without parameters.
    pub fn from_brackets(name: &str, dim: usize, brackets: &[(usize, usize, usize, BigRational)]) -> Self {
        let declared = brackets.iter().map(|(i, j, k, c)| (*i, *j, *k, Expression::constant(c.clone()))).collect();
        LieAlgebra::assemble(name.to_string(), dim, false, BTreeMap::new(), Vec::new(), declared)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebra::from_brackets(&format!("abelian{dim}"), dim, &[])
    }

    fn assemble(
        name: String,
        dim: usize,
        symplectic: bool,
        params: BTreeMap<Symbol, BigRational>,
        free_params: Vec<Symbol>,
        declared: Vec<(usize, usize, usize, Expression)>,
    ) -> Self {
        let mut structure: BTreeMap<(usize, usize, usize), Expression> = BTreeMap::new();
        for (i, j, k, c) in &declared {
            if i == j {
                continue;
            }
            let (key, val) = if i < j { ((*i, *j, *k), c.clone()) } else { ((*j, *i, *k), -c) };
            structure.entry(key).or_insert(val);
        }
        structure.retain(|_, v| !v.is_zero());
        LieAlgebra { name, dim, symplectic, params, free_params, structure, declared }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symplectic(&self) -> bool {
        self.symplectic
    }

    pub fn params(&self) -> &BTreeMap<Symbol, BigRational> {
        &self.params
    }

    pub fn free_params(&self) -> &[Symbol] {
        &self.free_params
    }

    /// Nonzero `C_{ij}^k` with `i < j`, one-based.
    pub fn structure(&self) -> &BTreeMap<(usize, usize, usize), Expression> {
        &self.structure
    }

    /// `C_{ij}^k` for any one-based `i, j, k`.
    pub fn c(&self, i: usize, j: usize, k: usize) -> Expression {
        if i == j {
            return Expression::zero();
        }
        let (a, b, sign) = if i < j { (i, j, false) } else { (j, i, true) };
        match self.structure.get(&(a, b, k)) {
            Some(v) if sign => -v,
            Some(v) => v.clone(),
            None => Expression::zero(),
        }
    }

    /// Rational structure constants, when no parameter is left symbolic.
    pub fn rational_structure(&self) -> Option<BTreeMap<(usize, usize, usize), BigRational>> {
        self.structure.iter().map(|(key, v)| v.as_rational().map(|r| (*key, r))).collect()
    }

    /// Same algebra with further parameters bound.
    pub fn bind(&self, values: &BTreeMap<Symbol, BigRational>) -> Result<LieAlgebra, CatalogError> {
        let mut params = self.params.clone();
        let mut free_params = Vec::new();
        for s in &self.free_params {
            match values.get(s) {
                Some(v) => {
                    params.insert(s.clone(), v.clone());
                }
                None => free_params.push(s.clone()),
            }
        }
        let declared = self
            .declared
            .iter()
            .map(|(i, j, k, c)| Ok((*i, *j, *k, c.bind(values)?)))
            .collect::<Result<Vec<_>, ExprError>>()?;
        Ok(LieAlgebra::assemble(self.name.clone(), self.dim, self.symplectic, params, free_params, declared))
    }

    /// Antisymmetry of the declared brackets and the Jacobi identity, symbolically
    /// in any free parameters.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.symplectic && self.dim % 2 == 1 {
            violations.push(Violation::OddSymplecticDimension { dim: self.dim });
        }
        let mut seen: BTreeMap<(usize, usize, usize), Expression> = BTreeMap::new();
        for (i, j, k, c) in &self.declared {
            if i == j {
                if !c.is_zero() {
                    violations.push(Violation::Antisymmetry { i: *i, j: *j, k: *k, residual: c.to_string() });
                }
                continue;
            }
            let (key, val) = if i < j { ((*i, *j, *k), c.clone()) } else { ((*j, *i, *k), -c) };
            if let Some(prev) = seen.get(&key) {
                let diff = prev - &val;
                if !diff.is_zero() {
                    violations.push(Violation::Antisymmetry { i: *i, j: *j, k: *k, residual: diff.to_string() });
                }
            } else {
                seen.insert(key, val);
            }
        }
        let m = self.dim;
        for i in 1..=m {
            for j in i + 1..=m {
                for k in j + 1..=m {
                    for s in 1..=m {
                        let r = self.jacobi_component(i, j, k, s);
                        if !r.is_zero() {
                            violations.push(Violation::Jacobi { i, j, k, s, residual: r.to_string() });
                        }
                    }
                }
            }
        }
        ValidationReport { violations }
    }

    /// `Σ_l (C_{ij}^l C_{lk}^s + C_{jk}^l C_{li}^s + C_{ki}^l C_{lj}^s)`.
    pub fn jacobi_component(&self, i: usize, j: usize, k: usize, s: usize) -> Expression {
        let mut acc = Expression::zero();
        for l in 1..=self.dim {
            for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                let x = self.c(a, b, l);
                if x.is_zero() {
                    continue;
                }
                let y = self.c(l, c, s);
                if !y.is_zero() {
                    acc = acc + &x * &y;
                }
            }
        }
        acc
    }

    pub fn adjoint(&self) -> AdjointRep {
        let m = self.dim;
        let x_mats = (1..=m).map(|i| ExprMatrix::from_fn(m, m, |j, k| -self.c(i, j + 1, k + 1))).collect();
        let y_mats = (1..=m).map(|k| ExprMatrix::from_fn(m, m, |i, j| -self.c(i + 1, j + 1, k))).collect();
        AdjointRep { x_mats, y_mats }
    }
}

/// Lowercase, with `_ { } ^ ,` and whitespace removed.
fn normalize_name(name: &str) -> String {
    name.chars().filter(|c| !matches!(c, '_' | '{' | '}' | '^' | ',') && !c.is_whitespace()).flat_map(char::to_lowercase).collect()
}

/// Named algebra specs with exact and normalized lookup.
#[derive(Clone, Debug)]
pub struct Catalog {
    specs: Vec<AlgebraSpec>,
}

impl Catalog {
    pub fn builtin() -> Self {
        Catalog { specs: parse_specs(BUILTIN).expect("bundled catalog parses") }
    }

    pub fn from_specs(specs: Vec<AlgebraSpec>) -> Self {
        Catalog { specs }
    }

    pub fn specs(&self) -> &[AlgebraSpec] {
        &self.specs
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.specs.iter().map(|s| s.name.as_str())
    }

    /// Adds or replaces a spec with the same name.
    pub fn register(&mut self, spec: AlgebraSpec) {
        match self.specs.iter_mut().find(|s| s.name == spec.name) {
            Some(slot) => *slot = spec,
            None => self.specs.push(spec),
        }
    }

    pub fn spec(&self, name: &str) -> Option<&AlgebraSpec> {
        self.specs.iter().find(|s| s.name == name).or_else(|| {
            let key = normalize_name(name);
            self.specs.iter().find(|s| normalize_name(&s.name) == key)
        })
    }

    /// Algebra with every parameter bound; `abelian<m>` is always available.
    pub fn lookup(&self, name: &str, values: &BTreeMap<Symbol, BigRational>) -> Result<LieAlgebra, CatalogError> {
        let alg = self.lookup_symbolic(name, values)?;
        if let Some(s) = alg.free_params.first() {
            return Err(CatalogError::MissingParameter { algebra: alg.name, symbol: s.to_string() });
        }
        Ok(alg)
    }

    /// Algebra with unbound parameters left symbolic.
    pub fn lookup_symbolic(
        &self,
        name: &str,
        values: &BTreeMap<Symbol, BigRational>,
    ) -> Result<LieAlgebra, CatalogError> {
        if let Some(spec) = self.spec(name) {
            return LieAlgebra::from_spec(spec, values);
        }
        if let Some(m) = name.strip_prefix("abelian").and_then(|d| d.parse::<usize>().ok()) {
            if (1..=9).contains(&m) {
                return Ok(LieAlgebra::abelian(m));
            }
        }
        Err(CatalogError::UnknownName(name.to_string()))
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::builtin()
    }
}
