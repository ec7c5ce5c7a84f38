//! Compatibility equations for a constant `P` and an affine `P′`: linear stage,
//! exact elimination, quadratic residuals and verification of published pairs.

mod linear;
mod matrix_form;


use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use linear::{LinearSystem, SolutionFamily};
pub use matrix_form::{derivative_matrix, jacobi_constraints_constant, jacobi_matrix, mixed_bracket_via_frame, mixed_jacobi_matrix};

use crate::catalog::{Catalog, CatalogError, LieAlgebra};
use crate::expr::{ExprError, ExprMatrix, Expression, Symbol};
use crate::poisson::{bivector_from_frame, check_compatibility, schouten_mixed, schouten_self, BivectorField, CompatibilityReport, PoissonError, TrivectorField};
use crate::sampling;
use crate::tables::{self, TableRow};
use crate::vielbein::{compute_vielbein, parse_entry_key, VielbeinError, VielbeinMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("linear system is inconsistent at row {row}")]
    Inconsistent { row: usize },
    #[error("coefficient `{0}` of an unknown is not rational; bind every symbol of P")]
    NonRational(String),
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),
    #[error("entry ({i}, {j}) of P′ lies outside the pattern")]
    OutsidePattern { i: usize, j: usize },
    #[error("entry ({i}, {j}) of P′ is not affine in the coordinates: `{value}`")]
    NotAffine { i: usize, j: usize, value: String },
    #[error("unknown table row `{0}`")]
    UnknownRow(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Vielbein(#[from] VielbeinError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// How affine coefficients of `P′` are named.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Naming {
    /// `c44` is the `x4` coefficient of entry `(3, 4)`: row letter, column, coordinate.
    #[default]
    RowLetter,
    /// `a53` is the `x3` coefficient of the fifth pair `(2, 3)`, pairs counted from 2.
    PairIndex,
}

/// Sparsity masks (zero-based, `i < j`) of the constant `P` and affine `P′`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnsatzPattern {
    pub dim: usize,
    pub p: BTreeSet<(usize, usize)>,
    pub pprime: BTreeSet<(usize, usize)>,
    pub naming: Naming,
}

/// On-disk pattern: entries as `"i,j"` strings, one-based.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pprime: Option<Vec<String>>,
    #[serde(default)]
    pub naming: Naming,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_values: Option<BTreeMap<String, String>>,
}

fn all_pairs(dim: usize) -> BTreeSet<(usize, usize)> {
    (0..dim).flat_map(|i| (i + 1..dim).map(move |j| (i, j))).collect()
}

fn parse_entries(dim: usize, keys: &[String]) -> Result<BTreeSet<(usize, usize)>, SolverError> {
    keys.iter()
        .map(|k| match parse_entry_key(k) {
            Some((i, j)) if i < j && j < dim => Ok((i, j)),
            _ => Err(SolverError::InvalidPattern(format!("entry `{k}` is not i,j with 1 <= i < j <= {dim}"))),
        })
        .collect()
}

impl AnsatzPattern {
    /// Every entry free in both `P` and `P′`.
    pub fn full(dim: usize, naming: Naming) -> Result<Self, SolverError> {
        let pat = AnsatzPattern { dim, p: all_pairs(dim), pprime: all_pairs(dim), naming };
        pat.check()?;
        Ok(pat)
    }

    pub fn from_file(dim: usize, file: &PatternFile) -> Result<Self, SolverError> {
        let p = match &file.p {
            Some(keys) => parse_entries(dim, keys)?,
            None => all_pairs(dim),
        };
        let pprime = match &file.pprime {
            Some(keys) => parse_entries(dim, keys)?,
            None => all_pairs(dim),
        };
        let pat = AnsatzPattern { dim, p, pprime, naming: file.naming };
        pat.check()?;
        Ok(pat)
    }

    /// Full `P′` pattern, `P` restricted to the row's entries, naming by table.
    pub fn for_row(row: &TableRow) -> Result<Self, SolverError> {
        let dim = row.dim();
        let keys: Vec<String> = row.p.keys().cloned().collect();
        let naming = if row.table == 1 { Naming::PairIndex } else { Naming::RowLetter };
        let pat = AnsatzPattern { dim, p: parse_entries(dim, &keys)?, pprime: all_pairs(dim), naming };
        pat.check()?;
        Ok(pat)
    }

    fn check(&self) -> Result<(), SolverError> {
        if self.dim > 9 {
            return Err(SolverError::InvalidPattern("dimension above 9".into()));
        }
        if self.naming == Naming::PairIndex && self.dim != 4 {
            return Err(SolverError::InvalidPattern("pair-index naming needs dimension 4".into()));
        }
        Ok(())
    }

    pub fn p_symbol(i: usize, j: usize) -> Symbol {
        Symbol::new(&format!("p{}{}", i + 1, j + 1))
    }

    pub fn constant_symbol(i: usize, j: usize) -> Symbol {
        Symbol::new(&format!("p'{}{}", i + 1, j + 1))
    }

    /// Name of the `x_{k+1}` coefficient of entry `(i, j)`.
    pub fn coefficient_symbol(&self, i: usize, j: usize, k: usize) -> Symbol {
        match self.naming {
            Naming::RowLetter => Symbol::new(&format!("{}{}{}", (b'a' + i as u8) as char, j + 1, k + 1)),
            Naming::PairIndex => {
                let idx = all_pairs(self.dim).iter().position(|&e| e == (i, j)).unwrap_or(0) + 2;
                Symbol::new(&format!("a{idx}{}", k + 1))
            }
        }
    }

    /// `P` with a symbol `p_ij` on every pattern entry.
    pub fn symbolic_p(&self) -> ExprMatrix {
        let mut m = ExprMatrix::zeros(self.dim, self.dim);
        for &(i, j) in &self.p {
            let s = Expression::symbol(Self::p_symbol(i, j));
            m[(j, i)] = -&s;
            m[(i, j)] = s;
        }
        m
    }

    /// Unknowns ordered by entry, then the constant, then the coordinate.
    pub fn unknowns(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        for &(i, j) in &self.pprime {
            out.push(Self::constant_symbol(i, j));
            out.extend((0..self.dim).map(|k| self.coefficient_symbol(i, j, k)));
        }
        out
    }

    /// `P′^{ij} = p′_ij + Σ_k c_ijk x_k` on the pattern.
    pub fn pprime_ansatz(&self) -> ExprMatrix {
        let mut m = ExprMatrix::zeros(self.dim, self.dim);
        for &(i, j) in &self.pprime {
            let e = (0..self.dim).fold(Expression::symbol(Self::constant_symbol(i, j)), |acc, k| {
                acc + &Expression::symbol(self.coefficient_symbol(i, j, k)) * &Expression::coord(k)
            });
            m[(j, i)] = -&e;
            m[(i, j)] = e;
        }
        m
    }

    /// Values of the unknowns that reproduce an affine `P′` matrix.
    pub fn unknown_values(&self, pprime: &ExprMatrix) -> Result<BTreeMap<Symbol, Expression>, SolverError> {
        let mut out: BTreeMap<Symbol, Expression> = self.unknowns().into_iter().map(|s| (s, Expression::zero())).collect();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                let e = &pprime[(i, j)];
                if e.is_zero() {
                    continue;
                }
                if !self.pprime.contains(&(i, j)) {
                    return Err(SolverError::OutsidePattern { i: i + 1, j: j + 1 });
                }
                for (basis, c) in e.collect_by_basis() {
                    let sym = if basis.is_one() {
                        Self::constant_symbol(i, j)
                    } else if let Some(k) = basis.as_linear_coordinate() {
                        self.coefficient_symbol(i, j, k)
                    } else {
                        return Err(SolverError::NotAffine { i: i + 1, j: j + 1, value: e.to_string() });
                    };
                    out.insert(sym, c);
                }
            }
        }
        Ok(out)
    }
}

/// Nonzero random values for every symbol occurring in `P`.
pub fn random_bindings(p: &ExprMatrix, seed: u64) -> BTreeMap<Symbol, BigRational> {
    let mut symbols = BTreeSet::new();
    for i in 0..p.rows() {
        for j in 0..p.cols() {
            symbols.extend(p[(i, j)].free_symbols());
        }
    }
    sampling::bind_symbols(&mut sampling::rng(seed), &symbols)
}

/// Coefficient rows of `[𝐏, 𝐏′] = 0` over the unknowns of `P′`, for concrete `P`.
pub fn build_linear_stage(
    alg: &LieAlgebra,
    v: &VielbeinMatrix,
    p_values: &ExprMatrix,
    pattern: &AnsatzPattern,
) -> Result<LinearSystem, SolverError> {
    if alg.dim() != pattern.dim || p_values.rows() != pattern.dim {
        return Err(SolverError::InvalidPattern(format!("pattern dimension {} does not match {}", pattern.dim, alg.dim())));
    }
    let unknowns = pattern.unknowns();
    let unknown_set: BTreeSet<Symbol> = unknowns.iter().cloned().collect();
    let p = bivector_from_frame(p_values, v)?;
    let q = bivector_from_frame(&pattern.pprime_ansatz(), v)?;
    let mixed = schouten_mixed(&p, &q)?;
    let mut sys = LinearSystem::new(unknowns.clone());
    for comp in mixed.components().values() {
        for form in comp.collect_linear(&unknown_set)?.into_values() {
            let as_rat = |e: &Expression| e.as_rational().ok_or_else(|| SolverError::NonRational(e.to_string()));
            let mut row = vec![BigRational::zero(); unknowns.len()];
            for (s, c) in &form.coeffs {
                let idx = unknowns.iter().position(|u| u == s).expect("collected over the unknowns");
                row[idx] = as_rat(c)?;
            }
            sys.push(row, -as_rat(&form.constant)?);
        }
    }
    Ok(sys.deduplicated())
}

/// Exact solution family of the linear stage.
pub fn solve_linear_stage(sys: &LinearSystem) -> Result<SolutionFamily, SolverError> {
    sys.solve()
}

/// Values of every unknown on the family, with free unknowns kept symbolic.
pub fn family_parameterization(family: &SolutionFamily) -> BTreeMap<Symbol, Expression> {
    let mut out: BTreeMap<Symbol, Expression> = BTreeMap::new();
    for &f in &family.free {
        out.insert(family.unknowns[f].clone(), Expression::symbol(family.unknowns[f].clone()));
    }
    for (col, coeffs, rhs) in &family.reduced {
        let mut e = Expression::constant(rhs.clone());
        for &f in &family.free {
            if !coeffs[f].is_zero() {
                e = e - Expression::symbol(family.unknowns[f].clone()).scale(&coeffs[f]);
            }
        }
        out.insert(family.unknowns[*col].clone(), e);
    }
    out
}

fn dedupe_up_to_sign(items: impl IntoIterator<Item = Expression>) -> Vec<Expression> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for e in items {
        if e.is_zero() {
            continue;
        }
        let canon = if e.leading_sign() < 0 { -&e } else { e };
        if seen.insert(canon.clone()) {
            out.push(canon);
        }
    }
    out
}

/// Coefficients of `[𝐏′, 𝐏′]` on the family, as polynomials in the free unknowns.
pub fn quadratic_residuals(
    v: &VielbeinMatrix,
    family: &SolutionFamily,
    pattern: &AnsatzPattern,
) -> Result<Vec<Expression>, SolverError> {
    let param = family_parameterization(family);
    let q = pattern.pprime_ansatz().try_map(|e| e.substitute(&param))?;
    let t = schouten_self(&bivector_from_frame(&q, v)?);
    Ok(dedupe_up_to_sign(t.components().values().flat_map(|c| c.collect_by_basis().into_values())))
}

/// Outcome of substituting a concrete `P′` into a solved family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub linear_holds: bool,
    pub failing_rows: Vec<usize>,
    pub quadratic_holds: bool,
    pub failing_residuals: Vec<String>,
}

impl Membership {
    pub fn is_member(&self) -> bool {
        self.linear_holds && self.quadratic_holds
    }
}

/// Checks the linear rows and the quadratic residuals at `values`.
pub fn check_membership(
    sys: &LinearSystem,
    residuals: &[Expression],
    values: &BTreeMap<Symbol, Expression>,
) -> Result<Membership, SolverError> {
    let x: Vec<Expression> = sys.unknowns.iter().map(|s| values.get(s).cloned().unwrap_or_default()).collect();
    let mut failing_rows = Vec::new();
    for (r, (row, b)) in sys.rows.iter().zip(&sys.rhs).enumerate() {
        let lhs = row.iter().zip(&x).fold(Expression::constant(-b.clone()), |acc, (c, v)| {
            if c.is_zero() {
                acc
            } else {
                acc + v.scale(c)
            }
        });
        if !lhs.is_zero() {
            failing_rows.push(r);
        }
    }
    let mut failing_residuals = Vec::new();
    for res in residuals {
        let r = res.substitute(values)?;
        if !r.is_zero() {
            failing_residuals.push(r.to_string());
        }
    }
    Ok(Membership {
        linear_holds: failing_rows.is_empty(),
        failing_rows,
        quadratic_holds: failing_residuals.is_empty(),
        failing_residuals,
    })
}

/// Full solver run on a table row: bind `P`, solve, extract residuals, test the row's `P′`.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub pattern: AnsatzPattern,
    pub bindings: BTreeMap<Symbol, BigRational>,
    pub system: LinearSystem,
    pub family: SolutionFamily,
    pub residuals: Vec<Expression>,
    pub membership: Membership,
}

pub fn recover_row(row: &TableRow, catalog: &Catalog, seed: u64) -> Result<Recovery, SolverError> {
    let alg = row.lie_algebra(catalog)?;
    let v = compute_vielbein(&alg)?;
    let pattern = AnsatzPattern::for_row(row)?;
    let p = row.p_matrix()?;
    let bindings = random_bindings(&p, seed);
    let p_bound = p.bind(&bindings)?;
    let system = build_linear_stage(&alg, &v, &p_bound, &pattern)?;
    let family = solve_linear_stage(&system)?;
    let residuals = quadratic_residuals(&v, &family, &pattern)?;
    let table_pprime = row.pprime_matrix()?.bind(&bindings)?;
    let values = pattern.unknown_values(&table_pprime)?;
    let membership = check_membership(&system, &residuals, &values)?;
    Ok(Recovery { pattern, bindings, system, family, residuals, membership })
}

/// One printed group-coordinate entry that differs from the computed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryMismatch {
    pub field: String,
    pub entry: (usize, usize),
    pub printed: String,
    pub computed: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableVerification {
    pub row: String,
    pub algebra: String,
    pub compatibility: CompatibilityReport,
    pub side_conditions: Vec<String>,
    pub notes: Vec<String>,
    pub printed_mismatches: Vec<EntryMismatch>,
    pub minimal_residual: Option<String>,
}

impl TableVerification {
    pub fn passes(&self) -> bool {
        self.compatibility.all_hold()
    }
}

fn compare_printed(field: &str, printed: Option<BivectorField>, computed: &BivectorField) -> Vec<EntryMismatch> {
    let Some(printed) = printed else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for i in 0..computed.dim() {
        for j in i + 1..computed.dim() {
            if printed.get(i, j) != computed.get(i, j) {
                out.push(EntryMismatch {
                    field: field.into(),
                    entry: (i + 1, j + 1),
                    printed: printed.get(i, j).to_string(),
                    computed: computed.get(i, j).to_string(),
                });
            }
        }
    }
    out
}

/// Group-coordinate bivectors `(𝐏, 𝐏′)` of a table row, parameters symbolic.
pub fn row_bivectors(row: &TableRow, catalog: &Catalog) -> Result<(BivectorField, BivectorField), SolverError> {
    let alg = row.lie_algebra(catalog)?;
    let v = compute_vielbein(&alg)?;
    Ok((bivector_from_frame(&row.p_matrix()?, &v)?, bivector_from_frame(&row.pprime_matrix()?, &v)?))
}

/// Checks the stored pair of a table row with symbolic parameters.
pub fn verify_pair(row: &TableRow, p: &BivectorField, q: &BivectorField) -> Result<TableVerification, SolverError> {
    let compatibility = check_compatibility(p, q)?;
    let minimal_residual = [&compatibility.p_p, &compatibility.pprime_pprime, &compatibility.p_pprime]
        .into_iter()
        .filter_map(|c| c.minimal_residual())
        .min_by_key(|(_, s)| s.len())
        .map(|((a, b, c), s)| format!("({a},{b},{c}): {s}"));
    let mut printed_mismatches = compare_printed("P", row.printed_bivector()?, p);
    printed_mismatches.extend(compare_printed("P'", row.printed_bivector_prime()?, q));
    Ok(TableVerification {
        row: row.row.clone(),
        algebra: row.algebra.clone(),
        compatibility,
        side_conditions: row.side_conditions.iter().map(|s| format!("{s} != 0")).collect(),
        notes: row.notes.clone(),
        printed_mismatches,
        minimal_residual,
    })
}

pub fn verify_table(name: &str, catalog: &Catalog) -> Result<TableVerification, SolverError> {
    let row = tables::find(name).ok_or_else(|| SolverError::UnknownRow(name.into()))?;
    let (p, q) = row_bivectors(&row, catalog)?;
    verify_pair(&row, &p, &q)
}

/// Trivector from matrix-form components, for comparisons with the direct path.
pub fn components_equal(t: &TrivectorField, comps: &BTreeMap<(usize, usize, usize), Expression>) -> bool {
    t.components() == comps
}
