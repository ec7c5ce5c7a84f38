//! Self-describing run reports: typed sections, a status summary and a human
//! rendering derived from the structured form.

mod human;

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::biham::{self, BihamError, BihamReport};
use crate::catalog::{Catalog, CatalogError, LieAlgebra, Violation};
use crate::expr::{parse_rational, ExprError, ExprMatrix, Expression, Symbol};
use crate::poisson::{bivector_from_frame, PoissonError};
use crate::solver::{
    self, check_membership, family_parameterization, jacobi_constraints_constant, AnsatzPattern, Membership, Naming,
    PatternFile, SolverError, TableVerification,
};
use crate::tables::{self, TableRow};
use crate::vielbein::{compare_with_fixture, compute_vielbein, fixtures, FixtureFlag, VielbeinError};

pub use human::render_human;

pub const SCHEMA: &str = "compat-poisson.report/1";

/// Errors with the pipeline stage that raised them.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("input: {0}")]
    Input(String),
    #[error("catalog: {0}")]
    Catalog(#[from] CatalogError),
    #[error("vielbein: {0}")]
    Vielbein(#[from] VielbeinError),
    #[error("poisson: {0}")]
    Poisson(#[from] PoissonError),
    #[error("solver: {0}")]
    Solver(#[from] SolverError),
    #[error("analysis: {0}")]
    Biham(#[from] BihamError),
    #[error("expression: {0}")]
    Expr(#[from] ExprError),
}

impl ReportError {
    /// The algebra's adjoint spectrum is outside what the exponential supports.
    pub fn is_unsupported_spectrum(&self) -> bool {
        let v = match self {
            ReportError::Vielbein(v) | ReportError::Solver(SolverError::Vielbein(v)) => v,
            _ => return false,
        };
        matches!(v, VielbeinError::UnsupportedSpectrum { .. } | VielbeinError::SymbolicSpectrum { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub algebra: Option<String>,
    pub params: BTreeMap<String, String>,
    pub k_max: Option<usize>,
}

impl Metadata {
    pub fn new(command: &str, seed: u64) -> Self {
        Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            algebra: None,
            params: BTreeMap::new(),
            k_max: None,
        }
    }
}

/// `failures` are identity checks that did not hold; `discrepancies` are
/// printed reference data that differs from what was computed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub passed: bool,
    pub failures: Vec<String>,
    pub discrepancies: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportDocument {
    pub schema: String,
    pub metadata: Metadata,
    pub sections: Vec<Section>,
    pub status: Status,
}

impl ReportDocument {
    pub fn new(metadata: Metadata, sections: Vec<Section>) -> Self {
        let mut status = Status::default();
        for s in &sections {
            s.collect(&mut status);
        }
        status.passed = status.failures.is_empty();
        ReportDocument { schema: SCHEMA.to_string(), metadata, sections, status }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        render_human(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "section", rename_all = "snake_case")]
pub enum Section {
    Catalog(CatalogSection),
    Validation(ValidationSection),
    Vielbein(VielbeinSection),
    Compatibility(TableVerification),
    SolverFamily(SolverReport),
    BiHamiltonian(BiHamiltonianSection),
    Row(Box<RowReport>),
}

impl Section {
    fn collect(&self, st: &mut Status) {
        match self {
            Section::Catalog(_) => {}
            Section::Validation(v) => v.collect("", st),
            Section::Vielbein(v) => v.collect("", st),
            Section::Compatibility(c) => collect_compatibility(c, "", st),
            Section::SolverFamily(s) => s.collect("", st),
            Section::BiHamiltonian(b) => collect_biham(&b.report, "", st),
            Section::Row(r) => r.collect(st),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    pub dim: usize,
    pub symplectic: bool,
    pub params: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableEntry {
    pub row: String,
    pub table: u8,
    pub algebra: String,
    pub has_integrals: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogSection {
    pub algebras: Vec<CatalogEntry>,
    pub table_rows: Vec<TableEntry>,
}

pub fn catalog_section(catalog: &Catalog) -> CatalogSection {
    CatalogSection {
        algebras: catalog
            .specs()
            .iter()
            .map(|s| CatalogEntry {
                name: s.name.clone(),
                dim: s.dim,
                symplectic: s.symplectic,
                params: s.params.iter().map(|p| p.symbol.clone()).collect(),
            })
            .collect(),
        table_rows: tables::rows()
            .into_iter()
            .map(|r| TableEntry { has_integrals: r.integrals.is_some(), row: r.row, table: r.table, algebra: r.algebra })
            .collect(),
    }
}

fn entry_key(i: usize, j: usize) -> String {
    format!("{},{}", i + 1, j + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationSection {
    pub algebra: String,
    pub dim: usize,
    /// `"i,j,k"` to `C_{ij}^k`, one-based, `i < j`.
    pub structure: BTreeMap<String, String>,
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ValidationSection {
    fn collect(&self, prefix: &str, st: &mut Status) {
        if !self.valid {
            st.failures.push(format!("{prefix}{}: {} structure-constant violations", self.algebra, self.violations.len()));
        }
    }
}

pub fn validation_section(alg: &LieAlgebra) -> ValidationSection {
    let report = alg.validate();
    ValidationSection {
        algebra: alg.name().to_string(),
        dim: alg.dim(),
        structure: alg
            .structure()
            .iter()
            .map(|(&(i, j, k), c)| (format!("{i},{j},{k}"), c.to_string()))
            .collect(),
        valid: report.is_valid(),
        violations: report.violations,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureMismatch {
    pub entry: String,
    pub fixture: String,
    pub computed: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FixtureSection {
    pub matches: bool,
    pub mismatches: Vec<FixtureMismatch>,
    pub flags: Vec<FixtureFlag>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VielbeinSection {
    pub algebra: String,
    /// Row `α` holds the components of the left-invariant field `e_α`.
    pub frame: Vec<Vec<String>>,
    pub dual: Vec<Vec<String>>,
    pub round_trip: bool,
    pub fixture: Option<FixtureSection>,
}

impl VielbeinSection {
    fn collect(&self, prefix: &str, st: &mut Status) {
        if !self.round_trip {
            st.failures.push(format!("{prefix}{}: structure constants not recovered from the frame", self.algebra));
        }
        if let Some(fx) = &self.fixture {
            if !fx.matches {
                st.failures.push(format!("{prefix}{}: frame differs from the reference matrix", self.algebra));
            }
            for f in &fx.flags {
                st.discrepancies.push(format!(
                    "{prefix}{}: reference entry ({}) printed `{}`, computed `{}`",
                    self.algebra, f.entry, f.printed, f.computed
                ));
            }
        }
    }
}

pub fn vielbein_section(alg: &LieAlgebra) -> Result<VielbeinSection, ReportError> {
    let v = compute_vielbein(alg)?;
    let round_trip = match crate::vielbein::recover_structure_constants(&v) {
        Ok(c) => c == *alg.structure(),
        Err(_) => false,
    };
    let fixture = match fixtures().into_iter().find(|f| f.algebra == alg.name()) {
        Some(fx) => {
            let cmp = compare_with_fixture(&v, &fx)?;
            Some(FixtureSection {
                matches: cmp.matches(),
                mismatches: cmp
                    .mismatches
                    .into_iter()
                    .map(|(i, j, fixture, computed)| FixtureMismatch { entry: format!("{i},{j}"), fixture, computed })
                    .collect(),
                flags: cmp.flagged,
            })
        }
        None => None,
    };
    Ok(VielbeinSection {
        algebra: alg.name().to_string(),
        frame: v.frame.to_strings(),
        dual: v.dual.to_strings(),
        round_trip,
        fixture,
    })
}

fn collect_compatibility(c: &TableVerification, prefix: &str, st: &mut Status) {
    let checks = [
        ("[P,P]", &c.compatibility.p_p),
        ("[P',P']", &c.compatibility.pprime_pprime),
        ("[P,P']", &c.compatibility.p_pprime),
    ];
    for (name, check) in checks {
        if !check.holds {
            let res = check.minimal_residual().map(|((a, b, k), s)| format!(" ({a},{b},{k}): {s}")).unwrap_or_default();
            st.failures.push(format!("{prefix}{}: {name} != 0{res}", c.row));
        }
    }
    for m in &c.printed_mismatches {
        st.discrepancies.push(format!(
            "{prefix}{}: printed {} entry ({},{}) is `{}`, computed `{}`",
            c.row, m.field, m.entry.0, m.entry.1, m.printed, m.computed
        ));
    }
}

/// One free direction of the solved family: unknown to coefficient, nonzero only.
pub type FamilyVector = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolverReport {
    pub algebra: String,
    pub naming: Naming,
    #[serde(rename = "P_pattern")]
    pub p_pattern: Vec<String>,
    #[serde(rename = "P_prime_pattern")]
    pub pprime_pattern: Vec<String>,
    #[serde(rename = "P_values")]
    pub p_values: BTreeMap<String, String>,
    /// Random values given to symbols of `P`.
    pub bindings: BTreeMap<String, String>,
    pub p_is_poisson: bool,
    pub unknowns: usize,
    pub equations: usize,
    pub linear_rank: usize,
    pub nullity: usize,
    pub free_parameters: Vec<String>,
    pub particular: FamilyVector,
    pub family_basis: Vec<FamilyVector>,
    /// Every determined unknown in terms of the free parameters.
    pub parameterization: BTreeMap<String, String>,
    pub quadratic_residuals: Vec<String>,
    pub table_match: Option<bool>,
    pub membership: Option<Membership>,
}

impl SolverReport {
    fn collect(&self, prefix: &str, st: &mut Status) {
        if !self.p_is_poisson {
            st.failures.push(format!("{prefix}{}: constant P violates the Jacobi identity", self.algebra));
        }
        if self.table_match == Some(false) {
            st.failures.push(format!("{prefix}{}: published P' is not in the solved family", self.algebra));
        }
    }
}

fn vector(unknowns: &[Symbol], values: &[BigRational]) -> FamilyVector {
    unknowns.iter().zip(values).filter(|(_, v)| !v.is_zero()).map(|(u, v)| (u.to_string(), v.to_string())).collect()
}

/// Parses `"i,j" -> value` entries into a constant antisymmetric matrix.
pub fn matrix_from_entries(dim: usize, entries: &BTreeMap<String, String>) -> Result<ExprMatrix, ReportError> {
    let mut m = ExprMatrix::zeros(dim, dim);
    for (key, text) in entries {
        let (i, j) = key
            .split_once(',')
            .and_then(|(a, b)| Some((a.trim().parse::<usize>().ok()?, b.trim().parse::<usize>().ok()?)))
            .filter(|&(i, j)| 1 <= i && i < j && j <= dim)
            .ok_or_else(|| ReportError::Input(format!("entry `{key}` is not i,j with 1 <= i < j <= {dim}")))?;
        let v = Expression::parse(text)?;
        m[(i - 1, j - 1)] = v.clone();
        m[(j - 1, i - 1)] = -&v;
    }
    Ok(m)
}

/// Solves the linear stage for `P′` given `P` (symbols bound from `seed`),
/// extracts quadratic residuals and, for a table row, tests its `P′`.
pub fn solve(
    alg: &LieAlgebra,
    pattern: &AnsatzPattern,
    p: &ExprMatrix,
    row: Option<&TableRow>,
    seed: u64,
) -> Result<SolverReport, ReportError> {
    let v = compute_vielbein(alg)?;
    let bindings = solver::random_bindings(p, seed);
    let p_bound = p.bind(&bindings)?;
    for i in 0..pattern.dim {
        for j in i + 1..pattern.dim {
            if !p_bound[(i, j)].is_zero() && !pattern.p.contains(&(i, j)) {
                return Err(SolverError::OutsidePattern { i: i + 1, j: j + 1 }.into());
            }
        }
    }
    let p_is_poisson = jacobi_constraints_constant(alg, &p_bound).is_empty();
    let system = solver::build_linear_stage(alg, &v, &p_bound, pattern)?;
    let family = solver::solve_linear_stage(&system)?;
    let residuals = solver::quadratic_residuals(&v, &family, pattern)?;
    let membership = match row {
        Some(r) => {
            let table = r.pprime_matrix()?.bind(&bindings)?;
            Some(match pattern.unknown_values(&table) {
                Ok(values) => check_membership(&system, &residuals, &values)?,
                Err(SolverError::OutsidePattern { i, j }) => Membership {
                    linear_holds: false,
                    failing_rows: Vec::new(),
                    quadratic_holds: false,
                    failing_residuals: vec![format!("entry ({i},{j}) outside the pattern")],
                },
                Err(e) => return Err(e.into()),
            })
        }
        None => None,
    };
    let free: BTreeSet<usize> = family.free.iter().copied().collect();
    let param = family_parameterization(&family);
    Ok(SolverReport {
        algebra: alg.name().to_string(),
        naming: pattern.naming,
        p_pattern: pattern.p.iter().map(|&(i, j)| entry_key(i, j)).collect(),
        pprime_pattern: pattern.pprime.iter().map(|&(i, j)| entry_key(i, j)).collect(),
        p_values: pattern
            .p
            .iter()
            .filter(|&&(i, j)| !p_bound[(i, j)].is_zero())
            .map(|&(i, j)| (entry_key(i, j), p_bound[(i, j)].to_string()))
            .collect(),
        bindings: bindings.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        p_is_poisson,
        unknowns: system.unknowns.len(),
        equations: system.rows.len(),
        linear_rank: family.rank,
        nullity: family.nullity(),
        free_parameters: family.free.iter().map(|&f| family.unknowns[f].to_string()).collect(),
        particular: vector(&family.unknowns, &family.particular),
        family_basis: family.basis.iter().map(|b| vector(&family.unknowns, b)).collect(),
        parameterization: param
            .iter()
            .filter(|(s, _)| !free.iter().any(|&f| family.unknowns[f] == **s))
            .map(|(s, e)| (s.to_string(), e.to_string()))
            .collect(),
        quadratic_residuals: residuals.iter().map(|r| r.to_string()).collect(),
        table_match: membership.as_ref().map(Membership::is_member),
        membership,
    })
}

/// Solver run on a table row with its own `P` and table naming, or a pattern override.
pub fn solve_row(row: &TableRow, catalog: &Catalog, pattern: Option<&PatternFile>, seed: u64) -> Result<SolverReport, ReportError> {
    let alg = row.lie_algebra(catalog)?;
    let pat = match pattern {
        Some(f) => AnsatzPattern::from_file(row.dim(), f)?,
        None => AnsatzPattern::for_row(row)?,
    };
    let p = match pattern.and_then(|f| f.p_values.as_ref()) {
        Some(vals) => matrix_from_entries(row.dim(), vals)?,
        None => row.p_matrix()?,
    };
    solve(&alg, &pat, &p, Some(row), seed)
}

/// A pair to analyze, given by its frame-constant `P` and affine `P′`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFile {
    pub p: BTreeMap<String, String>,
    pub pprime: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrals: Option<Vec<String>>,
    #[serde(default)]
    pub side_conditions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BiHamiltonianSection {
    pub pair: String,
    #[serde(flatten)]
    pub report: BihamReport,
}

fn collect_biham(r: &BihamReport, label: &str, st: &mut Status) {
    let tag = if label.is_empty() { String::new() } else { format!("{label}: ") };
    if !r.n_reproduces_pprime {
        st.failures.push(format!("{tag}N P != P'"));
    }
    if !r.torsion.holds {
        st.failures.push(format!("{tag}Nijenhuis torsion nonzero on {:?}", r.torsion.failing_pairs));
    }
    if let Some(l) = &r.lenard {
        for link in l.links.iter().filter(|l| !l.holds) {
            st.failures.push(format!("{tag}Lenard relation fails at k = {}", link.k));
        }
    }
    if !r.involution.holds {
        st.failures.push(format!("{tag}computed integrals not in involution"));
    }
    if let Some(p) = &r.printed {
        if !p.self_involution.holds {
            st.discrepancies.push(format!("{tag}printed integrals not in bi-involution"));
        }
        if !p.with_computed.holds {
            st.discrepancies.push(format!("{tag}printed integrals not in involution with the trace integrals"));
        }
        for (k, ok) in p.agrees_with_trace.iter().enumerate() {
            if !ok {
                let power = if k == 0 { "N".to_string() } else { format!("N^{}", k + 1) };
                st.discrepancies.push(format!("{tag}printed H{} differs from Tr({power})/{} by a nonconstant", k + 1, 2 * (k + 1)));
            }
        }
        if let Some(l) = &p.lenard {
            for link in l.links.iter().filter(|l| !l.holds) {
                st.discrepancies.push(format!("{tag}printed integrals break the Lenard relation at k = {}", link.k));
            }
        }
        if p.independence_rank < p.expected_rank {
            st.discrepancies.push(format!(
                "{tag}printed integrals have rank {} of {}",
                p.independence_rank, p.expected_rank
            ));
        }
    }
}

fn parse_integrals(list: &[String]) -> Result<Vec<Expression>, ReportError> {
    list.iter().map(|s| Expression::parse(s).map_err(ReportError::from)).collect()
}

/// Compatibility and bi-Hamiltonian analysis of a user pair on an algebra.
pub fn analyze_pair(
    alg: &LieAlgebra,
    pair: &PairFile,
    label: &str,
    k_max: usize,
    seed: u64,
) -> Result<(TableVerification, BiHamiltonianSection), ReportError> {
    let v = compute_vielbein(alg)?;
    let p = bivector_from_frame(&matrix_from_entries(alg.dim(), &pair.p)?, &v)?;
    let q = bivector_from_frame(&matrix_from_entries(alg.dim(), &pair.pprime)?, &v)?;
    let row = TableRow {
        row: label.to_string(),
        table: 0,
        algebra: alg.name().to_string(),
        params: alg.params().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        p: pair.p.clone(),
        pprime: pair.pprime.clone(),
        side_conditions: pair.side_conditions.clone(),
        comment: String::new(),
        notes: Vec::new(),
        bivector: None,
        bivector_prime: None,
        integrals: pair.integrals.clone(),
    };
    let compat = solver::verify_pair(&row, &p, &q)?;
    let printed = pair.integrals.as_deref().map(parse_integrals).transpose()?;
    let report = biham::analyze(&p, &q, k_max, printed, seed)?;
    Ok((compat, BiHamiltonianSection { pair: label.to_string(), report }))
}

/// Bi-Hamiltonian analysis of a table row with its printed integrals.
pub fn analyze_row(row: &TableRow, catalog: &Catalog, k_max: usize, seed: u64) -> Result<BiHamiltonianSection, ReportError> {
    let (p, q) = solver::row_bivectors(row, catalog)?;
    let report = biham::analyze(&p, &q, k_max, row.printed_integrals()?, seed)?;
    Ok(BiHamiltonianSection { pair: row.row.clone(), report })
}

/// End-to-end results for one table row.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowReport {
    pub row: String,
    pub table: u8,
    pub algebra: String,
    pub validation: Option<ValidationSection>,
    pub vielbein: Option<VielbeinSection>,
    pub compatibility: Option<TableVerification>,
    pub solver: Option<SolverReport>,
    pub bi_hamiltonian: Option<BihamReport>,
    pub errors: Vec<String>,
}

impl RowReport {
    fn collect(&self, st: &mut Status) {
        let prefix = format!("{}: ", self.row);
        if let Some(v) = &self.validation {
            v.collect(&prefix, st);
        }
        if let Some(v) = &self.vielbein {
            v.collect(&prefix, st);
        }
        if let Some(c) = &self.compatibility {
            collect_compatibility(c, "", st);
        }
        if let Some(s) = &self.solver {
            s.collect(&prefix, st);
        }
        if let Some(b) = &self.bi_hamiltonian {
            collect_biham(b, &self.row, st);
        }
        for e in &self.errors {
            st.failures.push(format!("{prefix}{e}"));
        }
    }
}

pub fn row_report(row: &TableRow, catalog: &Catalog, seed: u64) -> RowReport {
    let mut out = RowReport {
        row: row.row.clone(),
        table: row.table,
        algebra: row.algebra.clone(),
        validation: None,
        vielbein: None,
        compatibility: None,
        solver: None,
        bi_hamiltonian: None,
        errors: Vec::new(),
    };
    let alg = match row.lie_algebra(catalog) {
        Ok(a) => a,
        Err(e) => {
            out.errors.push(ReportError::from(e).to_string());
            return out;
        }
    };
    out.validation = Some(validation_section(&alg));
    match vielbein_section(&alg) {
        Ok(v) => out.vielbein = Some(v),
        Err(e) => out.errors.push(e.to_string()),
    }
    match solver::verify_table(&row.row, catalog) {
        Ok(v) => out.compatibility = Some(v),
        Err(e) => out.errors.push(ReportError::from(e).to_string()),
    }
    match solve_row(row, catalog, None, seed) {
        Ok(s) => out.solver = Some(s),
        Err(e) => out.errors.push(e.to_string()),
    }
    match analyze_row(row, catalog, row.dim() / 2, seed) {
        Ok(b) => out.bi_hamiltonian = Some(b.report),
        Err(e) => out.errors.push(e.to_string()),
    }
    out
}

/// Every table row end to end, in parallel, ordered by row name.
pub fn report_all(catalog: &Catalog, seed: u64) -> Vec<RowReport> {
    let mut rows: Vec<RowReport> = tables::rows().par_iter().map(|r| row_report(r, catalog, seed)).collect();
    rows.sort_by(|a, b| a.row.cmp(&b.row));
    rows
}

/// `k=v` pairs into exact parameter bindings.
pub fn parse_params(pairs: &[String]) -> Result<BTreeMap<Symbol, BigRational>, ReportError> {
    pairs
        .iter()
        .map(|kv| {
            let (k, v) =
                kv.split_once('=').ok_or_else(|| ReportError::Input(format!("parameter `{kv}` is not of the form k=v")))?;
            Ok((Symbol::new(k.trim()), parse_rational(v.trim())?))
        })
        .collect()
}
