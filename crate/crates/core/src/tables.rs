//! Published compatible pairs: constant `P`, affine `P′`, their group-coordinate
//! forms and closed-form integrals, as bundled data.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::Deserialize;

use crate::catalog::{Catalog, CatalogError, LieAlgebra};
use crate::expr::{parse_rational, ExprError, ExprMatrix, Expression, Symbol};
use crate::poisson::BivectorField;
use crate::vielbein::parse_entry_key;

const TABLES: &str = include_str!("../data/tables.json");

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct TableRow {
    pub row: String,
    pub table: u8,
    pub algebra: String,
    pub params: BTreeMap<String, String>,
    pub p: BTreeMap<String, String>,
    pub pprime: BTreeMap<String, String>,
    pub side_conditions: Vec<String>,
    pub comment: String,
    pub notes: Vec<String>,
    pub bivector: Option<BTreeMap<String, String>>,
    pub bivector_prime: Option<BTreeMap<String, String>>,
    pub integrals: Option<Vec<String>>,
}

pub fn rows() -> Vec<TableRow> {
    serde_json::from_str(TABLES).expect("bundled tables parse")
}

pub fn find(name: &str) -> Option<TableRow> {
    rows().into_iter().find(|r| r.row == name)
}

fn upper_matrix(dim: usize, entries: &BTreeMap<String, String>, bind: &BTreeMap<Symbol, BigRational>) -> Result<ExprMatrix, ExprError> {
    let mut m = ExprMatrix::zeros(dim, dim);
    for (key, text) in entries {
        let (i, j) = parse_entry_key(key).ok_or(ExprError::Parse { pos: 0, msg: format!("bad entry key `{key}`") })?;
        let v = Expression::parse_with(text, bind)?;
        m[(j, i)] = -&v;
        m[(i, j)] = v;
    }
    Ok(m)
}

impl TableRow {
    /// Concrete values of the algebra parameters for this row.
    pub fn bindings(&self) -> Result<BTreeMap<Symbol, BigRational>, ExprError> {
        self.params.iter().map(|(k, v)| Ok((Symbol::new(k), parse_rational(v)?))).collect()
    }

    pub fn lie_algebra(&self, catalog: &Catalog) -> Result<LieAlgebra, CatalogError> {
        catalog.lookup(&self.algebra, &self.bindings()?)
    }

    pub fn dim(&self) -> usize {
        if self.table == 1 {
            4
        } else {
            6
        }
    }

    /// Constant frame-index `P`.
    pub fn p_matrix(&self) -> Result<ExprMatrix, ExprError> {
        upper_matrix(self.dim(), &self.p, &self.bindings()?)
    }

    /// Affine frame-index `P′`.
    pub fn pprime_matrix(&self) -> Result<ExprMatrix, ExprError> {
        upper_matrix(self.dim(), &self.pprime, &self.bindings()?)
    }

    /// Printed group-coordinate `𝐏`, when the source gives one.
    pub fn printed_bivector(&self) -> Result<Option<BivectorField>, ExprError> {
        self.printed(&self.bivector)
    }

    pub fn printed_bivector_prime(&self) -> Result<Option<BivectorField>, ExprError> {
        self.printed(&self.bivector_prime)
    }

    fn printed(&self, entries: &Option<BTreeMap<String, String>>) -> Result<Option<BivectorField>, ExprError> {
        match entries {
            None => Ok(None),
            Some(e) => {
                let m = upper_matrix(self.dim(), e, &self.bindings()?)?;
                Ok(Some(BivectorField::new(m).expect("upper construction is antisymmetric")))
            }
        }
    }

    /// Printed closed-form integrals `H_1, H_2, …`.
    pub fn printed_integrals(&self) -> Result<Option<Vec<Expression>>, ExprError> {
        let bind = self.bindings()?;
        self.integrals
            .as_ref()
            .map(|hs| hs.iter().map(|h| Expression::parse_with(h, &bind)).collect())
            .transpose()
    }

    /// Products that must not vanish.
    pub fn side_condition_exprs(&self) -> Result<Vec<Expression>, ExprError> {
        self.side_conditions.iter().map(|s| Expression::parse(s)).collect()
    }
}
