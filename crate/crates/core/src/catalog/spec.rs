use serde::{Deserialize, Serialize};

use super::CatalogError;

/// One algebra as stored in a catalog file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub name: String,
    pub dim: usize,
    #[serde(default)]
    pub symplectic: bool,
    #[serde(default)]
    pub params: Vec<ParamSpec>,
    pub brackets: Vec<BracketSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub symbol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

/// `[i, j, k, "coefficient"]` meaning `[e_i, e_j] ∋ coefficient · e_k`, one-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketSpec(pub usize, pub usize, pub usize, pub String);

pub fn parse_specs(text: &str) -> Result<Vec<AlgebraSpec>, CatalogError> {
    serde_json::from_str(text).map_err(|e| CatalogError::InvalidSpec(e.to_string()))
}

fn quoted(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization")
}

fn write_param(p: &ParamSpec) -> String {
    let mut fields = vec![format!("\"symbol\": {}", quoted(&p.symbol))];
    if let Some(v) = &p.value {
        fields.push(format!("\"value\": {}", quoted(v)));
    }
    let cs: Vec<String> = p.constraints.iter().map(|c| quoted(c)).collect();
    fields.push(format!("\"constraints\": [{}]", cs.join(", ")));
    format!("{{{}}}", fields.join(", "))
}

fn write_spec(s: &AlgebraSpec, out: &mut String) {
    out.push_str("  {\n");
    out.push_str(&format!("    \"name\": {},\n", quoted(&s.name)));
    out.push_str(&format!("    \"dim\": {},\n", s.dim));
    out.push_str(&format!("    \"symplectic\": {},\n", s.symplectic));
    if s.params.is_empty() {
        out.push_str("    \"params\": [],\n");
    } else {
        out.push_str("    \"params\": [\n");
        let ps: Vec<String> = s.params.iter().map(|p| format!("      {}", write_param(p))).collect();
        out.push_str(&ps.join(",\n"));
        out.push_str("\n    ],\n");
    }
    if s.brackets.is_empty() {
        out.push_str("    \"brackets\": []\n");
    } else {
        out.push_str("    \"brackets\": [\n");
        let bs: Vec<String> =
            s.brackets.iter().map(|b| format!("      [{}, {}, {}, {}]", b.0, b.1, b.2, quoted(&b.3))).collect();
        out.push_str(&bs.join(",\n"));
        out.push_str("\n    ]\n");
    }
    out.push_str("  }");
}

/// Canonical text form; `write_specs(parse_specs(t)) == t` for canonical `t`.
pub fn write_specs(specs: &[AlgebraSpec]) -> String {
    let mut out = String::from("[\n");
    for (n, s) in specs.iter().enumerate() {
        write_spec(s, &mut out);
        out.push_str(if n + 1 < specs.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}
