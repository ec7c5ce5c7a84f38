use serde_json::Value;

use super::ReportDocument;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_array() && !i.is_object()) => {
            Some(format!("[{}]", items.iter().filter_map(scalar).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                if val.is_null() {
                    continue;
                }
                match scalar(val) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_value(out, val, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        write_value(out, item, indent + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

/// Indented text view of a report, derived from its structured form.
pub fn render_human(doc: &ReportDocument) -> String {
    let mut out = String::new();
    let m = &doc.metadata;
    out.push_str(&format!("compat-poisson {} | {} | seed {}\n", m.tool_version, m.command, m.seed));
    if let Some(a) = &m.algebra {
        out.push_str(&format!("algebra: {a}\n"));
    }
    for (k, v) in &m.params {
        out.push_str(&format!("param {k} = {v}\n"));
    }
    if let Some(k) = m.k_max {
        out.push_str(&format!("k_max: {k}\n"));
    }
    for s in &doc.sections {
        let mut v = serde_json::to_value(s).expect("section serializes");
        let name = v
            .as_object_mut()
            .and_then(|o| o.remove("section"))
            .and_then(|n| n.as_str().map(str::to_string))
            .unwrap_or_default();
        out.push_str(&format!("\n== {name} ==\n"));
        write_value(&mut out, &v, 0);
    }
    out.push_str(&format!("\nstatus: {}\n", if doc.status.passed { "PASS" } else { "FAIL" }));
    for (title, list) in [("failures", &doc.status.failures), ("discrepancies", &doc.status.discrepancies)] {
        if !list.is_empty() {
            out.push_str(&format!("{title}:\n"));
            for f in list {
                out.push_str(&format!("  - {f}\n"));
            }
        }
    }
    out
}
