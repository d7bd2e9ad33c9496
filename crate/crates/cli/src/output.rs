//! Deterministic rendering of reports.
//!
//! Reports are first converted to a `serde_json::Value` tree. Object keys
//! come out sorted, integers print as integers, and every other number
//! prints with 17 significant digits so that the text round-trips to the
//! same `f64`.

use std::fmt::Write;

use serde_json::Value;

fn number(n: &serde_json::Number) -> String {
    if let Some(u) = n.as_u64() {
        return u.to_string();
    }
    if let Some(i) = n.as_i64() {
        return i.to_string();
    }
    let v = n.as_f64().expect("json numbers are finite f64");
    format!("{v:.16e}")
}

fn string(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn json_into(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&string(s)),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            // short numeric vectors stay on one line
            if a.len() <= 16 && a.iter().all(|x| x.is_number() || x.is_string()) {
                let items: Vec<String> = a.iter().map(render_json_compact).collect();
                let _ = write!(out, "[{}]", items.join(", "));
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                json_into(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(indent + 1), string(k));
                json_into(x, indent + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

fn render_json_compact(v: &Value) -> String {
    match v {
        Value::Number(n) => number(n),
        Value::String(s) => string(s),
        other => other.to_string(),
    }
}

pub fn render_json(v: &Value) -> String {
    let mut out = String::new();
    json_into(v, 0, &mut out);
    out.push('\n');
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => number(n),
        Value::String(s) => s.clone(),
        Value::Null => "none".into(),
        other => other.to_string(),
    }
}

fn text_into(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                text_into(&p, x, out);
            }
        }
        Value::Array(a) if !a.is_empty() && a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = a.iter().map(scalar).collect();
            let _ = writeln!(out, "{prefix} = [{}]", items.join(", "));
        }
        Value::Array(a) => {
            if a.is_empty() {
                let _ = writeln!(out, "{prefix} = []");
            }
            for (i, x) in a.iter().enumerate() {
                text_into(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => {
            let _ = writeln!(out, "{prefix} = {}", scalar(other));
        }
    }
}

/// One `path = value` line per leaf.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    text_into("", v, &mut out);
    out
}

/// Pass/fail table for the property suite.
pub fn render_verify_table(v: &Value) -> String {
    let mut out = String::new();
    let rows = v["rows"].as_array().map(Vec::as_slice).unwrap_or_default();
    let width = rows
        .iter()
        .filter_map(|r| r["id"].as_str())
        .map(str::len)
        .max()
        .unwrap_or(2);
    let _ = writeln!(
        out,
        "{:<6} {:<width$} {:>9} {:>7} {:>24}",
        "status", "id", "failures", "errors", "worst_margin"
    );
    for r in rows {
        let status = if r["passed"].as_bool() == Some(true) {
            "pass"
        } else {
            "FAIL"
        };
        let _ = writeln!(
            out,
            "{:<6} {:<width$} {:>9} {:>7} {:>24}",
            status,
            r["id"].as_str().unwrap_or(""),
            scalar(&r["failures"]),
            scalar(&r["errors"]),
            scalar(&r["worst_margin"]),
        );
        if let Some(p) = r["first_problem"].as_str() {
            let _ = writeln!(out, "       {:<width$} first problem: {p}", "");
        }
    }
    let passed = rows.iter().filter(|r| r["passed"].as_bool() == Some(true)).count();
    let _ = writeln!(
        out,
        "{passed}/{} properties pass (seed {}, {} instances each, tol {})",
        rows.len(),
        scalar(&v["seed"]),
        scalar(&v["instances"]),
        scalar(&v["tol"]),
    );
    out
}
