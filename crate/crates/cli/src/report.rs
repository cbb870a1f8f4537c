//! Report envelope, provenance tags and serialization.
//!
//! Every number under `results` is wrapped as
//! `{"provenance": ..., "value": ...}`. Exact values are strings (`"21/20"`),
//! floating values are JSON numbers. [`validate`] enforces this.

use std::fmt::Display;

use pvlab_core::exact::{format_rational, parse_rational};
use pvlab_core::Rational;
use serde_json::{json, Map, Value};

use crate::args::Format;

pub const EXACT: &str = "exact-rational";
pub const QUADRATURE: &str = "float-quadrature";
pub const SAMPLED: &str = "sampled-heuristic";

pub fn exact(q: &Rational) -> Value {
    json!({"provenance": EXACT, "value": format_rational(q)})
}

pub fn exact_int(v: impl Display) -> Value {
    json!({"provenance": EXACT, "value": v.to_string()})
}

pub fn exact_list<T: Display>(v: &[T]) -> Value {
    let items: Vec<String> = v.iter().map(T::to_string).collect();
    json!({"provenance": EXACT, "value": items})
}

pub fn exact_rationals(v: &[Rational]) -> Value {
    let items: Vec<String> = v.iter().map(format_rational).collect();
    json!({"provenance": EXACT, "value": items})
}

fn float_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn quadrature(x: f64) -> Value {
    json!({"provenance": QUADRATURE, "value": float_value(x)})
}

pub fn sampled(x: f64) -> Value {
    json!({"provenance": SAMPLED, "value": float_value(x)})
}

pub fn sampled_list(v: &[f64]) -> Value {
    let items: Vec<Value> = v.iter().map(|&x| float_value(x)).collect();
    json!({"provenance": SAMPLED, "value": items})
}

/// A finished run: configuration echo, payload, flags and timing.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: Map<String, Value>,
    pub results: Value,
    pub flags: Map<String, Value>,
    pub seconds: f64,
    pub extra_timing: Map<String, Value>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut timing = self.extra_timing.clone();
        timing.insert("seconds".into(), json!(self.seconds));
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "flags": self.flags,
            "timing": timing,
        })
    }
}

/// Error envelope printed on failure.
pub fn error_json(kind: &str, message: &str, config: &Map<String, Value>) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "error": {"kind": kind, "message": message},
    })
}

#[derive(Debug)]
pub struct EmitError(pub String);

/// Serializes a report. CSV needs a `results.rows` array of flat objects.
pub fn emit(report: &Report, format: Format) -> Result<String, EmitError> {
    match format {
        Format::Json => Ok(to_json_string(&report.to_json())),
        Format::Text => Ok(to_text(report)),
        Format::Csv => to_csv(&report.results),
    }
}

pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Object(m) if is_tagged(m) => match &m["value"] {
            Value::Array(items) => {
                let parts: Option<Vec<String>> = items.iter().map(scalar_text).collect();
                parts.map(|p| p.join(" "))
            }
            other => scalar_text(other),
        },
        _ => None,
    }
}

fn to_csv(results: &Value) -> Result<String, EmitError> {
    let non_tabular = || EmitError("csv output needs a tabular payload (results.rows)".into());
    let rows = results.get("rows").and_then(Value::as_array).ok_or_else(non_tabular)?;
    let mut header: Vec<String> = Vec::new();
    for row in rows {
        let obj = row.as_object().ok_or_else(non_tabular)?;
        for key in obj.keys() {
            if !header.contains(key) {
                header.push(key.clone());
            }
        }
    }
    header.sort();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| EmitError(e.to_string()))?;
    for row in rows {
        let obj = row.as_object().ok_or_else(non_tabular)?;
        let mut rec = Vec::with_capacity(header.len());
        for key in &header {
            let cell = match obj.get(key) {
                None => String::new(),
                Some(v) => scalar_text(v).ok_or_else(non_tabular)?,
            };
            rec.push(cell);
        }
        w.write_record(&rec).map_err(|e| EmitError(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| EmitError(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn to_text(report: &Report) -> String {
    let mut out = format!("pvlab {} {}\n", env!("CARGO_PKG_VERSION"), report.command);
    write_text(&report.results, 0, &mut out);
    for (k, v) in &report.flags {
        out.push_str(&format!("flag {k}: {}\n", scalar_text(v).unwrap_or_default()));
    }
    out.push_str(&format!("seconds: {:.3}\n", report.seconds));
    out
}

fn write_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, item) in m {
                match scalar_text(item) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        write_text(item, indent + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match scalar_text(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}- [{i}]\n"));
                        write_text(item, indent + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar_text(other).unwrap_or_default())),
    }
}

fn is_tagged(m: &Map<String, Value>) -> bool {
    m.len() == 2 && m.contains_key("provenance") && m.contains_key("value")
}

fn looks_numeric(s: &str) -> bool {
    parse_rational(s).is_ok() || s.trim().parse::<f64>().is_ok()
}

fn check_tagged(path: &str, m: &Map<String, Value>, problems: &mut Vec<String>) {
    let prov = m["provenance"].as_str().unwrap_or("");
    let leaves: Vec<&Value> = match &m["value"] {
        Value::Array(items) => items.iter().collect(),
        other => vec![other],
    };
    match prov {
        EXACT => {
            for leaf in leaves {
                match leaf {
                    Value::String(s) if parse_rational(s).is_ok() => {}
                    _ => problems.push(format!("{path}: exact value must be an a/b string, got {leaf}")),
                }
            }
        }
        QUADRATURE | SAMPLED => {
            for leaf in leaves {
                let ok = match leaf {
                    Value::Number(_) => true,
                    Value::String(s) => matches!(s.as_str(), "inf" | "-inf" | "nan"),
                    _ => false,
                };
                if !ok {
                    problems.push(format!("{path}: float value must be a number, got {leaf}"));
                }
            }
        }
        other => problems.push(format!("{path}: unknown provenance {other:?}")),
    }
}

fn walk(path: &str, v: &Value, problems: &mut Vec<String>) {
    match v {
        Value::Object(m) if is_tagged(m) => check_tagged(path, m, problems),
        Value::Object(m) => {
            for (k, item) in m {
                walk(&format!("{path}.{k}"), item, problems);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                walk(&format!("{path}[{i}]"), item, problems);
            }
        }
        Value::Number(_) => problems.push(format!("{path}: untagged number")),
        Value::String(s) if looks_numeric(s) => problems.push(format!("{path}: untagged numeric string {s:?}")),
        _ => {}
    }
}

fn no_numbers(path: &str, v: &Value, problems: &mut Vec<String>) {
    match v {
        Value::Number(_) => problems.push(format!("{path}: configuration values must be strings")),
        Value::Object(m) => m
            .iter()
            .for_each(|(k, x)| no_numbers(&format!("{path}.{k}"), x, problems)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| no_numbers(&format!("{path}[{i}]"), x, problems)),
        _ => {}
    }
}

/// Returns every location under `results` that is numeric but untagged or
/// mis-tagged, plus any JSON number in `config`.
pub fn validate(report: &Value) -> Vec<String> {
    let mut problems = Vec::new();
    match report.get("results") {
        Some(results) => walk("results", results, &mut problems),
        None => {
            if report.get("error").is_none() {
                problems.push("missing results".into());
            }
        }
    }
    if let Some(cfg) = report.get("config") {
        no_numbers("config", cfg, &mut problems);
    } else {
        problems.push("missing config".into());
    }
    problems
}
