//! Deterministic report files: JSON with sorted keys and fixed scientific
//! float formatting, and leaf CSV with header `t,x,y,theta,k`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::leaf::LeafCurve;

/// 17 significant digits, enough to reproduce any `f64` exactly.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) => out.push_str(&u.to_string()),
            (_, Some(i), _) => out.push_str(&i.to_string()),
            (_, _, Some(f)) => out.push_str(&format_float(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            // serde_json's map is ordered by key unless `preserve_order` is on
            let mut entries: Vec<_> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.push_str("{\n");
            for (i, (k, item)) in entries.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < entries.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Canonical text of a JSON value, with a trailing newline.
pub fn json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn to_json<T: Serialize + ?Sized>(report: &T) -> Result<String> {
    let v = serde_json::to_value(report).map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(json_string(&v))
}

/// Writes `report` as canonical JSON to `path`.
pub fn emit_report<T: Serialize + ?Sized>(report: &T, path: &Path) -> Result<()> {
    let text = to_json(report)?;
    let mut f = BufWriter::new(File::create(path)?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Leaf rows `t,x,y,theta,k`; the limit leaf carries `k = -1`.
pub fn write_leaf_csv<W: Write>(leaf: &LeafCurve, w: W) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    wr.write_record(["t", "x", "y", "theta", "k"]).map_err(ser)?;
    let k = leaf.k.map_or(-1, |k| k as i64).to_string();
    for s in &leaf.samples {
        wr.write_record([
            format_float(s.t),
            format_float(s.p.x),
            format_float(s.p.y),
            format_float(s.theta),
            k.clone(),
        ])
        .map_err(ser)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn emit_leaf_csv(leaf: &LeafCurve, path: &Path) -> Result<()> {
    write_leaf_csv(leaf, BufWriter::new(File::create(path)?))
}
