//! JSON-lines and CSV encodings of verification records.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use lqlab_core::{Value, VerificationReport};
use serde_json::{json, Map};

/// JSON number, or `"inf"`, `"-inf"`, `"nan"` for non-finite values.
pub fn real(x: f64) -> serde_json::Value {
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

fn value(v: &Value) -> serde_json::Value {
    match v {
        Value::Exact(s) | Value::Text(s) => json!(s),
        Value::Real(x) => real(*x),
        Value::Int(i) => json!(i),
    }
}

fn object(fields: &[(String, Value)]) -> serde_json::Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.clone(), value(v));
    }
    serde_json::Value::Object(m)
}

/// A record as a JSON object. Keys come out sorted.
pub fn report_json(r: &VerificationReport) -> serde_json::Value {
    json!({
        "experiment": r.experiment,
        "anchor": r.anchor,
        "params": object(&r.params),
        "lhs": real(r.lhs),
        "rhs": real(r.rhs),
        "margin": real(r.margin),
        "fitted_constant": r.fitted_constant.map_or(serde_json::Value::Null, real),
        "status": r.status.as_str(),
        "seed": r.seed,
        "details": object(&r.details),
    })
}

pub fn report_line(r: &VerificationReport) -> String {
    serde_json::to_string(&report_json(r)).expect("records serialize")
}

pub fn params_string(r: &VerificationReport) -> String {
    r.params
        .iter()
        .map(|(k, v)| {
            let v = match v {
                Value::Exact(s) | Value::Text(s) => s.clone(),
                Value::Real(x) => format!("{x}"),
                Value::Int(i) => i.to_string(),
            };
            format!("{k}={v}")
        })
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_jsonl<W: Write>(mut w: W, reports: &[VerificationReport]) -> Result<()> {
    for r in reports {
        writeln!(w, "{}", report_line(r))?;
    }
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 5] = ["prop", "params", "lhs_max", "fitted_constant", "pass"];

/// Aggregate CSV, one row per record.
pub fn write_summary<W: Write>(w: W, reports: &[VerificationReport]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(SUMMARY_HEADER)?;
    for r in reports {
        let fitted = r.fitted_constant.map(|c| format!("{c}")).unwrap_or_default();
        csv.write_record([r.anchor.clone(), params_string(r), format!("{}", r.lhs), fitted, r.status.as_str().into()])?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes `reports.jsonl` and `summary.csv` into `dir`.
pub fn write_report_files(dir: &Path, reports: &[VerificationReport]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let open = |name: &str| {
        let p = dir.join(name);
        std::fs::File::create(&p).map(std::io::BufWriter::new).with_context(|| format!("writing {}", p.display()))
    };
    let mut jsonl = open("reports.jsonl")?;
    write_jsonl(&mut jsonl, reports)?;
    jsonl.flush()?;
    write_summary(open("summary.csv")?, reports)?;
    Ok(())
}
