//! Comparison of a JSON-lines report against a golden file.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Relative tolerance for floating fields.
pub const FLOAT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    /// 1-based line number.
    pub record: usize,
    pub experiment: String,
    pub anchor: String,
    pub field: String,
    pub report: String,
    pub golden: String,
}

impl std::fmt::Display for Difference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "record {} ({} / {}): {}: report {} vs golden {}",
            self.record, self.experiment, self.anchor, self.field, self.report, self.golden
        )
    }
}

fn read_lines(path: &Path) -> Result<Vec<Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).with_context(|| format!("{} line {}: invalid JSON", path.display(), i + 1))
        })
        .collect()
}

fn floats_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= FLOAT_TOLERANCE * a.abs().max(b.abs())
}

fn is_float(n: &serde_json::Number) -> bool {
    !(n.is_i64() || n.is_u64())
}

fn walk(a: &Value, b: &Value, path: &str, diffs: &mut Vec<(String, String, String)>) -> Result<()> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            if x.len() != y.len() || x.keys().any(|k| !y.contains_key(k)) {
                let kx: Vec<_> = x.keys().collect();
                let ky: Vec<_> = y.keys().collect();
                bail!("schema mismatch at {path}: keys {kx:?} vs {ky:?}");
            }
            for (k, v) in x {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                walk(v, &y[k], &sub, diffs)?;
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                bail!("schema mismatch at {path}: array lengths {} vs {}", x.len(), y.len());
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                walk(u, v, &format!("{path}[{i}]"), diffs)?;
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let same = if is_float(x) || is_float(y) {
                floats_close(x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN))
            } else {
                x == y
            };
            if !same {
                diffs.push((path.into(), a.to_string(), b.to_string()));
            }
        }
        (Value::Object(_) | Value::Array(_), _) | (_, Value::Object(_) | Value::Array(_)) => {
            bail!("schema mismatch at {path}: {a} vs {b}");
        }
        _ => {
            // Strings carry exact integers and rationals; compare literally.
            if a != b {
                diffs.push((path.into(), a.to_string(), b.to_string()));
            }
        }
    }
    Ok(())
}

/// Field-by-field differences. Schema mismatches (record counts, key sets,
/// structure) are errors rather than differences.
pub fn compare_golden(report: &Path, golden: &Path) -> Result<Vec<Difference>> {
    let a = read_lines(report)?;
    let b = read_lines(golden)?;
    if a.len() != b.len() {
        bail!("schema mismatch: {} records in report, {} in golden", a.len(), b.len());
    }
    let mut out = Vec::new();
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let mut diffs = Vec::new();
        walk(x, y, "", &mut diffs).with_context(|| format!("record {}", i + 1))?;
        let field = |k: &str| y.get(k).and_then(Value::as_str).unwrap_or("?").to_string();
        for (path, r, g) in diffs {
            out.push(Difference {
                record: i + 1,
                experiment: field("experiment"),
                anchor: field("anchor"),
                field: path,
                report: r,
                golden: g,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    const REC: &str =
        r#"{"anchor":"Lemma 2.1","details":{"count":"33"},"experiment":"count","lhs":3.4965075614664802,"seed":null}"#;

    #[test]
    fn identical_files_match() {
        let (a, b) = (file(&[REC]), file(&[REC]));
        assert!(compare_golden(a.path(), b.path()).unwrap().is_empty());
    }

    #[test]
    fn count_off_by_one_is_named() {
        let a = file(&[REC]);
        let b = file(&[&REC.replace("\"33\"", "\"34\"")]);
        let d = compare_golden(a.path(), b.path()).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].record, d[0].field.as_str(), d[0].anchor.as_str()), (1, "details.count", "Lemma 2.1"));
    }

    #[test]
    fn float_drift_within_tolerance() {
        let a = file(&[REC]);
        let b = file(&[&REC.replace("3.4965075614664802", "3.4965075614664830")]);
        assert!(compare_golden(a.path(), b.path()).unwrap().is_empty());
        let c = file(&[&REC.replace("3.4965075614664802", "3.4965076")]);
        assert_eq!(compare_golden(a.path(), c.path()).unwrap().len(), 1);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let a = file(&[REC]);
        assert!(compare_golden(a.path(), file(&[REC, REC]).path()).is_err());
        assert!(compare_golden(a.path(), file(&[&REC.replace("\"seed\"", "\"sed\"")]).path()).is_err());
    }
}
