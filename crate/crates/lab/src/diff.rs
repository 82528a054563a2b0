use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::report::{float_text, Row, FIELDS};

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: schema mismatch: {msg}")]
    Schema {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{0}")]
    Layout(String),
}

/// First field at which a report leaves its golden.
#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub scenario: String,
    pub case: String,
    pub field: String,
    pub report: String,
    pub golden: String,
}

impl std::fmt::Display for Divergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "scenario {} case {}: {} is {} in the report and {} in the golden",
            self.scenario, self.case, self.field, self.report, self.golden
        )
    }
}

fn jsonl_files(path: &Path) -> Result<Vec<PathBuf>, DiffError> {
    let io = |source| DiffError::Io {
        path: path.display().to_string(),
        source,
    };
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Rows of a `.jsonl` report, or of every `.jsonl` file in a directory in
/// name order.
pub fn read_rows(path: &Path) -> Result<Vec<Row>, DiffError> {
    let mut rows = Vec::new();
    for file in jsonl_files(path)? {
        let p = file.display().to_string();
        let text = std::fs::read_to_string(&file).map_err(|source| DiffError::Io {
            path: p.clone(),
            source,
        })?;
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let schema = |msg: String| DiffError::Schema {
                path: p.clone(),
                line: i + 1,
                msg,
            };
            let value: serde_json::Value =
                serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
            let obj = value
                .as_object()
                .ok_or_else(|| schema("line is not an object".into()))?;
            if let Some(k) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
                return Err(schema(format!("unexpected field '{k}'")));
            }
            if let Some(k) = FIELDS.iter().find(|k| !obj.contains_key(**k)) {
                return Err(schema(format!("missing field '{k}'")));
            }
            rows.push(serde_json::from_value(value).map_err(|e| schema(e.to_string()))?);
        }
    }
    Ok(rows)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    if a.is_nan() || b.is_nan() {
        return a.is_nan() && b.is_nan();
    }
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= tol * b.abs().max(1.0)
}

/// Compares rows in order. Numeric fields agree when
/// `|a - b| <= tol max(1, |b|)` with `tol` taken from the golden row;
/// everything else must match exactly.
pub fn diff_rows(report: &[Row], golden: &[Row]) -> Option<Divergence> {
    for (r, g) in report.iter().zip(golden) {
        let div = |field: &str, a: String, b: String| Divergence {
            scenario: g.scenario.clone(),
            case: g.case.clone(),
            field: field.into(),
            report: a,
            golden: b,
        };
        let exact = [
            ("scenario", r.scenario.clone(), g.scenario.clone()),
            ("checker", r.checker.clone(), g.checker.clone()),
            ("case", r.case.clone(), g.case.clone()),
            ("seed", r.seed.to_string(), g.seed.to_string()),
            ("verdict", r.verdict.clone(), g.verdict.clone()),
            ("expect", r.expect.clone(), g.expect.clone()),
            (
                "status",
                format!("{:?}", r.status),
                format!("{:?}", g.status),
            ),
            ("error", r.error.clone(), g.error.clone()),
        ];
        if let Some((f, a, b)) = exact.into_iter().find(|(_, a, b)| a != b) {
            return Some(div(f, a, b));
        }
        let numeric = [
            ("lhs", r.lhs, g.lhs),
            ("rhs", r.rhs, g.rhs),
            ("gap", r.gap, g.gap),
            (
                "discretization_error_estimate",
                r.discretization_error_estimate,
                g.discretization_error_estimate,
            ),
            ("tolerance", r.tolerance, g.tolerance),
        ];
        if let Some((f, a, b)) = numeric
            .into_iter()
            .find(|(_, a, b)| !close(*a, *b, g.tolerance))
        {
            return Some(div(f, float_text(a), float_text(b)));
        }
    }
    if report.len() != golden.len() {
        let (longer, which) = if report.len() > golden.len() {
            (report, "report")
        } else {
            (golden, "golden")
        };
        let extra = &longer[report.len().min(golden.len())];
        return Some(Divergence {
            scenario: extra.scenario.clone(),
            case: extra.case.clone(),
            field: "row".into(),
            report: format!("{} rows", report.len()),
            golden: format!("{} rows (extra row only in the {which})", golden.len()),
        });
    }
    None
}

pub fn diff_paths(report: &Path, golden: &Path) -> Result<Option<Divergence>, DiffError> {
    if report.is_dir() != golden.is_dir() {
        return Err(DiffError::Layout(
            "cannot compare a directory with a single file".into(),
        ));
    }
    let (a, b) = (read_rows(report)?, read_rows(golden)?);
    Ok(diff_rows(&a, &b))
}
