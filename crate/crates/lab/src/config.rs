use std::path::Path;

use thiserror::Error;
use toml::{Table, Value};

use crate::checkers::{Checker, ParamKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    At {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    /// No verdict is `Violated`.
    Holds,
    /// Every verdict is `Violated`.
    Violated,
    /// Not violated and `|gap| <= tight_tol`.
    Tight,
}

impl Expect {
    pub fn name(self) -> &'static str {
        match self {
            Expect::Holds => "holds",
            Expect::Violated => "violated",
            Expect::Tight => "tight",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "holds" => Some(Expect::Holds),
            "violated" => Some(Expect::Violated),
            "tight" => Some(Expect::Tight),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub checker: Checker,
    pub seed: Option<u64>,
    pub expect: Expect,
    pub tight_tol: f64,
    /// Relative tolerance used when a report is diffed against a golden.
    pub tolerance: f64,
    pub params: Table,
}

/// Keys every section may carry besides the checker's own.
const COMMON: &[(&str, ParamKind)] = &[
    ("checker", ParamKind::Str(&[])),
    ("seed", ParamKind::Int),
    ("expect", ParamKind::Str(&["holds", "violated", "tight"])),
    ("tight_tol", ParamKind::Float),
    ("tolerance", ParamKind::Float),
    ("description", ParamKind::Str(&[])),
];

pub const DEFAULT_TIGHT_TOL: f64 = 1e-8;
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Line of `[section]`'s `key`, or of the section header when the key is absent.
fn locate(text: &str, section: Option<&str>, key: Option<&str>) -> usize {
    let mut current: Option<String> = None;
    let mut header_line = 1;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
            current = Some(name.trim().trim_matches('"').to_string());
            if current.as_deref() == section {
                header_line = i + 1;
            }
            continue;
        }
        if current.as_deref() == section {
            if let Some(k) = key {
                let lhs = line
                    .split('=')
                    .next()
                    .unwrap_or("")
                    .trim()
                    .trim_matches('"');
                if line.contains('=') && lhs == k {
                    return i + 1;
                }
            }
        }
    }
    header_line
}

fn check_kind(v: &Value, kind: &ParamKind) -> Result<(), String> {
    let is_num = |v: &Value| matches!(v, Value::Float(_) | Value::Integer(_));
    match kind {
        ParamKind::Int => match v {
            Value::Integer(i) if *i >= 0 => Ok(()),
            _ => Err("expected a non-negative integer".into()),
        },
        ParamKind::Float => match v {
            x if is_num(x) => Ok(()),
            _ => Err("expected a number".into()),
        },
        ParamKind::Floats => match v {
            Value::Array(a) if a.iter().all(is_num) => Ok(()),
            _ => Err("expected an array of numbers".into()),
        },
        ParamKind::Ints => match v {
            Value::Array(a) if a.iter().all(|x| matches!(x, Value::Integer(i) if *i >= 0)) => {
                Ok(())
            }
            _ => Err("expected an array of non-negative integers".into()),
        },
        ParamKind::Intervals => match v {
            Value::Array(a)
                if a.iter().all(
                    |p| matches!(p, Value::Array(q) if q.len() == 2 && q.iter().all(is_num)),
                ) =>
            {
                Ok(())
            }
            _ => Err("expected an array of [lo, hi] pairs".into()),
        },
        ParamKind::Str(allowed) => match v {
            Value::String(s) if allowed.is_empty() || allowed.contains(&s.as_str()) => Ok(()),
            Value::String(s) => Err(format!("'{s}' is not one of {}", allowed.join(", "))),
            _ => Err("expected a string".into()),
        },
    }
}

pub fn parse_config(text: &str, path: &str) -> Result<Vec<Scenario>, ConfigError> {
    let at = |line: usize, msg: String| ConfigError::At {
        path: path.to_string(),
        line,
        msg,
    };
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(1);
        at(line, e.message().trim().to_string())
    })?;
    let mut out = Vec::new();
    for (name, value) in &table {
        let Value::Table(section) = value else {
            return Err(at(
                locate(text, None, Some(name)),
                format!("'{name}' is outside any [scenario] section"),
            ));
        };
        let line_of = |key: Option<&str>| locate(text, Some(name), key);
        let checker_name = match section.get("checker") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                return Err(at(
                    line_of(Some("checker")),
                    "checker must be a string".into(),
                ))
            }
            None => {
                return Err(at(
                    line_of(None),
                    format!("scenario '{name}' has no checker"),
                ))
            }
        };
        let checker = Checker::from_name(&checker_name).ok_or_else(|| {
            at(
                line_of(Some("checker")),
                format!("unknown checker '{checker_name}'"),
            )
        })?;
        for (key, v) in section {
            let kind = COMMON
                .iter()
                .chain(checker.keys())
                .find(|(k, _)| k == key)
                .map(|(_, kind)| kind);
            let Some(kind) = kind else {
                return Err(at(
                    line_of(Some(key)),
                    format!("checker {} takes no key '{key}'", checker.name()),
                ));
            };
            check_kind(v, kind).map_err(|m| at(line_of(Some(key)), format!("{key}: {m}")))?;
        }
        let num = |k: &str, default: f64| match section.get(k) {
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            _ => default,
        };
        let expect = match section.get("expect") {
            Some(Value::String(s)) => Expect::parse(s).expect("validated"),
            _ => checker.default_expect(),
        };
        out.push(Scenario {
            name: name.clone(),
            checker,
            seed: section
                .get("seed")
                .and_then(Value::as_integer)
                .map(|s| s as u64),
            expect,
            tight_tol: num("tight_tol", DEFAULT_TIGHT_TOL),
            tolerance: num("tolerance", DEFAULT_TOLERANCE),
            params: section.clone(),
        });
    }
    if out.is_empty() {
        return Err(at(1, "no scenarios".into()));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<Scenario>, ConfigError> {
    let p = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: p.clone(),
        source,
    })?;
    parse_config(&text, &p)
}

/// Typed access to validated section keys.
pub struct Params<'a>(pub &'a Table);

impl Params<'_> {
    pub fn f64(&self, key: &str, default: f64) -> f64 {
        match self.0.get(key) {
            Some(Value::Float(f)) => *f,
            Some(Value::Integer(i)) => *i as f64,
            _ => default,
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> usize {
        self.0
            .get(key)
            .and_then(Value::as_integer)
            .map(|i| i as usize)
            .unwrap_or(default)
    }

    pub fn str<'b>(&'b self, key: &str, default: &'b str) -> &'b str {
        self.0.get(key).and_then(Value::as_str).unwrap_or(default)
    }

    pub fn floats(&self, key: &str) -> Option<Vec<f64>> {
        self.0.get(key).and_then(Value::as_array).map(|a| {
            a.iter()
                .map(|v| {
                    v.as_float()
                        .unwrap_or_else(|| v.as_integer().unwrap_or(0) as f64)
                })
                .collect()
        })
    }

    pub fn usizes(&self, key: &str) -> Option<Vec<usize>> {
        self.0.get(key).and_then(Value::as_array).map(|a| {
            a.iter()
                .filter_map(Value::as_integer)
                .map(|i| i as usize)
                .collect()
        })
    }

    pub fn intervals(&self, key: &str) -> Option<Vec<(f64, f64)>> {
        self.floats_nested(key)
            .map(|v| v.into_iter().map(|p| (p[0], p[1])).collect())
    }

    fn floats_nested(&self, key: &str) -> Option<Vec<Vec<f64>>> {
        self.0.get(key).and_then(Value::as_array).map(|a| {
            a.iter()
                .map(|p| {
                    p.as_array()
                        .map(|q| {
                            q.iter()
                                .map(|v| {
                                    v.as_float()
                                        .unwrap_or_else(|| v.as_integer().unwrap_or(0) as f64)
                                })
                                .collect()
                        })
                        .unwrap_or_default()
                })
                .collect()
        })
    }
}
