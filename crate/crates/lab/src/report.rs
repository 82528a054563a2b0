use serde::{Deserialize, Deserializer, Serialize, Serializer};

use lab_core::{GapReport, Verdict};

use crate::checkers::Case;
use crate::config::{Expect, Scenario};

/// Field order of every report line.
pub const FIELDS: [&str; 13] = [
    "scenario",
    "checker",
    "case",
    "seed",
    "lhs",
    "rhs",
    "gap",
    "discretization_error_estimate",
    "verdict",
    "expect",
    "status",
    "tolerance",
    "error",
];

pub const NUMERIC_FIELDS: [&str; 5] = [
    "lhs",
    "rhs",
    "gap",
    "discretization_error_estimate",
    "tolerance",
];

pub const SUMMARY_HEADER: &str =
    "scenario,checker,case,seed,lhs,rhs,gap,discretization_error_estimate,verdict,expect,status";

/// JSON has no infinities or NaN; those go out as strings.
mod float {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&text(*v))
        }
    }

    pub fn text(v: f64) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v > 0.0 && v.is_infinite() {
            "inf".into()
        } else if v.is_infinite() {
            "-inf".into()
        } else {
            format!("{v:?}")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(v),
            Raw::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}

pub use float::text as float_text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub scenario: String,
    pub checker: String,
    pub case: String,
    pub seed: u64,
    #[serde(with = "float")]
    pub lhs: f64,
    #[serde(with = "float")]
    pub rhs: f64,
    #[serde(with = "float")]
    pub gap: f64,
    #[serde(with = "float")]
    pub discretization_error_estimate: f64,
    /// `holds`, `holds_within_error`, `violated`, or `error`.
    pub verdict: String,
    pub expect: String,
    pub status: Status,
    #[serde(with = "float")]
    pub tolerance: f64,
    /// Message of a failed check, empty otherwise.
    pub error: String,
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::HoldsWithinError => "holds_within_error",
        Verdict::Violated => "violated",
    }
}

pub fn meets(expect: Expect, r: &GapReport, tight_tol: f64) -> bool {
    match expect {
        Expect::Holds => !r.is_violated(),
        Expect::Violated => r.is_violated(),
        Expect::Tight => !r.is_violated() && r.is_tight(tight_tol),
    }
}

impl Row {
    fn blank(s: &Scenario, seed: u64, case: &str) -> Self {
        let nan = f64::NAN;
        Row {
            scenario: s.name.clone(),
            checker: s.checker.name().into(),
            case: case.into(),
            seed,
            lhs: nan,
            rhs: nan,
            gap: nan,
            discretization_error_estimate: nan,
            verdict: "error".into(),
            expect: s.expect.name().into(),
            status: Status::Error,
            tolerance: s.tolerance,
            error: String::new(),
        }
    }

    pub fn from_case(s: &Scenario, seed: u64, c: &Case) -> Self {
        let mut row = Row::blank(s, seed, &c.case);
        match &c.report {
            Ok(r) => {
                row.lhs = r.lhs;
                row.rhs = r.rhs;
                row.gap = r.gap;
                row.discretization_error_estimate = r.discretization_error_estimate;
                row.verdict = verdict_name(r.verdict).into();
                row.status = if meets(s.expect, r, s.tight_tol) {
                    Status::Pass
                } else {
                    Status::Fail
                };
            }
            Err(e) => row.error = e.to_string(),
        }
        row
    }

    /// A row for a scenario that failed before producing any case.
    pub fn scenario_error(s: &Scenario, seed: u64, msg: String) -> Self {
        let mut r = Row::blank(s, seed, "setup");
        r.error = msg;
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rows serialize")
    }

    pub fn summary_line(&self) -> String {
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        };
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scenario,
            self.checker,
            self.case,
            self.seed,
            float_text(self.lhs),
            float_text(self.rhs),
            float_text(self.gap),
            float_text(self.discretization_error_estimate),
            self.verdict,
            self.expect,
            status
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> Row {
        Row {
            scenario: "s".into(),
            checker: "c".into(),
            case: "0".into(),
            seed: 1,
            lhs: 1.0,
            rhs: f64::INFINITY,
            gap: f64::INFINITY,
            discretization_error_estimate: 0.0,
            verdict: "holds".into(),
            expect: "holds".into(),
            status: Status::Pass,
            tolerance: 1e-9,
            error: String::new(),
        }
    }

    #[test]
    fn keys_come_out_in_order() {
        let v: serde_json::Value = serde_json::from_str(&row().to_json()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let mut sorted = FIELDS.to_vec();
        sorted.sort();
        let mut got = keys.clone();
        got.sort();
        assert_eq!(got, sorted);
        let text = row().to_json();
        let pos: Vec<usize> = FIELDS
            .iter()
            .map(|f| text.find(&format!("\"{f}\"")).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
    }

    #[test]
    fn non_finite_values_round_trip() {
        let mut r = row();
        r.lhs = f64::NAN;
        r.gap = f64::NEG_INFINITY;
        let back: Row = serde_json::from_str(&r.to_json()).unwrap();
        assert!(back.lhs.is_nan());
        assert_eq!(back.gap, f64::NEG_INFINITY);
        assert_eq!(back.rhs, f64::INFINITY);
    }

    #[test]
    fn floats_round_trip_exactly() {
        let mut r = row();
        r.lhs = 0.1 + 0.2;
        r.rhs = 1e-300;
        let back: Row = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back.lhs.to_bits(), r.lhs.to_bits());
        assert_eq!(back.rhs.to_bits(), r.rhs.to_bits());
    }

    #[test]
    fn expectations() {
        let tight = GapReport::new(1.0, 1.0 + 1e-10, 0.0);
        let loose = GapReport::new(1.0, 2.0, 0.0);
        let bad = GapReport::new(2.0, 1.0, 0.0);
        assert!(meets(Expect::Tight, &tight, 1e-8) && !meets(Expect::Tight, &loose, 1e-8));
        assert!(meets(Expect::Holds, &loose, 0.0) && !meets(Expect::Holds, &bad, 0.0));
        assert!(meets(Expect::Violated, &bad, 0.0) && !meets(Expect::Violated, &tight, 0.0));
    }
}
