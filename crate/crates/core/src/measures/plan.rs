use super::discrete::DiscreteMeasure;
use super::grid::fmt17;
use crate::error::{LabError, Result};

const MARGINAL_TOL: f64 = 1e-8;

/// Coupling between two discrete measures, stored densely (row-major, `n x m`).
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    source: DiscreteMeasure,
    target: DiscreteMeasure,
    coupling: Vec<f64>,
}

impl TransportPlan {
    pub fn new(
        source: DiscreteMeasure,
        target: DiscreteMeasure,
        coupling: Vec<f64>,
    ) -> Result<Self> {
        let (n, m) = (source.len(), target.len());
        if coupling.len() != n * m {
            return Err(LabError::DimensionMismatch {
                expected: n * m,
                got: coupling.len(),
            });
        }
        if let Some(v) = coupling.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(LabError::InvalidMeasure(format!("coupling entry {v}")));
        }
        for i in 0..n {
            let row: f64 = coupling[i * m..(i + 1) * m].iter().sum();
            if (row - source.weight(i)).abs() > MARGINAL_TOL {
                return Err(LabError::InvalidMeasure(format!(
                    "row {i} sums to {row}, source weight is {}",
                    source.weight(i)
                )));
            }
        }
        for j in 0..m {
            let col: f64 = (0..n).map(|i| coupling[i * m + j]).sum();
            if (col - target.weight(j)).abs() > MARGINAL_TOL {
                return Err(LabError::InvalidMeasure(format!(
                    "column {j} sums to {col}, target weight is {}",
                    target.weight(j)
                )));
            }
        }
        Ok(Self {
            source,
            target,
            coupling,
        })
    }

    pub fn source(&self) -> &DiscreteMeasure {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn coupling(&self) -> &[f64] {
        &self.coupling
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.coupling[i * self.target.len() + j]
    }

    /// `sum_ij pi_ij c(x_i, y_j)`.
    pub fn cost(&self, c: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        let m = self.target.len();
        let mut total = 0.0;
        for i in 0..self.source.len() {
            for j in 0..m {
                let p = self.coupling[i * m + j];
                if p > 0.0 {
                    total += p * c(self.source.point(i), self.target.point(j));
                }
            }
        }
        total
    }

    /// Non-zero entries as `(i, j, mass)`.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let m = self.target.len();
        self.coupling
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| (k / m, k % m, *p))
            .collect()
    }

    /// Source and target in the measure text format, then `plan k` and `i j mass` lines.
    pub fn to_text(&self) -> String {
        let mut out = self.source.to_text();
        out.push_str(&self.target.to_text());
        let t = self.triplets();
        out.push_str(&format!("plan {}\n", t.len()));
        for (i, j, p) in t {
            out.push_str(&format!("{i} {j} {}\n", fmt17(p)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        let block = |start: usize| -> Result<(DiscreteMeasure, usize)> {
            let header = lines.get(start).ok_or(LabError::Parse {
                line: start + 1,
                msg: "missing block".into(),
            })?;
            let n: usize = header
                .split_whitespace()
                .nth(2)
                .and_then(|t| t.parse().ok())
                .ok_or(LabError::Parse {
                    line: start + 1,
                    msg: "bad atoms header".into(),
                })?;
            let end = start + 1 + n;
            if end > lines.len() {
                return Err(LabError::Parse {
                    line: lines.len(),
                    msg: "truncated atoms block".into(),
                });
            }
            Ok((
                DiscreteMeasure::from_text(&lines[start..end].join("\n"))?,
                end,
            ))
        };
        let (source, next) = block(0)?;
        let (target, next) = block(next)?;
        let header = lines.get(next).ok_or(LabError::Parse {
            line: next + 1,
            msg: "missing plan header".into(),
        })?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("plan") {
            return Err(LabError::Parse {
                line: next + 1,
                msg: "expected `plan k`".into(),
            });
        }
        let k: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or(LabError::Parse {
                line: next + 1,
                msg: "bad triplet count".into(),
            })?;
        let m = target.len();
        let mut coupling = vec![0.0; source.len() * m];
        for (off, line) in lines[next + 1..].iter().enumerate() {
            let bad = || LabError::Parse {
                line: next + 2 + off,
                msg: "bad triplet".into(),
            };
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(bad());
            }
            let i: usize = t[0].parse().map_err(|_| bad())?;
            let j: usize = t[1].parse().map_err(|_| bad())?;
            let p: f64 = t[2].parse().map_err(|_| bad())?;
            if i >= source.len() || j >= m {
                return Err(bad());
            }
            coupling[i * m + j] = p;
        }
        if lines.len() - next - 1 != k {
            return Err(LabError::Parse {
                line: lines.len(),
                msg: "triplet count does not match header".into(),
            });
        }
        Self::new(source, target, coupling)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_marginals() {
        let a = DiscreteMeasure::uniform(1, vec![0.0, 1.0]).unwrap();
        let b = DiscreteMeasure::uniform(1, vec![0.0, 1.0]).unwrap();
        assert!(TransportPlan::new(a.clone(), b.clone(), vec![0.5, 0.0, 0.0, 0.5]).is_ok());
        assert!(TransportPlan::new(a, b, vec![0.5, 0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let a = DiscreteMeasure::uniform(2, vec![0.0, 1.0, 2.0, -1.0]).unwrap();
        let b =
            DiscreteMeasure::normalized(2, vec![0.5, 0.5, 1.0, 1.0, 3.0, 0.0], vec![1.0, 2.0, 1.0])
                .unwrap();
        let plan = TransportPlan::new(a, b, vec![0.25, 0.25, 0.0, 0.0, 0.25, 0.25]).unwrap();
        assert_eq!(TransportPlan::from_text(&plan.to_text()).unwrap(), plan);
    }
}
