use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{erf, erfc};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest `|int_A x dgamma|` accepted for a one-dimensional set.
pub const CENTERING_TOL: f64 = 1e-6;

/// Shapes whose enlargements and distance functions are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetKind {
    /// Finite union of closed intervals on the line, sorted and disjoint.
    IntervalUnion { intervals: Vec<(f64, f64)> },
    /// `{|x| <= radius}`.
    Ball { dim: usize, radius: f64 },
    /// `{|<normal, x>| <= half_width}` with a unit normal.
    Slab { normal: Vec<f64>, half_width: f64 },
    /// `B(center, radius) ∪ B(-center, radius)`.
    SymmetricUnion { center: Vec<f64>, radius: f64 },
}

fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Sorts and merges touching or overlapping intervals.
fn merged(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

impl SetKind {
    pub fn dim(&self) -> usize {
        match self {
            SetKind::IntervalUnion { .. } => 1,
            SetKind::Ball { dim, .. } => *dim,
            SetKind::Slab { normal, .. } => normal.len(),
            SetKind::SymmetricUnion { center, .. } => center.len(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SetKind::IntervalUnion { .. } => "interval_union",
            SetKind::Ball { .. } => "ball",
            SetKind::Slab { .. } => "slab",
            SetKind::SymmetricUnion { .. } => "symmetric_union",
        }
    }

    /// Parameters without commas, for CSV cells.
    pub fn params(&self) -> String {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        match self {
            SetKind::IntervalUnion { intervals } => intervals
                .iter()
                .map(|(a, b)| format!("[{a} {b}]"))
                .collect::<Vec<_>>()
                .join(" "),
            SetKind::Ball { dim, radius } => format!("dim={dim} radius={radius}"),
            SetKind::Slab { normal, half_width } => {
                format!("normal=({}) half_width={half_width}", list(normal))
            }
            SetKind::SymmetricUnion { center, radius } => {
                format!("center=({}) radius={radius}", list(center))
            }
        }
    }

    /// `A_r = {x : d(x, A) <= r}`.
    pub fn enlarge(&self, r: f64) -> Result<SetKind> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(LabError::Precondition(format!(
                "enlargement radius {r} must be finite and >= 0"
            )));
        }
        Ok(match self {
            SetKind::IntervalUnion { intervals } => SetKind::IntervalUnion {
                intervals: merged(intervals.iter().map(|(a, b)| (a - r, b + r)).collect()),
            },
            SetKind::Ball { dim, radius } => SetKind::Ball {
                dim: *dim,
                radius: radius + r,
            },
            SetKind::Slab { normal, half_width } => SetKind::Slab {
                normal: normal.clone(),
                half_width: half_width + r,
            },
            SetKind::SymmetricUnion { center, radius } => SetKind::SymmetricUnion {
                center: center.clone(),
                radius: radius + r,
            },
        })
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            SetKind::IntervalUnion { intervals } => intervals
                .iter()
                .map(|(a, b)| (a - x[0]).max(x[0] - b).max(0.0))
                .fold(f64::INFINITY, f64::min),
            SetKind::Ball { radius, .. } => (euclid(x) - radius).max(0.0),
            SetKind::Slab { normal, half_width } => {
                let s: f64 = normal.iter().zip(x).map(|(u, v)| u * v).sum();
                (s.abs() - half_width).max(0.0)
            }
            SetKind::SymmetricUnion { center, radius } => {
                let plus = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let minus = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a + c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                (plus.min(minus) - radius).max(0.0)
            }
        }
    }

    /// The set as sorted disjoint intervals, for one-dimensional sets.
    pub fn intervals(&self) -> Option<Vec<(f64, f64)>> {
        if self.dim() != 1 {
            return None;
        }
        Some(match self {
            SetKind::IntervalUnion { intervals } => intervals.clone(),
            SetKind::Ball { radius, .. } => vec![(-radius, *radius)],
            SetKind::Slab { half_width, .. } => vec![(-half_width, *half_width)],
            SetKind::SymmetricUnion { center, radius } => {
                let c = center[0].abs();
                merged(vec![(-c - radius, -c + radius), (c - radius, c + radius)])
            }
        })
    }

    /// Closed-form standard Gaussian mass where one is available: all
    /// one-dimensional sets, slabs, and balls in two dimensions.
    pub fn exact_gaussian_mass(&self) -> Option<f64> {
        if let Some(iv) = self.intervals() {
            return Some(iv.iter().map(|(a, b)| gaussian_interval_mass(*a, *b)).sum());
        }
        match self {
            SetKind::Slab { half_width, .. } => {
                Some(gaussian_interval_mass(-half_width, *half_width))
            }
            SetKind::Ball { dim: 2, radius } => Some(-(-0.5 * radius * radius).exp_m1()),
            _ => None,
        }
    }
}

/// `gamma([a, b])` in one dimension, accurate in both tails.
pub fn gaussian_interval_mass(a: f64, b: f64) -> f64 {
    if !(a < b) {
        return 0.0;
    }
    if a >= 0.0 {
        0.5 * (erfc(a * FRAC_1_SQRT_2) - erfc_ext(b))
    } else if b <= 0.0 {
        gaussian_interval_mass(-b, -a)
    } else {
        0.5 * (erf_ext(b) - erf_ext(a))
    }
}

fn erfc_ext(x: f64) -> f64 {
    if x == f64::INFINITY {
        0.0
    } else {
        erfc(x * FRAC_1_SQRT_2)
    }
}

fn erf_ext(x: f64) -> f64 {
    if x.is_infinite() {
        x.signum()
    } else {
        erf(x * FRAC_1_SQRT_2)
    }
}

/// Standard normal density.
pub fn gaussian_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Gaps of a sorted disjoint union, including the two rays.
pub fn complement(intervals: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(intervals.len() + 1);
    let mut left = f64::NEG_INFINITY;
    for (a, b) in intervals {
        if *a > left {
            out.push((left, *a));
        }
        left = *b;
    }
    if left < f64::INFINITY {
        out.push((left, f64::INFINITY));
    }
    out
}

/// A set with `int_A x dgamma = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteredSet {
    pub kind: SetKind,
    /// `|int_A x dgamma|`: closed form for interval unions, zero by symmetry
    /// for the other kinds.
    pub centering_certificate: f64,
}

impl CenteredSet {
    pub fn new(kind: SetKind) -> Result<Self> {
        let kind = match kind {
            SetKind::IntervalUnion { intervals } => {
                if intervals.is_empty() {
                    return Err(LabError::Precondition("empty interval union".into()));
                }
                if let Some((a, b)) = intervals
                    .iter()
                    .find(|(a, b)| !(a.is_finite() && b.is_finite() && a < b))
                {
                    return Err(LabError::Precondition(format!("bad interval [{a}, {b}]")));
                }
                SetKind::IntervalUnion {
                    intervals: merged(intervals),
                }
            }
            SetKind::Ball { dim, radius } => {
                if dim == 0 || !(radius > 0.0 && radius.is_finite()) {
                    return Err(LabError::Precondition(format!(
                        "ball needs dim >= 1 and radius > 0, got {dim}, {radius}"
                    )));
                }
                SetKind::Ball { dim, radius }
            }
            SetKind::Slab { normal, half_width } => {
                let len = euclid(&normal);
                if normal.is_empty()
                    || !(len > 0.0 && len.is_finite())
                    || !(half_width > 0.0 && half_width.is_finite())
                {
                    return Err(LabError::Precondition(
                        "slab needs a nonzero normal and half_width > 0".into(),
                    ));
                }
                SetKind::Slab {
                    normal: normal.iter().map(|u| u / len).collect(),
                    half_width,
                }
            }
            SetKind::SymmetricUnion { center, radius } => {
                if center.is_empty()
                    || center.iter().any(|c| !c.is_finite())
                    || !(radius > 0.0 && radius.is_finite())
                {
                    return Err(LabError::Precondition(
                        "symmetric union needs a finite center and radius > 0".into(),
                    ));
                }
                SetKind::SymmetricUnion { center, radius }
            }
        };
        let centering_certificate = match &kind {
            // int_a^b x phi(x) dx = phi(a) - phi(b)
            SetKind::IntervalUnion { intervals } => intervals
                .iter()
                .map(|(a, b)| gaussian_pdf(*a) - gaussian_pdf(*b))
                .sum::<f64>()
                .abs(),
            _ => 0.0,
        };
        if centering_certificate > CENTERING_TOL {
            return Err(LabError::NotCentered {
                norm: centering_certificate,
                tol: CENTERING_TOL,
            });
        }
        Ok(Self {
            kind,
            centering_certificate,
        })
    }

    pub fn interval(a: f64) -> Result<Self> {
        Self::new(SetKind::IntervalUnion {
            intervals: vec![(-a, a)],
        })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(SetKind::Ball { dim, radius })
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn enlarge(&self, r: f64) -> Result<SetKind> {
        self.kind.enlarge(r)
    }
}

/// `[-b, -a] ∪ [c, t]` with `t` chosen so the union is centered.
pub fn centered_pair_of_intervals(a: f64, b: f64, c: f64) -> Result<CenteredSet> {
    // phi(t) = phi(c) + phi(b) - phi(a), needs a right-hand side in (0, phi(c))
    let target = gaussian_pdf(c) + gaussian_pdf(b) - gaussian_pdf(a);
    if !(target > 0.0 && target < gaussian_pdf(c)) {
        return Err(LabError::Precondition(format!(
            "no centered partner interval for [-{b}, -{a}] from {c}"
        )));
    }
    let t = (-2.0 * (target * (2.0 * PI).sqrt()).ln()).sqrt();
    CenteredSet::new(SetKind::IntervalUnion {
        intervals: vec![(-b, -a), (c, t)],
    })
}

/// One-dimensional sets used by the sweeps: symmetric intervals, symmetric
/// unions, and a centered asymmetric union.
pub fn corpus_1d() -> Result<Vec<CenteredSet>> {
    let half = half_mass_endpoint();
    let mut v = vec![
        CenteredSet::interval(half)?,
        CenteredSet::interval(0.1)?,
        CenteredSet::interval(1.0)?,
        CenteredSet::interval(2.5)?,
        CenteredSet::new(SetKind::IntervalUnion {
            intervals: vec![(-3.0, -1.0), (1.0, 3.0)],
        })?,
        CenteredSet::new(SetKind::IntervalUnion {
            intervals: vec![(-5.0, -4.0), (-0.2, 0.2), (4.0, 5.0)],
        })?,
        CenteredSet::new(SetKind::SymmetricUnion {
            center: vec![2.0],
            radius: 0.5,
        })?,
    ];
    v.push(centered_pair_of_intervals(0.5, 2.0, 0.3)?);
    Ok(v)
}

/// `a` with `gamma([-a, a]) = 1/2`: the library quantile polished by one
/// Newton step on the error-function mass.
pub fn half_mass_endpoint() -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let a = Normal::standard().inverse_cdf(0.75);
    a - (gaussian_interval_mass(-a, a) - 0.5) / (2.0 * gaussian_pdf(a))
}
