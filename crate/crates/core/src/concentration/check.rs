use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::sets::{complement, gaussian_interval_mass, CenteredSet, SetKind};
use crate::error::{LabError, Result};
use crate::inequality::families::case_rng;
use crate::measures::GapReport;

/// Allowance for the one-dimensional closed forms.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Samples per Monte Carlo chunk; each chunk is one stratified antithetic batch.
pub const CHUNK: usize = 4096;
/// Fewer chunks than this make the standard error itself unreliable.
pub const MIN_CHUNKS: usize = 16;
/// Standard errors allowed before a Monte Carlo row counts as violated.
pub const MC_SIGMAS: f64 = 3.0;

pub const CSV_HEADER: &str = "kind,params,r,gamma_A,gamma_Ar,tail,bound,maurey_bound,stderr";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnlargementResult {
    pub kind: String,
    pub params: String,
    pub r: f64,
    pub gamma_a: f64,
    pub gamma_ar: f64,
    /// `1 - gamma(A_r)`, computed directly rather than by subtraction.
    pub tail: f64,
    /// `gamma(A)^{-1} e^{-r^2/2}`.
    pub bound: f64,
    /// `gamma(A)^{-1} e^{-r^2/4}`, the constant that holds for all sets.
    pub maurey_bound: f64,
    /// Standard error of `tail`; zero for closed forms.
    pub stderr: f64,
    /// `tail <= bound`, with the error budget as its error estimate.
    pub report: GapReport,
    /// Whether the tail also sits below the Maurey bound.
    pub maurey_holds: bool,
    /// Whether exponent 1/2 gives a smaller bound than 1/4 here (true for r > 0).
    pub sharper_than_maurey: bool,
}

impl EnlargementResult {
    fn new(
        set: &SetKind,
        r: f64,
        gamma_a: f64,
        gamma_ar: f64,
        tail: f64,
        stderr: f64,
        budget: f64,
    ) -> Self {
        let bound = (-0.5 * r * r).exp() / gamma_a;
        let maurey_bound = (-0.25 * r * r).exp() / gamma_a;
        let report = GapReport::new(tail, bound, budget);
        Self {
            kind: set.name().to_string(),
            params: set.params(),
            r,
            gamma_a,
            gamma_ar,
            tail,
            bound,
            maurey_bound,
            stderr,
            maurey_holds: tail <= maurey_bound + budget,
            sharper_than_maurey: bound < maurey_bound,
            report,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
            self.kind,
            self.params,
            self.r,
            self.gamma_a,
            self.gamma_ar,
            self.tail,
            self.bound,
            self.maurey_bound,
            self.stderr
        )
    }
}

pub fn to_csv(rows: &[EnlargementResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn check_radii(rs: &[f64]) -> Result<()> {
    match rs.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        Some(r) => Err(LabError::Precondition(format!(
            "enlargement radius {r} must be finite and >= 0"
        ))),
        None => Ok(()),
    }
}

/// `1 - gamma(A_r) <= gamma(A)^{-1} e^{-r^2/2}` at each `r`: closed forms on
/// the line, stratified antithetic Monte Carlo in higher dimensions.
pub fn concentration_check(
    a: &CenteredSet,
    rs: &[f64],
    mc: &McConfig,
) -> Result<Vec<EnlargementResult>> {
    check_radii(rs)?;
    match a.kind.intervals() {
        Some(iv) => Ok(analytic_1d(&a.kind, &iv, rs)),
        None => monte_carlo(&a.kind, rs, mc),
    }
}

fn analytic_1d(set: &SetKind, iv: &[(f64, f64)], rs: &[f64]) -> Vec<EnlargementResult> {
    let gamma_a: f64 = iv.iter().map(|(a, b)| gaussian_interval_mass(*a, *b)).sum();
    rs.iter()
        .map(|&r| {
            let ar = set
                .enlarge(r)
                .expect("radius checked")
                .intervals()
                .expect("line set");
            let gamma_ar: f64 = ar.iter().map(|(a, b)| gaussian_interval_mass(*a, *b)).sum();
            let tail: f64 = complement(&ar)
                .iter()
                .map(|(a, b)| gaussian_interval_mass(*a, *b))
                .sum();
            EnlargementResult::new(set, r, gamma_a, gamma_ar, tail, 0.0, ANALYTIC_TOL)
        })
        .collect()
}

/// Hits of `A` and of each `A_r` in one chunk. The first coordinate is
/// stratified into `CHUNK / 2` equal-probability strata and every point is
/// paired with its negative.
fn chunk_counts(set: &SetKind, rs: &[f64], seed: u64, index: u64) -> (usize, Vec<usize>) {
    let mut rng = case_rng(seed, index);
    let normal = Normal::standard();
    let d = set.dim();
    let pairs = CHUNK / 2;
    let mut x = vec![0.0; d];
    let mut neg = vec![0.0; d];
    let (mut in_a, mut in_ar) = (0, vec![0; rs.len()]);
    for i in 0..pairs {
        let u = (i as f64 + rng.random::<f64>()) / pairs as f64;
        x[0] = normal.inverse_cdf(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON));
        for v in x.iter_mut().skip(1) {
            *v = rng.sample(StandardNormal);
        }
        for (n, v) in neg.iter_mut().zip(&x) {
            *n = -v;
        }
        for p in [&x, &neg] {
            let dist = set.distance(p);
            if dist == 0.0 {
                in_a += 1;
            }
            for (c, r) in in_ar.iter_mut().zip(rs) {
                if dist <= *r {
                    *c += 1;
                }
            }
        }
    }
    (in_a, in_ar)
}

/// Mean and standard error over chunk frequencies.
fn mean_stderr(freqs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = freqs.clone().count() as f64;
    let mean = freqs.clone().sum::<f64>() / k;
    let var = freqs.map(|f| (f - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

fn monte_carlo(set: &SetKind, rs: &[f64], mc: &McConfig) -> Result<Vec<EnlargementResult>> {
    let chunks = mc.samples.div_ceil(CHUNK);
    if chunks < MIN_CHUNKS {
        return Err(LabError::SampleBudget(format!(
            "{} samples give {chunks} chunks of {CHUNK}; at least {} samples are needed for a standard error",
            mc.samples,
            MIN_CHUNKS * CHUNK
        )));
    }
    let counts: Vec<(usize, Vec<usize>)> = (0..chunks as u64)
        .into_par_iter()
        .map(|c| chunk_counts(set, rs, mc.seed, c))
        .collect();
    let n = CHUNK as f64;
    let hits: usize = counts.iter().map(|c| c.0).sum();
    let (gamma_a, se_a) = mean_stderr(counts.iter().map(|c| c.0 as f64 / n));
    if hits < 100 || se_a > 0.1 * gamma_a {
        return Err(LabError::SampleBudget(format!(
            "gamma(A) = {gamma_a:e} from {hits} hits has relative standard error {:.3}; increase the sample count",
            se_a / gamma_a.max(f64::MIN_POSITIVE)
        )));
    }
    Ok(rs
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let (gamma_ar, se) = mean_stderr(counts.iter().map(|c| c.1[j] as f64 / n));
            let tail = 1.0 - gamma_ar;
            let bound = (-0.5 * r * r).exp() / gamma_a;
            let budget = MC_SIGMAS * (se + bound * se_a / gamma_a);
            EnlargementResult::new(set, r, gamma_a, gamma_ar, tail, se, budget)
        })
        .collect())
}
