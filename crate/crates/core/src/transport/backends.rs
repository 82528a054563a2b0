use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{quantile_w2_sq, solve_exact, solve_sinkhorn, CostKind, Quantile1d, SinkhornConfig};
use crate::error::Result;
use crate::measures::{DiscreteMeasure, GapReport};

/// Agreement required of rounded Sinkhorn, relative to the squared diameter.
pub const SINKHORN_REL_TOL: f64 = 1e-3;
/// Agreement required of quantile transport on the line.
pub const QUANTILE_TOL: f64 = 1e-8;
/// Regularization relative to the squared diameter.
const EPSILON_REL: f64 = 1e-4;
/// Marginal residual at which Sinkhorn stops. Rounding onto the polytope
/// moves at most this much mass, so the cost moves by at most this times
/// the squared diameter.
const MARGINAL_TOL: f64 = 1e-4;

/// Random weighted atoms in `[-1, 1]^dim`, between 1 and `max_atoms` per side.
pub fn random_instance(
    rng: &mut impl Rng,
    dim: usize,
    max_atoms: usize,
) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let side = |rng: &mut dyn rand::RngCore| {
        let k = rng.random_range(1..=max_atoms);
        let pts = (0..dim * k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let wts = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        DiscreteMeasure::normalized(dim, pts, wts)
    };
    Ok((side(rng)?, side(rng)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendComparison {
    pub exact: f64,
    pub sinkhorn_upper: f64,
    pub sinkhorn_lower: f64,
    /// Squared diameter of the union of both supports.
    pub diameter_sq: f64,
    /// Quantile-transport cost, for measures on the line.
    pub quantile: Option<f64>,
}

impl BackendComparison {
    /// `|Sinkhorn - exact| <= 1e-3 diam^2`.
    pub fn sinkhorn_report(&self) -> GapReport {
        GapReport::new(
            (self.sinkhorn_upper - self.exact).abs(),
            SINKHORN_REL_TOL * self.diameter_sq,
            0.0,
        )
    }

    /// `|quantile - exact| <= 1e-8`, for measures on the line.
    pub fn quantile_report(&self) -> Option<GapReport> {
        self.quantile
            .map(|q| GapReport::new((q - self.exact).abs(), QUANTILE_TOL, 0.0))
    }
}

fn diameter_sq(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let pts: Vec<&[f64]> = (0..mu.len())
        .map(|i| mu.point(i))
        .chain((0..nu.len()).map(|j| nu.point(j)))
        .collect();
    let mut best = 0.0f64;
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            best = best.max(CostKind::Quadratic.eval(p, q));
        }
    }
    best
}

/// Squared W2 by the exact solver, by rounded Sinkhorn with
/// `eps = 1e-4 diam^2`, and on the line by quantile transport.
pub fn compare_backends(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<BackendComparison> {
    let exact = solve_exact(mu, nu, CostKind::Quadratic)?.cost;
    let diameter_sq = diameter_sq(mu, nu);
    let eps = (EPSILON_REL * diameter_sq).max(1e-12);
    let s = solve_sinkhorn(
        mu,
        nu,
        CostKind::Quadratic,
        &SinkhornConfig {
            tolerance: MARGINAL_TOL,
            ..SinkhornConfig::with_epsilon(eps)
        },
    )?;
    let quantile = if mu.dim() == 1 {
        Some(quantile_w2_sq(
            &Quantile1d::from_discrete(mu)?,
            &Quantile1d::from_discrete(nu)?,
        ))
    } else {
        None
    };
    Ok(BackendComparison {
        exact,
        sinkhorn_upper: s.cost_rounded_upper,
        sinkhorn_lower: s.cost_dual_lower,
        diameter_sq,
        quantile,
    })
}
