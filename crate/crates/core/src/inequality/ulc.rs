use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{LabError, Result};
use crate::measures::{GapReport, Grid, GridDensity, GridFunction, Law};
use crate::transport::{w2_sq, Quantile1d};

pub const SYMMETRY_TOL: f64 = 1e-6;
pub const CURVATURE_TOL: f64 = 1e-8;
/// Lipschitz slack allowed on top of `alpha^{-1/2}`.
pub const LIPSCHITZ_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UlcReport {
    pub gap: GapReport,
    /// Largest difference quotient of the monotone map from gamma to theta
    /// against `alpha^{-1/2}`.
    pub lipschitz: GapReport,
}

/// Checks `W2(mu, nu)^2 <= (2 / alpha)(Ent_theta(mu) + Ent_theta(nu))` for
/// `theta = e^{-V} / Z` in one dimension, with `mu` and `nu` sampled on the
/// grid of `V`.
pub fn ulc_gap_1d(
    v: &GridFunction,
    alpha: f64,
    mu: &GridDensity,
    nu: &GridDensity,
) -> Result<UlcReport> {
    if v.dim() != 1 {
        return Err(LabError::DimensionMismatch {
            expected: 1,
            got: v.dim(),
        });
    }
    if !(alpha > 0.0) {
        return Err(LabError::Precondition(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    if mu.grid() != v.grid() || nu.grid() != v.grid() {
        return Err(LabError::Precondition(
            "mu and nu must be sampled on the grid of V".into(),
        ));
    }
    check_potential(v, alpha)?;
    if !mu.is_symmetric(SYMMETRY_TOL) {
        return Err(LabError::Precondition("mu is not symmetric".into()));
    }
    let theta = GridDensity::from_log_values(v.grid().clone(), &v.negated().values().to_vec())?;
    let w = w2_sq(&Law::Grid(mu.clone()), &Law::Grid(nu.clone()))?;
    let (em, em_err) = rel_entropy_refined(mu, v);
    let (en, en_err) = rel_entropy_refined(nu, v);
    let gap = GapReport::new(
        w.value,
        2.0 / alpha * (em + en),
        w.error + 2.0 / alpha * (em_err + en_err),
    );

    let l = map_lipschitz(&theta)?;
    let l_err = theta
        .coarsened()
        .map(|c| map_lipschitz(&c))
        .transpose()?
        .map(|lc| (l - lc).abs())
        .unwrap_or(0.0);
    let lipschitz = GapReport::new(l, alpha.powf(-0.5) + LIPSCHITZ_TOL, l_err);
    Ok(UlcReport { gap, lipschitz })
}

/// Symmetry of `V` on an origin-symmetric grid and the curvature bound
/// `V'' >= alpha` on second differences, with a rounding allowance.
fn check_potential(v: &GridFunction, alpha: f64) -> Result<()> {
    let g = v.grid();
    if !g.is_origin_symmetric(1e-12) {
        return Err(LabError::Precondition(
            "the grid of V is not symmetric about 0".into(),
        ));
    }
    let vals = v.values();
    if vals.iter().any(|x| !x.is_finite()) {
        return Err(LabError::Precondition(
            "V must be finite on its grid".into(),
        ));
    }
    let n = vals.len();
    for i in 0..n / 2 {
        let (a, b) = (vals[i], vals[n - 1 - i]);
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(LabError::Precondition(format!("V is not even: {a} vs {b}")));
        }
    }
    let h2 = g.step(0).powi(2);
    for i in 1..n.saturating_sub(1) {
        let d2 = (vals[i + 1] - 2.0 * vals[i] + vals[i - 1]) / h2;
        let slack =
            4.0 * f64::EPSILON * (vals[i + 1].abs() + 2.0 * vals[i].abs() + vals[i - 1].abs()) / h2;
        if d2 < alpha - CURVATURE_TOL - slack {
            return Err(LabError::Precondition(format!(
                "V'' = {d2} < alpha = {alpha} at x = {}",
                g.center(0, i)
            )));
        }
    }
    Ok(())
}

/// `Ent_theta(rho) = int rho log rho + int rho V + log int e^{-V}`.
fn rel_entropy_theta(rho: &[f64], v: &[f64], h: f64) -> f64 {
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let log_z = -vmin + (v.iter().map(|x| (vmin - x).exp()).sum::<f64>() * h).ln();
    let mut s = 0.0;
    for (r, x) in rho.iter().zip(v) {
        if *r > 0.0 {
            s += r * (r.ln() + x);
        }
    }
    s * h + log_z
}

/// Value and its change against the 2x coarser grid, where `V` is averaged
/// over merged cells.
fn rel_entropy_refined(rho: &GridDensity, v: &GridFunction) -> (f64, f64) {
    let h = rho.grid().step(0);
    let value = rel_entropy_theta(rho.values(), v.values(), h);
    let err = match rho.coarsened() {
        Some(c) => {
            let vc: Vec<f64> = v
                .values()
                .chunks(2)
                .map(|p| p.iter().sum::<f64>() / p.len() as f64)
                .collect();
            let vc = &vc[..c.values().len()];
            (value - rel_entropy_theta(c.values(), vc, c.grid().step(0))).abs()
        }
        None => 0.0,
    };
    (value, err)
}

/// Largest difference quotient of `T = F_theta^{-1} o Phi` on [-5, 5]. The
/// stencil spans several cells of a typical grid, since on a single cell the
/// piecewise-constant density is only first-order accurate.
fn map_lipschitz(theta: &GridDensity) -> Result<f64> {
    let q = Quantile1d::from_grid(theta)?;
    let phi = Normal::standard();
    let xs = Grid::line(-5.0, 5.0, 400)?.axis_centers(0);
    let ts: Vec<f64> = xs.iter().map(|x| q.eval(phi.cdf(*x))).collect();
    Ok(xs
        .windows(2)
        .zip(ts.windows(2))
        .map(|(x, t)| (t[1] - t[0]) / (x[1] - x[0]))
        .fold(0.0, f64::max))
}
