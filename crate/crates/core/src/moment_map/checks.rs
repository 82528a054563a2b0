use std::f64::consts::{E, PI};

use rand::Rng;

use super::solver::{ma_l1, MomentMapSolution, Target, SIGNIFICANCE};
use crate::calculus::differential_entropy;
use crate::error::{LabError, Result};
use crate::inequality::families::mixture_density;
use crate::inequality::talagrand_gap;
use crate::measures::{
    derivative_1d, second_derivative_1d, ConvexPotential, DiscreteMeasure, GapReport, Grid,
    GridDensity, GridFunction, Law,
};
use crate::transport::CostEstimate;

/// L1 Monge–Ampère residual with the same quantity on every other grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaResidual {
    pub l1: f64,
    pub coarse_l1: f64,
    /// `h^2`; the central-difference stencil is second order.
    pub grid_constant: f64,
}

impl MaResidual {
    /// Whether the residual behaves like discretization error: halving the
    /// resolution should multiply a second-order residual by about four.
    pub fn is_discretization_level(&self, tol: f64) -> bool {
        self.l1 <= tol || self.l1 <= 0.5 * self.coarse_l1
    }
}

fn every_other(v: &[f64]) -> Vec<f64> {
    v.iter().step_by(2).cloned().collect()
}

/// `int |e^{-phi} - f(phi') phi''| dx` over points where `rho` is significant.
pub fn monge_ampere_residual(sol: &MomentMapSolution) -> Result<MaResidual> {
    let t = Target::from_law(&sol.target)?;
    if !t.has_density() {
        return Err(LabError::Precondition(
            "the Monge–Ampère residual needs a target density".into(),
        ));
    }
    let h = sol.grid().step(0);
    let rho = sol.rho.values();
    let l1 = ma_l1(&t, rho, &sol.dphi, h);
    let coarse_l1 = ma_l1(&t, &every_other(rho), &every_other(&sol.dphi), 2.0 * h);
    Ok(MaResidual {
        l1,
        coarse_l1,
        grid_constant: h * h,
    })
}

/// `int log(phi'') drho` over significant points, normalized by their mass.
fn log_curvature(rho: &[f64], d2: &[f64], xs: &[f64]) -> Result<f64> {
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    let (mut sum, mut mass) = (0.0, 0.0);
    for ((r, c), x) in rho.iter().zip(d2).zip(xs) {
        if *r < SIGNIFICANCE * peak {
            continue;
        }
        if !(*c > 0.0) {
            return Err(LabError::ConvexityDegeneracy { x: *x, value: *c });
        }
        sum += r * c.ln();
        mass += r;
    }
    Ok(sum / mass)
}

/// `|S(mu) - S(rho) - int log phi'' drho|`, with `phi''` from central
/// differences of the slopes.
pub fn entropy_identity_gap(sol: &MomentMapSolution) -> Result<CostEstimate> {
    let t = Target::from_law(&sol.target)?;
    let s_mu = t
        .entropy()
        .ok_or_else(|| LabError::Precondition("the target has no density".into()))?;
    let s_rho = differential_entropy(&sol.rho);
    let g = sol.grid();
    let h = g.step(0);
    let xs = g.axis_centers(0);
    let rho = sol.rho.values();
    let fine = log_curvature(rho, &derivative_1d(&sol.dphi, h), &xs)?;
    let coarse = log_curvature(
        &every_other(rho),
        &derivative_1d(&every_other(&sol.dphi), 2.0 * h),
        &every_other(&xs),
    );
    let log_err = coarse.map(|c| (fine - c).abs()).unwrap_or(0.0);
    Ok(CostEstimate {
        value: (s_mu.value - s_rho.value - fine).abs(),
        error: s_mu.error + s_rho.error + log_err,
    })
}

/// `(1/2) int log phi'' drho` and `S(gamma) - S(rho)` for `rho = e^{-phi}`.
fn reverse_lsi_sides(rho: &GridDensity) -> Result<(f64, f64)> {
    let phi: Vec<f64> = rho
        .values()
        .iter()
        .map(|r| if *r > 0.0 { -r.ln() } else { f64::INFINITY })
        .collect();
    let f = GridFunction::new(rho.grid().clone(), phi)?;
    let p = ConvexPotential::new(f).map_err(|e| match e {
        LabError::NotConvex { index, value } => LabError::Precondition(format!(
            "rho is not log-concave: second difference of -log rho is {value:e} at x = {}",
            rho.grid().center(0, index)
        )),
        other => other,
    })?;
    let d2 = second_derivative_1d(p.values(), rho.grid().step(0));
    let lhs = 0.5 * log_curvature(rho.values(), &d2, &rho.grid().axis_centers(0))?;
    let rhs = 0.5 * (2.0 * PI * E).ln() - differential_entropy(rho).value;
    Ok((lhs, rhs))
}

/// `(1/2) int log phi'' drho <= S(gamma) - S(rho)` for log-concave `rho = e^{-phi}`.
pub fn reverse_lsi_gap(rho: &GridDensity) -> Result<GapReport> {
    if rho.dim() != 1 {
        return Err(LabError::DimensionMismatch {
            expected: 1,
            got: rho.dim(),
        });
    }
    let (lhs, rhs) = reverse_lsi_sides(rho)?;
    let rounding = 64.0 * f64::EPSILON * (lhs.abs() + rhs.abs());
    let err = match rho.coarsened().map(|c| reverse_lsi_sides(&c)) {
        Some(Ok((l, r))) => ((rhs - lhs) - (r - l)).abs() + rounding,
        _ => rounding,
    };
    Ok(GapReport::new(lhs, rhs, err))
}

/// `d - int x phi'(x) drho`, integrated exactly for `phi` linear between
/// grid centers. By parts this is the boundary term
/// `[x e^{-phi}]` over the mass, so it vanishes when `rho` decays inside the
/// domain and is positive when the domain cuts `rho` off.
pub fn x_dot_grad_phi_check(sol: &MomentMapSolution) -> f64 {
    let xs = sol.grid().axis_centers(0);
    let h = sol.grid().step(0);
    let phi = sol.phi.values();
    let (mut moment, mut mass) = (0.0, 0.0);
    for j in 0..phi.len() - 1 {
        let a = (phi[j + 1] - phi[j]) / h;
        let z = a * h;
        let w = (-phi[j]).exp();
        // int_0^h e^{-a t} dt and int_0^h (x_j + t) a e^{-a t} dt
        let one_minus = -(-z).exp_m1();
        let m = if z.abs() < 1e-12 { h } else { one_minus / a };
        let tail = if z.abs() < 1e-4 {
            z * z * (0.5 - z / 3.0 + z * z / 8.0)
        } else {
            one_minus - z * (-z).exp()
        };
        let t = if a == 0.0 { 0.0 } else { tail / a };
        moment += w * (xs[j] * one_minus + t);
        mass += w * m;
    }
    1.0 - moment / mass
}

/// `Ent_gamma(mu) + Ent_gamma(nu) - W2(mu, nu)^2 / 2` for centered `mu`.
pub fn lsi_deficit(mu: &Law, nu: &Law) -> Result<CostEstimate> {
    let r = talagrand_gap(mu, nu)?;
    Ok(CostEstimate {
        value: 0.5 * r.gap,
        error: 0.5 * r.discretization_error_estimate,
    })
}

fn interpolate(d: &GridDensity, x: f64) -> f64 {
    let g = d.grid();
    let v = d.values();
    let s = (x - g.lower()[0]) / g.step(0) - 0.5;
    if x < g.lower()[0] || x > g.upper()[0] {
        return 0.0;
    }
    let n = v.len();
    if s <= 0.0 {
        return v[0];
    }
    if s >= (n - 1) as f64 {
        return v[n - 1];
    }
    let j = s.floor() as usize;
    let w = s - j as f64;
    v[j] * (1.0 - w) + v[j + 1] * w
}

/// L1 distance between two line densities, evaluated on the cells of `a`
/// with `b` interpolated linearly between its centers.
pub fn density_l1(a: &GridDensity, b: &GridDensity) -> Result<f64> {
    if a.dim() != 1 || b.dim() != 1 {
        return Err(LabError::DimensionMismatch {
            expected: 1,
            got: a.dim().max(b.dim()),
        });
    }
    let g = a.grid();
    let h = g.step(0);
    let mut inside = 0.0;
    let mut dist = 0.0;
    for (x, v) in g.axis_centers(0).iter().zip(a.values()) {
        let w = interpolate(b, *x);
        inside += w * h;
        dist += (v - w).abs() * h;
    }
    // mass of b that the cells of a do not see
    Ok(dist + (1.0 - inside).max(0.0))
}

/// Random centered one-dimensional target: atoms, a Gaussian mixture on a
/// grid, or a uniform interval.
pub fn random_moment_target(rng: &mut impl Rng) -> Result<Law> {
    match rng.random_range(0..3) {
        0 => {
            let k = rng.random_range(2..=5);
            let xs: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ws: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
            let total: f64 = ws.iter().sum();
            let mean: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / total;
            let xs = xs.into_iter().map(|x| x - mean).collect();
            Ok(Law::Discrete(DiscreteMeasure::normalized(1, xs, ws)?))
        }
        1 => {
            let comps: Vec<(f64, f64, f64)> = (0..rng.random_range(2..=3))
                .map(|_| {
                    (
                        rng.random_range(0.3..1.0),
                        rng.random_range(-2.5..2.5),
                        rng.random_range(0.4..1.5),
                    )
                })
                .collect();
            let total: f64 = comps.iter().map(|c| c.0).sum();
            let mean: f64 = comps.iter().map(|c| c.0 * c.1).sum::<f64>() / total;
            let comps: Vec<(f64, Vec<f64>, f64)> = comps
                .iter()
                .map(|(w, c, s)| (*w, vec![c - mean], *s))
                .collect();
            let reach = comps
                .iter()
                .map(|(_, c, s)| c[0].abs() + 10.0 * s)
                .fold(0.0, f64::max);
            Ok(Law::Grid(mixture_density(
                Grid::line(-reach, reach, 4096)?,
                &comps,
            )?))
        }
        _ => {
            let a = rng.random_range(0.5..2.0);
            Ok(Law::Grid(GridDensity::new(
                Grid::line(-a, a, 2048)?,
                vec![1.0; 2048],
            )?))
        }
    }
}
