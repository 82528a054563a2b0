//! Seeded random inputs for sweeps. Case `i` of a sweep with seed `s` is drawn
//! from the ChaCha stream `i` of seed `s`, so any case can be replayed alone.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::santalo::santalo_optimal_partner;
use super::talagrand::talagrand_gap;
use crate::error::Result;
use crate::gaussian::random_spd;
use crate::measures::{
    ConvexPotential, GapReport, GaussianParams, Grid, GridDensity, GridFunction, Law,
};

/// Bumped whenever a generator changes what it draws for a given seed.
pub const FAMILY_VERSION: u32 = 1;

pub fn case_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

const LINE_POINTS: usize = 4096;
const PLANE_POINTS: usize = 128;

/// Density of `sum w_i N(c_i, s_i^2)` on `grid` (1D or 2D isotropic components).
pub fn mixture_density(grid: Grid, comps: &[(f64, Vec<f64>, f64)]) -> Result<GridDensity> {
    let d = grid.dim();
    GridDensity::from_fn(grid, |x| {
        comps
            .iter()
            .map(|(w, c, s)| {
                let r2: f64 = (0..d).map(|a| (x[a] - c[a]).powi(2)).sum();
                w * (-r2 / (2.0 * s * s)).exp() / s.powi(d as i32)
            })
            .sum()
    })
}

/// Uniform density on `[lo, hi]` from exact cell overlaps.
pub fn interval_density(grid: Grid, lo: f64, hi: f64) -> Result<GridDensity> {
    let masses = (0..grid.n(0))
        .map(|i| (grid.edge(0, i + 1).min(hi) - grid.edge(0, i).max(lo)).max(0.0))
        .collect();
    GridDensity::from_cell_masses(grid, masses)
}

fn uniform_line(lo: f64, hi: f64) -> Result<Law> {
    Ok(Law::Grid(GridDensity::new(
        Grid::line(lo, hi, LINE_POINTS)?,
        vec![1.0; LINE_POINTS],
    )?))
}

fn mixture_line(comps: &[(f64, Vec<f64>, f64)]) -> Result<Law> {
    let reach = comps
        .iter()
        .map(|(_, c, s)| c[0].abs() + 10.0 * s)
        .fold(0.0, f64::max);
    Ok(Law::Grid(mixture_density(
        Grid::line(-reach, reach, LINE_POINTS)?,
        comps,
    )?))
}

/// Two-component mixture with mean zero.
fn centered_mixture_1d(rng: &mut impl Rng) -> Vec<(f64, Vec<f64>, f64)> {
    let w = rng.random_range(0.2..0.8);
    let c1 = rng.random_range(0.5..3.0);
    let c2 = -w * c1 / (1.0 - w);
    vec![
        (w, vec![c1], rng.random_range(0.3..1.2)),
        (1.0 - w, vec![c2], rng.random_range(0.3..1.2)),
    ]
}

fn free_mixture_1d(rng: &mut impl Rng) -> Vec<(f64, Vec<f64>, f64)> {
    let k = rng.random_range(1..=3);
    (0..k)
        .map(|_| {
            (
                rng.random_range(0.2..1.0),
                vec![rng.random_range(-3.0..3.0)],
                rng.random_range(0.3..1.5),
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Gaussian,
    Mixture,
    Uniform,
}

impl Family {
    fn draw(rng: &mut impl Rng) -> Self {
        match rng.random_range(0..3) {
            0 => Family::Gaussian,
            1 => Family::Mixture,
            _ => Family::Uniform,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Mixture => "mixture",
            Family::Uniform => "uniform",
        }
    }
}

fn law_1d(rng: &mut impl Rng, fam: Family, centered: bool) -> Result<Law> {
    match (fam, centered) {
        (Family::Gaussian, true) => Ok(Law::Gaussian(GaussianParams::scalar(
            0.0,
            rng.random_range(0.2..4.0),
        )?)),
        (Family::Gaussian, false) => Ok(Law::Gaussian(GaussianParams::scalar(
            rng.random_range(-2.0..2.0),
            rng.random_range(0.2..4.0),
        )?)),
        (Family::Mixture, true) => mixture_line(&centered_mixture_1d(rng)),
        (Family::Mixture, false) => mixture_line(&free_mixture_1d(rng)),
        (Family::Uniform, true) => {
            let a = rng.random_range(0.3..3.0);
            uniform_line(-a, a)
        }
        (Family::Uniform, false) => {
            let lo = rng.random_range(-3.0..2.0);
            uniform_line(lo, lo + rng.random_range(0.3..4.0))
        }
    }
}

fn law_2d(rng: &mut impl Rng, fam: Family, centered: bool) -> Result<Law> {
    match fam {
        Family::Gaussian => {
            let cov = random_spd(rng, 2, (0.2, 5.0));
            let mean = if centered {
                DVector::zeros(2)
            } else {
                DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0))
            };
            Ok(Law::Gaussian(GaussianParams::new(mean, cov)?))
        }
        Family::Uniform => Law::product(vec![
            law_1d(rng, Family::Uniform, centered)?,
            law_1d(rng, Family::Uniform, centered)?,
        ]),
        Family::Mixture if rng.random_bool(0.5) => Law::product(vec![
            law_1d(rng, Family::Mixture, centered)?,
            law_1d(rng, Family::Mixture, centered)?,
        ]),
        Family::Mixture => {
            let comps: Vec<(f64, Vec<f64>, f64)> = if centered {
                let c: Vec<f64> = vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let s = rng.random_range(0.4..1.2);
                vec![(0.5, c.clone(), s), (0.5, vec![-c[0], -c[1]], s)]
            } else {
                (0..2)
                    .map(|_| {
                        let c: Vec<f64> =
                            vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                        (rng.random_range(0.2..1.0), c, rng.random_range(0.4..1.2))
                    })
                    .collect()
            };
            let reach = comps
                .iter()
                .map(|(_, c, s)| c[0].abs().max(c[1].abs()) + 8.0 * s)
                .fold(0.0, f64::max);
            Ok(Law::Grid(mixture_density(
                Grid::square(-reach, reach, PLANE_POINTS)?,
                &comps,
            )?))
        }
    }
}

/// One input pair for the transport-entropy sweep: centered `mu`, arbitrary `nu`.
#[derive(Debug, Clone)]
pub struct TalagrandCase {
    pub label: String,
    pub mu: Law,
    pub nu: Law,
}

pub fn random_talagrand_case(rng: &mut impl Rng) -> Result<TalagrandCase> {
    let d = rng.random_range(1..=2);
    let (fm, fn_) = (Family::draw(rng), Family::draw(rng));
    let (mu, nu) = if d == 1 {
        (law_1d(rng, fm, true)?, law_1d(rng, fn_, false)?)
    } else {
        (law_2d(rng, fm, true)?, law_2d(rng, fn_, false)?)
    };
    Ok(TalagrandCase {
        label: format!("d{d}-{}-{}", fm.name(), fn_.name()),
        mu,
        nu,
    })
}

/// Runs `count` sweep cases in parallel; results come back in case order.
pub fn talagrand_sweep(seed: u64, count: usize) -> Vec<(String, Result<GapReport>)> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = case_rng(seed, i as u64);
            match random_talagrand_case(&mut rng) {
                Ok(c) => (c.label, talagrand_gap(&c.mu, &c.nu)),
                Err(e) => (format!("case-{i}"), Err(e)),
            }
        })
        .collect()
}

/// An admissible pair `(f, g)` on `[-14, 14]`: `f` is a tilted, shifted
/// negative convex potential and `g` its optimal partner lowered by a
/// non-negative amount.
pub fn random_admissible_pair(rng: &mut impl Rng) -> Result<(GridFunction, GridFunction)> {
    let p = rng.random_range(0.5..2.0);
    let q = if rng.random_bool(0.5) {
        rng.random_range(0.0..0.1)
    } else {
        0.0
    };
    let s = rng.random_range(0.0..1.0);
    let t = rng.random_range(-1.0..1.0);
    let a = rng.random_range(-1.0..1.0);
    let c = rng.random_range(-1.0..1.0);
    let grid = Grid::line(-14.0, 14.0, 2001)?;
    let f = GridFunction::from_fn(grid.clone(), |x| {
        let u = x[0] - t;
        -(0.5 * p * u * u + q * u.powi(4) + s * u.abs()) + a * x[0] + c
    })?;
    let partner = santalo_optimal_partner(&f, Some(&grid))?;
    let (d0, d1) = if rng.random_bool(0.3) {
        (0.0, 0.0)
    } else {
        (rng.random_range(0.0..0.5), rng.random_range(0.0..0.2))
    };
    let g = partner.map(|y, v| v - d0 - d1 * y[0] * y[0])?;
    Ok((f, g))
}

/// Smallest `y` (on a 1/64 lattice) with `sup_x (x y - f1(x)) >= level`, the
/// supremum taken over a fine sample of `[-l, l]`.
fn conjugate_reach(f1: &impl Fn(f64) -> f64, l: f64, level: f64) -> f64 {
    let xs: Vec<f64> = (0..=4000)
        .map(|i| -l + 2.0 * l * i as f64 / 4000.0)
        .collect();
    let fx: Vec<f64> = xs.iter().map(|x| f1(*x)).collect();
    let mut y = 0.0;
    loop {
        y += 1.0 / 64.0;
        let s = xs
            .iter()
            .zip(&fx)
            .map(|(x, v)| x * y - v)
            .fold(f64::NEG_INFINITY, f64::max);
        if s >= level {
            return y;
        }
    }
}

/// Unconditional convex potential `sum a_i x_i^2 / 2 + b sum |x_i| + c |x|^4`
/// with a grid wide enough that `e^{-f}` and `e^{-f*}` have decayed by
/// `e^{-40}` inside, and the matching output grid for `f*`.
pub fn random_unconditional_convex(
    rng: &mut impl Rng,
    d: usize,
) -> Result<(ConvexPotential, Grid)> {
    let a: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..2.0)).collect();
    let b = rng.random_range(0.0..2.0);
    let c = if rng.random_bool(0.5) {
        rng.random_range(0.0..0.3)
    } else {
        0.0
    };
    let amin = a.iter().cloned().fold(f64::INFINITY, f64::min);
    let amax = a.iter().cloned().fold(0.0, f64::max);
    let along = |x: f64, ai: f64| 0.5 * ai * x * x + b * x.abs() + c * x.powi(4);
    let mut l = 4.0;
    while along(l, amin) < 40.0 {
        l *= 1.25;
    }
    // on each axis f* restricted to the axis is the conjugate of f restricted
    // to it; the flattest axis reaches level 40 last
    let y = conjugate_reach(&|x| along(x, amax), 4.0 * l, 40.0);
    // slopes up to y must be attained inside the grid
    while 2.0 * c * l.powi(3) * 2.0 + amin * l + b < y {
        l *= 1.25;
    }
    let (n, m) = if d == 1 { (4001, 4000) } else { (201, 200) };
    let grid = if d == 1 {
        Grid::line(-l, l, n)?
    } else {
        Grid::square(-l, l, n)?
    };
    let out = if d == 1 {
        Grid::line(-y, y, m)?
    } else {
        Grid::square(-y, y, m)?
    };
    let f = ConvexPotential::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (0..d)
            .map(|i| 0.5 * a[i] * x[i] * x[i] + b * x[i].abs())
            .sum::<f64>()
            + c * r2 * r2
    })?;
    Ok((f, out))
}

/// A symmetric `mu` and an arbitrary `nu` on `grid` (1D, symmetric about 0).
pub fn random_ulc_pair(rng: &mut impl Rng, grid: &Grid) -> Result<(GridDensity, GridDensity)> {
    let mu = match rng.random_range(0..3) {
        0 => mixture_density(
            grid.clone(),
            &[(1.0, vec![0.0], rng.random_range(0.3..1.5))],
        )?,
        1 => {
            let (c, s) = (rng.random_range(0.3..2.0), rng.random_range(0.3..1.0));
            mixture_density(grid.clone(), &[(0.5, vec![-c], s), (0.5, vec![c], s)])?
        }
        _ => {
            let a = rng.random_range(0.3..2.5);
            interval_density(grid.clone(), -a, a)?
        }
    };
    let nu = match rng.random_range(0..3) {
        0 => mixture_density(
            grid.clone(),
            &[(
                1.0,
                vec![rng.random_range(-2.0..2.0)],
                rng.random_range(0.3..1.5),
            )],
        )?,
        1 => mixture_density(grid.clone(), &free_mixture_1d(rng))?,
        _ => {
            let lo = rng.random_range(-2.5..1.5);
            interval_density(grid.clone(), lo, lo + rng.random_range(0.3..2.5))?
        }
    };
    Ok((mu, nu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::{duality_backward, km_product};

    #[test]
    fn cases_replay_from_their_stream() {
        let a = random_talagrand_case(&mut case_rng(7, 3)).unwrap();
        let b = random_talagrand_case(&mut case_rng(7, 3)).unwrap();
        assert_eq!(a.label, b.label);
        assert_eq!(a.mu, b.mu);
        assert_eq!(a.nu, b.nu);
    }

    #[test]
    fn generated_mu_is_centered() {
        for i in 0..40 {
            let c = random_talagrand_case(&mut case_rng(11, i)).unwrap();
            let tol = crate::inequality::centering_tol(&c.mu);
            assert!(c.mu.is_centered(tol), "{} {:?}", c.label, c.mu.barycenter());
        }
    }

    #[test]
    fn small_sweep_has_no_violation() {
        for (label, r) in talagrand_sweep(5, 24) {
            let r = r.unwrap_or_else(|e| panic!("{label}: {e}"));
            assert!(!r.is_violated(), "{label}: {r:?}");
        }
    }

    #[test]
    fn admissible_pairs_pass_the_backward_construction() {
        for i in 0..5 {
            let (f, g) = random_admissible_pair(&mut case_rng(3, i)).unwrap();
            let c = duality_backward(&f, &g).unwrap();
            assert!(c.barycenter_norm <= 1e-7);
            assert!(!c.endpoints.is_violated(), "{c:?}");
        }
    }

    #[test]
    fn unconditional_potentials_respect_the_sandwich() {
        for d in [1, 2] {
            for i in 0..3 {
                let (f, out) = random_unconditional_convex(&mut case_rng(9, i), d).unwrap();
                let r = km_product(&f, Some(&out)).unwrap();
                assert!(
                    !r.lower.is_violated() && !r.upper.is_violated(),
                    "d={d} {r:?}"
                );
            }
        }
    }
}
