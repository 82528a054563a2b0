use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::{default_conjugate_grid, legendre, legendre_discrete, log_mass};
use crate::error::{LabError, Result};
use crate::measures::{norm, GapReport, Grid, GridDensity, GridFunction};

/// Slack allowed in `f(x) + g(y) <= -x.y` on the grid.
pub const ADMISSIBILITY_TOL: f64 = 1e-9;
/// Barycenter tolerance for the centered side of a pair.
pub const PAIR_CENTERING_TOL: f64 = 1e-6;

/// Log-densities `f, g` with `f(x) + g(y) <= -x.y` for all grid pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SantaloPair {
    f: GridFunction,
    g: GridFunction,
    admissibility_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    F,
    G,
}

impl SantaloPair {
    /// Computes `min (-x.y - f(x) - g(y))` over all grid pairs and rejects the
    /// pair when it is below `-ADMISSIBILITY_TOL`, reporting the worst pair.
    pub fn new(f: GridFunction, g: GridFunction) -> Result<Self> {
        if f.dim() != g.dim() {
            return Err(LabError::DimensionMismatch {
                expected: f.dim(),
                got: g.dim(),
            });
        }
        if f.values()
            .iter()
            .chain(g.values())
            .any(|v| *v == f64::INFINITY)
        {
            return Err(LabError::Precondition(
                "log-densities must not take the value +inf".into(),
            ));
        }
        if f.domain_size() == 0 || g.domain_size() == 0 {
            return Err(LabError::EmptyDomain);
        }
        // sup_x (x.y + f(x)) is the conjugate of -f at y
        let h = legendre_discrete(&f.negated(), g.grid())?;
        let mut margin = f64::INFINITY;
        let mut worst = 0;
        for (k, (gv, hv)) in g.values().iter().zip(h.values()).enumerate() {
            if !gv.is_finite() {
                continue;
            }
            let m = -gv - hv;
            if m < margin {
                margin = m;
                worst = k;
            }
        }
        if margin < -ADMISSIBILITY_TOL {
            let d = f.dim();
            let y = g.grid().point(worst);
            let (x, _) = argmax_linear(&f, &y[..d]);
            return Err(LabError::Inadmissible {
                x,
                y: y[..d].to_vec(),
                violation: -margin,
            });
        }
        Ok(Self {
            f,
            g,
            admissibility_margin: margin,
        })
    }

    pub fn f(&self) -> &GridFunction {
        &self.f
    }

    pub fn g(&self) -> &GridFunction {
        &self.g
    }

    pub fn admissibility_margin(&self) -> f64 {
        self.admissibility_margin
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }
}

/// `argmax_x (x.y + f(x))` over the samples of `f`.
fn argmax_linear(f: &GridFunction, y: &[f64]) -> (Vec<f64>, f64) {
    let d = f.dim();
    let mut best = (vec![0.0; d], f64::NEG_INFINITY);
    for (p, v) in f.grid().points().zip(f.values()) {
        if !v.is_finite() {
            continue;
        }
        let s = v + (0..d).map(|a| p[a] * y[a]).sum::<f64>();
        if s > best.1 {
            best = (p[..d].to_vec(), s);
        }
    }
    best
}

/// Normalized `exp(f)` as a grid density.
pub fn exp_density(f: &GridFunction) -> Result<GridDensity> {
    GridDensity::from_log_values(f.grid().clone(), f.values())
}

/// `log int e^f + log int e^g <= d log 2 pi`, with the designated side checked
/// for a centered normalized exponential.
pub fn santalo_check(p: &SantaloPair, centered_side: Side) -> Result<GapReport> {
    let side = match centered_side {
        Side::F => p.f(),
        Side::G => p.g(),
    };
    let b = norm(&exp_density(side)?.barycenter());
    if b > PAIR_CENTERING_TOL {
        return Err(LabError::Precondition(format!(
            "normalized exp of the {centered_side:?} side has barycenter norm {b:e} > {PAIR_CENTERING_TOL:e}"
        )));
    }
    let mf = log_mass(p.f(), 1.0);
    let mg = log_mass(p.g(), 1.0);
    let d = p.dim() as f64;
    Ok(GapReport::new(
        mf.value + mg.value,
        d * (2.0 * PI).ln(),
        mf.error + mg.error,
    ))
}

/// The largest admissible partner `g(y) = inf_x (-x.y - f(x)) = -(-f)*(y)`,
/// on `out` or on the default conjugate grid of `-f`. Slopes the grid of `f`
/// cannot resolve come out as `-inf`.
pub fn santalo_optimal_partner(f: &GridFunction, out: Option<&Grid>) -> Result<GridFunction> {
    if f.values().iter().any(|v| *v == f64::INFINITY) {
        return Err(LabError::Precondition("f must be bounded above".into()));
    }
    let neg = f.negated();
    let out = match out {
        Some(g) => g.clone(),
        None => default_conjugate_grid(&neg)?,
    };
    Ok(legendre(&neg, Some(&out))?.negated())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(l: f64, n: usize) -> Grid {
        Grid::line(-l, l, n).unwrap()
    }

    fn quad() -> GridFunction {
        GridFunction::from_fn(line(10.0, 2048), |x| -0.5 * x[0] * x[0]).unwrap()
    }

    #[test]
    fn gaussian_pair_is_tight() {
        let p = SantaloPair::new(quad(), quad()).unwrap();
        assert!(p.admissibility_margin() >= 0.0);
        let r = santalo_check(&p, Side::F).unwrap();
        assert!(r.gap.abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn constant_shift_gives_unit_slack() {
        let p = SantaloPair::new(quad().shifted(-1.0), quad()).unwrap();
        assert!((p.admissibility_margin() - 1.0).abs() < 1e-12);
        let r = santalo_check(&p, Side::G).unwrap();
        assert!((r.gap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inadmissible_pair_names_a_witness() {
        let err = SantaloPair::new(quad(), quad().shifted(0.5)).unwrap_err();
        let LabError::Inadmissible { x, y, violation } = err else {
            panic!("{err:?}")
        };
        assert!((violation - 0.5).abs() < 1e-9);
        // the witness realizes the violation
        let v = -0.5 * x[0] * x[0] - 0.5 * y[0] * y[0] + 0.5 + x[0] * y[0];
        assert!(v > 0.5 - 1e-3);
    }

    #[test]
    fn non_centered_side_is_rejected() {
        let f = GridFunction::from_fn(line(12.0, 2048), |x| -0.5 * (x[0] - 1.0).powi(2)).unwrap();
        let g = santalo_optimal_partner(&f, None).unwrap();
        let p = SantaloPair::new(f, g).unwrap();
        assert!(matches!(
            santalo_check(&p, Side::F),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn partner_of_quadratic() {
        let g = santalo_optimal_partner(&quad(), Some(&line(5.0, 1000))).unwrap();
        for (y, v) in g.grid().axis_centers(0).iter().zip(g.values()) {
            assert!((v + 0.5 * y * y).abs() < 1e-4, "{y} {v}");
        }
        let p = SantaloPair::new(quad(), g).unwrap();
        assert!(p.admissibility_margin().abs() < 1e-12);
    }

    #[test]
    fn partner_of_interval_indicator_is_minus_abs() {
        let f = GridFunction::from_fn(line(2.0, 4001), |x| {
            if x[0].abs() <= 1.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
        .unwrap();
        let xmax = f
            .grid()
            .axis_centers(0)
            .into_iter()
            .filter(|x| x.abs() <= 1.0)
            .fold(0.0, f64::max);
        let g = santalo_optimal_partner(&f, Some(&line(3.0, 600))).unwrap();
        for (y, v) in g.grid().axis_centers(0).iter().zip(g.values()) {
            // direct inf over the domain samples
            assert!((v + y.abs() * xmax).abs() < 1e-12);
            assert!((v + y.abs()).abs() < 1e-3);
        }
    }

    #[test]
    fn partner_of_minus_abs_is_interval_indicator() {
        let f = GridFunction::from_fn(line(40.0, 8001), |x| -x[0].abs()).unwrap();
        let g = santalo_optimal_partner(&f, Some(&line(1.5, 300))).unwrap();
        for (y, v) in g.grid().axis_centers(0).iter().zip(g.values()) {
            if y.abs() < 1.0 {
                assert!(v.abs() < 1e-12);
            } else {
                assert_eq!(*v, f64::NEG_INFINITY);
            }
        }
    }

    #[test]
    fn quartic_with_optimal_partner_has_slack() {
        let f = GridFunction::from_fn(line(6.0, 2048), |x| -x[0].powi(4)).unwrap();
        let g = santalo_optimal_partner(&f, None).unwrap();
        let p = SantaloPair::new(f, g).unwrap();
        let r = santalo_check(&p, Side::F).unwrap();
        assert!(
            r.gap > 10.0 * r.discretization_error_estimate && r.gap > 0.01,
            "{r:?}"
        );
    }

    #[test]
    fn tensor_pair_in_two_dimensions() {
        let g = Grid::square(-9.0, 9.0, 256).unwrap();
        let f = GridFunction::from_fn(g, |x| -0.5 * (x[0] * x[0] + x[1] * x[1])).unwrap();
        let p = SantaloPair::new(f.clone(), f).unwrap();
        let r = santalo_check(&p, Side::F).unwrap();
        assert!(r.gap.abs() < 1e-5);
    }
}
