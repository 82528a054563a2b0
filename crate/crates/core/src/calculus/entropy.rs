use std::f64::consts::PI;

use crate::error::{LabError, Result};
use crate::gaussian::gaussian_rel_entropy;
use crate::measures::{Grid, GridDensity, GridFunction, Law};
use crate::transport::CostEstimate;

/// `S(rho) = -int rho log rho` by the midpoint rule, with `0 log 0 = 0`.
fn entropy_sum(rho: &GridDensity) -> f64 {
    let vol = rho.cell_volume();
    -rho.values()
        .iter()
        .filter(|v| **v > 0.0)
        .map(|v| v * v.ln())
        .sum::<f64>()
        * vol
}

fn rel_entropy_sum(rho: &GridDensity) -> f64 {
    let d = rho.dim() as f64;
    -entropy_sum(rho) + 0.5 * rho.second_moment() + 0.5 * d * (2.0 * PI).ln()
}

/// Midpoint value on `rho`'s grid and `|value - value on the 2x coarser grid|`.
fn with_refinement(rho: &GridDensity, f: impl Fn(&GridDensity) -> f64) -> CostEstimate {
    let value = f(rho);
    let error = rho
        .coarsened()
        .map(|c| (value - f(&c)).abs())
        .unwrap_or(0.0);
    CostEstimate { value, error }
}

/// Differential entropy of a grid density with its refinement error estimate.
pub fn differential_entropy(rho: &GridDensity) -> CostEstimate {
    with_refinement(rho, entropy_sum)
}

/// `Ent_gamma(rho) = -S(rho) + M2(rho)/2 + (d/2) log 2 pi`.
pub fn rel_entropy_gaussian(rho: &GridDensity) -> CostEstimate {
    with_refinement(rho, rel_entropy_sum)
}

/// Relative entropy with respect to the standard Gaussian for any law with a
/// density; products add up over factors.
pub fn law_rel_entropy(law: &Law) -> Result<CostEstimate> {
    match law {
        Law::Gaussian(g) => {
            let v = gaussian_rel_entropy(g);
            Ok(CostEstimate {
                value: v,
                error: 1e-12 * (1.0 + v.abs()),
            })
        }
        Law::Grid(d) => Ok(rel_entropy_gaussian(d)),
        Law::Product(fs) => {
            let mut total = CostEstimate {
                value: 0.0,
                error: 0.0,
            };
            for f in fs {
                let e = law_rel_entropy(f)?;
                total.value += e.value;
                total.error += e.error;
            }
            Ok(total)
        }
        Law::Discrete(_) => Err(LabError::Unsupported(
            "relative entropy of a discrete measure is infinite".into(),
        )),
    }
}

/// `Ent_dx(rho) = int rho log rho = -S(rho)`.
pub fn lebesgue_entropy(rho: &GridDensity) -> CostEstimate {
    let s = differential_entropy(rho);
    CostEstimate {
        value: -s.value,
        error: s.error,
    }
}

/// Every other sample per axis, as a midpoint rule on a grid of twice the
/// step whose cell centers are the kept samples.
pub fn subsampled(f: &GridFunction) -> Option<GridFunction> {
    let g = f.grid();
    if g.shape().iter().any(|&n| n < 4) {
        return None;
    }
    let d = g.dim();
    let lower: Vec<f64> = (0..d).map(|a| g.lower()[a] - 0.5 * g.step(a)).collect();
    let n: Vec<usize> = (0..d).map(|a| g.n(a).div_ceil(2)).collect();
    let upper: Vec<f64> = (0..d)
        .map(|a| lower[a] + 2.0 * g.step(a) * n[a] as f64)
        .collect();
    let coarse = Grid::new(lower, upper, n.clone()).ok()?;
    let values = (0..coarse.len())
        .map(|k| {
            let idx = coarse.multi_index(k);
            let mut fine = [0usize; 2];
            for a in 0..d {
                fine[a] = 2 * idx[a];
            }
            f.values()[g.flat_index(fine)]
        })
        .collect();
    GridFunction::new(coarse, values).ok()
}

/// `log int exp(sign * f)` with the change against the subsampled grid as
/// error estimate.
pub fn log_mass(f: &GridFunction, sign: f64) -> CostEstimate {
    let value = f.log_exp_integral(sign);
    let error = subsampled(f)
        .map(|c| (value - c.log_exp_integral(sign)).abs())
        .unwrap_or(0.0);
    CostEstimate { value, error }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{GaussianParams, Grid};

    fn normal(var: f64, n: usize) -> GridDensity {
        GridDensity::from_fn(Grid::line(-10.0, 10.0, n).unwrap(), |x| {
            (-x[0] * x[0] / (2.0 * var)).exp()
        })
        .unwrap()
    }

    #[test]
    fn uniform_on_unit_interval() {
        let u = GridDensity::from_fn(Grid::line(0.0, 1.0, 100).unwrap(), |_| 1.0).unwrap();
        let s = differential_entropy(&u);
        assert!(s.value.abs() < 1e-14 && s.error < 1e-14);
    }

    #[test]
    fn gaussian_entropies() {
        let s = differential_entropy(&normal(1.0, 2048));
        assert!((s.value - 0.5 * (2.0 * PI * 1f64.exp()).ln()).abs() < 1e-6);
        let g4 = GridDensity::from_fn(Grid::line(-20.0, 20.0, 4096).unwrap(), |x| {
            (-x[0] * x[0] / 8.0).exp()
        })
        .unwrap();
        let s = differential_entropy(&g4);
        assert!((s.value - 0.5 * (8.0 * PI * 1f64.exp()).ln()).abs() < 1e-6);
    }

    #[test]
    fn relative_entropy_matches_closed_forms() {
        assert!(rel_entropy_gaussian(&normal(1.0, 2048)).value.abs() < 1e-6);
        let two = rel_entropy_gaussian(&normal(2.0, 2048)).value;
        let closed = gaussian_rel_entropy(&GaussianParams::scalar(0.0, 2.0).unwrap());
        assert!((two - closed).abs() < 1e-5);
        let u = GridDensity::from_fn(Grid::line(-1.0, 1.0, 2000).unwrap(), |_| 1.0).unwrap();
        let expected = -(2f64.ln()) + 1.0 / 6.0 + 0.5 * (2.0 * PI).ln();
        assert!((rel_entropy_gaussian(&u).value - expected).abs() < 1e-6);
    }

    #[test]
    fn subsampled_mass_of_a_gaussian() {
        let f = GridFunction::from_fn(Grid::line(-10.0, 10.0, 2048).unwrap(), |x| {
            -0.5 * x[0] * x[0]
        })
        .unwrap();
        let m = log_mass(&f, 1.0);
        assert!((m.value - 0.5 * (2.0 * PI).ln()).abs() < 1e-12);
        assert!(m.error < 1e-10);
        let k =
            GridFunction::from_fn(Grid::line(-30.0, 30.0, 3001).unwrap(), |x| -x[0].abs()).unwrap();
        let m = log_mass(&k, 1.0);
        assert!((m.value - 2f64.ln()).abs() <= m.error);
    }

    #[test]
    fn two_d_product_density() {
        let g = Grid::square(-9.0, 9.0, 256).unwrap();
        let rho = GridDensity::from_fn(g, |x| (-0.5 * x[0] * x[0] - x[1] * x[1]).exp()).unwrap();
        let closed = gaussian_rel_entropy(&GaussianParams::scalar(0.0, 0.5).unwrap());
        let e = rel_entropy_gaussian(&rho);
        assert!((e.value - closed).abs() < 1e-4, "{e:?}");
    }
}
