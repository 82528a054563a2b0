use crate::calculus::law_rel_entropy;
use crate::error::{LabError, Result};
use crate::measures::{norm, GapReport, Law};
use crate::transport::{w2_sq, CostEstimate};

/// Centering tolerance for exact representations (Gaussian, discrete).
pub const CLOSED_FORM_CENTERING_TOL: f64 = 1e-6;
/// Centering tolerance once a grid is involved; sampling moves barycenters.
pub const GRID_CENTERING_TOL: f64 = 1e-4;

pub fn centering_tol(law: &Law) -> f64 {
    if law.is_grid_based() {
        GRID_CENTERING_TOL
    } else {
        CLOSED_FORM_CENTERING_TOL
    }
}

/// `Ent_gamma`, which is `+inf` for discrete laws.
fn entropy_or_inf(law: &Law) -> Result<CostEstimate> {
    match law {
        Law::Discrete(_) => Ok(CostEstimate {
            value: f64::INFINITY,
            error: 0.0,
        }),
        Law::Product(fs) if fs.iter().any(|f| matches!(f, Law::Discrete(_))) => Ok(CostEstimate {
            value: f64::INFINITY,
            error: 0.0,
        }),
        other => law_rel_entropy(other),
    }
}

/// `W2(mu, nu)^2 <= 2 Ent_gamma(mu) + 2 Ent_gamma(nu)` for centered `mu`.
pub fn talagrand_gap(mu: &Law, nu: &Law) -> Result<GapReport> {
    if mu.dim() != nu.dim() {
        return Err(LabError::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    let tol = centering_tol(mu);
    let b = norm(&mu.barycenter());
    if b > tol {
        return Err(LabError::NotCentered { norm: b, tol });
    }
    let w = w2_sq(mu, nu)?;
    let em = entropy_or_inf(mu)?;
    let en = entropy_or_inf(nu)?;
    let rhs = 2.0 * (em.value + en.value);
    let err = if rhs.is_finite() {
        w.error + 2.0 * (em.error + en.error)
    } else {
        w.error
    };
    Ok(GapReport::new(w.value, rhs, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DiscreteMeasure, GaussianParams, Grid, GridDensity, Verdict};

    fn normal(m: f64, v: f64) -> Law {
        Law::Gaussian(GaussianParams::scalar(m, v).unwrap())
    }

    #[test]
    fn standard_pair_is_tight() {
        let r = talagrand_gap(&normal(0.0, 1.0), &normal(0.0, 1.0)).unwrap();
        assert_eq!(r.gap, 0.0);
    }

    #[test]
    fn equality_case_in_one_dimension() {
        let r = talagrand_gap(&normal(0.0, 2.0), &normal(0.5, 0.5)).unwrap();
        assert!(r.gap.abs() < 1e-9);
    }

    #[test]
    fn bimodal_mixture_has_room() {
        let grid = Grid::line(-9.0, 9.0, 4096).unwrap();
        let mix = GridDensity::from_fn(grid, |x| {
            (-(x[0] + 2.0).powi(2) / 1.0).exp() + (-(x[0] - 2.0).powi(2) / 1.0).exp()
        })
        .unwrap();
        let r = talagrand_gap(&Law::Grid(mix), &normal(0.0, 1.0)).unwrap();
        assert!(
            r.gap > r.discretization_error_estimate && r.gap > 0.1,
            "{r:?}"
        );
        assert_eq!(r.verdict, Verdict::Holds);
    }

    #[test]
    fn non_centered_mu_is_rejected() {
        let err = talagrand_gap(&normal(1.0, 1.0), &normal(-1.0, 1.0)).unwrap_err();
        assert!(matches!(err, LabError::NotCentered { .. }));
        assert!(err.to_string().contains("N(1,1)"));
    }

    #[test]
    fn discrete_laws_make_the_right_side_infinite() {
        let mu = Law::Discrete(DiscreteMeasure::uniform(1, vec![-1.0, 1.0]).unwrap());
        let r = talagrand_gap(&mu, &normal(0.0, 1.0)).unwrap();
        assert_eq!(r.rhs, f64::INFINITY);
        assert_eq!(r.verdict, Verdict::Holds);
    }
}
