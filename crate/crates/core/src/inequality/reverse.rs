use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::{lebesgue_entropy, legendre, log_mass, rel_entropy_gaussian, subsampled};
use crate::error::{LabError, Result};
use crate::measures::{ConvexPotential, GapReport, GridDensity, GridFunction, Law};
use crate::transport::{negdot_cost, w2_sq, CostEstimate};

/// Relative tolerance for sign-flip invariance of a potential.
pub const UNCONDITIONAL_TOL: f64 = 1e-9;

/// Checks `f(.., -x_a, ..) = f(.., x_a, ..)` for every axis on an origin-symmetric grid.
pub fn is_unconditional_potential(f: &GridFunction) -> bool {
    let g = f.grid();
    if !g.is_origin_symmetric(1e-12) {
        return false;
    }
    let v = f.values();
    (0..g.dim()).all(|axis| {
        (0..g.len()).all(|k| {
            let mut idx = g.multi_index(k);
            idx[axis] = g.n(axis) - 1 - idx[axis];
            let (a, b) = (v[k], v[g.flat_index(idx)]);
            a == b || (a - b).abs() <= UNCONDITIONAL_TOL * (1.0 + a.abs())
        })
    })
}

fn require_unconditional(f: &ConvexPotential) -> Result<()> {
    if is_unconditional_potential(f.function()) {
        Ok(())
    } else {
        Err(LabError::Precondition(
            "f is not unconditional on a grid symmetric about 0".into(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KmReport {
    /// `d log 4 <= log int e^{-f} + log int e^{-f*}`.
    pub lower: GapReport,
    /// The same quantity against the Santalo bound `d log 2 pi`.
    pub upper: GapReport,
    pub log_mass_f: f64,
    pub log_mass_conjugate: f64,
}

impl KmReport {
    /// `int e^{-f} * int e^{-f*}`.
    pub fn product(&self) -> f64 {
        (self.log_mass_f + self.log_mass_conjugate).exp()
    }
}

/// `log int e^{-f} + log int e^{-f*}` for unconditional convex `f`, with `f*`
/// on `out` or on the default conjugate grid.
pub fn km_product(f: &ConvexPotential, out: Option<&crate::measures::Grid>) -> Result<KmReport> {
    require_unconditional(f)?;
    let fstar = legendre(f.function(), out)?;
    let a = log_mass(f.function(), -1.0);
    let b = log_mass(&fstar, -1.0);
    if !(b.value.is_finite()) {
        return Err(LabError::Precondition(
            "e^{-f*} has no mass on the output grid".into(),
        ));
    }
    // the discrete sup misses f* by O(h^2); conjugating every other sample shows its size
    let conj_err = match subsampled(f.function()) {
        Some(c) => (b.value - legendre(&c, Some(fstar.grid()))?.log_exp_integral(-1.0)).abs(),
        None => 0.0,
    };
    let d = f.grid().dim() as f64;
    let value = a.value + b.value;
    let err = a.error + b.error + if conj_err.is_finite() { conj_err } else { 0.0 };
    Ok(KmReport {
        lower: GapReport::new(d * 4f64.ln(), value, err),
        upper: GapReport::new(value, d * (2.0 * PI).ln(), err),
        log_mass_f: a.value,
        log_mass_conjugate: b.value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseReport {
    /// `Ent_gamma(mu) + Ent_gamma(mu*) <= W2(mu, mu*)^2 / 2 + (d/2) log(pi/2)`
    /// for the normalized measures.
    pub gap: GapReport,
    /// `Ent_dx(mu) + Ent_dx(mu*) <= inf_pi int -x.y dpi - d log 4`.
    pub lebesgue_chain: GapReport,
    pub mass_f: f64,
    pub mass_conjugate: f64,
}

/// The reverse inequality for `mu ~ e^{-f}` and `mu* ~ e^{-f*}`, both
/// normalized; raw masses are reported alongside.
pub fn reverse_gap(
    f: &ConvexPotential,
    out: Option<&crate::measures::Grid>,
) -> Result<ReverseReport> {
    require_unconditional(f)?;
    let fstar = legendre(f.function(), out)?;
    let mass_f = f.function().exp_integral(-1.0);
    let mass_conjugate = fstar.exp_integral(-1.0);
    if !(mass_conjugate > 0.0 && mass_conjugate.is_finite() && mass_f > 0.0 && mass_f.is_finite()) {
        return Err(LabError::Precondition(format!(
            "masses int e^-f = {mass_f}, int e^-f* = {mass_conjugate} are not finite and positive"
        )));
    }
    let mu = density_of(f.function())?;
    let mu_star = density_of(&fstar)?;
    let d = f.grid().dim() as f64;
    let (lm, ls) = (Law::Grid(mu.clone()), Law::Grid(mu_star.clone()));
    let w: CostEstimate = w2_sq(&lm, &ls)?;
    let em = rel_entropy_gaussian(&mu);
    let es = rel_entropy_gaussian(&mu_star);
    let gap = GapReport::new(
        em.value + es.value,
        0.5 * w.value + 0.5 * d * (PI / 2.0).ln(),
        em.error + es.error + 0.5 * w.error,
    );
    let c = negdot_cost(&lm, &ls)?;
    let lm_dx = lebesgue_entropy(&mu);
    let ls_dx = lebesgue_entropy(&mu_star);
    let lebesgue_chain = GapReport::new(
        lm_dx.value + ls_dx.value,
        c.value - d * 4f64.ln(),
        lm_dx.error + ls_dx.error + c.error,
    );
    Ok(ReverseReport {
        gap,
        lebesgue_chain,
        mass_f,
        mass_conjugate,
    })
}

fn density_of(potential: &GridFunction) -> Result<GridDensity> {
    GridDensity::from_log_values(potential.grid().clone(), potential.negated().values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Grid;

    fn pot(l: f64, n: usize, f: impl Fn(f64) -> f64) -> ConvexPotential {
        ConvexPotential::from_fn(Grid::line(-l, l, n).unwrap(), |x| f(x[0])).unwrap()
    }

    #[test]
    fn gaussian_potential() {
        let r = km_product(&pot(12.0, 4001, |x| 0.5 * x * x), None).unwrap();
        assert!((r.lower.rhs - (2.0 * PI).ln()).abs() < 1e-5, "{r:?}");
        assert!(!r.lower.is_violated() && !r.upper.is_violated(), "{r:?}");
    }

    #[test]
    fn absolute_value_is_the_equality_case() {
        let f = pot(40.0, 131073, f64::abs);
        let out = Grid::line(-1.1, 1.1, 22000).unwrap();
        let r = km_product(&f, Some(&out)).unwrap();
        assert!((r.product() - 4.0).abs() < 1e-6, "{}", r.product());
        assert!(r.lower.gap.abs() < 1e-6);
    }

    #[test]
    fn abs_plus_quadratic_is_between_the_bounds() {
        let r = km_product(&pot(16.0, 8001, |x| 0.5 * x * x + x.abs()), None).unwrap();
        assert!(r.lower.gap > 0.0 && r.upper.gap > 0.0, "{r:?}");
    }

    #[test]
    fn non_unconditional_potential_is_rejected() {
        let f = pot(10.0, 1001, |x| 0.5 * (x - 0.5).powi(2));
        assert!(matches!(
            km_product(&f, None),
            Err(LabError::Precondition(_))
        ));
        assert!(matches!(
            reverse_gap(&f, None),
            Err(LabError::Precondition(_))
        ));
    }

    #[test]
    fn reverse_gaussian_case() {
        let c = 0.5 * (2.0 * PI).ln();
        let r = reverse_gap(&pot(12.0, 4001, |x| 0.5 * x * x + c), None).unwrap();
        assert!(r.gap.lhs.abs() < 1e-5, "{r:?}");
        assert!((r.gap.rhs - 0.5 * (PI / 2.0).ln()).abs() < 1e-4);
        assert!((r.mass_f - 1.0).abs() < 1e-9);
        assert!((r.mass_conjugate - 2.0 * PI).abs() < 1e-3);
        assert!(!r.lebesgue_chain.is_violated());
    }

    #[test]
    fn laplace_and_uniform() {
        let f = pot(40.0, 40001, |x| x.abs() + 2f64.ln());
        let out = Grid::line(-1.1, 1.1, 22000).unwrap();
        let r = reverse_gap(&f, Some(&out)).unwrap();
        let ent_laplace = -(2f64.ln()) + 0.5 * (2.0 * PI).ln();
        let ent_uniform = -(2f64.ln()) + 1.0 / 6.0 + 0.5 * (2.0 * PI).ln();
        assert!(
            (r.gap.lhs - ent_laplace - ent_uniform).abs() < 1e-3,
            "{r:?}"
        );
        assert!((r.gap.rhs - 5.0 / 12.0 - 0.5 * (PI / 2.0).ln()).abs() < 1e-3);
        assert!(r.gap.gap > r.gap.discretization_error_estimate);
        assert!(r.lebesgue_chain.gap > 0.0);
    }

    #[test]
    fn separable_potential_in_two_dimensions() {
        let g2 = Grid::square(-12.0, 12.0, 241).unwrap();
        let f2 = ConvexPotential::from_fn(g2, |x| x[0].abs() + 0.5 * x[1] * x[1] + 0.3).unwrap();
        let out2 = Grid::square(-1.2, 1.2, 240).unwrap();
        let r2 = reverse_gap(&f2, Some(&out2)).unwrap();
        let f_a = pot(12.0, 241, |x| x.abs() + 0.1);
        let f_b = pot(12.0, 241, |x| 0.5 * x * x + 0.2);
        let out = Grid::line(-1.2, 1.2, 240).unwrap();
        let ra = reverse_gap(&f_a, Some(&out)).unwrap();
        let rb = reverse_gap(&f_b, Some(&out)).unwrap();
        // entropies add over factors
        assert!(
            (r2.gap.lhs - ra.gap.lhs - rb.gap.lhs).abs() < 1e-9,
            "{} {} {}",
            r2.gap.lhs,
            ra.gap.lhs,
            rb.gap.lhs
        );
        // the 2D transport term brackets the sum of the 1D ones
        let w_sum = 2.0 * (ra.gap.rhs + rb.gap.rhs) - 2.0 * (PI / 2.0).ln();
        let w2 = 2.0 * r2.gap.rhs - 2.0 * (PI / 2.0).ln();
        assert!(
            (w2 - w_sum).abs() <= 2.0 * r2.gap.discretization_error_estimate,
            "{w2} {w_sum}"
        );
        assert!(!r2.gap.is_violated());
    }
}
