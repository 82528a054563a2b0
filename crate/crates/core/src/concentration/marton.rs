use serde::{Deserialize, Serialize};

use super::sets::{complement, gaussian_interval_mass, gaussian_pdf, CenteredSet, SetKind};
use crate::error::{LabError, Result};
use crate::measures::{GapReport, Grid, GridDensity, Law};
use crate::transport::w2_sq;

/// Grid points used for the conditional measures.
pub const MARTON_POINTS: usize = 1 << 16;
/// Distance kept beyond the outermost endpoint of `A_r`.
const MARGIN: f64 = 12.0;
const SIMPSON_PANELS: usize = 4000;

/// `Ent_gamma` of `gamma( . | S)` two ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEntropy {
    /// `-log gamma(S)`.
    pub closed_form: f64,
    /// Quadrature of `rho log(rho / phi)` over `S`.
    pub quadrature: f64,
}

impl ConditionalEntropy {
    pub fn discrepancy(&self) -> f64 {
        (self.closed_form - self.quadrature).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MartonChain {
    pub set: SetKind,
    pub r: f64,
    pub gamma_a: f64,
    /// `1 - gamma(A_r)`.
    pub tail: f64,
    /// `r^2 <= W2(mu, nu)^2`: the conditional measures sit at distance `r`.
    pub support: GapReport,
    /// `W2(mu, nu)^2 <= 2 Ent_gamma(mu) + 2 Ent_gamma(nu)`, the right side
    /// in closed form `-2 log gamma(A) - 2 log(1 - gamma(A_r))`.
    pub transport: GapReport,
    pub entropy_mu: ConditionalEntropy,
    pub entropy_nu: ConditionalEntropy,
}

impl MartonChain {
    /// `1 - gamma(A_r) <= gamma(A)^{-1} e^{-r^2/2}` as read off the chain.
    pub fn concentration(&self) -> GapReport {
        GapReport::new(
            self.tail,
            (-0.5 * self.r * self.r).exp() / self.gamma_a,
            0.0,
        )
    }
}

fn conditional_density(grid: &Grid, set: &[(f64, f64)]) -> Result<GridDensity> {
    let n = grid.n(0);
    let masses = (0..n)
        .map(|i| {
            let (lo, hi) = (grid.edge(0, i), grid.edge(0, i + 1));
            set.iter()
                .map(|(a, b)| gaussian_interval_mass(a.max(lo), b.min(hi)))
                .sum()
        })
        .collect();
    GridDensity::from_cell_masses(grid.clone(), masses)
}

/// Composite Simpson over each piece of `set`, rays cut `MARGIN` past the
/// finite endpoints.
fn conditional_entropy(set: &[(f64, f64)], reach: f64) -> ConditionalEntropy {
    let mass: f64 = set
        .iter()
        .map(|(a, b)| gaussian_interval_mass(*a, *b))
        .sum();
    let mut total = 0.0;
    for (a, b) in set {
        let (a, b) = (a.max(-reach), b.min(reach));
        if !(a < b) {
            continue;
        }
        let h = (b - a) / SIMPSON_PANELS as f64;
        let f = |x: f64| {
            let phi = gaussian_pdf(x);
            let rho = phi / mass;
            if rho > 0.0 {
                rho * (rho.ln() - phi.ln())
            } else {
                0.0
            }
        };
        let mut s = f(a) + f(b);
        for k in 1..SIMPSON_PANELS {
            s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
        }
        total += s * h / 3.0;
    }
    ConditionalEntropy {
        closed_form: -mass.ln(),
        quadrature: total,
    }
}

/// Concentration from the transport inequality: condition `gamma` on `A` and
/// on the complement of `A_r`, then check each inequality of the chain.
pub fn marton_demo(a: &CenteredSet, r: f64) -> Result<MartonChain> {
    marton_demo_with(a, r, MARTON_POINTS)
}

pub fn marton_demo_with(a: &CenteredSet, r: f64, n: usize) -> Result<MartonChain> {
    let iv = a.kind.intervals().ok_or(LabError::DimensionMismatch {
        expected: 1,
        got: a.dim(),
    })?;
    let ar = a.enlarge(r)?.intervals().expect("line set");
    let outside = complement(&ar);
    let gamma_a: f64 = iv.iter().map(|(x, y)| gaussian_interval_mass(*x, *y)).sum();
    let tail: f64 = outside
        .iter()
        .map(|(x, y)| gaussian_interval_mass(*x, *y))
        .sum();
    if !(tail > 0.0 && tail.is_normal()) {
        return Err(LabError::Precondition(format!(
            "gamma(A_r) = 1 to double precision at r = {r}"
        )));
    }
    let extent = ar
        .iter()
        .map(|(x, y)| x.abs().max(y.abs()))
        .fold(0.0, f64::max);
    let reach = extent + MARGIN;
    let grid = Grid::line(-reach, reach, n)?;
    let h = grid.step(0);
    let mu = Law::Grid(conditional_density(&grid, &iv)?);
    let nu = Law::Grid(conditional_density(&grid, &outside)?);
    let w = w2_sq(&mu, &nu)?;
    // cell averaging moves each measure by at most h in W2
    let resolution = 4.0 * h * (w.value.sqrt() + h);
    let err = w.error + resolution;
    let entropy_mu = conditional_entropy(&iv, reach);
    let entropy_nu = conditional_entropy(&outside, reach);
    Ok(MartonChain {
        set: a.kind.clone(),
        r,
        gamma_a,
        tail,
        support: GapReport::new(r * r, w.value, err),
        transport: GapReport::new(
            w.value,
            2.0 * (entropy_mu.closed_form + entropy_nu.closed_form),
            err,
        ),
        entropy_mu,
        entropy_nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::sets::corpus_1d;

    fn union() -> CenteredSet {
        CenteredSet::new(SetKind::IntervalUnion {
            intervals: vec![(-3.0, -1.0), (1.0, 3.0)],
        })
        .unwrap()
    }

    #[test]
    fn unit_interval_chain() {
        let c = marton_demo(&CenteredSet::interval(1.0).unwrap(), 1.0).unwrap();
        assert!(!c.support.is_violated(), "{c:?}");
        assert!(!c.transport.is_violated(), "{c:?}");
        assert!(c.entropy_mu.discrepancy() < 1e-6, "{:?}", c.entropy_mu);
        assert!(c.entropy_nu.discrepancy() < 1e-6, "{:?}", c.entropy_nu);
        assert!(!c.concentration().is_violated());
    }

    #[test]
    fn zero_radius_degenerates() {
        let c = marton_demo(&CenteredSet::interval(1.0).unwrap(), 0.0).unwrap();
        assert_eq!(c.support.lhs, 0.0);
        assert!(!c.support.is_violated() && !c.transport.is_violated());
    }

    #[test]
    fn union_across_the_gap() {
        let c = marton_demo(&union(), 0.5).unwrap();
        assert!(
            !c.support.is_violated() && !c.transport.is_violated(),
            "{c:?}"
        );
        assert!(c.support.gap > 0.0);
    }

    #[test]
    fn conditional_entropy_identity_over_the_corpus() {
        for a in corpus_1d().unwrap() {
            for r in [0.0, 0.5, 1.5] {
                let c = marton_demo_with(&a, r, 4096).unwrap();
                assert!(
                    c.entropy_mu.discrepancy() < 1e-6,
                    "{a:?} {:?}",
                    c.entropy_mu
                );
                assert!(
                    c.entropy_nu.discrepancy() < 1e-6,
                    "{a:?} {r} {:?}",
                    c.entropy_nu
                );
            }
        }
    }

    #[test]
    fn saturated_enlargement_is_rejected() {
        let e = marton_demo(&CenteredSet::interval(1.0).unwrap(), 60.0);
        assert!(matches!(e, Err(LabError::Precondition(_))));
    }

    #[test]
    fn higher_dimensions_are_rejected() {
        let e = marton_demo(&CenteredSet::ball(2, 1.0).unwrap(), 1.0);
        assert!(matches!(e, Err(LabError::DimensionMismatch { .. })));
    }
}
