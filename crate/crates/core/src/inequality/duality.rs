use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::santalo::{exp_density, santalo_check, SantaloPair, Side, PAIR_CENTERING_TOL};
use crate::calculus::{lebesgue_entropy, log_mass, recenter, shift_partner, subsampled};
use crate::error::{LabError, Result};
use crate::measures::{norm, GapReport, GridDensity, GridFunction, Law};
use crate::transport::{negdot_cost, CostEstimate};

/// Endpoints and links of
/// `int f dmu + int g dnu <= inf_pi int -x.y dpi <= Ent_dx(mu) + Ent_dx(nu) + d log 2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardChain {
    pub endpoints: GapReport,
    pub weak_duality: GapReport,
    pub transport_entropy: GapReport,
}

/// `int f drho` by the midpoint rule; the error compares with every other sample.
fn pairing(f: &GridFunction, rho: &GridDensity) -> Result<CostEstimate> {
    if f.grid() != rho.grid() {
        return Err(LabError::Precondition(
            "function and density must share a grid".into(),
        ));
    }
    let sum = |fv: &[f64], rv: &[f64]| {
        let mass: f64 = rv.iter().sum();
        fv.iter()
            .zip(rv)
            .filter(|(_, r)| **r > 0.0)
            .map(|(v, r)| v * r)
            .sum::<f64>()
            / mass
    };
    let value = sum(f.values(), rho.values());
    let rho_fn = GridFunction::new(rho.grid().clone(), rho.values().to_vec())?;
    let error = match (subsampled(f), subsampled(&rho_fn)) {
        (Some(fc), Some(rc)) => (value - sum(fc.values(), rc.values())).abs(),
        _ => 0.0,
    };
    Ok(CostEstimate {
        value,
        error: if value.is_finite() { error } else { 0.0 },
    })
}

/// Checks the transport form of the inequality for a centered `mu`, an arbitrary
/// `nu` and an admissible pair with `f` on the grid of `mu` and `g` on that of `nu`.
pub fn duality_forward(
    mu: &GridDensity,
    nu: &GridDensity,
    p: &SantaloPair,
) -> Result<ForwardChain> {
    let b = norm(&mu.barycenter());
    if b > PAIR_CENTERING_TOL {
        return Err(LabError::NotCentered {
            norm: b,
            tol: PAIR_CENTERING_TOL,
        });
    }
    let d = mu.dim() as f64;
    let pf = pairing(p.f(), mu)?;
    let pg = pairing(p.g(), nu)?;
    let cost = negdot_cost(&Law::Grid(mu.clone()), &Law::Grid(nu.clone()))?;
    let em = lebesgue_entropy(mu);
    let en = lebesgue_entropy(nu);
    let lhs = pf.value + pg.value;
    let rhs = em.value + en.value + d * (2.0 * PI).ln();
    Ok(ForwardChain {
        endpoints: GapReport::new(lhs, rhs, pf.error + pg.error + em.error + en.error),
        weak_duality: GapReport::new(lhs, cost.value, pf.error + pg.error + cost.error),
        transport_entropy: GapReport::new(cost.value, rhs, cost.error + em.error + en.error),
    })
}

/// The recentering construction run on an admissible pair. With
/// `mu = e^{f~} / int e^{f~}` and `nu = e^g / int e^g` the chain is
/// `int f dmu + int g dnu <= int f~ dmu - log int e^{f~} + int g dnu - log int e^g + d log 2 pi
///  <= Ent_dx(mu) + Ent_dx(nu) + d log 2 pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackwardChain {
    pub lambda: Vec<f64>,
    pub newton_iterations: usize,
    /// `|barycenter|` of the normalized `e^{f~}`.
    pub barycenter_norm: f64,
    pub mass_g: f64,
    pub mass_g_tilde: f64,
    /// Admissibility margin of `(f~, g~)`.
    pub tilde_margin: f64,
    pub santalo: GapReport,
    pub first_link: GapReport,
    pub second_link: GapReport,
    pub endpoints: GapReport,
}

impl BackwardChain {
    pub fn mass_defect(&self) -> f64 {
        (self.mass_g - self.mass_g_tilde).abs()
    }
}

pub fn duality_backward(f: &GridFunction, g: &GridFunction) -> Result<BackwardChain> {
    SantaloPair::new(f.clone(), g.clone())?;
    let r = recenter(f)?;
    let g_tilde = shift_partner(g, &r.lambda);
    let tilde = SantaloPair::new(r.f_tilde.clone(), g_tilde.clone())?;
    let santalo = santalo_check(&tilde, Side::F)?;

    let mu = exp_density(&r.f_tilde)?;
    let nu = exp_density(g)?;
    let d = f.dim() as f64;
    let log2pi = d * (2.0 * PI).ln();
    let pf = pairing(f, &mu)?;
    let pft = pairing(&r.f_tilde, &mu)?;
    let pg = pairing(g, &nu)?;
    let zf = log_mass(&r.f_tilde, 1.0);
    let zg = log_mass(g, 1.0);
    let em = lebesgue_entropy(&mu);
    let en = lebesgue_entropy(&nu);

    let lhs = pf.value + pg.value;
    let mid = pft.value - zf.value + pg.value - zg.value + log2pi;
    let rhs = em.value + en.value + log2pi;
    let e_lhs = pf.error + pg.error;
    let e_mid = pft.error + pg.error + zf.error + zg.error;
    let e_rhs = em.error + en.error;
    // int (f~ - f) dmu = lambda . barycenter(mu), zero up to the recentering tolerance
    let bary = norm(&mu.barycenter());
    let e_center = norm(&r.lambda) * bary;
    Ok(BackwardChain {
        barycenter_norm: bary,
        lambda: r.lambda,
        newton_iterations: r.iterations,
        mass_g: g.exp_integral(1.0),
        mass_g_tilde: g_tilde.exp_integral(1.0),
        tilde_margin: tilde.admissibility_margin(),
        santalo,
        first_link: GapReport::new(lhs, mid, e_lhs + e_mid + e_center),
        second_link: GapReport::new(mid, rhs, e_mid + e_rhs),
        endpoints: GapReport::new(lhs, rhs, e_lhs + e_rhs + e_center),
    })
}
