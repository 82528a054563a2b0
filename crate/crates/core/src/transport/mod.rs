//! Optimal transport: exact LP for discrete measures, log-domain Sinkhorn,
//! exact 1D quantile transport, and Kantorovich duality checks.

mod backends;
mod exact;
mod quantile;
mod sinkhorn;

pub use backends::{
    compare_backends, random_instance, BackendComparison, QUANTILE_TOL, SINKHORN_REL_TOL,
};
pub use exact::{solve_exact, ExactSolution, EXACT_CAPACITY};
pub use quantile::{quantile_w2_1d, quantile_w2_sq, Quantile1d};
pub use sinkhorn::{round_to_polytope, solve_sinkhorn, SinkhornConfig, SinkhornSolution};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::gaussian::gaussian_w2_sq;
use crate::measures::{DiscreteMeasure, GaussianParams, Grid, GridDensity, Law, TransportPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    /// `|x - y|^2`
    Quadratic,
    /// `-x . y`
    NegDot,
}

impl CostKind {
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            CostKind::Quadratic => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum(),
            CostKind::NegDot => -x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>(),
        }
    }
}

/// Dense `n x m` cost matrix, row-major.
pub(crate) fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, kind: CostKind) -> Vec<f64> {
    let (n, m) = (mu.len(), nu.len());
    let mut c = Vec::with_capacity(n * m);
    for i in 0..n {
        for j in 0..m {
            c.push(kind.eval(mu.point(i), nu.point(j)));
        }
    }
    c
}

/// Kantorovich potentials over the atoms of a source and a target measure.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub cost_kind: CostKind,
}

/// Slack allowed in `f(x) + g(y) <= c(x, y)`.
pub const DUAL_FEASIBILITY_TOL: f64 = 1e-9;

impl DualPotentials {
    /// Worst violation of the constraint over all atom pairs, if any exceeds the tolerance.
    pub fn check_feasible(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
        if self.f.len() != mu.len() || self.g.len() != nu.len() {
            return Err(LabError::DimensionMismatch {
                expected: mu.len() + nu.len(),
                got: self.f.len() + self.g.len(),
            });
        }
        let mut worst = (0, 0, f64::NEG_INFINITY);
        for i in 0..mu.len() {
            for j in 0..nu.len() {
                let v = self.f[i] + self.g[j] - self.cost_kind.eval(mu.point(i), nu.point(j));
                if v > worst.2 {
                    worst = (i, j, v);
                }
            }
        }
        if worst.2 > DUAL_FEASIBILITY_TOL {
            return Err(LabError::InfeasibleDuals {
                i: worst.0,
                j: worst.1,
                violation: worst.2,
            });
        }
        Ok(())
    }

    pub fn value(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        mu.weights()
            .iter()
            .zip(&self.f)
            .map(|(w, f)| w * f)
            .sum::<f64>()
            + nu.weights()
                .iter()
                .zip(&self.g)
                .map(|(w, g)| w * g)
                .sum::<f64>()
    }
}

/// Primal cost of `plan` minus the dual value of `duals`.
pub fn duality_gap(plan: &TransportPlan, duals: &DualPotentials) -> Result<f64> {
    duals.check_feasible(plan.source(), plan.target())?;
    let primal = plan.cost(|x, y| duals.cost_kind.eval(x, y));
    Ok(primal - duals.value(plan.source(), plan.target()))
}

/// A transport cost together with a bound on its numerical error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEstimate {
    pub value: f64,
    pub error: f64,
}

/// Atoms per axis used when 2D grid densities are handed to the exact solver.
pub const ATOMS_PER_AXIS: usize = 20;

/// Squared W2 between any two supported laws of equal dimension.
///
/// Gaussian pairs use the closed form and products split over factors. In
/// one dimension everything goes through quantile transport, with the error
/// estimated by one 2x coarsening. In two dimensions grid densities are
/// lumped into blocks at their conditional barycenters and solved exactly.
/// With `V` the within-block variances, W2^2 lies between
/// `(W(blocks) - sqrt V(mu) - sqrt V(nu))^2` and `OT(blocks) + V(mu) + V(nu)`;
/// the value is the midpoint of that bracket and the error its half-width.
pub fn w2_sq(mu: &Law, nu: &Law) -> Result<CostEstimate> {
    if mu.dim() != nu.dim() {
        return Err(LabError::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    if let (Law::Gaussian(a), Law::Gaussian(b)) = (mu, nu) {
        let v = gaussian_w2_sq(a, b)?;
        return Ok(CostEstimate {
            value: v,
            error: 1e-12 * (1.0 + v),
        });
    }
    if let (Some(fa), Some(fb)) = (factors(mu), factors(nu)) {
        if fa.len() > 1 {
            let mut total = CostEstimate {
                value: 0.0,
                error: 0.0,
            };
            for (a, b) in fa.iter().zip(&fb) {
                let e = w2_sq(a, b)?;
                total.value += e.value;
                total.error += e.error;
            }
            return Ok(total);
        }
    }
    if mu.dim() == 1 {
        let a = to_line(mu)?;
        let b = to_line(nu)?;
        let value = quantile_w2_1d(&a, &b)?;
        let mut error = 1e-12;
        if a.is_grid_based() || b.is_grid_based() {
            let coarse = quantile_w2_1d(&coarsen(&a), &coarsen(&b))?;
            error += (value - coarse).abs();
        }
        return Ok(CostEstimate { value, error });
    }
    if mu.dim() != 2 {
        return Err(LabError::Unsupported(format!(
            "transport in dimension {}",
            mu.dim()
        )));
    }
    let (a, va) = atomize(mu)?;
    let (b, vb) = atomize(nu)?;
    let ot = solve_exact(&a, &b, CostKind::Quadratic)?.cost;
    if va == 0.0 && vb == 0.0 {
        return Ok(CostEstimate {
            value: ot,
            error: 1e-8 * (1.0 + ot),
        });
    }
    let upper = ot + va + vb;
    let lower = (ot.sqrt() - va.sqrt() - vb.sqrt()).max(0.0).powi(2);
    Ok(CostEstimate {
        value: 0.5 * (upper + lower),
        error: 0.5 * (upper - lower),
    })
}

/// `inf_pi int -x.y dpi = (W2^2 - M2(mu) - M2(nu)) / 2`.
pub fn negdot_cost(mu: &Law, nu: &Law) -> Result<CostEstimate> {
    if let (Law::Discrete(a), Law::Discrete(b)) = (mu, nu) {
        if a.len() * b.len() <= EXACT_CAPACITY {
            let s = solve_exact(a, b, CostKind::NegDot)?;
            return Ok(CostEstimate {
                value: s.cost,
                error: 1e-8 * (1.0 + s.cost.abs()),
            });
        }
    }
    let w = w2_sq(mu, nu)?;
    Ok(CostEstimate {
        value: 0.5 * (w.value - mu.second_moment() - nu.second_moment()),
        error: 0.5 * w.error,
    })
}

fn factors(law: &Law) -> Option<Vec<Law>> {
    match law {
        Law::Product(fs) => Some(fs.clone()),
        Law::Gaussian(g) => {
            let c = g.covariance();
            let d = g.dim();
            let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || c[(i, j)] == 0.0));
            diagonal.then(|| {
                (0..d)
                    .map(|i| {
                        Law::Gaussian(
                            GaussianParams::scalar(g.mean()[i], c[(i, i)])
                                .expect("diagonal of an SPD matrix"),
                        )
                    })
                    .collect()
            })
        }
        _ if law.dim() == 1 => Some(vec![law.clone()]),
        _ => None,
    }
}

/// Samples points per axis used when a Gaussian must be put on a grid.
const GAUSSIAN_LINE_POINTS: usize = 8192;
const GAUSSIAN_PLANE_POINTS: usize = 160;

/// Grid sample of a Gaussian on the box of +-`width` standard deviations per axis.
pub fn discretize_gaussian(g: &GaussianParams, n: usize, width: f64) -> Result<GridDensity> {
    let d = g.dim();
    let c = g.covariance();
    let lower: Vec<f64> = (0..d)
        .map(|i| g.mean()[i] - width * c[(i, i)].sqrt())
        .collect();
    let upper: Vec<f64> = (0..d)
        .map(|i| g.mean()[i] + width * c[(i, i)].sqrt())
        .collect();
    let grid = Grid::new(lower, upper, vec![n; d])?;
    let logs: Vec<f64> = grid.points().map(|p| g.log_density(&p[..d])).collect();
    GridDensity::from_log_values(grid, &logs)
}

fn to_line(law: &Law) -> Result<Law> {
    match law {
        Law::Gaussian(g) => Ok(Law::Grid(discretize_gaussian(
            g,
            GAUSSIAN_LINE_POINTS,
            12.0,
        )?)),
        Law::Product(fs) if fs.len() == 1 => to_line(&fs[0]),
        other => Ok(other.clone()),
    }
}

fn coarsen(law: &Law) -> Law {
    match law {
        Law::Grid(d) => d.coarsened().map(Law::Grid).unwrap_or_else(|| law.clone()),
        other => other.clone(),
    }
}

/// Lumps a 2D law into at most `ATOMS_PER_AXIS^2` atoms placed at conditional
/// barycenters; returns the atoms and the mass-weighted within-block variance.
pub fn atomize(law: &Law) -> Result<(DiscreteMeasure, f64)> {
    match law {
        Law::Discrete(m) => Ok((m.clone(), 0.0)),
        Law::Grid(d) => Ok(lump_grid(d)),
        Law::Gaussian(g) => Ok(lump_grid(&discretize_gaussian(
            g,
            GAUSSIAN_PLANE_POINTS,
            10.0,
        )?)),
        Law::Product(fs) => {
            let parts: Vec<Law> = fs.iter().map(to_line).collect::<Result<_>>()?;
            if parts.iter().all(|p| matches!(p, Law::Discrete(_))) {
                let (Law::Discrete(a), Law::Discrete(b)) = (&parts[0], &parts[1]) else {
                    unreachable!()
                };
                let mut pts = Vec::new();
                let mut w = Vec::new();
                for i in 0..a.len() {
                    for j in 0..b.len() {
                        pts.extend([a.point(i)[0], b.point(j)[0]]);
                        w.push(a.weight(i) * b.weight(j));
                    }
                }
                return Ok((DiscreteMeasure::normalized(2, pts, w)?, 0.0));
            }
            Ok(lump_grid(&product_grid(&parts)?))
        }
    }
}

/// Outer product of two 1D laws as a 2D grid density; discrete factors are
/// not representable and are rejected.
pub fn product_grid(parts: &[Law]) -> Result<GridDensity> {
    let grids: Vec<GridDensity> = parts
        .iter()
        .map(|p| match to_line(p)? {
            Law::Grid(d) => Ok(reduce_line(&d, GAUSSIAN_PLANE_POINTS)),
            _ => Err(LabError::Unsupported(
                "product of a discrete and a grid factor".into(),
            )),
        })
        .collect::<Result<_>>()?;
    let (a, b) = (&grids[0], &grids[1]);
    let grid = Grid::new(
        vec![a.grid().lower()[0], b.grid().lower()[0]],
        vec![a.grid().upper()[0], b.grid().upper()[0]],
        vec![a.grid().n(0), b.grid().n(0)],
    )?;
    let mut values = Vec::with_capacity(grid.len());
    for x in a.values() {
        for y in b.values() {
            values.push(x * y);
        }
    }
    GridDensity::new(grid, values)
}

/// Coarsens a 1D density until it has at most `max_n` cells.
fn reduce_line(d: &GridDensity, max_n: usize) -> GridDensity {
    let mut d = d.clone();
    while d.grid().n(0) > max_n {
        match d.coarsened() {
            Some(c) => d = c,
            None => break,
        }
    }
    d
}

fn lump_grid(d: &GridDensity) -> (DiscreteMeasure, f64) {
    let g = d.grid();
    let dim = g.dim();
    let blocks: Vec<usize> = (0..dim).map(|a| g.n(a).div_ceil(ATOMS_PER_AXIS)).collect();
    let nb: Vec<usize> = (0..dim).map(|a| g.n(a).div_ceil(blocks[a])).collect();
    let total_blocks: usize = nb.iter().product();
    let mut mass = vec![0.0; total_blocks];
    let mut first = vec![[0.0; 2]; total_blocks];
    let mut second = vec![0.0; total_blocks];
    let within_cell: f64 = (0..dim).map(|a| g.step(a).powi(2) / 12.0).sum();
    for k in 0..g.len() {
        let w = d.mass(k);
        if w == 0.0 {
            continue;
        }
        let idx = g.multi_index(k);
        let mut b = 0;
        for a in 0..dim {
            b = b * nb[a] + idx[a] / blocks[a];
        }
        let p = g.point(k);
        mass[b] += w;
        for a in 0..dim {
            first[b][a] += w * p[a];
        }
        second[b] += w * (p[..dim].iter().map(|x| x * x).sum::<f64>() + within_cell);
    }
    let mut pts = Vec::new();
    let mut wts = Vec::new();
    let mut var = 0.0;
    for b in 0..total_blocks {
        if mass[b] <= 0.0 {
            continue;
        }
        let c: Vec<f64> = (0..dim).map(|a| first[b][a] / mass[b]).collect();
        var += (second[b] - mass[b] * c.iter().map(|x| x * x).sum::<f64>()).max(0.0);
        pts.extend(c);
        wts.push(mass[b]);
    }
    (
        DiscreteMeasure::normalized(dim, pts, wts).expect("positive block masses"),
        var,
    )
}
