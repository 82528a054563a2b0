use rayon::prelude::*;

use super::{cost_matrix, CostKind};
use crate::error::{LabError, Result};
use crate::measures::{DiscreteMeasure, TransportPlan};

#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornConfig {
    /// Final regularization strength.
    pub epsilon: f64,
    /// Geometric factor of the epsilon schedule, which starts at the squared diameter.
    pub scaling: f64,
    /// L1 marginal residual at which the final stage stops.
    pub tolerance: f64,
    /// Iteration cap for the final stage.
    pub max_iterations: usize,
    /// Residual at which an intermediate stage hands over to the next epsilon.
    pub stage_tolerance: f64,
    /// Iteration cap for each intermediate stage.
    pub stage_iterations: usize,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            scaling: 0.5,
            tolerance: 1e-9,
            max_iterations: 200_000,
            stage_tolerance: 1e-9,
            stage_iterations: 50_000,
        }
    }
}

impl SinkhornConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SinkhornSolution {
    /// `<P, C> + eps KL(P | a x b)` for the unrounded plan.
    pub cost_regularized: f64,
    /// Cost of the rounded, exactly feasible plan; an upper bound on the optimum.
    pub cost_rounded_upper: f64,
    /// Weak-duality lower bound from the c-transformed potentials.
    pub cost_dual_lower: f64,
    pub plan: TransportPlan,
    pub iterations: usize,
    pub residual: f64,
}

/// Log-domain Sinkhorn with epsilon scaling, followed by rounding onto the
/// transport polytope.
pub fn solve_sinkhorn(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost_kind: CostKind,
    config: &SinkhornConfig,
) -> Result<SinkhornSolution> {
    if mu.dim() != nu.dim() {
        return Err(LabError::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    if !(config.epsilon > 0.0) || !(config.scaling > 0.0 && config.scaling < 1.0) {
        return Err(LabError::Precondition(
            "epsilon must be positive and the scaling factor in (0, 1)".into(),
        ));
    }
    let (n, m) = (mu.len(), nu.len());
    let c = cost_matrix(mu, nu, CostKind::Quadratic);
    let ct: Vec<f64> = (0..m * n).map(|k| c[(k % n) * m + k / n]).collect();
    let (a, b) = (mu.weights(), nu.weights());
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let diameter_sq = c.iter().cloned().fold(0.0, f64::max);

    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut eps = diameter_sq.max(config.epsilon);
    let mut iterations = 0;
    let mut residual;
    loop {
        let last = eps <= config.epsilon;
        let cap = if last {
            config.max_iterations
        } else {
            config.stage_iterations
        };
        let mut k = 0;
        loop {
            update(&mut f, &g, &c, &log_b, eps, m);
            update(&mut g, &f, &ct, &log_a, eps, n);
            k += 1;
            residual = row_residual(&f, &g, &c, a, b, eps);
            let target = if last {
                config.tolerance
            } else {
                config.tolerance.max(config.stage_tolerance)
            };
            if residual < target || k >= cap {
                break;
            }
        }
        iterations += k;
        if last {
            break;
        }
        eps = (eps * config.scaling).max(config.epsilon);
    }
    if !(residual < config.tolerance) {
        return Err(LabError::SinkhornNonConvergence {
            residual,
            iterations,
        });
    }

    let p: Vec<f64> = (0..n * m)
        .map(|k| {
            let (i, j) = (k / m, k % m);
            a[i] * b[j] * ((f[i] + g[j] - c[k]) / eps).exp()
        })
        .collect();
    let kl: f64 = p
        .iter()
        .enumerate()
        .filter(|(_, x)| **x > 0.0)
        .map(|(k, x)| x * (x / (a[k / m] * b[k % m])).ln() - x + a[k / m] * b[k % m])
        .sum();
    let transport_q: f64 = p.iter().zip(&c).map(|(x, y)| x * y).sum();
    let rounded = round_to_polytope(p, a, b);
    let plan = TransportPlan::new(mu.clone(), nu.clone(), rounded)?;
    let rounded_q: f64 = plan.coupling().iter().zip(&c).map(|(x, y)| x * y).sum();

    // c-transform of f gives a feasible dual pair for the quadratic cost
    let g_feasible: Vec<f64> = (0..m)
        .map(|j| {
            (0..n)
                .map(|i| c[i * m + j] - f[i])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let dual_q: f64 = a.iter().zip(&f).map(|(x, y)| x * y).sum::<f64>()
        + b.iter().zip(&g_feasible).map(|(x, y)| x * y).sum::<f64>();

    let (cost_regularized, cost_rounded_upper, cost_dual_lower) = match cost_kind {
        CostKind::Quadratic => (transport_q + eps * kl, rounded_q, dual_q),
        CostKind::NegDot => {
            let shift = 0.5 * (mu.second_moment() + nu.second_moment());
            (
                0.5 * (transport_q + eps * kl) - shift,
                plan.cost(|x, y| cost_kind.eval(x, y)),
                0.5 * dual_q - shift,
            )
        }
    };
    Ok(SinkhornSolution {
        cost_regularized,
        cost_rounded_upper,
        cost_dual_lower,
        plan,
        iterations,
        residual,
    })
}

/// `out_i = -eps log sum_j exp((other_j - C_ij) / eps + log w_j)`, row by row.
fn update(out: &mut [f64], other: &[f64], c: &[f64], log_w: &[f64], eps: f64, width: usize) {
    let soft_min = |i: usize, o: &mut f64| {
        let row = &c[i * width..(i + 1) * width];
        let mut max = f64::NEG_INFINITY;
        for j in 0..width {
            max = max.max((other[j] - row[j]) / eps + log_w[j]);
        }
        let s: f64 = (0..width)
            .map(|j| ((other[j] - row[j]) / eps + log_w[j] - max).exp())
            .sum();
        *o = -eps * (max + s.ln());
    };
    // each row is reduced sequentially, so the result does not depend on threading
    if out.len() * width >= PARALLEL_CUTOFF {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(i, o)| soft_min(i, o));
    } else {
        out.iter_mut().enumerate().for_each(|(i, o)| soft_min(i, o));
    }
}

const PARALLEL_CUTOFF: usize = 1 << 15;

/// L1 distance between the row marginal of the current plan and `a`.
fn row_residual(f: &[f64], g: &[f64], c: &[f64], a: &[f64], b: &[f64], eps: f64) -> f64 {
    let m = g.len();
    let row_err = |i: usize| {
        let row: f64 = (0..m)
            .map(|j| b[j] * ((f[i] + g[j] - c[i * m + j]) / eps).exp())
            .sum();
        (a[i] * row - a[i]).abs()
    };
    if f.len() * m >= PARALLEL_CUTOFF {
        (0..f.len())
            .into_par_iter()
            .map(row_err)
            .collect::<Vec<f64>>()
            .iter()
            .sum()
    } else {
        (0..f.len()).map(row_err).sum()
    }
}

/// Row and column rescaling followed by a rank-one correction, which lands
/// exactly on the set of couplings of `a` and `b`.
pub fn round_to_polytope(mut p: Vec<f64>, a: &[f64], b: &[f64]) -> Vec<f64> {
    let (n, m) = (a.len(), b.len());
    for i in 0..n {
        let r: f64 = p[i * m..(i + 1) * m].iter().sum();
        if r > a[i] {
            let s = a[i] / r;
            p[i * m..(i + 1) * m].iter_mut().for_each(|x| *x *= s);
        }
    }
    for j in 0..m {
        let col: f64 = (0..n).map(|i| p[i * m + j]).sum();
        if col > b[j] {
            let s = b[j] / col;
            (0..n).for_each(|i| p[i * m + j] *= s);
        }
    }
    let err_a: Vec<f64> = (0..n)
        .map(|i| (a[i] - p[i * m..(i + 1) * m].iter().sum::<f64>()).max(0.0))
        .collect();
    let err_b: Vec<f64> = (0..m)
        .map(|j| (b[j] - (0..n).map(|i| p[i * m + j]).sum::<f64>()).max(0.0))
        .collect();
    let total: f64 = err_a.iter().sum();
    if total > 0.0 {
        for i in 0..n {
            for j in 0..m {
                p[i * m + j] += err_a[i] * err_b[j] / total;
            }
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::solve_exact;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_measures_cost_nearly_nothing() {
        let a = DiscreteMeasure::uniform(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        let s = solve_sinkhorn(
            &a,
            &a,
            CostKind::Quadratic,
            &SinkhornConfig::with_epsilon(1e-3),
        )
        .unwrap();
        assert!(s.cost_rounded_upper <= 1e-2 * 2.0);
        assert!(s.cost_dual_lower <= 1e-12);
    }

    #[test]
    fn two_atom_example_against_exact() {
        let a = DiscreteMeasure::uniform(1, vec![-1.0, 1.0]).unwrap();
        let b = DiscreteMeasure::uniform(1, vec![-2.0, 2.0]).unwrap();
        let cfg = SinkhornConfig {
            epsilon: 1e-3,
            ..SinkhornConfig::default()
        };
        let s = solve_sinkhorn(&a, &b, CostKind::Quadratic, &cfg).unwrap();
        assert!((s.cost_rounded_upper - 1.0).abs() < 1e-3);
        assert!(s.cost_rounded_upper >= 1.0 - 1e-12);
    }

    #[test]
    fn rounding_is_exactly_feasible_and_bounds_the_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let (n, m) = (rng.random_range(2..20), rng.random_range(2..20));
            let pts = |k: usize, rng: &mut ChaCha8Rng| {
                (0..2 * k).map(|_| rng.random_range(-1.0..1.0)).collect()
            };
            let wts = |k: usize, rng: &mut ChaCha8Rng| {
                (0..k).map(|_| rng.random_range(0.1..1.0)).collect()
            };
            let a = DiscreteMeasure::normalized(2, pts(n, &mut rng), wts(n, &mut rng)).unwrap();
            let b = DiscreteMeasure::normalized(2, pts(m, &mut rng), wts(m, &mut rng)).unwrap();
            let exact = solve_exact(&a, &b, CostKind::Quadratic).unwrap().cost;
            let s = solve_sinkhorn(
                &a,
                &b,
                CostKind::Quadratic,
                &SinkhornConfig::with_epsilon(1e-3),
            )
            .unwrap();
            assert!(s.cost_rounded_upper >= exact - 1e-12);
            assert!(s.cost_dual_lower <= exact + 1e-12);
            assert!(s.cost_rounded_upper - exact < 1e-2);
        }
    }

    #[test]
    fn negdot_upper_bound() {
        let a = DiscreteMeasure::uniform(1, vec![-1.0, 1.0]).unwrap();
        let s = solve_sinkhorn(
            &a,
            &a,
            CostKind::NegDot,
            &SinkhornConfig::with_epsilon(1e-3),
        )
        .unwrap();
        assert!(s.cost_rounded_upper >= -1.0 - 1e-12 && s.cost_rounded_upper < -1.0 + 1e-3);
    }

    #[test]
    fn non_convergence_is_reported() {
        let a = DiscreteMeasure::normalized(1, vec![-1.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).unwrap();
        let b = DiscreteMeasure::normalized(1, vec![-2.0, 0.5, 2.0], vec![3.0, 1.0, 1.0]).unwrap();
        let cfg = SinkhornConfig {
            epsilon: 1e-3,
            max_iterations: 1,
            stage_iterations: 1,
            ..SinkhornConfig::default()
        };
        assert!(matches!(
            solve_sinkhorn(&a, &b, CostKind::Quadratic, &cfg),
            Err(LabError::SinkhornNonConvergence { .. })
        ));
    }
}
