use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};
use crate::measures::GridFunction;

/// Required drop (in log scale) from the interior maximum of `f + lambda.x`
/// to its values on the grid boundary.
pub const DECAY_MARGIN: f64 = 30.0;

/// `Lambda(lambda) = log int exp(f + lambda.x) dx` with the mean and
/// covariance of the tilted measure, which are its gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLaplace {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<f64>,
}

/// Evaluates the log-Laplace functional of a log-density `f` (`-inf` outside
/// its domain) at `lambda`, after checking that the tilted integrand has
/// decayed at the grid boundary.
pub fn log_laplace(f: &GridFunction, lambda: &[f64]) -> Result<LogLaplace> {
    let g = f.grid();
    let d = g.dim();
    if lambda.len() != d {
        return Err(LabError::DimensionMismatch {
            expected: d,
            got: lambda.len(),
        });
    }
    let tilted: Vec<f64> = g
        .points()
        .zip(f.values())
        .map(|(p, v)| {
            if v.is_finite() {
                v + (0..d).map(|a| lambda[a] * p[a]).sum::<f64>()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    let max = tilted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(LabError::EmptyDomain);
    }
    let mut boundary = f64::NEG_INFINITY;
    for k in 0..g.len() {
        let idx = g.multi_index(k);
        if (0..d).any(|a| idx[a] == 0 || idx[a] + 1 == g.n(a)) {
            boundary = boundary.max(tilted[k]);
        }
    }
    if boundary > max - DECAY_MARGIN {
        return Err(LabError::InsufficientDecay {
            margin: max - boundary,
            required: DECAY_MARGIN,
        });
    }
    let mut z = 0.0;
    let mut m1 = [0.0; 2];
    let mut m2 = [0.0; 4];
    for (p, t) in g.points().zip(&tilted) {
        if !t.is_finite() {
            continue;
        }
        let w = (t - max).exp();
        z += w;
        for a in 0..d {
            m1[a] += w * p[a];
            for b in 0..d {
                m2[a * d + b] += w * p[a] * p[b];
            }
        }
    }
    let mean: Vec<f64> = (0..d).map(|a| m1[a] / z).collect();
    let hessian = (0..d * d)
        .map(|k| m2[k] / z - mean[k / d] * mean[k % d])
        .collect();
    Ok(LogLaplace {
        value: max + (z * g.cell_volume()).ln(),
        gradient: mean,
        hessian,
    })
}

/// Outcome of the recentering construction: `f_tilde = f + lambda.x` has its
/// normalized exponential centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Recentering {
    pub lambda: Vec<f64>,
    pub f_tilde: GridFunction,
    pub iterations: usize,
    pub gradient_norm: f64,
}

pub const RECENTER_TOL: f64 = 1e-8;
const LEVENBERG: f64 = 1e-10;
const MAX_NEWTON: usize = 100;

/// Newton's method on the convex `Lambda`, with backtracking; fails when the
/// iterate leaves the region where the decay check holds.
pub fn recenter(f: &GridFunction) -> Result<Recentering> {
    let d = f.dim();
    let mut lambda = vec![0.0; d];
    let mut cur = log_laplace(f, &lambda)
        .map_err(|e| LabError::RecenterNonConvergence(format!("at lambda = 0: {e}")))?;
    for it in 0..MAX_NEWTON {
        let gnorm = cur.gradient.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm <= RECENTER_TOL {
            let f_tilde = tilt(f, &lambda)?;
            return Ok(Recentering {
                lambda,
                f_tilde,
                iterations: it,
                gradient_norm: gnorm,
            });
        }
        let h = DMatrix::from_row_slice(d, d, &cur.hessian) + DMatrix::identity(d, d) * LEVENBERG;
        let step = h
            .lu()
            .solve(&DVector::from_column_slice(&cur.gradient))
            .ok_or_else(|| LabError::RecenterNonConvergence("singular tilted covariance".into()))?;
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let trial: Vec<f64> = (0..d).map(|a| lambda[a] - t * step[a]).collect();
            match log_laplace(f, &trial) {
                Ok(next) => {
                    let decrease = -t * step.dot(&DVector::from_column_slice(&cur.gradient));
                    let next_norm = next.gradient.iter().map(|x| x * x).sum::<f64>().sqrt();
                    // Armijo on Lambda, or a smaller gradient once the values stop resolving
                    if next.value <= cur.value + 1e-4 * decrease || next_norm < gnorm {
                        accepted = Some((trial, next));
                        break;
                    }
                }
                Err(LabError::InsufficientDecay { .. }) => {}
                Err(e) => return Err(e),
            }
            t *= 0.5;
        }
        let Some((trial, next)) = accepted else {
            return Err(LabError::RecenterNonConvergence(format!(
                "no admissible step from lambda = {lambda:?} (gradient norm {gnorm:e}); the decay region was left"
            )));
        };
        lambda = trial;
        cur = next;
    }
    Err(LabError::RecenterNonConvergence(format!(
        "{MAX_NEWTON} Newton steps without convergence"
    )))
}

/// `x -> f(x) + lambda.x`.
pub fn tilt(f: &GridFunction, lambda: &[f64]) -> Result<GridFunction> {
    f.map(|x, v| v + x.iter().zip(lambda).map(|(a, b)| a * b).sum::<f64>())
}

/// The companion shift `g_tilde(y) = g(y + lambda)`, done by moving the grid so
/// that the sample values (and hence every Riemann sum) are unchanged.
pub fn shift_partner(g: &GridFunction, lambda: &[f64]) -> GridFunction {
    g.translated_argument(lambda)
}
