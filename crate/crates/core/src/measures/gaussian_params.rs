use nalgebra::{DMatrix, DVector};

use crate::error::{LabError, Result};

/// Mean and symmetric positive-definite covariance of a Gaussian measure.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    mean: DVector<f64>,
    covariance: DMatrix<f64>,
}

const SYMMETRY_TOL: f64 = 1e-12;

impl GaussianParams {
    pub fn new(mean: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if covariance.nrows() != d || covariance.ncols() != d {
            return Err(LabError::DimensionMismatch {
                expected: d,
                got: covariance.nrows(),
            });
        }
        if mean.iter().chain(covariance.iter()).any(|v| !v.is_finite()) {
            return Err(LabError::NotSpd("non-finite entry".into()));
        }
        let scale = covariance.amax().max(1.0);
        for i in 0..d {
            for j in 0..i {
                if (covariance[(i, j)] - covariance[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(LabError::NotSpd(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        let min_eig = covariance.clone().symmetric_eigen().eigenvalues.min();
        if min_eig <= 0.0 {
            return Err(LabError::NotSpd(format!("smallest eigenvalue {min_eig:e}")));
        }
        Ok(Self { mean, covariance })
    }

    pub fn standard(d: usize) -> Self {
        Self {
            mean: DVector::zeros(d),
            covariance: DMatrix::identity(d, d),
        }
    }

    /// One-dimensional `N(mean, variance)`.
    pub fn scalar(mean: f64, variance: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, variance),
        )
    }

    pub fn isotropic(mean: &[f64], variance: f64) -> Result<Self> {
        let d = mean.len();
        Self::new(
            DVector::from_column_slice(mean),
            DMatrix::identity(d, d) * variance,
        )
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn second_moment(&self) -> f64 {
        self.covariance.trace() + self.mean.norm_squared()
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        self.mean.norm() <= tol
    }

    /// Log-density at `x`.
    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let diff = DVector::from_column_slice(x) - &self.mean;
        let chol = self
            .covariance
            .clone()
            .cholesky()
            .expect("covariance checked SPD at construction");
        let sol = chol.solve(&diff);
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        -0.5 * diff.dot(&sol) - 0.5 * log_det - 0.5 * d as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}
