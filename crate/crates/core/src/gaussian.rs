//! Closed forms for Gaussian measures: relative entropy with respect to the
//! standard Gaussian, the Bures–Wasserstein distance, and the exact equality
//! family of the symmetrized transport-entropy inequality.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{LabError, Result};
use crate::measures::{GapReport, GaussianParams};

/// Largest condition number accepted by the matrix square root.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Error estimate attached to closed-form reports.
pub const CLOSED_FORM_TOL: f64 = 1e-9;

/// `Ent_gamma(N(m, A)) = (tr A - d - log det A + |m|^2) / 2`.
pub fn gaussian_rel_entropy(g: &GaussianParams) -> f64 {
    let a = g.covariance();
    let d = g.dim() as f64;
    let log_det = log_det_spd(a);
    0.5 * (a.trace() - d - log_det + g.mean().norm_squared())
}

fn log_det_spd(a: &DMatrix<f64>) -> f64 {
    match a.clone().cholesky() {
        Some(c) => 2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
        None => a
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|v| v.ln())
            .sum(),
    }
}

/// Square root of a symmetric positive-definite matrix by eigendecomposition.
pub fn sqrtm_spd(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(LabError::NotSpd(format!("smallest eigenvalue {min:e}")));
    }
    let condition = max / min;
    if condition > CONDITION_LIMIT {
        return Err(LabError::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let roots = eig.eigenvalues.map(f64::sqrt);
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// `W2^2 = |m1 - m2|^2 + tr A + tr B - 2 tr (A^1/2 B A^1/2)^1/2`.
pub fn gaussian_w2_sq(g1: &GaussianParams, g2: &GaussianParams) -> Result<f64> {
    if g1.dim() != g2.dim() {
        return Err(LabError::DimensionMismatch {
            expected: g1.dim(),
            got: g2.dim(),
        });
    }
    let (a, b) = (g1.covariance(), g2.covariance());
    let s = sqrtm_spd(a)?;
    sqrtm_spd(b)?;
    let m = &s * b * &s;
    let m = (&m + m.transpose()) * 0.5;
    let cross: f64 = m
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    let mean_part = (g1.mean() - g2.mean()).norm_squared();
    Ok((mean_part + a.trace() + b.trace() - 2.0 * cross).max(0.0))
}

pub fn gaussian_w2(g1: &GaussianParams, g2: &GaussianParams) -> Result<f64> {
    gaussian_w2_sq(g1, g2).map(f64::sqrt)
}

/// `mu = N(0, A)` and `nu = N(m, A^-1)`: the pairs for which the symmetrized
/// inequality is an equality.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityFamilyCase {
    a: DMatrix<f64>,
    m: DVector<f64>,
}

impl EqualityFamilyCase {
    pub fn new(a: DMatrix<f64>, m: DVector<f64>) -> Result<Self> {
        GaussianParams::new(m.clone(), a.clone())?;
        Ok(Self { a, m })
    }

    pub fn scalar(a: f64, m: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, a), DVector::from_element(1, m))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn m(&self) -> &DVector<f64> {
        &self.m
    }

    pub fn mu(&self) -> GaussianParams {
        GaussianParams::new(DVector::zeros(self.m.len()), self.a.clone())
            .expect("validated at construction")
    }

    pub fn nu(&self) -> Result<GaussianParams> {
        let inv = self
            .a
            .clone()
            .cholesky()
            .ok_or_else(|| LabError::NotSpd("covariance has no Cholesky factor".into()))?
            .inverse();
        let inv = (&inv + inv.transpose()) * 0.5;
        GaussianParams::new(self.m.clone(), inv)
    }

    /// Random case with covariance eigenvalues in `eig_range` and `|m| <= max_mean`.
    pub fn random(
        rng: &mut impl Rng,
        d: usize,
        eig_range: (f64, f64),
        max_mean: f64,
    ) -> Result<Self> {
        let a = random_spd(rng, d, eig_range);
        let mut m = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let norm = m.norm();
        if norm > 0.0 {
            m *= rng.random_range(0.0..max_mean) / norm;
        }
        Self::new(a, m)
    }
}

/// `Q diag(eigs) Q^T` with `Q` from a QR factorization of a random matrix.
pub fn random_spd(rng: &mut impl Rng, d: usize, eig_range: (f64, f64)) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let eigs = DVector::from_fn(d, |_, _| rng.random_range(eig_range.0..=eig_range.1));
    let a = &q * DMatrix::from_diagonal(&eigs) * q.transpose();
    (&a + a.transpose()) * 0.5
}

/// `lhs = W2^2`, `rhs = 2 Ent(mu) + 2 Ent(nu)`; zero gap up to rounding.
pub fn equality_family_gap(c: &EqualityFamilyCase) -> Result<GapReport> {
    let mu = c.mu();
    let nu = c.nu()?;
    let lhs = gaussian_w2_sq(&mu, &nu)?;
    let rhs = 2.0 * gaussian_rel_entropy(&mu) + 2.0 * gaussian_rel_entropy(&nu);
    Ok(GapReport::new(lhs, rhs, CLOSED_FORM_TOL))
}

/// The would-be inequality `|m1 - m2|^2 <= |m1|^2 + |m2|^2` for
/// `N(m1, I)` and `N(m2, I)`, which fails as soon as `m1 . m2 < 0`.
pub fn noncentered_counterexample(m1: &[f64], m2: &[f64]) -> Result<GapReport> {
    if m1.len() != m2.len() {
        return Err(LabError::DimensionMismatch {
            expected: m1.len(),
            got: m2.len(),
        });
    }
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    let diff: Vec<f64> = m1.iter().zip(m2).map(|(a, b)| a - b).collect();
    let lhs = sq(&diff);
    let rhs = sq(m1) + sq(m2);
    Ok(GapReport::new(lhs, rhs, 4.0 * f64::EPSILON * rhs.max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Verdict;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(m: f64, v: f64) -> GaussianParams {
        GaussianParams::scalar(m, v).unwrap()
    }

    #[test]
    fn entropy_closed_forms() {
        assert_eq!(gaussian_rel_entropy(&GaussianParams::standard(3)), 0.0);
        let g = GaussianParams::isotropic(&[1.0, -2.0], 1.0).unwrap();
        assert!((gaussian_rel_entropy(&g) - 2.5).abs() < 1e-15);
        let e = gaussian_rel_entropy(&scalar(0.0, 2.0));
        assert!((e - 0.5 * (1.0 - 2f64.ln())).abs() < 1e-15);
        assert!((e - 0.1534264).abs() < 1e-7);
    }

    #[test]
    fn entropy_matches_quadrature() {
        // midpoint rule for the integral of log(dmu/dgamma) dmu, mu = N(0.3, 2)
        let g = scalar(0.3, 2.0);
        let std = GaussianParams::standard(1);
        let (lo, hi, n) = (-30.0, 30.0, 200_000);
        let h = (hi - lo) / n as f64;
        let mut q = 0.0;
        for i in 0..n {
            let x = lo + (i as f64 + 0.5) * h;
            let lp = g.log_density(&[x]);
            q += lp.exp() * (lp - std.log_density(&[x])) * h;
        }
        assert!((q - gaussian_rel_entropy(&g)).abs() < 1e-9);
    }

    #[test]
    fn w2_closed_forms() {
        let a = GaussianParams::isotropic(&[1.0, 2.0], 1.0).unwrap();
        assert!(gaussian_w2(&a, &a).unwrap() < 1e-7);
        let b = GaussianParams::isotropic(&[-2.0, 6.0], 1.0).unwrap();
        assert!((gaussian_w2(&a, &b).unwrap() - 5.0).abs() < 1e-12);
        let w = gaussian_w2_sq(&scalar(0.0, 1.0), &scalar(0.0, 4.0)).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn w2_agrees_with_sorted_quantile_samples() {
        // monotone coupling of quantile samples of N(0,1) and N(0,4)
        use statrs::distribution::{ContinuousCDF, Normal};
        let n = 100_000;
        let std = Normal::new(0.0, 1.0).unwrap();
        let mut s = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let q = std.inverse_cdf(t);
            s += (q - 2.0 * q).powi(2);
        }
        assert!((s / n as f64 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ill_conditioned_input_is_an_error() {
        let a = GaussianParams::new(
            DVector::zeros(2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-13])),
        )
        .unwrap();
        assert!(matches!(
            gaussian_w2(&a, &GaussianParams::standard(2)),
            Err(LabError::IllConditioned { .. })
        ));
    }

    #[test]
    fn equality_family_examples() {
        let r = equality_family_gap(&EqualityFamilyCase::scalar(1.0, 0.0).unwrap()).unwrap();
        assert!(r.gap.abs() < 1e-15);
        let r = equality_family_gap(&EqualityFamilyCase::scalar(2.0, 0.5).unwrap()).unwrap();
        // W2^2 = m^2 + a + 1/a - 2, computed by hand
        assert!((r.lhs - 0.75).abs() < 1e-12);
        assert!((r.rhs - 0.75).abs() < 1e-12);
        let c = EqualityFamilyCase::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0 / 3.0])),
            DVector::from_vec(vec![1.0, -1.0]),
        )
        .unwrap();
        let r = equality_family_gap(&c).unwrap();
        let by_hand = 2.0 + (2.0 + 0.5 - 2.0) + (1.0 / 3.0 + 3.0 - 2.0);
        assert!((r.lhs - by_hand).abs() < 1e-12);
        assert!(r.gap.abs() < 1e-9);
    }

    #[test]
    fn counterexample_cases() {
        let r = noncentered_counterexample(&[1.0], &[-1.0]).unwrap();
        assert_eq!((r.lhs, r.rhs), (4.0, 2.0));
        assert_eq!(r.verdict, Verdict::Violated);
        let r = noncentered_counterexample(&[0.7, 0.2], &[0.7, 0.2]).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.verdict, Verdict::Holds);
        let r = noncentered_counterexample(&[1.0], &[0.0]).unwrap();
        assert_eq!((r.lhs, r.rhs, r.gap), (1.0, 1.0, 0.0));
    }

    #[test]
    fn random_equality_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..300 {
            let c = EqualityFamilyCase::random(&mut rng, 1 + k % 3, (0.2, 5.0), 3.0).unwrap();
            assert!(equality_family_gap(&c).unwrap().gap.abs() < 1e-8);
        }
    }

    fn arb_gaussian(d: usize) -> impl Strategy<Value = GaussianParams> {
        (any::<u64>(), proptest::collection::vec(-3.0..3.0f64, d)).prop_map(move |(seed, m)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            GaussianParams::new(DVector::from_vec(m), random_spd(&mut rng, d, (0.2, 5.0))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn w2_triangle_inequality(a in arb_gaussian(2), b in arb_gaussian(2), c in arb_gaussian(2)) {
            let ab = gaussian_w2(&a, &b).unwrap();
            let bc = gaussian_w2(&b, &c).unwrap();
            let ac = gaussian_w2(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-10);
        }

        #[test]
        fn w2_is_symmetric(a in arb_gaussian(3), b in arb_gaussian(3)) {
            let ab = gaussian_w2_sq(&a, &b).unwrap();
            let ba = gaussian_w2_sq(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-10 * (1.0 + ab));
        }

        #[test]
        fn symmetrized_inequality_in_closed_form(mu in arb_gaussian(2), nu in arb_gaussian(2)) {
            let mu = GaussianParams::new(DVector::zeros(2), mu.covariance().clone()).unwrap();
            let lhs = gaussian_w2_sq(&mu, &nu).unwrap();
            let rhs = 2.0 * gaussian_rel_entropy(&mu) + 2.0 * gaussian_rel_entropy(&nu);
            prop_assert!(rhs - lhs >= -1e-10);
        }
    }
}
