use super::grid::fmt17;
use crate::error::{LabError, Result};

/// Finitely supported probability measure. Points are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl DiscreteMeasure {
    /// `points` holds `weights.len()` points of dimension `dim`, row-major.
    /// Zero-weight atoms are dropped; weights must sum to one within 1e-12.
    pub fn new(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidMeasure(
                "dimension must be positive".into(),
            ));
        }
        if points.len() != dim * weights.len() {
            return Err(LabError::DimensionMismatch {
                expected: dim * weights.len(),
                got: points.len(),
            });
        }
        if let Some(v) = points.iter().find(|v| !v.is_finite()) {
            return Err(LabError::InvalidMeasure(format!(
                "non-finite coordinate {v}"
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(LabError::InvalidMeasure(format!(
                "weight {w} is not a non-negative number"
            )));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(LabError::InvalidMeasure(format!(
                "weights sum to {total}, not 1"
            )));
        }
        let mut kept_points = Vec::with_capacity(points.len());
        let mut kept_weights = Vec::with_capacity(weights.len());
        for (i, w) in weights.into_iter().enumerate() {
            if w > 0.0 {
                kept_points.extend_from_slice(&points[i * dim..(i + 1) * dim]);
                kept_weights.push(w);
            }
        }
        if kept_weights.is_empty() {
            return Err(LabError::InvalidMeasure(
                "no atoms with positive weight".into(),
            ));
        }
        Ok(Self {
            dim,
            points: kept_points,
            weights: kept_weights,
        })
    }

    /// Rescales arbitrary non-negative weights to unit mass.
    pub fn normalized(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(LabError::InvalidMeasure(format!(
                "total weight {total} is not positive"
            )));
        }
        let mut w: Vec<f64> = weights.iter().map(|w| w / total).collect();
        // push the rounding residue into the heaviest atom
        let residue = 1.0 - w.iter().sum::<f64>();
        if let Some((k, _)) = w.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
            w[k] += residue;
        }
        Self::new(dim, points, w)
    }

    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        let n = points.len() / dim.max(1);
        Self::normalized(dim, points, vec![1.0; n])
    }

    pub fn dirac(point: &[f64]) -> Self {
        Self {
            dim: point.len(),
            points: point.to_vec(),
            weights: vec![1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.dim];
        for i in 0..self.len() {
            for (a, x) in self.point(i).iter().enumerate() {
                b[a] += self.weights[i] * x;
            }
        }
        b
    }

    pub fn second_moment(&self) -> f64 {
        (0..self.len())
            .map(|i| self.weights[i] * self.point(i).iter().map(|x| x * x).sum::<f64>())
            .sum()
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        super::density::norm(&self.barycenter()) <= tol
    }

    /// Image under `x -> -x`.
    pub fn reflected(&self) -> Self {
        Self {
            dim: self.dim,
            points: self.points.iter().map(|x| -x).collect(),
            weights: self.weights.clone(),
        }
    }

    /// Dimension of the affine hull of the support, with singular values below
    /// `tol` times the largest counted as zero.
    pub fn affine_rank(&self, tol: f64) -> usize {
        let b = self.barycenter();
        let n = self.len();
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, self.dim);
        for i in 0..n {
            for a in 0..self.dim {
                m[(i, a)] = self.weights[i].sqrt() * (self.point(i)[a] - b[a]);
            }
        }
        let sv = m.singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > tol * top).count()
    }

    /// True when the support lies in an affine hyperplane (up to `tol`).
    pub fn is_degenerate(&self, tol: f64) -> bool {
        self.affine_rank(tol) < self.dim
    }

    /// Text format: `atoms dim n`, then one `weight x_1 .. x_dim` line per atom.
    pub fn to_text(&self) -> String {
        let mut out = format!("atoms {} {}\n", self.dim, self.len());
        for i in 0..self.len() {
            let mut parts = vec![fmt17(self.weights[i])];
            parts.extend(self.point(i).iter().map(|x| fmt17(*x)));
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(LabError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let bad = |line: usize, msg: &str| LabError::Parse {
            line,
            msg: msg.to_string(),
        };
        if toks.len() != 3 || toks[0] != "atoms" {
            return Err(bad(1, "header must read `atoms dim n`"));
        }
        let dim: usize = toks[1].parse().map_err(|_| bad(1, "bad dimension"))?;
        let n: usize = toks[2].parse().map_err(|_| bad(1, "bad atom count"))?;
        let mut points = Vec::with_capacity(n * dim);
        let mut weights = Vec::with_capacity(n);
        for (no, line) in lines {
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(no + 1, "not a number")))
                .collect::<Result<Vec<_>>>()?;
            if nums.len() != dim + 1 {
                return Err(bad(no + 1, "wrong number of fields"));
            }
            weights.push(nums[0]);
            points.extend_from_slice(&nums[1..]);
        }
        if weights.len() != n {
            return Err(bad(n + 2, "atom count does not match header"));
        }
        Self::new(dim, points, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_moments() {
        let m = DiscreteMeasure::new(1, vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(m.barycenter(), vec![0.0]);
        assert_eq!(m.second_moment(), 1.0);
    }

    #[test]
    fn point_mass_moments() {
        let m = DiscreteMeasure::dirac(&[2.0, 3.0]);
        assert_eq!(m.barycenter(), vec![2.0, 3.0]);
        assert_eq!(m.second_moment(), 13.0);
        assert_eq!(DiscreteMeasure::dirac(&[0.0]).second_moment(), 0.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![0.5, 0.4]).is_err());
        assert!(DiscreteMeasure::new(1, vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(DiscreteMeasure::new(1, vec![f64::NAN, 1.0], vec![0.5, 0.5]).is_err());
    }

    #[test]
    fn drops_zero_weight_atoms() {
        let m = DiscreteMeasure::new(1, vec![0.0, 5.0, 1.0], vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.barycenter(), vec![0.5]);
        assert_eq!(m.second_moment(), 0.5);
    }

    #[test]
    fn hyperplane_support_detected() {
        let line = DiscreteMeasure::uniform(2, vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(line.affine_rank(1e-10), 1);
        assert!(line.is_degenerate(1e-10));
        let tri = DiscreteMeasure::uniform(2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(!tri.is_degenerate(1e-10));
    }

    #[test]
    fn text_round_trip() {
        let m = DiscreteMeasure::normalized(2, vec![0.1, -0.2, 1.0 / 3.0, 2.5], vec![1.0, 2.0])
            .unwrap();
        assert_eq!(DiscreteMeasure::from_text(&m.to_text()).unwrap(), m);
    }

    proptest! {
        #[test]
        fn reflection_negates_barycenter_and_keeps_second_moment(
            pts in prop::collection::vec(-10.0f64..10.0, 2..40),
            seed_w in prop::collection::vec(0.01f64..1.0, 1..20),
        ) {
            let n = (pts.len() / 2).min(seed_w.len()).max(1);
            let points = pts[..2 * n].to_vec();
            let m = DiscreteMeasure::normalized(2, points, seed_w[..n].to_vec()).unwrap();
            let r = m.reflected();
            prop_assert_eq!(r.second_moment(), m.second_moment());
            let (b, rb) = (m.barycenter(), r.barycenter());
            prop_assert_eq!(rb[0], -b[0]);
            prop_assert_eq!(rb[1], -b[1]);
        }

        #[test]
        fn zero_weight_atoms_do_not_change_moments(
            xs in prop::collection::vec(-5.0f64..5.0, 1..20),
            extra in -100.0f64..100.0,
        ) {
            let m = DiscreteMeasure::uniform(1, xs.clone()).unwrap();
            let mut pts = xs.clone();
            pts.push(extra);
            let mut w = m.weights().to_vec();
            w.push(0.0);
            let padded = DiscreteMeasure::new(1, pts, w).unwrap();
            prop_assert_eq!(padded.barycenter(), m.barycenter());
            prop_assert_eq!(padded.second_moment(), m.second_moment());
        }
    }
}
