use crate::error::{LabError, Result};
use crate::measures::{DiscreteMeasure, GridDensity, Law};

/// Quantile function of a one-dimensional measure, stored as pieces
/// `(t0, t1, x0, x1)` on which it is affine in `t`. Atoms give constant pieces;
/// grid cells (density constant on each cell) give pieces spanning the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantile1d {
    pieces: Vec<[f64; 4]>,
}

impl Quantile1d {
    pub fn from_discrete(m: &DiscreteMeasure) -> Result<Self> {
        if m.dim() != 1 {
            return Err(LabError::DimensionMismatch {
                expected: 1,
                got: m.dim(),
            });
        }
        let mut idx: Vec<usize> = (0..m.len()).collect();
        idx.sort_by(|&i, &j| m.point(i)[0].total_cmp(&m.point(j)[0]));
        let raw = idx
            .iter()
            .map(|&i| (m.weight(i), m.point(i)[0], m.point(i)[0]));
        Ok(Self::build(raw))
    }

    pub fn from_grid(d: &GridDensity) -> Result<Self> {
        if d.dim() != 1 {
            return Err(LabError::DimensionMismatch {
                expected: 1,
                got: d.dim(),
            });
        }
        let g = d.grid();
        let raw = d
            .masses()
            .into_iter()
            .enumerate()
            .map(|(k, w)| (w, g.edge(0, k), g.edge(0, k + 1)));
        Ok(Self::build(raw))
    }

    pub fn from_law(law: &Law) -> Result<Self> {
        match law {
            Law::Grid(d) => Self::from_grid(d),
            Law::Discrete(m) => Self::from_discrete(m),
            Law::Product(fs) if fs.len() == 1 => Self::from_law(&fs[0]),
            _ => Err(LabError::Unsupported(
                "quantile transport needs a 1D grid or discrete law".into(),
            )),
        }
    }

    fn build(raw: impl Iterator<Item = (f64, f64, f64)>) -> Self {
        let raw: Vec<(f64, f64, f64)> = raw.filter(|(w, _, _)| *w > 0.0).collect();
        let total: f64 = raw.iter().map(|r| r.0).sum();
        let mut acc = 0.0;
        let mut pieces = Vec::with_capacity(raw.len());
        for (k, (w, x0, x1)) in raw.iter().enumerate() {
            let t0 = acc / total;
            acc += w;
            let t1 = if k + 1 == raw.len() { 1.0 } else { acc / total };
            pieces.push([t0, t1, *x0, *x1]);
        }
        Self { pieces }
    }

    pub fn pieces(&self) -> &[[f64; 4]] {
        &self.pieces
    }

    fn at(p: &[f64; 4], t: f64) -> f64 {
        if p[2] == p[3] || p[1] <= p[0] {
            return p[2];
        }
        p[2] + (p[3] - p[2]) * ((t - p[0]) / (p[1] - p[0])).clamp(0.0, 1.0)
    }

    /// `F^-1(t)` for `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self
            .pieces
            .partition_point(|p| p[1] < t)
            .min(self.pieces.len() - 1);
        Self::at(&self.pieces[k], t)
    }

    /// Right-continuous distribution function `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.pieces.partition_point(|p| p[3] <= x);
        match self.pieces.get(k) {
            None => 1.0,
            Some(p) if p[2] > x || p[3] == p[2] => p[0],
            Some(p) => p[0] + (p[1] - p[0]) * (x - p[2]) / (p[3] - p[2]),
        }
    }
}

/// `int_0^1 (F^-1(t) - G^-1(t))^2 dt`, exact for the piecewise-affine quantiles.
pub fn quantile_w2_sq(p: &Quantile1d, q: &Quantile1d) -> f64 {
    let (a, b) = (&p.pieces, &q.pieces);
    let (mut i, mut j) = (0, 0);
    let mut t = 0.0;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let t1 = a[i][1].min(b[j][1]);
        if t1 > t {
            let d0 = Quantile1d::at(&a[i], t) - Quantile1d::at(&b[j], t);
            let d1 = Quantile1d::at(&a[i], t1) - Quantile1d::at(&b[j], t1);
            total += (t1 - t) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
            t = t1;
        }
        if a[i][1] <= t1 {
            i += 1;
        }
        if b[j][1] <= t1 {
            j += 1;
        }
    }
    total
}

/// Squared W2 between one-dimensional grid or discrete laws.
pub fn quantile_w2_1d(mu: &Law, nu: &Law) -> Result<f64> {
    Ok(quantile_w2_sq(
        &Quantile1d::from_law(mu)?,
        &Quantile1d::from_law(nu)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::Grid;
    use crate::transport::{solve_exact, CostKind};
    use proptest::prelude::*;

    fn normal(var: f64) -> Law {
        let g = Grid::line(-20.0, 20.0, 8192).unwrap();
        Law::Grid(GridDensity::from_fn(g, |x| (-x[0] * x[0] / (2.0 * var)).exp()).unwrap())
    }

    #[test]
    fn identical_laws() {
        let n = normal(1.0);
        assert_eq!(quantile_w2_1d(&n, &n).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_grids() {
        assert!((quantile_w2_1d(&normal(1.0), &normal(4.0)).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn uniform_intervals() {
        let u = |a: f64| {
            Law::Grid(GridDensity::from_fn(Grid::line(-a, a, 64).unwrap(), |_| 1.0).unwrap())
        };
        // F^-1 = 2t - 1 against 4t - 2
        assert!((quantile_w2_1d(&u(1.0), &u(2.0)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_and_quantile_are_inverse() {
        let m = DiscreteMeasure::normalized(1, vec![2.0, -1.0, 0.5], vec![1.0, 2.0, 1.0]).unwrap();
        let q = Quantile1d::from_discrete(&m).unwrap();
        assert_eq!(q.cdf(-1.5), 0.0);
        assert_eq!(q.cdf(-1.0), 0.5);
        assert_eq!(q.cdf(0.7), 0.75);
        assert_eq!(q.cdf(2.0), 1.0);
        assert_eq!(q.eval(0.3), -1.0);
        assert_eq!(q.eval(0.6), 0.5);
        let d = GridDensity::from_fn(Grid::line(0.0, 1.0, 10).unwrap(), |_| 1.0).unwrap();
        let q = Quantile1d::from_grid(&d).unwrap();
        assert!((q.cdf(0.37) - 0.37).abs() < 1e-15);
        assert!((q.eval(0.42) - 0.42).abs() < 1e-15);
    }

    fn arb_measure() -> impl Strategy<Value = DiscreteMeasure> {
        proptest::collection::vec((-5.0..5.0f64, 0.01..1.0f64), 1..50).prop_map(|atoms| {
            let (x, w): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
            DiscreteMeasure::normalized(1, x, w).unwrap()
        })
    }

    proptest! {
        #[test]
        fn agrees_with_exact_lp(a in arb_measure(), b in arb_measure()) {
            let q = quantile_w2_1d(&Law::Discrete(a.clone()), &Law::Discrete(b.clone())).unwrap();
            let lp = solve_exact(&a, &b, CostKind::Quadratic).unwrap().cost;
            prop_assert!((q - lp).abs() <= 1e-8, "{q} vs {lp}");
        }
    }
}
