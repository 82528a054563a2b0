use crate::error::{LabError, Result};

/// Regular cell-centered grid on a box in one or two dimensions.
///
/// Flat indices are row-major: in 2D, `flat = i0 * n1 + i1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    n: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let dim = n.len();
        if dim == 0 || dim > 2 {
            return Err(LabError::InvalidGrid(format!(
                "dimension {dim} not in {{1, 2}}"
            )));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(LabError::InvalidGrid(
                "bounds do not match dimension".into(),
            ));
        }
        for a in 0..dim {
            if n[a] == 0 {
                return Err(LabError::InvalidGrid(format!("axis {a} has zero cells")));
            }
            if !(lower[a].is_finite() && upper[a].is_finite() && lower[a] < upper[a]) {
                return Err(LabError::InvalidGrid(format!(
                    "axis {a} bounds [{}, {}] are not a finite interval",
                    lower[a], upper[a]
                )));
            }
        }
        Ok(Self { lower, upper, n })
    }

    pub fn line(lower: f64, upper: f64, n: usize) -> Result<Self> {
        Self::new(vec![lower], vec![upper], vec![n])
    }

    pub fn square(lower: f64, upper: f64, n: usize) -> Result<Self> {
        Self::new(vec![lower, lower], vec![upper, upper], vec![n, n])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self, axis: usize) -> usize {
        self.n[axis]
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.n[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.step(a)).product()
    }

    /// Center of cell `i` along `axis`.
    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.step(axis)
    }

    /// Left edge of cell `i` along `axis`; `i == n` gives the upper bound.
    pub fn edge(&self, axis: usize, i: usize) -> f64 {
        if i == self.n[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + i as f64 * self.step(axis)
        }
    }

    pub fn axis_centers(&self, axis: usize) -> Vec<f64> {
        (0..self.n[axis]).map(|i| self.center(axis, i)).collect()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [flat, 0]
        } else {
            [flat / self.n[1], flat % self.n[1]]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim() == 1 {
            idx[0]
        } else {
            idx[0] * self.n[1] + idx[1]
        }
    }

    /// Coordinates of the center of cell `flat`; unused trailing entries are zero.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.multi_index(flat);
        let mut p = [0.0; 2];
        for (a, slot) in p.iter_mut().enumerate().take(self.dim()) {
            *slot = self.center(a, idx[a]);
        }
        p
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }

    /// True when every axis is symmetric about the origin.
    pub fn is_origin_symmetric(&self, tol: f64) -> bool {
        (0..self.dim())
            .all(|a| (self.lower[a] + self.upper[a]).abs() <= tol * (1.0 + self.upper[a].abs()))
    }

    /// Same layout translated by `shift`.
    pub fn translated(&self, shift: &[f64]) -> Grid {
        Grid {
            lower: self.lower.iter().zip(shift).map(|(l, s)| l + s).collect(),
            upper: self.upper.iter().zip(shift).map(|(u, s)| u + s).collect(),
            n: self.n.clone(),
        }
    }

    /// Grid with half the cells per axis. An odd trailing cell is dropped from the
    /// layout; [`coarsen_sums`](Self::coarsen_sums) folds its content into the last coarse cell.
    pub fn coarsened(&self) -> Option<Grid> {
        if self.n.iter().any(|&k| k < 4) {
            return None;
        }
        let mut upper = self.upper.clone();
        let mut n = self.n.clone();
        for a in 0..self.dim() {
            let h = self.step(a);
            let even = self.n[a] - self.n[a] % 2;
            upper[a] = self.lower[a] + even as f64 * h;
            n[a] = even / 2;
        }
        Some(Grid {
            lower: self.lower.clone(),
            upper,
            n,
        })
    }

    /// Sums fine-cell quantities into the cells of [`coarsened`](Self::coarsened).
    pub fn coarsen_sums(&self, fine: &[f64]) -> Option<(Grid, Vec<f64>)> {
        let coarse = self.coarsened()?;
        let mut out = vec![0.0; coarse.len()];
        let map = |a: usize, i: usize| (i / 2).min(coarse.n[a] - 1);
        for (k, v) in fine.iter().enumerate() {
            let idx = self.multi_index(k);
            let c = if self.dim() == 1 {
                map(0, idx[0])
            } else {
                map(0, idx[0]) * coarse.n[1] + map(1, idx[1])
            };
            out[c] += v;
        }
        Some((coarse, out))
    }

    /// Index of the cell containing `x` along `axis`, clamped to the grid.
    pub fn locate(&self, axis: usize, x: f64) -> usize {
        let t = ((x - self.lower[axis]) / self.step(axis)).floor();
        if t < 0.0 {
            0
        } else {
            (t as usize).min(self.n[axis] - 1)
        }
    }

    /// Header line of the text format: `dim n0 [n1] lower... upper...`.
    pub fn header(&self) -> String {
        let mut parts = vec![self.dim().to_string()];
        parts.extend(self.n.iter().map(|k| k.to_string()));
        parts.extend(self.lower.iter().map(|v| fmt17(*v)));
        parts.extend(self.upper.iter().map(|v| fmt17(*v)));
        parts.join(" ")
    }

    pub fn parse_header(line: &str) -> Result<Grid> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| LabError::Parse {
            line: 1,
            msg: msg.to_string(),
        };
        let dim: usize = toks
            .first()
            .ok_or_else(|| bad("empty header"))?
            .parse()
            .map_err(|_| bad("dimension is not an integer"))?;
        if !(1..=2).contains(&dim) || toks.len() != 1 + 3 * dim {
            return Err(bad("header must read `dim n.. lower.. upper..`"));
        }
        let n = toks[1..1 + dim]
            .iter()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| bad("cell count is not an integer"))
            })
            .collect::<Result<Vec<_>>>()?;
        let nums = toks[1 + dim..]
            .iter()
            .map(|t| t.parse::<f64>().map_err(|_| bad("bound is not a number")))
            .collect::<Result<Vec<_>>>()?;
        Grid::new(nums[..dim].to_vec(), nums[dim..].to_vec(), n)
    }
}

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_and_edges() {
        let g = Grid::line(-1.0, 1.0, 4).unwrap();
        assert_eq!(g.axis_centers(0), vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(g.edge(0, 4), 1.0);
        assert_eq!(g.cell_volume(), 0.5);
    }

    #[test]
    fn two_d_indexing_round_trips() {
        let g = Grid::new(vec![0.0, -1.0], vec![1.0, 1.0], vec![3, 5]).unwrap();
        for k in 0..g.len() {
            assert_eq!(g.flat_index(g.multi_index(k)), k);
        }
        assert_eq!(g.point(7), [g.center(0, 1), g.center(1, 2)]);
    }

    #[test]
    fn coarsening_preserves_sums_with_odd_tail() {
        let g = Grid::line(0.0, 7.0, 7).unwrap();
        let fine = vec![1.0; 7];
        let (c, sums) = g.coarsen_sums(&fine).unwrap();
        assert_eq!(c.n(0), 3);
        assert_eq!(sums, vec![2.0, 2.0, 3.0]);
    }

    #[test]
    fn header_round_trip() {
        let g = Grid::new(vec![-2.5, -1.0], vec![2.5, 3.0], vec![8, 6]).unwrap();
        assert_eq!(Grid::parse_header(&g.header()).unwrap(), g);
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(Grid::line(1.0, 1.0, 4).is_err());
        assert!(Grid::line(0.0, 1.0, 0).is_err());
        assert!(Grid::new(vec![0.0; 3], vec![1.0; 3], vec![2; 3]).is_err());
    }
}
