use super::grid::{fmt17, Grid};
use crate::error::{LabError, Result};

/// Probability density sampled at cell centers of a [`Grid`], normalized so that
/// the Riemann sum is one.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    grid: Grid,
    values: Vec<f64>,
}

impl GridDensity {
    /// Normalizes `values` (non-negative, finite, positive total) to unit mass.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(LabError::InvalidMeasure(format!(
                "density value {v} at cell {i}"
            )));
        }
        let vol = grid.cell_volume();
        let total: f64 = values.iter().sum::<f64>() * vol;
        if !(total > 0.0 && total.is_finite()) {
            return Err(LabError::InvalidMeasure(format!(
                "total mass {total} is not positive"
            )));
        }
        let values = values.into_iter().map(|v| v / total).collect();
        Ok(Self { grid, values })
    }

    /// Samples an unnormalized density at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = grid.points().map(|p| f(&p[..dim])).collect();
        Self::new(grid, values)
    }

    /// Builds the density from per-cell masses (e.g. exact integrals over each cell).
    pub fn from_cell_masses(grid: Grid, masses: Vec<f64>) -> Result<Self> {
        let vol = grid.cell_volume();
        let values = masses.into_iter().map(|m| m / vol).collect();
        Self::new(grid, values)
    }

    /// Density proportional to `exp(log_values)`, computed without overflow.
    pub fn from_log_values(grid: Grid, log_values: &[f64]) -> Result<Self> {
        let max = log_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(LabError::InvalidMeasure(
                "log-density has no finite maximum".into(),
            ));
        }
        let values = log_values.iter().map(|v| (v - max).exp()).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.cell_volume()
    }

    pub fn mass(&self, flat: usize) -> f64 {
        self.values[flat] * self.grid.cell_volume()
    }

    pub fn masses(&self) -> Vec<f64> {
        let vol = self.grid.cell_volume();
        self.values.iter().map(|v| v * vol).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Riemann-sum expectation of `f`.
    pub fn expect(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let dim = self.dim();
        let vol = self.grid.cell_volume();
        self.values
            .iter()
            .zip(self.grid.points())
            .filter(|(v, _)| **v > 0.0)
            .map(|(v, p)| v * f(&p[..dim]))
            .sum::<f64>()
            * vol
    }

    pub fn barycenter(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.expect(|x| x[a])).collect()
    }

    pub fn second_moment(&self) -> f64 {
        self.expect(|x| x.iter().map(|v| v * v).sum())
    }

    pub fn is_centered(&self, tol: f64) -> bool {
        norm(&self.barycenter()) <= tol
    }

    /// Mass-preserving 2x coarsening (pairs of cells merged per axis).
    pub fn coarsened(&self) -> Option<GridDensity> {
        let (coarse, masses) = self.grid.coarsen_sums(&self.masses())?;
        GridDensity::from_cell_masses(coarse, masses).ok()
    }

    /// Largest mismatch between values and their reflection through the
    /// hyperplanes selected by `flip`, relative to the peak value.
    fn reflection_defect(&self, flip: [bool; 2]) -> Option<f64> {
        if !self.grid.is_origin_symmetric(1e-12) {
            return None;
        }
        let peak = self
            .values
            .iter()
            .cloned()
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for k in 0..self.grid.len() {
            let mut idx = self.grid.multi_index(k);
            for a in 0..self.dim() {
                if flip[a] {
                    idx[a] = self.grid.n(a) - 1 - idx[a];
                }
            }
            let r = self.grid.flat_index(idx);
            worst = worst.max((self.values[k] - self.values[r]).abs());
        }
        Some(worst / peak.max(1.0))
    }

    /// Invariance under `x -> -x`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.reflection_defect([true, true])
            .is_some_and(|d| d <= tol)
    }

    /// Invariance under each coordinate sign flip separately.
    pub fn is_unconditional(&self, tol: f64) -> bool {
        (0..self.dim()).all(|a| {
            let mut flip = [false; 2];
            flip[a] = true;
            self.reflection_defect(flip).is_some_and(|d| d <= tol)
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = self.grid.header();
        out.push('\n');
        for v in &self.values {
            out.push_str(&fmt17(*v));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (grid, values) = parse_grid_values(text)?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Parse {
                line: i + 2,
                msg: "density value must be finite".into(),
            });
        }
        // Stored values are already normalized; keep them bit-exact.
        let d = Self::new(grid.clone(), values.clone())?;
        if (d.total_mass() - 1.0).abs() > 1e-9 {
            return Err(LabError::InvalidMeasure(
                "stored density is not normalized".into(),
            ));
        }
        Ok(Self { grid, values })
    }
}

pub(crate) fn parse_grid_values(text: &str) -> Result<(Grid, Vec<f64>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(LabError::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let grid = Grid::parse_header(header)?;
    let mut values = Vec::with_capacity(grid.len());
    for (no, line) in lines {
        let v: f64 = match line.trim() {
            "inf" | "+inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            t => t.parse().map_err(|_| LabError::Parse {
                line: no + 1,
                msg: format!("not a number: {t}"),
            })?,
        };
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(LabError::Parse {
            line: values.len() + 2,
            msg: format!("expected {} values, found {}", grid.len(), values.len()),
        });
    }
    Ok((grid, values))
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
