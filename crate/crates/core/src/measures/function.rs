use super::density::parse_grid_values;
use super::grid::{fmt17, Grid};
use crate::error::{LabError, Result};

/// Extended-real function sampled on a grid. Non-finite samples are outside the
/// effective domain; their sign is kept as the sentinel (`+inf` for convex
/// potentials, `-inf` for log-densities), so `exp(-v)` resp. `exp(v)` is zero there.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(LabError::InvalidGrid("NaN sample in grid function".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = grid.points().map(|p| f(&p[..dim])).collect();
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

    pub fn value(&self, flat: usize) -> Option<f64> {
        let v = self.values[flat];
        v.is_finite().then_some(v)
    }

    pub fn in_domain(&self, flat: usize) -> bool {
        self.values[flat].is_finite()
    }

    pub fn domain_mask(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_finite()).collect()
    }

    pub fn domain_size(&self) -> usize {
        self.values.iter().filter(|v| v.is_finite()).count()
    }

    pub fn map(&self, f: impl Fn(&[f64], f64) -> f64) -> Result<Self> {
        let dim = self.dim();
        let values = self
            .values
            .iter()
            .zip(self.grid.points())
            .map(|(v, p)| if v.is_finite() { f(&p[..dim], *v) } else { *v })
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// `x -> -f(x)`; the sentinel flips sign with the values.
    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// `x -> f(x) + c`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }

    /// `y -> f(y + shift)`, realized exactly by translating the grid by `-shift`.
    pub fn translated_argument(&self, shift: &[f64]) -> Self {
        let neg: Vec<f64> = shift.iter().map(|s| -s).collect();
        Self {
            grid: self.grid.translated(&neg),
            values: self.values.clone(),
        }
    }

    /// Riemann sum of `exp(sign * f)`.
    pub fn exp_integral(&self, sign: f64) -> f64 {
        let vol = self.grid.cell_volume();
        let max = self
            .values
            .iter()
            .filter(|v| v.is_finite())
            .map(|v| sign * v)
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return 0.0;
        }
        let s: f64 = self
            .values
            .iter()
            .filter(|v| v.is_finite())
            .map(|v| (sign * v - max).exp())
            .sum();
        (max + (s * vol).ln()).exp()
    }

    /// `log` of the Riemann sum of `exp(sign * f)`, stable for large values.
    pub fn log_exp_integral(&self, sign: f64) -> f64 {
        let vol = self.grid.cell_volume();
        let max = self
            .values
            .iter()
            .filter(|v| v.is_finite())
            .map(|v| sign * v)
            .fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return f64::NEG_INFINITY;
        }
        let s: f64 = self
            .values
            .iter()
            .filter(|v| v.is_finite())
            .map(|v| (sign * v - max).exp())
            .sum();
        max + (s * vol).ln()
    }

    /// Text format of grid densities, with `inf` lines for points outside the domain.
    pub fn to_text(&self) -> String {
        let mut out = self.grid.header();
        out.push('\n');
        for v in &self.values {
            out.push_str(&if v.is_finite() {
                fmt17(*v)
            } else {
                "inf".to_string()
            });
            out.push('\n');
        }
        out
    }

    /// Parses the text format; masked points take the given sentinel.
    pub fn from_text(text: &str, sentinel: f64) -> Result<Self> {
        let (grid, values) = parse_grid_values(text)?;
        let values = values
            .into_iter()
            .map(|v| if v.is_finite() { v } else { sentinel })
            .collect();
        Self::new(grid, values)
    }
}

/// Default allowance for negative second divided differences.
pub const DEFAULT_CONVEX_TOL: f64 = 1e-8;

/// Convex function sampled on a grid, `+inf` outside its effective domain.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPotential {
    func: GridFunction,
}

impl ConvexPotential {
    pub fn new(func: GridFunction) -> Result<Self> {
        Self::with_tolerance(func, DEFAULT_CONVEX_TOL)
    }

    pub fn with_tolerance(func: GridFunction, tol: f64) -> Result<Self> {
        if func.values().iter().any(|v| *v == f64::NEG_INFINITY) {
            return Err(LabError::InvalidGrid(
                "convex potential takes the value -inf".into(),
            ));
        }
        if func.domain_size() == 0 {
            return Err(LabError::EmptyDomain);
        }
        check_convex(&func, tol)?;
        Ok(Self { func })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(GridFunction::from_fn(grid, f)?)
    }

    pub fn function(&self) -> &GridFunction {
        &self.func
    }

    pub fn grid(&self) -> &Grid {
        self.func.grid()
    }

    pub fn values(&self) -> &[f64] {
        self.func.values()
    }

    pub fn into_function(self) -> GridFunction {
        self.func
    }

    /// First derivative (1D) by central differences, one-sided at the domain edges.
    pub fn derivative(&self) -> Vec<f64> {
        derivative_1d(self.func.values(), self.grid().step(0))
    }

    /// Second derivative (1D): central second differences, copied from the
    /// nearest interior point at the edges.
    pub fn second_derivative(&self) -> Vec<f64> {
        second_derivative_1d(self.func.values(), self.grid().step(0))
    }
}

pub(crate) fn derivative_1d(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let left = i > 0 && v[i - 1].is_finite();
            let right = i + 1 < n && v[i + 1].is_finite();
            match (left, right) {
                (true, true) => (v[i + 1] - v[i - 1]) / (2.0 * h),
                (false, true) => (v[i + 1] - v[i]) / h,
                (true, false) => (v[i] - v[i - 1]) / h,
                (false, false) => f64::NAN,
            }
        })
        .collect()
}

pub(crate) fn second_derivative_1d(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut d = vec![f64::NAN; n];
    for i in 1..n.saturating_sub(1) {
        if v[i - 1].is_finite() && v[i].is_finite() && v[i + 1].is_finite() {
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        }
    }
    if n >= 3 {
        d[0] = d[1];
        d[n - 1] = d[n - 2];
    }
    d
}

/// Rounding allowance for a second divided difference of samples of size `scale`.
fn rounding_slack(scale: f64, h2: f64) -> f64 {
    8.0 * f64::EPSILON * scale / h2
}

fn check_convex(f: &GridFunction, tol: f64) -> Result<()> {
    let g = f.grid();
    let v = f.values();
    let scale = v
        .iter()
        .filter(|x| x.is_finite())
        .fold(0.0f64, |m, x| m.max(x.abs()));
    if g.dim() == 1 {
        let h = g.step(0);
        let slack = tol + rounding_slack(scale, h * h);
        for i in 1..v.len().saturating_sub(1) {
            if v[i - 1].is_finite() && v[i].is_finite() && v[i + 1].is_finite() {
                let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
                if d2 < -slack {
                    return Err(LabError::NotConvex {
                        index: i,
                        value: d2,
                    });
                }
            }
        }
        // a convex function has an interval as effective domain
        let first = v.iter().position(|x| x.is_finite());
        let last = v.iter().rposition(|x| x.is_finite());
        if let (Some(a), Some(b)) = (first, last) {
            if let Some(k) = (a..=b).find(|&k| !v[k].is_finite()) {
                return Err(LabError::NotConvex {
                    index: k,
                    value: f64::INFINITY,
                });
            }
        }
        return Ok(());
    }
    let (n0, n1) = (g.n(0), g.n(1));
    let (h0, h1) = (g.step(0), g.step(1));
    let slack = tol + rounding_slack(scale, h0.min(h1).powi(2));
    let at = |i: usize, j: usize| v[i * n1 + j];
    for i in 1..n0.saturating_sub(1) {
        for j in 1..n1.saturating_sub(1) {
            let stencil = [
                at(i - 1, j - 1),
                at(i - 1, j),
                at(i - 1, j + 1),
                at(i, j - 1),
                at(i, j),
                at(i, j + 1),
                at(i + 1, j - 1),
                at(i + 1, j),
                at(i + 1, j + 1),
            ];
            if stencil.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let fxx = (at(i + 1, j) - 2.0 * at(i, j) + at(i - 1, j)) / (h0 * h0);
            let fyy = (at(i, j + 1) - 2.0 * at(i, j) + at(i, j - 1)) / (h1 * h1);
            let fxy = (at(i + 1, j + 1) - at(i + 1, j - 1) - at(i - 1, j + 1) + at(i - 1, j - 1))
                / (4.0 * h0 * h1);
            let mean = 0.5 * (fxx + fyy);
            let rad = (0.25 * (fxx - fyy).powi(2) + fxy * fxy).sqrt();
            let lambda_min = mean - rad;
            if lambda_min < -slack {
                return Err(LabError::NotConvex {
                    index: i * n1 + j,
                    value: lambda_min,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_and_abs_are_convex() {
        let g = Grid::line(-10.0, 10.0, 1024).unwrap();
        assert!(ConvexPotential::from_fn(g.clone(), |x| 0.5 * x[0] * x[0]).is_ok());
        assert!(ConvexPotential::from_fn(g.clone(), |x| x[0].abs()).is_ok());
        assert!(matches!(
            ConvexPotential::from_fn(g, |x| x[0].cos()),
            Err(LabError::NotConvex { .. })
        ));
    }

    #[test]
    fn two_d_hessian_check() {
        let g = Grid::square(-3.0, 3.0, 64).unwrap();
        assert!(
            ConvexPotential::from_fn(g.clone(), |x| x[0] * x[0] + x[0] * x[1] + x[1] * x[1])
                .is_ok()
        );
        // indefinite: x^2 + 3xy + y^2
        assert!(
            ConvexPotential::from_fn(g, |x| x[0] * x[0] + 3.0 * x[0] * x[1] + x[1] * x[1]).is_err()
        );
    }

    #[test]
    fn indicator_is_exactly_representable() {
        let g = Grid::line(-2.0, 2.0, 40).unwrap();
        let ind = ConvexPotential::from_fn(g, |x| {
            if x[0].abs() <= 1.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .unwrap();
        assert_eq!(ind.function().domain_size(), 20);
        assert!((ind.function().exp_integral(-1.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn domain_with_hole_is_not_convex() {
        let g = Grid::line(-2.0, 2.0, 8).unwrap();
        let f = GridFunction::from_fn(g, |x| {
            if x[0].abs() < 1.0 && x[0].abs() > 0.5 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .unwrap();
        assert!(ConvexPotential::new(f).is_err());
    }

    #[test]
    fn derivative_accessors_on_quadratic() {
        let g = Grid::line(-1.0, 1.0, 100).unwrap();
        let p = ConvexPotential::from_fn(g.clone(), |x| 2.0 * x[0] * x[0]).unwrap();
        let d = p.derivative();
        let d2 = p.second_derivative();
        for i in 1..99 {
            assert!((d[i] - 4.0 * g.center(0, i)).abs() < 1e-10);
            assert!((d2[i] - 4.0).abs() < 1e-8);
        }
    }

    #[test]
    fn masked_text_round_trip() {
        let g = Grid::line(-2.0, 2.0, 6).unwrap();
        let f = GridFunction::from_fn(g, |x| {
            if x[0] > 1.0 {
                f64::INFINITY
            } else {
                x[0] / 3.0
            }
        })
        .unwrap();
        let text = f.to_text();
        assert!(text.contains("\ninf\n"));
        assert_eq!(GridFunction::from_text(&text, f64::INFINITY).unwrap(), f);
    }

    #[test]
    fn translated_argument_shifts_grid() {
        let g = Grid::line(-1.0, 1.0, 4).unwrap();
        let f = GridFunction::from_fn(g, |x| x[0]).unwrap();
        let t = f.translated_argument(&[0.5]);
        // t(y) = f(y + 0.5): at y = -1.25 (first center) value is f(-0.75)
        assert_eq!(t.grid().center(0, 0), -1.25);
        assert_eq!(t.values()[0], -0.75);
        assert_eq!(t.exp_integral(1.0), f.exp_integral(1.0));
    }
}
