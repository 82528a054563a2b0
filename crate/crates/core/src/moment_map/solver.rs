use std::f64::consts::PI;

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::calculus::differential_entropy;
use crate::error::{LabError, Result};
use crate::inequality::centering_tol;
use crate::measures::{
    derivative_1d, fmt17, norm, ConvexPotential, Grid, GridDensity, GridFunction, Law,
};
use crate::transport::{discretize_gaussian, quantile_w2_sq, CostEstimate, Quantile1d};

/// Smallest probability handed to the Gaussian quantile.
const TINY: f64 = 1e-300;
/// Grid points are ignored in residual norms where `rho < SIGNIFICANCE * max rho`.
pub const SIGNIFICANCE: f64 = 1e-12;
/// Slopes this close to an atom, relative to the gap to its neighbour, are
/// read as that atom.
const ATOM_MATCH: f64 = 1e-12;

/// One-dimensional target of the moment map.
#[derive(Debug, Clone)]
pub(crate) enum Target {
    /// Sorted distinct atoms with cumulative weights, the last one exactly 1.
    Atoms {
        xs: Vec<f64>,
        cum: Vec<f64>,
    },
    Grid {
        density: GridDensity,
        q: Quantile1d,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
}

impl Target {
    pub(crate) fn from_law(law: &Law) -> Result<Self> {
        match law {
            Law::Product(fs) if fs.len() == 1 => Self::from_law(&fs[0]),
            _ if law.dim() != 1 => Err(LabError::DimensionMismatch {
                expected: 1,
                got: law.dim(),
            }),
            Law::Gaussian(g) => Ok(Target::Normal {
                mean: g.mean()[0],
                sd: g.covariance()[(0, 0)].sqrt(),
            }),
            Law::Grid(d) => Ok(Target::Grid {
                density: d.clone(),
                q: Quantile1d::from_grid(d)?,
            }),
            Law::Discrete(m) => {
                let mut atoms: Vec<(f64, f64)> = (0..m.len())
                    .filter(|&i| m.weight(i) > 0.0)
                    .map(|i| (m.point(i)[0], m.weight(i)))
                    .collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut xs: Vec<f64> = Vec::new();
                let mut ws: Vec<f64> = Vec::new();
                for (x, w) in atoms {
                    if xs.last() == Some(&x) {
                        *ws.last_mut().unwrap() += w;
                    } else {
                        xs.push(x);
                        ws.push(w);
                    }
                }
                if xs.len() < 2 {
                    return Err(LabError::Precondition(
                        "a point mass has no moment map".into(),
                    ));
                }
                let total: f64 = ws.iter().sum();
                let mut acc = 0.0;
                let mut cum: Vec<f64> = ws
                    .iter()
                    .map(|w| {
                        acc += w;
                        acc / total
                    })
                    .collect();
                *cum.last_mut().unwrap() = 1.0;
                Ok(Target::Atoms { xs, cum })
            }
            Law::Product(_) => Err(LabError::Unsupported("product target".into())),
        }
    }

    pub(crate) fn has_density(&self) -> bool {
        !matches!(self, Target::Atoms { .. })
    }

    /// `F^-1` at a point whose lower cumulative mass is `c` and upper mass `u`.
    fn quantile(&self, c: f64, u: f64) -> f64 {
        match self {
            Target::Atoms { xs, cum } => {
                let t = if c <= 0.5 { c } else { 1.0 - u };
                xs[cum.partition_point(|&s| s < t).min(xs.len() - 1)]
            }
            Target::Grid { q, .. } => q.eval(if c <= 0.5 { c } else { 1.0 - u }),
            Target::Normal { mean, sd } => {
                let z = Normal::standard();
                if c <= 0.5 {
                    mean + sd * z.inverse_cdf(c.max(TINY))
                } else {
                    mean - sd * z.inverse_cdf(u.max(TINY))
                }
            }
        }
    }

    /// Average of the step quantile of an atomic target over `[t0, t1]`.
    fn atom_average(xs: &[f64], cum: &[f64], t0: f64, t1: f64) -> f64 {
        let mut k = cum.partition_point(|&s| s < t0).min(xs.len() - 1);
        if t1 <= t0 || k + 1 == xs.len() || t1 <= cum[k] {
            return xs[k];
        }
        let (mut lo, mut sum) = (t0, 0.0);
        while lo < t1 {
            let hi = if k + 1 == xs.len() {
                t1
            } else {
                cum[k].min(t1)
            };
            sum += xs[k] * (hi - lo);
            lo = hi;
            k += 1;
            if k == xs.len() {
                break;
            }
        }
        sum / (t1 - t0)
    }

    /// `F_mu^-1 o F_rho` on the cells of a piecewise-constant `rho` with the
    /// given cell masses. Atomic targets get the average over each cell's
    /// quantile range, so a cell holding a kink carries the mixed slope.
    pub(crate) fn transport_map(&self, masses: &[f64]) -> Vec<f64> {
        match self {
            Target::Atoms { xs, cum } => {
                let (lower, _) = edge_cumulatives(masses);
                (0..masses.len())
                    .map(|i| Self::atom_average(xs, cum, lower[i], lower[i + 1]))
                    .collect()
            }
            _ => {
                let (c, u) = center_cumulatives(masses);
                c.iter()
                    .zip(&u)
                    .map(|(c, u)| self.quantile(*c, *u))
                    .collect()
            }
        }
    }

    /// Sup-CDF distance between the target and the image of `rho` under the
    /// slopes `dphi`.
    ///
    /// For atoms, slopes within `ATOM_MATCH` (relative to the gap) of an atom
    /// count as that atom. A single cell whose slope falls strictly inside a
    /// gap holds the kink of `phi` and is split between the two neighbouring
    /// atoms in the proportion that reproduces its slope; several such cells
    /// put mass inside the gap and are taken literally. Density targets
    /// compare CDFs at cell centers.
    pub(crate) fn residual(&self, dphi: &[f64], masses: &[f64]) -> f64 {
        match self {
            Target::Atoms { xs, cum } => {
                let mut worst: f64 = 0.0;
                for k in 0..xs.len() - 1 {
                    let (a, b) = (xs[k], xs[k + 1]);
                    let eps = ATOM_MATCH * (b - a);
                    let (mut below, mut inside, mut count, mut split) = (0.0, 0.0, 0, 0.0);
                    for (&s, &m) in dphi.iter().zip(masses) {
                        if s <= a + eps {
                            below += m;
                        } else if s < b - eps {
                            inside += m;
                            count += 1;
                            split = m * (b - s) / (b - a);
                        }
                    }
                    let d = if count <= 1 {
                        (below + split - cum[k]).abs()
                    } else {
                        (below - cum[k]).abs().max((below + inside - cum[k]).abs())
                    };
                    worst = worst.max(d);
                }
                worst
            }
            _ => {
                let (c, u) = center_cumulatives(masses);
                let mut worst: f64 = 0.0;
                for (i, &s) in dphi.iter().enumerate() {
                    let d = if c[i] <= 0.5 {
                        (self.cdf(s) - c[i]).abs()
                    } else {
                        (self.survival(s) - u[i]).abs()
                    };
                    worst = worst.max(d);
                }
                worst
            }
        }
    }

    fn cdf(&self, y: f64) -> f64 {
        match self {
            Target::Atoms { xs, cum } => {
                let k = xs.partition_point(|&x| x <= y);
                if k == 0 {
                    0.0
                } else {
                    cum[k - 1]
                }
            }
            Target::Grid { q, .. } => q.cdf(y),
            Target::Normal { mean, sd } => Normal::standard().cdf((y - mean) / sd),
        }
    }

    fn survival(&self, y: f64) -> f64 {
        match self {
            Target::Normal { mean, sd } => Normal::standard().cdf((mean - y) / sd),
            _ => 1.0 - self.cdf(y),
        }
    }

    /// Density at `y`; grid targets are interpolated linearly between centers.
    pub(crate) fn density(&self, y: f64) -> Option<f64> {
        match self {
            Target::Atoms { .. } => None,
            Target::Normal { mean, sd } => Some(Normal::new(*mean, *sd).ok()?.pdf(y)),
            Target::Grid { density, .. } => {
                let g = density.grid();
                let v = density.values();
                if y < g.lower()[0] || y > g.upper()[0] {
                    return Some(0.0);
                }
                let s = (y - g.lower()[0]) / g.step(0) - 0.5;
                let n = v.len();
                Some(if s <= 0.0 {
                    v[0]
                } else if s >= (n - 1) as f64 {
                    v[n - 1]
                } else {
                    let j = s.floor() as usize;
                    let w = s - j as f64;
                    v[j] * (1.0 - w) + v[j + 1] * w
                })
            }
        }
    }

    /// Differential entropy `S(mu)` when the target has a density.
    pub(crate) fn entropy(&self) -> Option<CostEstimate> {
        match self {
            Target::Atoms { .. } => None,
            Target::Normal { sd, .. } => Some(CostEstimate {
                value: 0.5 * (2.0 * PI * std::f64::consts::E * sd * sd).ln(),
                error: 0.0,
            }),
            Target::Grid { density, .. } => Some(differential_entropy(density)),
        }
    }

    /// Quantile function used inside the variational functional.
    fn w2_quantile(&self) -> Result<Quantile1d> {
        match self {
            Target::Atoms { xs, cum } => {
                let ws: Vec<f64> = cum
                    .iter()
                    .scan(0.0, |prev, c| {
                        let w = c - *prev;
                        *prev = *c;
                        Some(w)
                    })
                    .collect();
                Quantile1d::from_discrete(&crate::measures::DiscreteMeasure::new(
                    1,
                    xs.clone(),
                    ws,
                )?)
            }
            Target::Grid { q, .. } => Ok(q.clone()),
            Target::Normal { mean, sd } => {
                let g = crate::measures::GaussianParams::scalar(*mean, sd * sd)?;
                Quantile1d::from_grid(&discretize_gaussian(&g, 1 << 15, 12.0)?)
            }
        }
    }

    /// Half-width of the default solver domain. Slopes of the solution reach
    /// the outer quantiles of the target, so `rho` decays at least like
    /// `e^{-s |x|}` with `s` the smaller of `|F^-1(0.01)|` and `|F^-1(0.99)|`.
    fn default_half_width(&self) -> f64 {
        let s = self
            .quantile(0.01, 0.99)
            .abs()
            .min(self.quantile(0.99, 0.01).abs());
        40.0 / s.max(0.1)
    }
}

/// Cumulative masses at cell edges from the left and from the right.
fn edge_cumulatives(masses: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = masses.len();
    let mut lower = vec![0.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    for i in 0..n {
        lower[i + 1] = lower[i] + masses[i];
    }
    for i in (0..n).rev() {
        upper[i] = upper[i + 1] + masses[i];
    }
    (lower, upper)
}

/// Mass below and above each cell center of a piecewise-smooth density given
/// by its cell masses. The half-cell sums carry an `O(h^2)` bias
/// `(h^2 / 12) rho'`, removed here with `rho'` from central differences.
fn center_cumulatives(masses: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = masses.len();
    let (lower, upper) = edge_cumulatives(masses);
    let slope = derivative_1d(masses, 1.0);
    let c = (0..n)
        .map(|i| (lower[i] + 0.5 * masses[i] - slope[i] / 12.0).clamp(0.0, 1.0))
        .collect();
    let u = (0..n)
        .map(|i| (upper[i + 1] + 0.5 * masses[i] + slope[i] / 12.0).clamp(0.0, 1.0))
        .collect();
    (c, u)
}

/// Trapezoidal antiderivative of the slopes, anchored at the middle of the
/// domain, plus the constant that makes `e^{-phi}` a probability density.
pub(crate) fn integrate(dphi: &[f64], h: f64) -> Vec<f64> {
    let n = dphi.len();
    let mid = n / 2;
    let mut phi = vec![0.0; n];
    for i in mid + 1..n {
        phi[i] = phi[i - 1] + 0.5 * h * (dphi[i - 1] + dphi[i]);
    }
    for i in (0..mid).rev() {
        phi[i] = phi[i + 1] - 0.5 * h * (dphi[i] + dphi[i + 1]);
    }
    normalize(&mut phi, h);
    phi
}

/// Adds the constant making `sum e^{-phi} h = 1`.
pub(crate) fn normalize(phi: &mut [f64], h: f64) {
    let m = phi.iter().cloned().fold(f64::INFINITY, f64::min);
    let c = -m + (phi.iter().map(|p| (m - p).exp()).sum::<f64>() * h).ln();
    phi.iter_mut().for_each(|p| *p += c);
}

fn masses_of(phi: &[f64], h: f64) -> Vec<f64> {
    let m: Vec<f64> = phi.iter().map(|p| (-p).exp() * h).collect();
    let total: f64 = m.iter().sum();
    m.into_iter().map(|v| v / total).collect()
}

/// Where the slopes live. Density targets use slopes at cell centers.
/// Atomic targets use slopes on the intervals between centers, so that `phi`
/// is piecewise linear, `e^{-phi}` has exact interval masses `M_j` and
/// `sum M_j phi'_j` telescopes to boundary terms. Without that identity the
/// discrete problem has no fixed point and the translation mode drifts.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Scheme {
    Centers,
    Intervals,
}

impl Scheme {
    fn of(t: &Target) -> Self {
        if t.has_density() {
            Scheme::Centers
        } else {
            Scheme::Intervals
        }
    }

    fn start(self, grid: &Grid) -> Vec<f64> {
        let xs = grid.axis_centers(0);
        match self {
            Scheme::Centers => xs,
            Scheme::Intervals => xs.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
        }
    }

    fn integrate(self, slopes: &[f64], h: f64) -> Vec<f64> {
        match self {
            Scheme::Centers => integrate(slopes, h),
            Scheme::Intervals => {
                let n = slopes.len() + 1;
                let mid = n / 2;
                let mut phi = vec![0.0; n];
                for i in mid + 1..n {
                    phi[i] = phi[i - 1] + h * slopes[i - 1];
                }
                for i in (0..mid).rev() {
                    phi[i] = phi[i + 1] - h * slopes[i];
                }
                normalize(&mut phi, h);
                phi
            }
        }
    }

    fn masses(self, phi: &[f64], slopes: &[f64], h: f64) -> Vec<f64> {
        match self {
            Scheme::Centers => masses_of(phi, h),
            Scheme::Intervals => {
                // int over [x_j, x_j + h] of e^{-phi_j - s (x - x_j)}
                let m: Vec<f64> = phi
                    .iter()
                    .zip(slopes)
                    .map(|(p, s)| {
                        let z = h * s;
                        let e = if z.abs() < 1e-12 {
                            1.0 - 0.5 * z
                        } else {
                            -(-z).exp_m1() / z
                        };
                        (-p).exp() * h * e
                    })
                    .collect();
                let total: f64 = m.iter().sum();
                m.into_iter().map(|v| v / total).collect()
            }
        }
    }

    /// Slopes at the cell centers.
    fn at_centers(self, slopes: &[f64]) -> Vec<f64> {
        match self {
            Scheme::Centers => slopes.to_vec(),
            Scheme::Intervals => {
                let n = slopes.len() + 1;
                (0..n)
                    .map(
                        |i| match (i.checked_sub(1).map(|j| slopes[j]), slopes.get(i)) {
                            (Some(a), Some(b)) => 0.5 * (a + b),
                            (Some(a), None) => a,
                            (None, Some(b)) => *b,
                            (None, None) => 0.0,
                        },
                    )
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentMapConfig {
    /// Grid points of the solution.
    pub n: usize,
    /// Half-width of the domain `[-L, L]`; chosen from the target when `None`.
    pub half_width: Option<f64>,
    /// Sup-CDF pushforward tolerance.
    pub tol: f64,
    /// Weight of the new slopes in the damped update.
    pub damping: f64,
    pub max_iterations: usize,
    pub variational_iterations: usize,
    /// L1 distance between `rho` and its image under one undamped step at
    /// which the variational phase stops.
    pub variational_tol: f64,
}

impl Default for MomentMapConfig {
    fn default() -> Self {
        Self {
            n: 8192,
            half_width: None,
            tol: 1e-6,
            damping: 0.5,
            max_iterations: 500,
            variational_iterations: 500,
            variational_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    FixedPoint,
    Variational,
    /// Built from a given potential rather than solved for.
    Given,
}

impl MomentMethod {
    pub fn name(self) -> &'static str {
        match self {
            MomentMethod::FixedPoint => "fixed_point",
            MomentMethod::Variational => "variational",
            MomentMethod::Given => "given",
        }
    }
}

/// Convex `phi` on a line grid with `(phi')#(e^{-phi} dx) = mu`, gauged so that
/// `e^{-phi}` has unit mass and zero barycenter.
#[derive(Debug, Clone)]
pub struct MomentMapSolution {
    pub phi: ConvexPotential,
    /// Slopes of `phi` at the cell centers.
    pub dphi: Vec<f64>,
    pub rho: GridDensity,
    pub target: Law,
    pub pushforward_residual: f64,
    /// L1 Monge–Ampère residual; `None` for atomic targets.
    pub ma_residual: Option<f64>,
    pub method: MomentMethod,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
}

impl MomentMapSolution {
    /// Solution data for potential values and center slopes on `grid`; `phi`
    /// is renormalized and the grid translated so that `rho` is centered.
    fn assemble(
        grid: &Grid,
        phi: &[f64],
        dphi: Vec<f64>,
        target: &Law,
        residual: Option<f64>,
    ) -> Result<Self> {
        if grid.dim() != 1 || phi.len() != grid.len() || dphi.len() != grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: grid.len(),
                got: phi.len(),
            });
        }
        let t = Target::from_law(target)?;
        let h = grid.step(0);
        let mut phi = phi.to_vec();
        normalize(&mut phi, h);
        let masses = masses_of(&phi, h);
        let b: f64 = grid
            .axis_centers(0)
            .iter()
            .zip(&masses)
            .map(|(x, m)| x * m)
            .sum();
        let grid = grid.translated(&[-b]);
        let neg: Vec<f64> = phi.iter().map(|p| -p).collect();
        let rho = GridDensity::from_log_values(grid.clone(), &neg)?;
        let pushforward_residual = residual.unwrap_or_else(|| t.residual(&dphi, &masses));
        let ma_residual = if t.has_density() {
            Some(ma_l1(&t, rho.values(), &dphi, h))
        } else {
            None
        };
        Ok(Self {
            phi: ConvexPotential::new(GridFunction::new(grid, phi)?)?,
            dphi,
            rho,
            target: target.clone(),
            pushforward_residual,
            ma_residual,
            method: MomentMethod::Given,
            iterations: 0,
            residual_history: Vec::new(),
        })
    }

    /// Solution data for a potential. Slopes are central differences for
    /// density targets and interval differences for atomic ones.
    pub fn from_potential(phi: &GridFunction, target: &Law) -> Result<Self> {
        let t = Target::from_law(target)?;
        let h = phi.grid().step(0);
        let mut v = phi.values().to_vec();
        normalize(&mut v, h);
        match Scheme::of(&t) {
            Scheme::Centers => Self::assemble(phi.grid(), &v, derivative_1d(&v, h), target, None),
            Scheme::Intervals => {
                let d: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]) / h).collect();
                let r = t.residual(&d, &Scheme::Intervals.masses(&v, &d, h));
                Self::assemble(
                    phi.grid(),
                    &v,
                    Scheme::Intervals.at_centers(&d),
                    target,
                    Some(r),
                )
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    /// `phi` and `rho` in the grid text format, then one summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# phi\n");
        out.push_str(&self.phi.function().to_text());
        out.push_str("# rho\n");
        out.push_str(&self.rho.to_text());
        out.push_str(&format!(
            "# residuals method={} iterations={} pushforward={} ma={}\n",
            self.method.name(),
            self.iterations,
            fmt17(self.pushforward_residual),
            self.ma_residual.map(fmt17).unwrap_or_else(|| "none".into())
        ));
        out
    }
}

/// `sum |rho - f(phi') phi''| h` over significant points, `phi''` by central
/// differences of the slopes.
pub(crate) fn ma_l1(t: &Target, rho: &[f64], dphi: &[f64], h: f64) -> f64 {
    let d2 = derivative_1d(dphi, h);
    let peak = rho.iter().cloned().fold(0.0, f64::max);
    rho.iter()
        .zip(dphi)
        .zip(&d2)
        .filter(|((r, _), _)| **r >= SIGNIFICANCE * peak)
        .map(|((r, s), dd)| (r - t.density(*s).unwrap_or(0.0) * dd).abs())
        .sum::<f64>()
        * h
}

fn setup(mu: &Law, cfg: &MomentMapConfig) -> Result<(Target, Grid)> {
    let target = Target::from_law(mu)?;
    let tol = centering_tol(mu);
    let b = norm(&mu.barycenter());
    if b > tol {
        return Err(LabError::NotCentered { norm: b, tol });
    }
    let l = cfg
        .half_width
        .unwrap_or_else(|| target.default_half_width());
    Ok((target, Grid::line(-l, l, cfg.n)?))
}

fn history_tail(h: &[f64]) -> String {
    let tail: Vec<String> = h
        .iter()
        .rev()
        .take(5)
        .rev()
        .map(|r| format!("{r:.3e}"))
        .collect();
    format!("[{}]", tail.join(", "))
}

/// Damped iteration `phi'_{k+1} = (1 - a) phi'_k + a F_mu^-1 o F_{rho_k}`
/// started from the standard Gaussian.
pub fn solve_fixed_point(mu: &Law, cfg: &MomentMapConfig) -> Result<MomentMapSolution> {
    let (target, grid) = setup(mu, cfg)?;
    let scheme = Scheme::of(&target);
    let h = grid.step(0);
    let mut slopes = scheme.start(&grid);
    let mut history = Vec::new();
    for k in 0..cfg.max_iterations {
        let phi = scheme.integrate(&slopes, h);
        let masses = scheme.masses(&phi, &slopes, h);
        let r = target.residual(&slopes, &masses);
        history.push(r);
        if r < cfg.tol {
            let mut s =
                MomentMapSolution::assemble(&grid, &phi, scheme.at_centers(&slopes), mu, Some(r))?;
            s.method = MomentMethod::FixedPoint;
            s.iterations = k;
            s.residual_history = history;
            return Ok(s);
        }
        let psi = target.transport_map(&masses);
        for (d, p) in slopes.iter_mut().zip(psi) {
            *d = (1.0 - cfg.damping) * *d + cfg.damping * p;
        }
    }
    Err(LabError::MomentMap(format!(
        "fixed point: residual history {} after {} iterations",
        history_tail(&history),
        cfg.max_iterations
    )))
}

/// `Ent_gamma(rho) - W2(mu, rho)^2 / 2` for `rho = e^{-phi}` on the centers `xs`.
fn functional(q: &Quantile1d, grid: &Grid, phi: &[f64]) -> Result<f64> {
    let h = grid.step(0);
    let xs = grid.axis_centers(0);
    let masses = masses_of(phi, h);
    let ent: f64 = masses
        .iter()
        .zip(phi)
        .zip(&xs)
        .map(|((m, p), x)| m * (-p + 0.5 * x * x))
        .sum::<f64>()
        + 0.5 * (2.0 * PI).ln();
    let neg: Vec<f64> = phi.iter().map(|p| -p).collect();
    let rho = GridDensity::from_log_values(grid.clone(), &neg)?;
    Ok(ent - 0.5 * quantile_w2_sq(q, &Quantile1d::from_grid(&rho)?))
}

/// Minimizes `Ent_gamma(rho) - W2(mu, rho)^2 / 2` over densities on the
/// solver grid. Each step moves `log rho` towards the log-density whose
/// slopes are the current optimal map, with backtracking on the functional;
/// renormalization is the projection back to probability densities. Stops
/// when `rho` is within `variational_tol` of its image or the functional
/// stops decreasing. The functional evaluates W2 exactly between piecewise
/// constant quantiles, so its minimizer can sit a discretization error away
/// from the fixed point; the returned pushforward residual is not forced
/// below `tol`.
pub fn solve_variational(mu: &Law, cfg: &MomentMapConfig) -> Result<MomentMapSolution> {
    let (target, grid) = setup(mu, cfg)?;
    let scheme = Scheme::of(&target);
    let h = grid.step(0);
    let q = target.w2_quantile()?;
    let mut slopes = scheme.start(&grid);
    let mut phi = scheme.integrate(&slopes, h);
    let mut j = functional(&q, &grid, &phi)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut map = target.transport_map(&scheme.masses(&phi, &slopes, h));
    while iterations < cfg.variational_iterations {
        let image = scheme.integrate(&map, h);
        let dist: f64 = phi
            .iter()
            .zip(&image)
            .map(|(a, b)| ((-a).exp() - (-b).exp()).abs())
            .sum::<f64>()
            * h;
        history.push(dist);
        if dist < cfg.variational_tol {
            break;
        }
        // a convex combination of log-densities is the same combination of slopes
        let mut accepted = None;
        let mut tau = 1.0;
        while tau >= 1.0 / 64.0 {
            let cand: Vec<f64> = slopes
                .iter()
                .zip(&map)
                .map(|(a, b)| (1.0 - tau) * a + tau * b)
                .collect();
            let cand_phi = scheme.integrate(&cand, h);
            let jc = functional(&q, &grid, &cand_phi)?;
            if jc < j {
                accepted = Some((cand, cand_phi, jc));
                break;
            }
            tau *= 0.5;
        }
        let Some((cand, cand_phi, jc)) = accepted else {
            break;
        };
        let stalled = j - jc <= 1e-15 * (1.0 + j.abs());
        slopes = cand;
        phi = cand_phi;
        j = jc;
        iterations += 1;
        map = target.transport_map(&scheme.masses(&phi, &slopes, h));
        if stalled {
            break;
        }
    }
    let final_phi = scheme.integrate(&map, h);
    let r = target.residual(&map, &scheme.masses(&final_phi, &map, h));
    let mut s =
        MomentMapSolution::assemble(&grid, &final_phi, scheme.at_centers(&map), mu, Some(r))?;
    s.method = MomentMethod::Variational;
    s.iterations = iterations;
    s.residual_history = history;
    Ok(s)
}

/// Fixed-point iteration, then the variational phase if it does not converge.
pub fn solve_moment_map_with(mu: &Law, cfg: &MomentMapConfig) -> Result<MomentMapSolution> {
    match solve_fixed_point(mu, cfg) {
        Err(LabError::MomentMap(first)) => {
            let s = solve_variational(mu, cfg)?;
            if s.pushforward_residual <= cfg.tol {
                Ok(s)
            } else {
                Err(LabError::MomentMap(format!(
                    "{first}; variational phase stopped at pushforward residual {:.3e} with step history {}",
                    s.pushforward_residual,
                    history_tail(&s.residual_history)
                )))
            }
        }
        other => other,
    }
}

pub fn solve_moment_map_1d(mu: &Law, tol: f64) -> Result<MomentMapSolution> {
    solve_moment_map_with(
        mu,
        &MomentMapConfig {
            tol,
            ..Default::default()
        },
    )
}

/// `Ent_gamma(rho) - W2(mu, rho)^2 / 2`, the functional minimized by `rho`.
pub fn santambrogio_functional(mu: &Law, rho: &GridDensity) -> Result<f64> {
    let rho = Law::Grid(rho.clone());
    Ok(crate::calculus::law_rel_entropy(&rho)?.value
        - 0.5 * crate::transport::w2_sq(mu, &rho)?.value)
}
