use crate::error::{LabError, Result};
use crate::measures::{Grid, GridFunction};

/// Vertices of the lower convex hull of the finite samples `(xs[i], fs[i])`,
/// `xs` strictly increasing.
pub fn lower_hull(xs: &[f64], fs: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for i in (0..xs.len()).filter(|&i| fs[i].is_finite()) {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b when it lies on or above the chord from a to i
            let cross = (xs[b] - xs[a]) * (fs[i] - fs[a]) - (fs[b] - fs[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    hull
}

/// Slopes of the consecutive hull edges (increasing).
pub fn hull_slopes(xs: &[f64], fs: &[f64]) -> Vec<f64> {
    let h = lower_hull(xs, fs);
    h.windows(2)
        .map(|w| (fs[w[1]] - fs[w[0]]) / (xs[w[1]] - xs[w[0]]))
        .collect()
}

/// `max_i (xs[i] y - fs[i])` at every `y` of the increasing sequence `ys`,
/// by a monotone scan over the hull. Returns `-inf` everywhere when no sample
/// is finite.
pub fn conjugate_1d(xs: &[f64], fs: &[f64], ys: &[f64]) -> Vec<f64> {
    let h = lower_hull(xs, fs);
    if h.is_empty() {
        return vec![f64::NEG_INFINITY; ys.len()];
    }
    let mut k = 0;
    ys.iter()
        .map(|&y| {
            while k + 1 < h.len() && xs[h[k + 1]] * y - fs[h[k + 1]] >= xs[h[k]] * y - fs[h[k]] {
                k += 1;
            }
            xs[h[k]] * y - fs[h[k]]
        })
        .collect()
}

/// Values of the discrete convex envelope (hull interpolation) at the sample
/// points; `+inf` outside the hull's span.
pub fn convex_envelope_1d(xs: &[f64], fs: &[f64]) -> Vec<f64> {
    let h = lower_hull(xs, fs);
    let mut out = vec![f64::INFINITY; xs.len()];
    if h.is_empty() {
        return out;
    }
    let mut k = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x < xs[h[0]] || x > xs[*h.last().unwrap()] {
            continue;
        }
        while k + 1 < h.len() && xs[h[k + 1]] < x {
            k += 1;
        }
        out[i] = if k + 1 == h.len() || x == xs[h[k]] {
            fs[h[k]]
        } else {
            let (a, b) = (h[k], h[k + 1]);
            fs[a] + (fs[b] - fs[a]) * (x - xs[a]) / (xs[b] - xs[a])
        };
    }
    out
}

/// Conjugate of samples on a grid line. Where the effective domain reaches an
/// end of the grid the true function continues past it, so slopes beyond the
/// last attained one are unknown and get `+inf`.
fn conjugate_line(xs: &[f64], fs: &[f64], ys: &[f64], mask: bool) -> Vec<f64> {
    let mut out = conjugate_1d(xs, fs, ys);
    if !mask {
        return out;
    }
    let h = lower_hull(xs, fs);
    if h.len() < 2 {
        if let Some(&only) = h.first() {
            // a single sample at the grid edge: nothing is known on that side
            for (o, y) in out.iter_mut().zip(ys) {
                if (only == 0 && *y < 0.0) || (only + 1 == xs.len() && *y > 0.0) {
                    *o = f64::INFINITY;
                }
            }
        }
        return out;
    }
    let slope = |a: usize, b: usize| (fs[b] - fs[a]) / (xs[b] - xs[a]);
    let low = slope(h[0], h[1]);
    let high = slope(h[h.len() - 2], h[h.len() - 1]);
    let open_left = h[0] == 0;
    let open_right = *h.last().unwrap() == xs.len() - 1;
    for (o, &y) in out.iter_mut().zip(ys) {
        if (open_left && y < low) || (open_right && y > high) {
            *o = f64::INFINITY;
        }
    }
    out
}

/// Default output grid: the attained slope range padded by 10% per side, with
/// the input's point count; falls back to the input extent when the range is
/// degenerate.
pub fn default_conjugate_grid(f: &GridFunction) -> Result<Grid> {
    let g = f.grid();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for axis in 0..g.dim() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for line in lines(g, axis) {
            let xs: Vec<f64> = line.iter().map(|&k| g.point(k)[axis]).collect();
            let fs: Vec<f64> = line.iter().map(|&k| f.values()[k]).collect();
            if let (Some(a), Some(b)) =
                (hull_slopes(&xs, &fs).first(), hull_slopes(&xs, &fs).last())
            {
                lo = lo.min(*a);
                hi = hi.max(*b);
            }
        }
        if !(hi > lo) {
            lo = g.lower()[axis];
            hi = g.upper()[axis];
        }
        let pad = 0.1 * (hi - lo);
        lower.push(lo - pad);
        upper.push(hi + pad);
    }
    Grid::new(lower, upper, g.shape().to_vec())
}

/// Flat indices of every grid line along `axis`.
fn lines(g: &Grid, axis: usize) -> Vec<Vec<usize>> {
    if g.dim() == 1 {
        return vec![(0..g.len()).collect()];
    }
    let (n0, n1) = (g.n(0), g.n(1));
    if axis == 0 {
        (0..n1)
            .map(|j| (0..n0).map(|i| i * n1 + j).collect())
            .collect()
    } else {
        (0..n0)
            .map(|i| (0..n1).map(|j| i * n1 + j).collect())
            .collect()
    }
}

/// `f*(y) = sup_x (x.y - f(x))` over the grid samples of `f`, evaluated on
/// `out` (or on [`default_conjugate_grid`]). In 2D the supremum is taken
/// axis 0 first, then axis 1. Slopes that the truncated grid cannot resolve
/// are masked with `+inf`.
pub fn legendre(f: &GridFunction, out: Option<&Grid>) -> Result<GridFunction> {
    legendre_impl(f, out, true)
}

/// The plain discrete supremum over the samples, without truncation masking.
pub fn legendre_discrete(f: &GridFunction, out: &Grid) -> Result<GridFunction> {
    legendre_impl(f, Some(out), false)
}

fn legendre_impl(f: &GridFunction, out: Option<&Grid>, mask: bool) -> Result<GridFunction> {
    if f.domain_size() == 0 {
        return Err(LabError::EmptyDomain);
    }
    let out = match out {
        Some(g) => g.clone(),
        None => default_conjugate_grid(f)?,
    };
    let g = f.grid();
    if out.dim() != g.dim() {
        return Err(LabError::DimensionMismatch {
            expected: g.dim(),
            got: out.dim(),
        });
    }
    if g.dim() == 1 {
        let xs = g.axis_centers(0);
        let ys = out.axis_centers(0);
        return GridFunction::new(out, conjugate_line(&xs, f.values(), &ys, mask));
    }
    let (n0, n1) = (g.n(0), g.n(1));
    let (m0, m1) = (out.n(0), out.n(1));
    let x0 = g.axis_centers(0);
    let x1 = g.axis_centers(1);
    let y0 = out.axis_centers(0);
    let y1 = out.axis_centers(1);
    // h[a][j] = sup_{x0} (x0 y0_a - f(x0, x1_j))
    let mut h = vec![vec![f64::NEG_INFINITY; n1]; m0];
    for j in 0..n1 {
        let col: Vec<f64> = (0..n0).map(|i| f.values()[i * n1 + j]).collect();
        for (a, v) in conjugate_line(&x0, &col, &y0, mask).into_iter().enumerate() {
            h[a][j] = v;
        }
    }
    let mut values = vec![0.0; m0 * m1];
    for a in 0..m0 {
        let row = &h[a];
        if row.iter().any(|v| *v == f64::INFINITY) {
            values[a * m1..(a + 1) * m1].fill(f64::INFINITY);
            continue;
        }
        // sup_{x1} (x1 y1 + h) is the conjugate of -h; empty columns drop out
        let neg: Vec<f64> = row
            .iter()
            .map(|v| if v.is_finite() { -v } else { f64::INFINITY })
            .collect();
        values[a * m1..(a + 1) * m1].copy_from_slice(&conjugate_line(&x1, &neg, &y1, mask));
    }
    GridFunction::new(out, values)
}

/// The discrete conjugate taken axis 1 first; used to check order independence.
pub fn legendre_discrete_axis1_first(f: &GridFunction, out: &Grid) -> Result<GridFunction> {
    let g = f.grid();
    let swap = |grid: &Grid| {
        Grid::new(
            vec![grid.lower()[1], grid.lower()[0]],
            vec![grid.upper()[1], grid.upper()[0]],
            vec![grid.n(1), grid.n(0)],
        )
    };
    let (n0, n1) = (g.n(0), g.n(1));
    let transposed: Vec<f64> = (0..n0 * n1)
        .map(|k| f.values()[(k % n0) * n1 + k / n0])
        .collect();
    let ft = GridFunction::new(swap(g)?, transposed)?;
    let r = legendre_discrete(&ft, &swap(out)?)?;
    let (m0, m1) = (out.n(0), out.n(1));
    let back: Vec<f64> = (0..m0 * m1)
        .map(|k| r.values()[(k % m1) * m0 + k / m1])
        .collect();
    GridFunction::new(out.clone(), back)
}
