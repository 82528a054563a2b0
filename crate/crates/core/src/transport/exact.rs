use std::collections::VecDeque;

use super::{cost_matrix, CostKind, DualPotentials};
use crate::error::{LabError, Result};
use crate::measures::{DiscreteMeasure, TransportPlan};

/// Largest `n * m` accepted by the exact solver.
pub const EXACT_CAPACITY: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub cost: f64,
    pub plan: TransportPlan,
    pub duals: DualPotentials,
    pub pivots: usize,
}

/// Exact optimal transport between two discrete measures.
///
/// The `NegDot` problem has the same optimal plans as the quadratic one, so
/// it is solved as such and only the potentials are converted.
pub fn solve_exact(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    cost_kind: CostKind,
) -> Result<ExactSolution> {
    if mu.dim() != nu.dim() {
        return Err(LabError::DimensionMismatch {
            expected: mu.dim(),
            got: nu.dim(),
        });
    }
    let (n, m) = (mu.len(), nu.len());
    if n * m > EXACT_CAPACITY {
        return Err(LabError::Capacity {
            size: n * m,
            limit: EXACT_CAPACITY,
        });
    }
    let c = cost_matrix(mu, nu, CostKind::Quadratic);
    let lp = transportation_simplex(mu.weights(), nu.weights(), &c)?;
    let plan = TransportPlan::new(mu.clone(), nu.clone(), lp.flow)?;
    let (f, g) = match cost_kind {
        CostKind::Quadratic => (lp.u, lp.v),
        CostKind::NegDot => {
            let sq = |p: &[f64]| p.iter().map(|x| x * x).sum::<f64>();
            let f = (0..n).map(|i| 0.5 * (lp.u[i] - sq(mu.point(i)))).collect();
            let g = (0..m).map(|j| 0.5 * (lp.v[j] - sq(nu.point(j)))).collect();
            (f, g)
        }
    };
    let cost = plan.cost(|x, y| cost_kind.eval(x, y));
    Ok(ExactSolution {
        cost,
        plan,
        duals: DualPotentials { f, g, cost_kind },
        pivots: lp.pivots,
    })
}

struct LpSolution {
    flow: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    pivots: usize,
}

/// Primal transportation simplex on the dense bipartite graph.
///
/// Nodes `0..n` are sources and `n..n+m` targets; the basis is a spanning tree
/// of `n + m - 1` cells (degenerate cells carry zero flow). Entering cells are
/// chosen by most negative reduced cost, leaving cells by smallest flow, both
/// with ties broken by lowest flat index.
fn transportation_simplex(a: &[f64], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let (n, m) = (a.len(), b.len());
    let mut flow = vec![0.0; n * m];
    let mut basic = vec![false; n * m];
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + m];

    // northwest corner start
    let (mut ra, mut rb) = (a.to_vec(), b.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = ra[i].min(rb[j]).max(0.0);
        flow[i * m + j] = x;
        basic[i * m + j] = true;
        adj[i].push(n + j);
        adj[n + j].push(i);
        ra[i] -= x;
        rb[j] -= x;
        if i == n - 1 && j == m - 1 {
            break;
        }
        if j == m - 1 || (i < n - 1 && ra[i] <= rb[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    // the last cell absorbs rounding residue so every row sums to its weight
    let last = (n - 1) * m + m - 1;
    flow[last] = (flow[last] + ra[n - 1]).max(0.0);

    let scale = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let tol = 1e-13 * (1.0 + scale);
    let limit = 20 * n * m + 10_000;
    let (mut u, mut v) = (vec![0.0; n], vec![0.0; m]);
    let mut pivots = 0;
    loop {
        compute_duals(&adj, c, n, m, &mut u, &mut v);
        let mut best = -tol;
        let mut enter = None;
        for i in 0..n {
            let row = &c[i * m..(i + 1) * m];
            for j in 0..m {
                let r = row[j] - u[i] - v[j];
                if r < best && !basic[i * m + j] {
                    best = r;
                    enter = Some((i, j));
                }
            }
        }
        let Some((ei, ej)) = enter else { break };
        if pivots == limit {
            return Err(LabError::PivotLimit(limit));
        }
        pivots += 1;

        let path = tree_path(&adj, ei, n + ej, n + m);
        // path runs from source ei to target ej; odd-numbered edges lose flow
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (k, w) in path.windows(2).enumerate() {
            if k % 2 == 0 {
                let cell = cell_of(w[0], w[1], n, m);
                let fl = flow[cell];
                if fl < theta || (fl == theta && cell < leave) {
                    theta = fl;
                    leave = cell;
                }
            }
        }
        for (k, w) in path.windows(2).enumerate() {
            let cell = cell_of(w[0], w[1], n, m);
            if k % 2 == 0 {
                flow[cell] = (flow[cell] - theta).max(0.0);
            } else {
                flow[cell] += theta;
            }
        }
        flow[ei * m + ej] = theta;
        flow[leave] = 0.0;
        basic[ei * m + ej] = true;
        basic[leave] = false;
        let (li, lj) = (leave / m, leave % m);
        adj[li].retain(|&x| x != n + lj);
        adj[n + lj].retain(|&x| x != li);
        adj[ei].push(n + ej);
        adj[n + ej].push(ei);
    }
    Ok(LpSolution { flow, u, v, pivots })
}

fn cell_of(p: usize, q: usize, n: usize, m: usize) -> usize {
    let (i, j) = if p < n { (p, q - n) } else { (q, p - n) };
    i * m + j
}

/// `u_i + v_j = c_ij` on the basis tree, with `u_0 = 0`.
fn compute_duals(adj: &[Vec<usize>], c: &[f64], n: usize, m: usize, u: &mut [f64], v: &mut [f64]) {
    let mut seen = vec![false; n + m];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    u[0] = 0.0;
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            if seen[q] {
                continue;
            }
            seen[q] = true;
            if p < n {
                v[q - n] = c[p * m + q - n] - u[p];
            } else {
                u[q] = c[q * m + p - n] - v[p - n];
            }
            queue.push_back(q);
        }
    }
}

/// Node sequence of the unique tree path from `from` to `to`.
fn tree_path(adj: &[Vec<usize>], from: usize, to: usize, nodes: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; nodes];
    parent[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        if p == to {
            break;
        }
        for &q in &adj[p] {
            if parent[q] == usize::MAX {
                parent[q] = p;
                queue.push_back(q);
            }
        }
    }
    let mut path = vec![to];
    let mut p = to;
    while p != from {
        p = parent[p];
        path.push(p);
    }
    path.reverse();
    path
}
