//! One-dimensional diagonal-norm SBP operators on Legendre-Gauss-Lobatto nodes.
//!
//! An operator `D = P^{-1} Q` on `[a, b]` differentiates polynomials of degree
//! `n_nodes - 1` exactly, `P` is the diagonal LGL quadrature, and
//! `Q + Q^T = E = diag(-1, 0, ..., 0, 1)`.

use faer::Mat;

use crate::error::{invalid, Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

/// Legendre-Gauss-Lobatto nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LglRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LglRule {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

/// Legendre polynomials `P_{deg-1}(x)` and `P_deg(x)` by the three-term recurrence.
fn legendre_pair(deg: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (1.0, x);
    if deg == 0 {
        return (0.0, 1.0);
    }
    for k in 2..=deg {
        let next = ((2 * k - 1) as f64 * x * cur - (k - 1) as f64 * prev) / k as f64;
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Computes the `n_nodes`-point LGL rule.
///
/// Nodes are the roots of `(1 - x^2) P'_{n-1}(x)`, found by Newton iteration
/// from Chebyshev-Gauss-Lobatto points; weights are
/// `2 / (n (n - 1) P_{n-1}(x_i)^2)`.
pub fn lgl_rule(n_nodes: usize) -> Result<LglRule> {
    if n_nodes < 2 {
        return invalid(format!("LGL rule needs at least 2 nodes, got {n_nodes}"));
    }
    let deg = n_nodes - 1;
    let mut x: Vec<f64> = (0..n_nodes)
        .map(|i| -(std::f64::consts::PI * i as f64 / deg as f64).cos())
        .collect();
    x[0] = -1.0;
    x[deg] = 1.0;

    // Interior nodes only; the endpoints are fixed points of the iteration.
    for node in x.iter_mut().take(deg).skip(1) {
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITERS {
            let (p_prev, p_deg) = legendre_pair(deg, *node);
            let step = (*node * p_deg - p_prev) / (n_nodes as f64 * p_deg);
            let next = (*node - step).clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON);
            let delta = (next - *node).abs();
            *node = next;
            if delta <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NumericalFailure(format!(
                "LGL Newton iteration did not converge for n_nodes = {n_nodes}"
            )));
        }
    }

    // Enforce exact symmetry about the origin.
    let nodes: Vec<f64> = (0..n_nodes).map(|i| 0.5 * (x[i] - x[deg - i])).collect();
    let scale = 2.0 / (n_nodes * deg) as f64;
    let weights: Vec<f64> = nodes
        .iter()
        .map(|&xi| {
            let (_, p) = legendre_pair(deg, xi);
            scale / (p * p)
        })
        .collect();
    Ok(LglRule { nodes, weights })
}

/// A diagonal-norm SBP first-derivative operator on an interval.
#[derive(Debug, Clone)]
pub struct SbpOperator1D {
    pub interval: (f64, f64),
    /// Node coordinates mapped to `interval`.
    pub nodes: Vec<f64>,
    pub d: Mat<f64>,
    /// Diagonal of the norm matrix `P`.
    pub p: Vec<f64>,
    pub q: Mat<f64>,
    /// Polynomial degree differentiated exactly.
    pub degree: usize,
}

impl SbpOperator1D {
    pub fn n_nodes(&self) -> usize {
        self.p.len()
    }

    pub fn length(&self) -> f64 {
        self.interval.1 - self.interval.0
    }

    /// First diagonal entry of `P`.
    pub fn p_first(&self) -> f64 {
        self.p[0]
    }

    /// Last diagonal entry of `P`.
    pub fn p_last(&self) -> f64 {
        self.p[self.p.len() - 1]
    }

    /// Boundary matrix `E = diag(-1, 0, ..., 0, 1)`.
    pub fn boundary_matrix(&self) -> Mat<f64> {
        let n = self.n_nodes();
        let mut e = Mat::zeros(n, n);
        e[(0, 0)] = -1.0;
        e[(n - 1, n - 1)] = 1.0;
        e
    }
}

/// Barycentric differentiation matrix on arbitrary distinct nodes, with the
/// diagonal set by the negative row sum.
fn differentiation_matrix(x: &[f64]) -> Mat<f64> {
    let n = x.len();
    let bary: Vec<f64> = (0..n)
        .map(|j| {
            let prod: f64 = (0..n).filter(|&k| k != j).map(|k| x[j] - x[k]).product();
            1.0 / prod
        })
        .collect();
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (x[i] - x[j]);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    d
}

/// Builds the LGL SBP operator with `n_nodes` nodes on `interval`.
pub fn build_sbp_1d(n_nodes: usize, interval: (f64, f64)) -> Result<SbpOperator1D> {
    let (a, b) = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return invalid(format!("interval must satisfy a < b, got [{a}, {b}]"));
    }
    let rule = lgl_rule(n_nodes)?;
    let half = 0.5 * (b - a);
    let d_ref = differentiation_matrix(&rule.nodes);
    let d = Mat::from_fn(n_nodes, n_nodes, |i, j| d_ref[(i, j)] / half);
    let p: Vec<f64> = rule.weights.iter().map(|w| w * half).collect();
    let q = Mat::from_fn(n_nodes, n_nodes, |i, j| p[i] * d[(i, j)]);
    let nodes = rule.nodes.iter().map(|xi| a + (xi + 1.0) * half).collect();
    Ok(SbpOperator1D {
        interval,
        nodes,
        d,
        p,
        q,
        degree: n_nodes - 1,
    })
}

/// Maximum violation of each SBP property.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbpReport {
    /// `max_s max_i |(D x^s)_i - s x_i^{s-1}|` over `0 <= s <= degree`.
    pub accuracy: f64,
    /// `max |Q + Q^T - E|`.
    pub sbp_identity: f64,
    /// Zero when every diagonal entry of `P` is positive, otherwise the most
    /// negative entry's magnitude.
    pub spd: f64,
}

impl SbpReport {
    pub fn max(&self) -> f64 {
        self.accuracy.max(self.sbp_identity).max(self.spd)
    }
}

pub fn verify_sbp(op: &SbpOperator1D) -> SbpReport {
    let n = op.n_nodes();
    let x = &op.nodes;

    let mut accuracy = 0.0f64;
    for s in 0..=op.degree {
        for i in 0..n {
            let dxs: f64 = (0..n).map(|j| op.d[(i, j)] * x[j].powi(s as i32)).sum();
            let exact = if s == 0 {
                0.0
            } else {
                s as f64 * x[i].powi(s as i32 - 1)
            };
            accuracy = accuracy.max((dxs - exact).abs());
        }
    }

    let e = op.boundary_matrix();
    let mut sbp_identity = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = op.q[(i, j)] + op.q[(j, i)] - e[(i, j)];
            sbp_identity = sbp_identity.max(v.abs());
        }
    }

    let min_p = op.p.iter().copied().fold(f64::INFINITY, f64::min);
    let spd = if min_p > 0.0 { 0.0 } else { -min_p };
    SbpReport {
        accuracy,
        sbp_identity,
        spd,
    }
}
