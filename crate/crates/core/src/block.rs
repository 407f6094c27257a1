//! Block-tridiagonal matrices and their direct solution by block LU.

use faer::linalg::solvers::PartialPivLu;
use faer::prelude::*;
use faer::Mat;

use crate::error::{invalid, Error, Result};

/// Square block-tridiagonal matrix with `K` dense `N x N` blocks per row.
///
/// `upper[k]` is block `(k, k+1)` and `lower[k]` is block `(k+1, k)`.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub diag: Vec<Mat<f64>>,
    pub upper: Vec<Mat<f64>>,
    pub lower: Vec<Mat<f64>>,
}

pub(crate) fn mat_vec_add(m: &Mat<f64>, x: &[f64], y: &mut [f64], scale: f64) {
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let a = scale * xj;
        let col = m.col(j);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a * col[i];
        }
    }
}

fn col_from(x: &[f64]) -> Mat<f64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

impl BlockTridiagonal {
    pub fn new(diag: Vec<Mat<f64>>, upper: Vec<Mat<f64>>, lower: Vec<Mat<f64>>) -> Result<Self> {
        let m = Self { diag, upper, lower };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.diag.len();
        if k == 0 {
            return invalid("block system has no blocks");
        }
        if self.upper.len() != k - 1 || self.lower.len() != k - 1 {
            return invalid(format!(
                "{k} diagonal blocks need {} off-diagonal blocks, got {} upper and {} lower",
                k - 1,
                self.upper.len(),
                self.lower.len()
            ));
        }
        let n = self.diag[0].nrows();
        for b in self.diag.iter().chain(&self.upper).chain(&self.lower) {
            if b.nrows() != n || b.ncols() != n {
                return invalid(format!(
                    "block of shape {}x{} in a system of {n}x{n} blocks",
                    b.nrows(),
                    b.ncols()
                ));
            }
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.diag[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.n_blocks() * self.block_size()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return invalid(format!(
                "vector of length {} for system of size {}",
                x.len(),
                self.dim()
            ));
        }
        let n = self.block_size();
        let mut y = vec![0.0; x.len()];
        for k in 0..self.n_blocks() {
            let (yk, xk) = (k * n..(k + 1) * n, &x[k * n..(k + 1) * n]);
            mat_vec_add(&self.diag[k], xk, &mut y[yk.clone()], 1.0);
            if k + 1 < self.n_blocks() {
                mat_vec_add(&self.upper[k], &x[(k + 1) * n..(k + 2) * n], &mut y[yk], 1.0);
                mat_vec_add(&self.lower[k], xk, &mut y[(k + 1) * n..(k + 2) * n], 1.0);
            }
        }
        Ok(y)
    }

    pub fn transpose(&self) -> Self {
        Self {
            diag: self.diag.iter().map(|b| b.transpose().to_owned()).collect(),
            upper: self.lower.iter().map(|b| b.transpose().to_owned()).collect(),
            lower: self.upper.iter().map(|b| b.transpose().to_owned()).collect(),
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.block_size();
        let mut m = Mat::zeros(self.dim(), self.dim());
        let mut put = |r0: usize, c0: usize, b: &Mat<f64>| {
            for j in 0..n {
                for i in 0..n {
                    m[(r0 + i, c0 + j)] = b[(i, j)];
                }
            }
        };
        for k in 0..self.n_blocks() {
            put(k * n, k * n, &self.diag[k]);
            if k + 1 < self.n_blocks() {
                put(k * n, (k + 1) * n, &self.upper[k]);
                put((k + 1) * n, k * n, &self.lower[k]);
            }
        }
        m
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> f64 {
        let n = self.block_size();
        let kk = self.n_blocks();
        let mut best = 0.0f64;
        for k in 0..kk {
            for j in 0..n {
                let mut s: f64 = self.diag[k].col(j).iter().map(|v| v.abs()).sum();
                if k > 0 {
                    s += self.upper[k - 1].col(j).iter().map(|v| v.abs()).sum::<f64>();
                }
                if k + 1 < kk {
                    s += self.lower[k].col(j).iter().map(|v| v.abs()).sum::<f64>();
                }
                best = best.max(s);
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.diag
            .iter()
            .chain(&self.upper)
            .chain(&self.lower)
            .flat_map(|b| (0..b.ncols()).flat_map(move |j| b.col(j).iter().copied().collect::<Vec<_>>()))
            .fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Block LU factorization `S_k = D_k - L_{k-1} S_{k-1}^{-1} U_{k-1}`.
pub struct BlockTriFactorization {
    pivots: Vec<PartialPivLu<f64>>,
    /// `S_k^{-1} U_k` for `k < K - 1`.
    multipliers: Vec<Mat<f64>>,
    lower: Vec<Mat<f64>>,
    block_size: usize,
    transposed: bool,
}

fn factor_pivot(s: &Mat<f64>, element: usize) -> Result<PartialPivLu<f64>> {
    if s.col_iter().any(|c| c.iter().any(|v| !v.is_finite())) {
        return Err(Error::SingularSystem { element });
    }
    let lu = s.partial_piv_lu();
    let u = lu.U();
    let n = u.nrows();
    let scale = (0..n).fold(0.0f64, |a, i| a.max(u[(i, i)].abs()));
    let floor = scale * f64::EPSILON * n as f64;
    for i in 0..n {
        let d = u[(i, i)];
        if !d.is_finite() || d.abs() <= floor || d == 0.0 {
            return Err(Error::SingularSystem { element });
        }
    }
    Ok(lu)
}

/// Factors `A` (or `Aᵀ` when `transpose` is set).
pub fn factor(system: &BlockTridiagonal, transpose: bool) -> Result<BlockTriFactorization> {
    system.validate()?;
    let owned;
    let m = if transpose {
        owned = system.transpose();
        &owned
    } else {
        system
    };
    let kk = m.n_blocks();
    let mut pivots = Vec::with_capacity(kk);
    let mut multipliers = Vec::with_capacity(kk.saturating_sub(1));
    let mut s = m.diag[0].clone();
    for k in 0..kk {
        let lu = factor_pivot(&s, k)?;
        if k + 1 < kk {
            let w = lu.solve(&m.upper[k]);
            s = &m.diag[k + 1] - &m.lower[k] * &w;
            multipliers.push(w);
        }
        pivots.push(lu);
    }
    Ok(BlockTriFactorization {
        pivots,
        multipliers,
        lower: m.lower.clone(),
        block_size: m.block_size(),
        transposed: transpose,
    })
}

impl BlockTriFactorization {
    pub fn n_blocks(&self) -> usize {
        self.pivots.len()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn is_transposed(&self) -> bool {
        self.transposed
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.block_size;
        let kk = self.n_blocks();
        if rhs.len() != n * kk {
            return invalid(format!("rhs of length {} for system of size {}", rhs.len(), n * kk));
        }
        let mut y: Vec<Vec<f64>> = Vec::with_capacity(kk);
        for k in 0..kk {
            let mut r = rhs[k * n..(k + 1) * n].to_vec();
            if k > 0 {
                mat_vec_add(&self.lower[k - 1], &y[k - 1], &mut r, -1.0);
            }
            let sol = self.pivots[k].solve(&col_from(&r));
            y.push((0..n).map(|i| sol[(i, 0)]).collect());
        }
        for k in (0..kk.saturating_sub(1)).rev() {
            let next = y[k + 1].clone();
            mat_vec_add(&self.multipliers[k], &next, &mut y[k], -1.0);
        }
        Ok(y.concat())
    }
}

/// Convenience: factor and solve once.
pub fn solve(system: &BlockTridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    factor(system, false)?.solve(rhs)
}

/// Hager-style estimate of the 1-norm condition number. Singular systems
/// return `f64::INFINITY`.
pub fn condition_estimate(system: &BlockTridiagonal) -> Result<f64> {
    let (fwd, adj) = match (factor(system, false), factor(system, true)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(Error::SingularSystem { .. }), _) | (_, Err(Error::SingularSystem { .. })) => return Ok(f64::INFINITY),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let n = system.dim();
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let y = fwd.solve(&x)?;
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = adj.solve(&xi)?;
        let (j, zmax) = z.iter().enumerate().fold(
            (0, 0.0f64),
            |(bj, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bj, bv) },
        );
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if zmax <= ztx || j == last_j {
            break;
        }
        last_j = j;
        x = vec![0.0; n];
        x[j] = 1.0;
    }
    if !est.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(est * system.norm_1())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_system(k: usize, n: usize) -> BlockTridiagonal {
        BlockTridiagonal::new(
            (0..k).map(|_| Mat::identity(n, n)).collect(),
            (1..k).map(|_| Mat::zeros(n, n)).collect(),
            (1..k).map(|_| Mat::zeros(n, n)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let sys = identity_system(1, 4);
        let b = vec![1.0, -2.0, 3.0, 0.5];
        assert_eq!(solve(&sys, &b).unwrap(), b);
        assert!((condition_estimate(&sys).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let sys = identity_system(3, 2);
        assert!(solve(&sys, &[0.0; 6]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn singular_pivot_names_element() {
        let mut sys = identity_system(3, 2);
        sys.diag[1] = Mat::zeros(2, 2);
        assert_eq!(factor(&sys, false).err(), Some(Error::SingularSystem { element: 1 }));
        assert_eq!(condition_estimate(&sys).unwrap(), f64::INFINITY);
    }

    #[test]
    fn shape_errors() {
        let sys = identity_system(2, 2);
        assert!(factor(&sys, false).unwrap().solve(&[1.0; 3]).is_err());
        assert!(BlockTridiagonal::new(vec![Mat::identity(2, 2)], vec![Mat::zeros(2, 2)], vec![]).is_err());
        assert!(BlockTridiagonal::new(
            vec![Mat::identity(2, 2), Mat::identity(3, 3)],
            vec![Mat::zeros(2, 2)],
            vec![Mat::zeros(2, 2)]
        )
        .is_err());
    }

    #[test]
    fn diagonal_conditioning() {
        let n = 4;
        let k = 3;
        let diag: Vec<Mat<f64>> = (0..k)
            .map(|b| {
                Mat::from_fn(n, n, |i, j| {
                    if i == j {
                        10f64.powf(6.0 * (b * n + i) as f64 / (n * k - 1) as f64)
                    } else {
                        0.0
                    }
                })
            })
            .collect();
        let sys = BlockTridiagonal::new(diag, vec![Mat::zeros(n, n); k - 1], vec![Mat::zeros(n, n); k - 1]).unwrap();
        let c = condition_estimate(&sys).unwrap();
        assert!(c > 1e5 && c < 1e7, "{c}");
    }
}
