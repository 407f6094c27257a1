//! Tensor-product space-time operators for a single element.
//!
//! Unknowns are stacked space-fastest: node `(i, j)` (spatial node `i`, time
//! level `j`) lives at `j * (N_x + 1) + i`, which matches the Kronecker factor
//! order `time ⊗ space`.

use faer::Mat;

use crate::error::{invalid, Error, Result};
use crate::sbp::SbpOperator1D;

/// Default cap on the number of nodes in one element.
pub const DEFAULT_MAX_ELEMENT_NODES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    West,
    East,
    South,
    North,
}

/// Index arithmetic for the space-fastest layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridLayout {
    pub nx: usize,
    pub nt: usize,
}

impl GridLayout {
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Inverse of [`GridLayout::index`]: `(i, j)`.
    #[inline]
    pub fn node(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node indices on a face, ordered by time (west/east) or space (south/north).
    pub fn face_indices(&self, face: Face) -> Vec<usize> {
        match face {
            Face::West => (0..self.nt).map(|j| self.index(0, j)).collect(),
            Face::East => (0..self.nt).map(|j| self.index(self.nx - 1, j)).collect(),
            Face::South => (0..self.nx).map(|i| self.index(i, 0)).collect(),
            Face::North => (0..self.nx).map(|i| self.index(i, self.nt - 1)).collect(),
        }
    }
}

/// Space-time SBP operators of one element `[a_k, b_k] x [0, T]`.
#[derive(Debug, Clone)]
pub struct SpaceTimeElementOps {
    pub op_x: SbpOperator1D,
    pub op_t: SbpOperator1D,
    pub layout: GridLayout,
    /// Diagonal of `P = P_t ⊗ P_x`.
    pub p: Vec<f64>,
    pub q_x: Mat<f64>,
    pub q_t: Mat<f64>,
    pub d_x: Mat<f64>,
    pub d_t: Mat<f64>,
    pub e_x: Mat<f64>,
    pub e_t: Mat<f64>,
    west: Vec<usize>,
    east: Vec<usize>,
    south: Vec<usize>,
    north: Vec<usize>,
}

pub fn build_element_ops(op_x: SbpOperator1D, op_t: SbpOperator1D) -> Result<SpaceTimeElementOps> {
    build_element_ops_with_cap(op_x, op_t, DEFAULT_MAX_ELEMENT_NODES)
}

pub fn build_element_ops_with_cap(
    op_x: SbpOperator1D,
    op_t: SbpOperator1D,
    max_nodes: usize,
) -> Result<SpaceTimeElementOps> {
    let layout = GridLayout {
        nx: op_x.n_nodes(),
        nt: op_t.n_nodes(),
    };
    let n = layout.len();
    if n > max_nodes {
        return Err(Error::ResourceLimit(format!(
            "element has {n} nodes, cap is {max_nodes}"
        )));
    }
    let (nx, nt) = (layout.nx, layout.nt);
    let p: Vec<f64> = (0..n)
        .map(|idx| {
            let (i, j) = layout.node(idx);
            op_t.p[j] * op_x.p[i]
        })
        .collect();

    let mut q_x = Mat::zeros(n, n);
    let mut d_x = Mat::zeros(n, n);
    let mut e_x = Mat::zeros(n, n);
    for j in 0..nt {
        for i in 0..nx {
            let r = layout.index(i, j);
            for ip in 0..nx {
                let c = layout.index(ip, j);
                q_x[(r, c)] = op_t.p[j] * op_x.q[(i, ip)];
                d_x[(r, c)] = op_x.d[(i, ip)];
            }
        }
        e_x[(layout.index(0, j), layout.index(0, j))] = -op_t.p[j];
        e_x[(layout.index(nx - 1, j), layout.index(nx - 1, j))] = op_t.p[j];
    }

    let mut q_t = Mat::zeros(n, n);
    let mut d_t = Mat::zeros(n, n);
    let mut e_t = Mat::zeros(n, n);
    for j in 0..nt {
        for jp in 0..nt {
            for i in 0..nx {
                let (r, c) = (layout.index(i, j), layout.index(i, jp));
                q_t[(r, c)] = op_t.q[(j, jp)] * op_x.p[i];
                d_t[(r, c)] = op_t.d[(j, jp)];
            }
        }
    }
    for i in 0..nx {
        e_t[(layout.index(i, 0), layout.index(i, 0))] = -op_x.p[i];
        e_t[(layout.index(i, nt - 1), layout.index(i, nt - 1))] = op_x.p[i];
    }

    Ok(SpaceTimeElementOps {
        west: layout.face_indices(Face::West),
        east: layout.face_indices(Face::East),
        south: layout.face_indices(Face::South),
        north: layout.face_indices(Face::North),
        op_x,
        op_t,
        layout,
        p,
        q_x,
        q_t,
        d_x,
        d_t,
        e_x,
        e_t,
    })
}

impl SpaceTimeElementOps {
    pub fn n(&self) -> usize {
        self.layout.len()
    }

    pub fn nx(&self) -> usize {
        self.layout.nx
    }

    pub fn nt(&self) -> usize {
        self.layout.nt
    }

    pub fn face(&self, face: Face) -> &[usize] {
        match face {
            Face::West => &self.west,
            Face::East => &self.east,
            Face::South => &self.south,
            Face::North => &self.north,
        }
    }

    /// Quadrature weights along a face (`P_t` for west/east, `P_x` for south/north).
    pub fn face_weights(&self, face: Face) -> &[f64] {
        match face {
            Face::West | Face::East => &self.op_t.p,
            Face::South | Face::North => &self.op_x.p,
        }
    }

    /// Coordinates `(x, t)` of every node in stacking order.
    pub fn coordinates(&self) -> Vec<(f64, f64)> {
        (0..self.n())
            .map(|idx| {
                let (i, j) = self.layout.node(idx);
                (self.op_x.nodes[i], self.op_t.nodes[j])
            })
            .collect()
    }

    /// Samples `f(x, t)` at every node.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        self.coordinates().into_iter().map(|(x, t)| f(x, t)).collect()
    }

    /// `R_face u`.
    pub fn restrict(&self, face: Face, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.n() {
            return invalid(format!("state has length {}, element has {} nodes", u.len(), self.n()));
        }
        Ok(self.face(face).iter().map(|&k| u[k]).collect())
    }

    /// Dense `R_face`.
    pub fn restriction_matrix(&self, face: Face) -> Mat<f64> {
        let idx = self.face(face);
        let mut r = Mat::zeros(idx.len(), self.n());
        for (row, &col) in idx.iter().enumerate() {
            r[(row, col)] = 1.0;
        }
        r
    }

    /// `D_x u` using the Kronecker structure.
    pub fn apply_dx(&self, u: &[f64]) -> Vec<f64> {
        let nx = self.nx();
        let mut out = vec![0.0; u.len()];
        for (level, out_level) in u.chunks_exact(nx).zip(out.chunks_exact_mut(nx)) {
            for i in 0..nx {
                out_level[i] = (0..nx).map(|ip| self.op_x.d[(i, ip)] * level[ip]).sum();
            }
        }
        out
    }

    /// `D_x^T u` using the Kronecker structure.
    pub fn apply_dx_transpose(&self, u: &[f64]) -> Vec<f64> {
        let nx = self.nx();
        let mut out = vec![0.0; u.len()];
        for (level, out_level) in u.chunks_exact(nx).zip(out.chunks_exact_mut(nx)) {
            for i in 0..nx {
                out_level[i] = (0..nx).map(|ip| self.op_x.d[(ip, i)] * level[ip]).sum();
            }
        }
        out
    }

    /// `u^T P v`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.p.iter().zip(u).zip(v).map(|((p, a), b)| p * a * b).sum()
    }

    /// `‖R_face z‖^2` in the face norm.
    pub fn face_norm_sq(&self, face: Face, z: &[f64]) -> f64 {
        self.face(face)
            .iter()
            .zip(self.face_weights(face))
            .map(|(&k, w)| w * z[k] * z[k])
            .sum()
    }
}
