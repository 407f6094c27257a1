//! Element blocks of the global space-time SBP-SAT system.
//!
//! Every element equation is multiplied by `P`, so the blocks are
//!
//! ```text
//! A_k = Q_t - κ_k Q_x D_x + σ₀ R_sᵀ P_x R_s + boundary and interface SATs
//! b_k = P f + σ₀ R_sᵀ P_x R_s q + boundary data
//! ```
//!
//! with `B_k` coupling element `k` to `k+1` and `C_k` coupling it to `k-1`.

use std::sync::Arc;

use faer::Mat;

use crate::block::BlockTridiagonal;
use crate::error::{invalid, Result};
use crate::heat::problem::{kappa, BoundaryCondition, ProblemSpec};
use crate::heat::sat::SatCoefficients;
use crate::spacetime::{Face, SpaceTimeElementOps};

/// Which parts of a block to build. The blocks are affine in the element
/// diffusivities, so `KappaOnly` with unit `κ` yields partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockPart {
    Full,
    KappaOnly,
}

impl BlockPart {
    fn constant(self) -> bool {
        self == BlockPart::Full
    }
}

/// Assembled linear system `𝒜(ρ) u = b`.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: BlockTridiagonal,
    pub rhs: Vec<f64>,
    pub kappa: Vec<f64>,
    pub ops: Vec<Arc<SpaceTimeElementOps>>,
}

impl GlobalSystem {
    pub fn n_elements(&self) -> usize {
        self.matrix.n_blocks()
    }

    pub fn block_size(&self) -> usize {
        self.matrix.block_size()
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn rhs_block(&self, k: usize) -> &[f64] {
        let n = self.block_size();
        &self.rhs[k * n..(k + 1) * n]
    }
}

/// Element blocks of one block row.
#[derive(Debug, Clone)]
pub struct ElementBlocks {
    pub a: Mat<f64>,
    pub b: Vec<f64>,
    pub upper: Option<Mat<f64>>,
    pub lower: Option<Mat<f64>>,
}

/// A problem with its element operators and SAT coefficients fixed, so that
/// only the design changes between assemblies.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub spec: ProblemSpec,
    pub ops: Vec<Arc<SpaceTimeElementOps>>,
    pub sat: SatCoefficients,
    rhs: Vec<f64>,
}

impl Discretization {
    pub fn new(spec: ProblemSpec, sat: SatCoefficients) -> Result<Self> {
        let ops = spec.element_ops()?;
        Self::with_ops(spec, ops, sat)
    }

    pub fn with_ops(spec: ProblemSpec, ops: Vec<Arc<SpaceTimeElementOps>>, sat: SatCoefficients) -> Result<Self> {
        spec.validate()?;
        if ops.len() != spec.n_elements() {
            return invalid(format!(
                "{} element operators for {} elements",
                ops.len(),
                spec.n_elements()
            ));
        }
        let n = spec.nodes_per_element();
        if ops.iter().any(|o| o.n() != n) {
            return invalid("element operators do not match the problem resolution");
        }
        let mut d = Self {
            spec,
            ops,
            sat,
            rhs: Vec::new(),
        };
        d.rhs = (0..d.n_elements()).flat_map(|k| d.rhs_block(k)).collect();
        Ok(d)
    }

    pub fn n_elements(&self) -> usize {
        self.ops.len()
    }

    pub fn block_size(&self) -> usize {
        self.ops[0].n()
    }

    pub fn dim(&self) -> usize {
        self.n_elements() * self.block_size()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn kappas(&self, rho: &[f64]) -> Result<Vec<f64>> {
        if rho.len() != self.n_elements() {
            return invalid(format!(
                "design has {} entries for {} elements",
                rho.len(),
                self.n_elements()
            ));
        }
        rho.iter().map(|&r| kappa(r, &self.spec.material)).collect()
    }

    pub fn assemble(&self, rho: &[f64]) -> Result<GlobalSystem> {
        let kap = self.kappas(rho)?;
        self.assemble_kappa(&kap)
    }

    /// Assembles with the element diffusivities given directly.
    pub fn assemble_kappa(&self, kap: &[f64]) -> Result<GlobalSystem> {
        if kap.len() != self.n_elements() {
            return invalid("one diffusivity per element is required");
        }
        let matrix = self.assemble_matrix(kap, BlockPart::Full);
        Ok(GlobalSystem {
            matrix,
            rhs: self.rhs.clone(),
            kappa: kap.to_vec(),
            ops: self.ops.clone(),
        })
    }

    pub(crate) fn assemble_matrix(&self, kap: &[f64], part: BlockPart) -> BlockTridiagonal {
        let kk = self.n_elements();
        BlockTridiagonal {
            diag: (0..kk).map(|k| self.diag_block(k, kap, part)).collect(),
            upper: (0..kk - 1).map(|k| self.upper_block(k, kap, part)).collect(),
            lower: (1..kk).map(|k| self.lower_block(k, kap, part)).collect(),
        }
    }

    pub fn assemble_element(&self, k: usize, rho: &[f64]) -> Result<ElementBlocks> {
        if k >= self.n_elements() {
            return invalid(format!("element {k} out of range"));
        }
        let kap = self.kappas(rho)?;
        let last = self.n_elements() - 1;
        Ok(ElementBlocks {
            a: self.diag_block(k, &kap, BlockPart::Full),
            b: self.rhs_block(k),
            upper: (k < last).then(|| self.upper_block(k, &kap, BlockPart::Full)),
            lower: (k > 0).then(|| self.lower_block(k, &kap, BlockPart::Full)),
        })
    }

    /// Diagonal block `A_k`.
    pub(crate) fn diag_block(&self, k: usize, kap: &[f64], part: BlockPart) -> Mat<f64> {
        let ops = &self.ops[k];
        let lay = ops.layout;
        let (nx, nt) = (lay.nx, lay.nt);
        let pt = &ops.op_t.p;
        let dx = &ops.op_x.d;
        let kk = kap[k];
        let last = self.n_elements() - 1;
        let sat = &self.sat;
        let mut a = if part.constant() {
            ops.q_t.clone()
        } else {
            Mat::zeros(ops.n(), ops.n())
        };

        // -κ Q_x D_x, block diagonal in time with blocks p_t[j] (Q_x1 D_x1).
        let qd = &ops.op_x.q * dx;
        for j in 0..nt {
            for i in 0..nx {
                for c in 0..nx {
                    a[(lay.index(i, j), lay.index(c, j))] -= kk * pt[j] * qd[(i, c)];
                }
            }
        }

        if part.constant() {
            for (i, &w) in ops.op_x.p.iter().enumerate() {
                a[(lay.index(i, 0), lay.index(i, 0))] += sat.sigma0 * w;
            }
        }

        // Adds `coef * R_faceᵀ P_t R_face`.
        let face_mass = |a: &mut Mat<f64>, face: Face, coef: f64| {
            for (&r, w) in ops.face(face).iter().zip(pt) {
                a[(r, r)] += coef * w;
            }
        };
        // Adds `coef * R_faceᵀ P_t R_face D_x`.
        let face_flux = |a: &mut Mat<f64>, face: Face, row: usize, coef: f64| {
            for j in 0..nt {
                let r = lay.index(row, j);
                for c in 0..nx {
                    a[(r, lay.index(c, j))] += coef * pt[j] * dx[(row, c)];
                }
            }
            let _ = face;
        };
        // Adds `coef * D_xᵀ R_faceᵀ P_t R_face`.
        let face_flux_t = |a: &mut Mat<f64>, row: usize, coef: f64| {
            for j in 0..nt {
                let c = lay.index(row, j);
                for i in 0..nx {
                    a[(lay.index(i, j), c)] += coef * pt[j] * dx[(row, i)];
                }
            }
        };

        if k == 0 {
            match &self.spec.west {
                BoundaryCondition::Dirichlet(_) => {
                    if part.constant() {
                        face_mass(&mut a, Face::West, sat.sigma_w);
                    }
                }
                BoundaryCondition::Neumann(_) => face_flux(&mut a, Face::West, 0, -kk),
            }
        } else {
            if part.constant() {
                face_mass(&mut a, Face::West, sat.sigma1);
            }
            face_flux(&mut a, Face::West, 0, sat.sigma2() * kk);
            face_flux_t(&mut a, 0, sat.tau1() * kk);
        }

        if k == last {
            match &self.spec.east {
                BoundaryCondition::Dirichlet(_) => {
                    if part.constant() {
                        face_mass(&mut a, Face::East, sat.sigma_e);
                    }
                }
                BoundaryCondition::Neumann(_) => face_flux(&mut a, Face::East, nx - 1, kk),
            }
        } else {
            if part.constant() {
                face_mass(&mut a, Face::East, sat.sigma3());
            }
            face_flux(&mut a, Face::East, nx - 1, sat.sigma4() * kk);
            face_flux_t(&mut a, nx - 1, sat.tau2() * kk);
        }
        a
    }

    /// Upper block `B_k`, coupling element `k` to `k + 1`.
    pub(crate) fn upper_block(&self, k: usize, kap: &[f64], part: BlockPart) -> Mat<f64> {
        let (me, right) = (&self.ops[k], &self.ops[k + 1]);
        let lay = me.layout;
        let (nx, nt) = (lay.nx, lay.nt);
        let pt = &me.op_t.p;
        let sat = &self.sat;
        let mut b = Mat::zeros(me.n(), me.n());
        for j in 0..nt {
            let east = lay.index(nx - 1, j);
            let west_r = lay.index(0, j);
            if part.constant() {
                b[(east, west_r)] -= sat.sigma3() * pt[j];
            }
            for c in 0..nx {
                b[(east, lay.index(c, j))] -= sat.sigma4() * kap[k + 1] * pt[j] * right.op_x.d[(0, c)];
            }
            for i in 0..nx {
                b[(lay.index(i, j), west_r)] -= sat.tau2() * kap[k] * pt[j] * me.op_x.d[(nx - 1, i)];
            }
        }
        b
    }

    /// Lower block `C_k`, coupling element `k` to `k - 1`.
    pub(crate) fn lower_block(&self, k: usize, kap: &[f64], part: BlockPart) -> Mat<f64> {
        let (me, left) = (&self.ops[k], &self.ops[k - 1]);
        let lay = me.layout;
        let (nx, nt) = (lay.nx, lay.nt);
        let pt = &me.op_t.p;
        let sat = &self.sat;
        let mut c = Mat::zeros(me.n(), me.n());
        for j in 0..nt {
            let west = lay.index(0, j);
            let east_l = lay.index(nx - 1, j);
            if part.constant() {
                c[(west, east_l)] -= sat.sigma1 * pt[j];
            }
            for cc in 0..nx {
                c[(west, lay.index(cc, j))] -= sat.sigma2() * kap[k - 1] * pt[j] * left.op_x.d[(nx - 1, cc)];
            }
            for i in 0..nx {
                c[(lay.index(i, j), east_l)] -= sat.tau1() * kap[k] * pt[j] * me.op_x.d[(0, i)];
            }
        }
        c
    }

    fn rhs_block(&self, k: usize) -> Vec<f64> {
        let ops = &self.ops[k];
        let lay = ops.layout;
        let (nx, nt) = (lay.nx, lay.nt);
        let pt = &ops.op_t.p;
        let f = &self.spec.source;
        let mut b: Vec<f64> = ops
            .coordinates()
            .iter()
            .zip(&ops.p)
            .map(|(&(x, t), w)| w * f(x, t))
            .collect();
        for (i, (&x, w)) in ops.op_x.nodes.iter().zip(&ops.op_x.p).enumerate() {
            b[lay.index(i, 0)] += self.sat.sigma0 * w * (self.spec.initial)(x);
        }
        let times = &ops.op_t.nodes;
        if k == 0 {
            for j in 0..nt {
                let r = lay.index(0, j);
                b[r] += match &self.spec.west {
                    BoundaryCondition::Dirichlet(h) => self.sat.sigma_w * pt[j] * h(times[j]),
                    BoundaryCondition::Neumann(g) => -pt[j] * g(times[j]),
                };
            }
        }
        if k == self.n_elements() - 1 {
            for j in 0..nt {
                let r = lay.index(nx - 1, j);
                b[r] += match &self.spec.east {
                    BoundaryCondition::Dirichlet(h) => self.sat.sigma_e * pt[j] * h(times[j]),
                    BoundaryCondition::Neumann(g) => pt[j] * g(times[j]),
                };
            }
        }
        b
    }
}

/// One-shot assembly.
pub fn assemble_global(spec: &ProblemSpec, rho: &[f64], sat: &SatCoefficients) -> Result<GlobalSystem> {
    Discretization::new(spec.clone(), *sat)?.assemble(rho)
}

/// `𝒜 u - b`.
pub fn residual(u: &[f64], system: &GlobalSystem) -> Result<Vec<f64>> {
    let mut r = system.matrix.matvec(u)?;
    for (ri, bi) in r.iter_mut().zip(&system.rhs) {
        *ri -= bi;
    }
    Ok(r)
}

/// Splits a global vector into per-element slices.
pub fn element_slices(u: &[f64], block_size: usize) -> impl Iterator<Item = &[f64]> {
    u.chunks_exact(block_size)
}
