//! Objective, discrete adjoint and design sensitivities.

use crate::block::{factor, mat_vec_add};
use crate::error::{invalid, Result};
use crate::heat::{dkappa_drho, BlockPart, Discretization, GlobalSystem};
use crate::spacetime::SpaceTimeElementOps;
use std::sync::Arc;

/// `J = Σ_k u_kᵀ P_k u_k`.
pub fn objective(u: &[f64], ops: &[Arc<SpaceTimeElementOps>]) -> f64 {
    let n = ops[0].n();
    u.chunks_exact(n).zip(ops).map(|(uk, o)| o.inner(uk, uk)).sum()
}

/// Adjoint state `Λ` with the objective of the forward state.
#[derive(Debug, Clone)]
pub struct AdjointSolution {
    pub lambda: Vec<f64>,
    pub objective: f64,
}

/// Solves `𝒜 u = b`.
pub fn solve_forward(system: &GlobalSystem) -> Result<Vec<f64>> {
    factor(&system.matrix, false)?.solve(&system.rhs)
}

/// Solves `𝒜ᵀ Λ = 2 P u`.
pub fn solve_adjoint(system: &GlobalSystem, u: &[f64]) -> Result<AdjointSolution> {
    if u.len() != system.dim() {
        return invalid(format!(
            "state of length {} for system of size {}",
            u.len(),
            system.dim()
        ));
    }
    let n = system.block_size();
    let rhs: Vec<f64> = u
        .chunks_exact(n)
        .zip(&system.ops)
        .flat_map(|(uk, o)| uk.iter().zip(&o.p).map(|(a, w)| 2.0 * w * a).collect::<Vec<_>>())
        .collect();
    let lambda = factor(&system.matrix, true)?.solve(&rhs)?;
    Ok(AdjointSolution {
        lambda,
        objective: objective(u, &system.ops),
    })
}

/// `λᵀ (∂𝒜/∂κ_k) u` for every element.
pub fn kappa_derivative_products(disc: &Discretization, u: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    let kk = disc.n_elements();
    let n = disc.block_size();
    if u.len() != kk * n || lambda.len() != kk * n {
        return invalid("state and adjoint must match the system size");
    }
    let blk = |v: &'_ [f64], k: usize| -> Vec<f64> { v[k * n..(k + 1) * n].to_vec() };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut out = Vec::with_capacity(kk);
    let mut unit = vec![0.0; kk];
    for k in 0..kk {
        unit[k] = 1.0;
        let uk = blk(u, k);
        // Row k: ∂A_k u_k + ∂B_k u_{k+1} + ∂C_k u_{k-1}.
        let mut row = vec![0.0; n];
        mat_vec_add(&disc.diag_block(k, &unit, BlockPart::KappaOnly), &uk, &mut row, 1.0);
        if k + 1 < kk {
            mat_vec_add(
                &disc.upper_block(k, &unit, BlockPart::KappaOnly),
                &blk(u, k + 1),
                &mut row,
                1.0,
            );
        }
        if k > 0 {
            mat_vec_add(
                &disc.lower_block(k, &unit, BlockPart::KappaOnly),
                &blk(u, k - 1),
                &mut row,
                1.0,
            );
        }
        let mut total = dot(&row, &lambda[k * n..(k + 1) * n]);
        // Neighbouring rows that see κ_k through their coupling blocks.
        if k > 0 {
            let mut r = vec![0.0; n];
            mat_vec_add(&disc.upper_block(k - 1, &unit, BlockPart::KappaOnly), &uk, &mut r, 1.0);
            total += dot(&r, &lambda[(k - 1) * n..k * n]);
        }
        if k + 1 < kk {
            let mut r = vec![0.0; n];
            mat_vec_add(&disc.lower_block(k + 1, &unit, BlockPart::KappaOnly), &uk, &mut r, 1.0);
            total += dot(&r, &lambda[(k + 1) * n..(k + 2) * n]);
        }
        out.push(total);
        unit[k] = 0.0;
    }
    Ok(out)
}

/// `dJ/dρ_k = -dκ/dρ_k · λᵀ (∂𝒜/∂κ_k) u`; the right-hand side does not
/// depend on the design.
pub fn sensitivities(disc: &Discretization, rho: &[f64], u: &[f64], lambda: &[f64]) -> Result<Vec<f64>> {
    if rho.len() != disc.n_elements() {
        return invalid("design length does not match element count");
    }
    let prods = kappa_derivative_products(disc, u, lambda)?;
    rho.iter()
        .zip(prods)
        .map(|(&r, p)| Ok(-dkappa_drho(r, &disc.spec.material)? * p))
        .collect()
}

/// Forward state, adjoint and gradient at one design.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
}

pub fn evaluate(disc: &Discretization, rho: &[f64]) -> Result<Evaluation> {
    let system = disc.assemble(rho)?;
    let u = solve_forward(&system)?;
    let adj = solve_adjoint(&system, &u)?;
    let gradient = sensitivities(disc, rho, &u, &adj.lambda)?;
    Ok(Evaluation {
        objective: adj.objective,
        gradient,
        u,
        lambda: adj.lambda,
    })
}

/// Objective only.
pub fn evaluate_objective(disc: &Discretization, rho: &[f64]) -> Result<f64> {
    let system = disc.assemble(rho)?;
    let u = solve_forward(&system)?;
    Ok(objective(&u, &system.ops))
}

/// Objective for element diffusivities given directly.
pub fn evaluate_objective_kappa(disc: &Discretization, kap: &[f64]) -> Result<f64> {
    let system = disc.assemble_kappa(kap)?;
    let u = solve_forward(&system)?;
    Ok(objective(&u, &system.ops))
}
