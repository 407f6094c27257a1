//! Low-order baselines: linear finite elements in space with backward Euler
//! in time, solved by time marching or as one all-at-once system.
//!
//! The objective is `J = Σ_{n=1}^{N} Δt uⁿᵀ M uⁿ` over the full nodal vector.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::heat::{dkappa_drho, kappa, BoundaryCondition, ProblemSpec};
use crate::optimizer::DesignProblem;

/// Tridiagonal matrix stored by diagonals; `lower[i]` is entry `(i+1, i)`
/// and `upper[i]` is entry `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.upper[i]
        } else if i == j + 1 {
            self.lower[j]
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn scaled_add(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Self {
            lower: mix(&self.lower, &other.lower),
            diag: mix(&self.diag, &other.diag),
            upper: mix(&self.upper, &other.upper),
        }
    }

    /// Principal submatrix on consecutive indices `range`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            lower: self.lower[start..end - 1].to_vec(),
            diag: self.diag[start..end].to_vec(),
            upper: self.upper[start..end - 1].to_vec(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            lower: self.upper.clone(),
            diag: self.diag.clone(),
            upper: self.lower.clone(),
        }
    }

    pub fn factor(&self) -> Result<TridiagonalLu> {
        let n = self.len();
        let mut pivots = Vec::with_capacity(n);
        let mut mult = Vec::with_capacity(n.saturating_sub(1));
        let scale = self.diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        for i in 0..n {
            let mut d = self.diag[i];
            if i > 0 {
                let l = self.lower[i - 1] / pivots[i - 1];
                d -= l * self.upper[i - 1];
                mult.push(l);
            }
            if !d.is_finite() || d.abs() <= f64::EPSILON * scale {
                return Err(Error::SingularSystem { element: i });
            }
            pivots.push(d);
        }
        Ok(TridiagonalLu {
            pivots,
            mult,
            upper: self.upper.clone(),
        })
    }
}

/// Thomas factorization without pivoting.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    pivots: Vec<f64>,
    mult: Vec<f64>,
    upper: Vec<f64>,
}

impl TridiagonalLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.pivots.len();
        for i in 1..n {
            b[i] -= self.mult[i - 1] * b[i - 1];
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                b[i] -= self.upper[i] * b[i + 1];
            }
            b[i] /= self.pivots[i];
        }
    }
}

/// P1 finite elements on the element partition of a problem.
#[derive(Debug, Clone)]
pub struct FeDiscretization {
    pub nodes: Vec<f64>,
    pub kappa: Vec<f64>,
    pub mass: Tridiagonal,
    pub stiffness: Tridiagonal,
    pub west_dirichlet: bool,
    pub east_dirichlet: bool,
}

impl FeDiscretization {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.kappa.len()
    }

    /// First and one-past-last free node.
    pub fn free_range(&self) -> (usize, usize) {
        let n = self.n_nodes();
        (usize::from(self.west_dirichlet), n - usize::from(self.east_dirichlet))
    }

    pub fn n_free(&self) -> usize {
        let (a, b) = self.free_range();
        b - a
    }

    /// Element stiffness with unit diffusivity applied to the full state and
    /// contracted with `lambda`: `λᵀ K_kᵘⁿⁱᵗ u`.
    fn unit_stiffness_product(&self, k: usize, lambda: &[f64], u: &[f64]) -> f64 {
        let h = self.nodes[k + 1] - self.nodes[k];
        (lambda[k] - lambda[k + 1]) * (u[k] - u[k + 1]) / h
    }
}

pub fn fe_assemble(spec: &ProblemSpec, rho: &[f64]) -> Result<FeDiscretization> {
    spec.validate()?;
    if rho.len() != spec.n_elements() {
        return invalid("design length does not match element count");
    }
    let kap: Vec<f64> = rho.iter().map(|&r| kappa(r, &spec.material)).collect::<Result<_>>()?;
    let nodes = spec.breakpoints.clone();
    let n = nodes.len();
    let mut mass = Tridiagonal::zeros(n);
    let mut stiffness = Tridiagonal::zeros(n);
    for (k, &kk) in kap.iter().enumerate() {
        let h = nodes[k + 1] - nodes[k];
        mass.diag[k] += h / 3.0;
        mass.diag[k + 1] += h / 3.0;
        mass.upper[k] += h / 6.0;
        mass.lower[k] += h / 6.0;
        stiffness.diag[k] += kk / h;
        stiffness.diag[k + 1] += kk / h;
        stiffness.upper[k] -= kk / h;
        stiffness.lower[k] -= kk / h;
    }
    Ok(FeDiscretization {
        nodes,
        kappa: kap,
        mass,
        stiffness,
        west_dirichlet: spec.west.is_dirichlet(),
        east_dirichlet: spec.east.is_dirichlet(),
    })
}

/// Load vector `∫ f(·, t) φ_i dx` plus natural boundary fluxes.
fn load(spec: &ProblemSpec, fe: &FeDiscretization, t: f64) -> Vec<f64> {
    const GAUSS: [(f64, f64); 3] = [
        (-0.774_596_669_241_483_4, 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        (0.774_596_669_241_483_4, 5.0 / 9.0),
    ];
    let n = fe.n_nodes();
    let mut out = vec![0.0; n];
    for k in 0..fe.n_elements() {
        let (a, b) = (fe.nodes[k], fe.nodes[k + 1]);
        let h = b - a;
        for (s, w) in GAUSS {
            let x = a + 0.5 * h * (s + 1.0);
            let fx = (spec.source)(x, t) * 0.5 * h * w;
            out[k] += fx * (b - x) / h;
            out[k + 1] += fx * (x - a) / h;
        }
    }
    if let BoundaryCondition::Neumann(g) = &spec.west {
        out[0] -= g(t);
    }
    if let BoundaryCondition::Neumann(g) = &spec.east {
        out[n - 1] += g(t);
    }
    out
}

fn boundary_values(spec: &ProblemSpec, u: &mut [f64], t: f64) {
    let n = u.len();
    if let BoundaryCondition::Dirichlet(h) = &spec.west {
        u[0] = h(t);
    }
    if let BoundaryCondition::Dirichlet(h) = &spec.east {
        u[n - 1] = h(t);
    }
}

/// Nodal states `u⁰ … u^N` over all nodes.
#[derive(Debug, Clone)]
pub struct MarchingSolution {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
    /// Unknowns of the assembled space-time system (all-at-once only).
    pub assembled_unknowns: Option<usize>,
}

impl MarchingSolution {
    pub fn n_steps(&self) -> usize {
        self.states.len() - 1
    }
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps == 0 {
        return invalid("at least one time step is required");
    }
    Ok(())
}

fn initial_state(spec: &ProblemSpec, fe: &FeDiscretization) -> Vec<f64> {
    fe.nodes.iter().map(|&x| (spec.initial)(x)).collect()
}

/// Backward Euler: `(M/Δt + K) uⁿ⁺¹ = (M/Δt) uⁿ + Fⁿ⁺¹` on the free nodes,
/// with Dirichlet values lifted to the right-hand side.
pub fn be_march(fe: &FeDiscretization, spec: &ProblemSpec, n_steps: usize) -> Result<MarchingSolution> {
    check_steps(n_steps)?;
    let dt = spec.t_final / n_steps as f64;
    let step = fe.mass.scaled_add(1.0 / dt, &fe.stiffness, 1.0);
    let (f0, f1) = fe.free_range();
    if f1 <= f0 {
        return invalid("no free nodes");
    }
    let lu = step.slice(f0, f1).factor()?;
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial_state(spec, fe));
    for n in 1..=n_steps {
        let t = n as f64 * dt;
        let prev = &states[n - 1];
        let mut next = vec![0.0; fe.n_nodes()];
        boundary_values(spec, &mut next, t);
        let mprev = fe.mass.matvec(prev);
        let f = load(spec, fe, t);
        let mut rhs: Vec<f64> = (f0..f1).map(|i| mprev[i] / dt + f[i]).collect();
        if f0 == 1 {
            rhs[0] -= step.get(1, 0) * next[0];
        }
        if f1 == fe.n_nodes() - 1 {
            let last = rhs.len() - 1;
            rhs[last] -= step.get(f1 - 1, f1) * next[f1];
        }
        lu.solve_in_place(&mut rhs);
        next[f0..f1].copy_from_slice(&rhs);
        states.push(next);
    }
    Ok(MarchingSolution {
        dt,
        states,
        assembled_unknowns: None,
    })
}

/// The assembled all-at-once system over all nodes and levels: identity
/// rows for the initial level and Dirichlet nodes, block lower-bidiagonal
/// otherwise.
#[derive(Debug, Clone)]
pub struct AllAtOnceSystem {
    pub n_nodes: usize,
    pub dt: f64,
    /// Diagonal block of every level (level 0 is the identity).
    pub diag: Vec<Tridiagonal>,
    /// Block coupling level `n` to `n - 1`, for `n ≥ 1`.
    pub sub: Vec<Tridiagonal>,
    pub rhs: Vec<f64>,
}

impl AllAtOnceSystem {
    pub fn unknowns(&self) -> usize {
        self.diag.len() * self.n_nodes
    }

    pub fn matvec(&self, u: &[f64]) -> Vec<f64> {
        let n = self.n_nodes;
        let mut out = Vec::with_capacity(u.len());
        for (l, d) in self.diag.iter().enumerate() {
            let mut y = d.matvec(&u[l * n..(l + 1) * n]);
            if l > 0 {
                let s = self.sub[l - 1].matvec(&u[(l - 1) * n..l * n]);
                y.iter_mut().zip(s).for_each(|(a, b)| *a += b);
            }
            out.extend(y);
        }
        out
    }
}

pub fn be_aao_assemble(fe: &FeDiscretization, spec: &ProblemSpec, n_steps: usize) -> Result<AllAtOnceSystem> {
    check_steps(n_steps)?;
    let dt = spec.t_final / n_steps as f64;
    let n = fe.n_nodes();
    let (f0, f1) = fe.free_range();
    let mut identity = Tridiagonal::zeros(n);
    identity.diag.iter_mut().for_each(|d| *d = 1.0);
    let mut level = fe.mass.scaled_add(1.0 / dt, &fe.stiffness, 1.0);
    let mut coupling = fe.mass.scaled_add(-1.0 / dt, &fe.mass, 0.0);
    for i in (0..f0).chain(f1..n) {
        level.diag[i] = 1.0;
        coupling.diag[i] = 0.0;
        if i > 0 {
            level.lower[i - 1] = 0.0;
            coupling.lower[i - 1] = 0.0;
        }
        if i + 1 < n {
            level.upper[i] = 0.0;
            coupling.upper[i] = 0.0;
        }
    }
    let mut diag = Vec::with_capacity(n_steps + 1);
    let mut sub = Vec::with_capacity(n_steps);
    let mut rhs = Vec::with_capacity((n_steps + 1) * n);
    diag.push(identity);
    rhs.extend(initial_state(spec, fe));
    for step in 1..=n_steps {
        let t = step as f64 * dt;
        diag.push(level.clone());
        sub.push(coupling.clone());
        let mut b = load(spec, fe, t);
        boundary_values(spec, &mut b, t);
        rhs.extend(b);
    }
    Ok(AllAtOnceSystem {
        n_nodes: n,
        dt,
        diag,
        sub,
        rhs,
    })
}

/// Block forward elimination of the all-at-once system.
pub fn be_aao_solve(fe: &FeDiscretization, spec: &ProblemSpec, n_steps: usize) -> Result<MarchingSolution> {
    let sys = be_aao_assemble(fe, spec, n_steps)?;
    let n = sys.n_nodes;
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(sys.diag.len());
    for (l, d) in sys.diag.iter().enumerate() {
        let mut b = sys.rhs[l * n..(l + 1) * n].to_vec();
        if l > 0 {
            let s = sys.sub[l - 1].matvec(&states[l - 1]);
            b.iter_mut().zip(s).for_each(|(a, c)| *a -= c);
        }
        d.factor()?.solve_in_place(&mut b);
        states.push(b);
    }
    Ok(MarchingSolution {
        dt: sys.dt,
        states,
        assembled_unknowns: Some(sys.unknowns()),
    })
}

pub fn be_objective(fe: &FeDiscretization, sol: &MarchingSolution) -> f64 {
    sol.states[1..]
        .iter()
        .map(|u| sol.dt * u.iter().zip(fe.mass.matvec(u)).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// Discrete adjoint of the marching scheme and the design gradient.
///
/// `(M/Δt + K)ᵀ λⁿ = (M/Δt)ᵀ λⁿ⁺¹ + 2Δt (M uⁿ)` on the free nodes,
/// `λ^{N+1} = 0`, and `dJ/dρ_k = -κ'(ρ_k) Σ_n λⁿᵀ K_kᵘⁿⁱᵗ uⁿ`.
pub fn be_adjoint_and_sensitivity(
    fe: &FeDiscretization,
    sol: &MarchingSolution,
    spec: &ProblemSpec,
    rho: &[f64],
) -> Result<Vec<f64>> {
    let n_steps = sol.n_steps();
    let dt = sol.dt;
    let (f0, f1) = fe.free_range();
    let step = fe.mass.scaled_add(1.0 / dt, &fe.stiffness, 1.0);
    let free_step = step.slice(f0, f1);
    let lu = free_step.transpose().factor()?;
    let free_mass = fe.mass.slice(f0, f1).transpose();
    let mut products = vec![0.0; fe.n_elements()];
    let mut next = vec![0.0; f1 - f0];
    for n in (1..=n_steps).rev() {
        let mu = fe.mass.matvec(&sol.states[n]);
        let carry = free_mass.matvec(&next);
        let mut rhs: Vec<f64> = (f0..f1).zip(carry).map(|(i, c)| 2.0 * dt * mu[i] + c / dt).collect();
        lu.solve_in_place(&mut rhs);
        let mut full = vec![0.0; fe.n_nodes()];
        full[f0..f1].copy_from_slice(&rhs);
        for (k, p) in products.iter_mut().enumerate() {
            *p += fe.unit_stiffness_product(k, &full, &sol.states[n]);
        }
        next = rhs;
    }
    rho.iter()
        .zip(products)
        .map(|(&r, p)| Ok(-dkappa_drho(r, &spec.material)? * p))
        .collect()
}

/// Adjoint of the all-at-once system by block back substitution with the
/// transposed blocks, followed by the same sensitivity contraction.
pub fn be_aao_adjoint_and_sensitivity(
    fe: &FeDiscretization,
    sol: &MarchingSolution,
    spec: &ProblemSpec,
    rho: &[f64],
) -> Result<Vec<f64>> {
    let sys = be_aao_assemble(fe, spec, sol.n_steps())?;
    let n = sys.n_nodes;
    let levels = sys.diag.len();
    let mut products = vec![0.0; fe.n_elements()];
    let mut next: Option<Vec<f64>> = None;
    for l in (0..levels).rev() {
        let mut b = if l == 0 {
            vec![0.0; n]
        } else {
            let mu = fe.mass.matvec(&sol.states[l]);
            mu.iter().map(|m| 2.0 * sys.dt * m).collect::<Vec<f64>>()
        };
        // The objective only sees free nodes through the equations; rows of
        // Dirichlet nodes are identities with no objective weight.
        let (f0, f1) = fe.free_range();
        for i in (0..f0).chain(f1..n) {
            b[i] = 0.0;
        }
        if let Some(lam) = &next {
            let s = sys.sub[l].transpose().matvec(lam);
            b.iter_mut().zip(s).for_each(|(a, c)| *a -= c);
        }
        sys.diag[l].transpose().factor()?.solve_in_place(&mut b);
        if l > 0 {
            for (k, p) in products.iter_mut().enumerate() {
                let mut lam = b.clone();
                for i in (0..f0).chain(f1..n) {
                    lam[i] = 0.0;
                }
                *p += fe.unit_stiffness_product(k, &lam, &sol.states[l]);
            }
        }
        next = Some(b);
    }
    rho.iter()
        .zip(products)
        .map(|(&r, p)| Ok(-dkappa_drho(r, &spec.material)? * p))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BeSolver {
    /// Sequential time stepping.
    March,
    /// Assembled space-time system.
    AllAtOnce,
}

/// Backward Euler / finite element design problem.
#[derive(Debug, Clone)]
pub struct BackwardEulerProblem {
    pub spec: ProblemSpec,
    pub n_steps: usize,
    pub solver: BeSolver,
    pub volume_bound: f64,
}

impl BackwardEulerProblem {
    pub fn solve(&self, rho: &[f64]) -> Result<(FeDiscretization, MarchingSolution)> {
        let fe = fe_assemble(&self.spec, rho)?;
        let sol = match self.solver {
            BeSolver::March => be_march(&fe, &self.spec, self.n_steps)?,
            BeSolver::AllAtOnce => be_aao_solve(&fe, &self.spec, self.n_steps)?,
        };
        Ok((fe, sol))
    }

    /// Size of the forward linear system: the spatial nodes for marching
    /// (solved once per step), all nodes and levels when assembled.
    pub fn dof(&self) -> usize {
        let n = self.spec.n_elements() + 1;
        match self.solver {
            BeSolver::March => n,
            BeSolver::AllAtOnce => n * (self.n_steps + 1),
        }
    }
}

impl DesignProblem for BackwardEulerProblem {
    fn volumes(&self) -> Vec<f64> {
        self.spec.element_lengths()
    }

    fn volume_bound(&self) -> f64 {
        self.volume_bound
    }

    fn evaluate(&self, rho: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (fe, sol) = self.solve(rho)?;
        let grad = match self.solver {
            BeSolver::March => be_adjoint_and_sensitivity(&fe, &sol, &self.spec, rho)?,
            BeSolver::AllAtOnce => be_aao_adjoint_and_sensitivity(&fe, &sol, &self.spec, rho)?,
        };
        Ok((be_objective(&fe, &sol), grad))
    }

    fn objective(&self, rho: &[f64]) -> Result<f64> {
        let (fe, sol) = self.solve(rho)?;
        Ok(be_objective(&fe, &sol))
    }
}
