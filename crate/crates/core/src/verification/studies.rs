//! Convergence studies, optimum cross-validation and solver sweeps.

use serde::{Deserialize, Serialize};

use crate::adjoint::{objective, solve_forward};
use crate::baselines::{be_march, fe_assemble, BackwardEulerProblem, BeSolver, MarchingSolution};
use crate::error::{invalid, Result};
use crate::heat::{sat_for_problem, Discretization, ProblemSpec, SatCoefficients, SatOverrides};
use crate::optimizer::{
    max_abs_diff, relative_change, run_topology_optimization, scalar_minimize, DesignProblem, MmaConfig,
    SpaceTimeProblem, Tolerances,
};
use crate::presets::{HeatSinkSetup, ManufacturedSetup, TwoDomainSetup};
use crate::spacetime::Face;
use crate::verification::modal::{composite_rule, ModalReference};

/// Discrete `P`-norm of `u - exact` over all elements.
pub fn st_l2_error(disc: &Discretization, u: &[f64], exact: impl Fn(f64, f64) -> f64) -> f64 {
    let n = disc.block_size();
    let mut s = 0.0;
    for (k, op) in disc.ops.iter().enumerate() {
        for (i, (x, t)) in op.coordinates().into_iter().enumerate() {
            let e = u[k * n + i] - exact(x, t);
            s += op.p[i] * e * e;
        }
    }
    s.sqrt()
}

/// `∫₀ᵀ ∫ f dx dt` by composite Gauss-Lobatto rules on every element.
pub fn space_time_integral(breakpoints: &[f64], t_final: f64, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    let (tn, tw) = composite_rule(0.0, t_final, 8, 12)?;
    let mut total = 0.0;
    for s in breakpoints.windows(2) {
        let (xn, xw) = composite_rule(s[0], s[1], 4, 12)?;
        for (t, wt) in tn.iter().zip(&tw) {
            for (x, wx) in xn.iter().zip(&xw) {
                total += wt * wx * f(*x, *t);
            }
        }
    }
    Ok(total)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub l2_error: f64,
    pub j_error: f64,
}

/// Forward solves of the heterogeneous manufactured problem with
/// `N_x = N_t = n`.
pub fn forward_convergence(setup: &ManufacturedSetup, degrees: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let (spec0, _, sol0) = setup.problem(1, 1)?;
    let u0 = sol0.u.clone();
    let j_exact = space_time_integral(&spec0.breakpoints, spec0.t_final, |x, t| u0(x, t).powi(2))?;
    degrees
        .iter()
        .map(|&n| {
            let (spec, rho, sol) = setup.problem(n, n)?;
            let sat = sat_for_problem(&spec, &SatOverrides::default())?;
            let disc = Discretization::new(spec, sat)?;
            let u = solve_forward(&disc.assemble(&rho)?)?;
            let exact = sol.u.clone();
            Ok(ConvergenceRow {
                n,
                l2_error: st_l2_error(&disc, &u, |x, t| exact(x, t)),
                j_error: (objective(&u, &disc.ops) - j_exact).abs(),
            })
        })
        .collect()
}

/// Shape of an error sequence that should decay spectrally to round-off.
///
/// The plateau starts at the first index whose error does not decrease.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDecay {
    /// First index whose error is at or below the target.
    pub reached_at: Option<usize>,
    pub plateau_start: usize,
    /// Largest error from the plateau start on.
    pub plateau_max: f64,
}

impl SpectralDecay {
    /// The target is met during the strictly decreasing phase and the
    /// plateau never rises above `plateau_cap`.
    pub fn holds(&self, plateau_cap: f64) -> bool {
        self.reached_at.is_some_and(|i| i <= self.plateau_start) && self.plateau_max <= plateau_cap
    }
}

pub fn spectral_decay(errors: &[f64], target: f64) -> SpectralDecay {
    let plateau_start = errors
        .windows(2)
        .position(|w| w[1] >= w[0])
        .unwrap_or(errors.len().saturating_sub(1));
    SpectralDecay {
        reached_at: errors.iter().position(|&e| e <= target),
        plateau_start,
        plateau_max: errors[plateau_start..].iter().copied().fold(0.0, f64::max),
    }
}

/// Splits every element into `m` equal pieces carrying the parent design.
pub fn refine_partition(spec: &ProblemSpec, rho: &[f64], m: usize) -> Result<(ProblemSpec, Vec<f64>)> {
    if m == 0 || rho.len() != spec.n_elements() {
        return invalid("refinement factor must be positive and the design must match");
    }
    let mut breakpoints = vec![spec.breakpoints[0]];
    let mut fine = Vec::with_capacity(rho.len() * m);
    for (s, &r) in spec.breakpoints.windows(2).zip(rho) {
        for j in 1..=m {
            breakpoints.push(s[0] + (s[1] - s[0]) * j as f64 / m as f64);
            fine.push(r);
        }
    }
    let mut out = spec.clone();
    out.breakpoints = breakpoints;
    Ok((out, fine))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeErrorRow {
    pub elements: usize,
    pub steps: usize,
    pub l2_error: f64,
    pub j_error: f64,
}

fn be_error(
    spec: &ProblemSpec,
    rho: &[f64],
    steps: usize,
    exact: &dyn Fn(f64, f64) -> f64,
    j_exact: f64,
) -> Result<BeErrorRow> {
    let fe = fe_assemble(spec, rho)?;
    let sol: MarchingSolution = be_march(&fe, spec, steps)?;
    let mut err = 0.0;
    for (n, u) in sol.states.iter().enumerate().skip(1) {
        let t = n as f64 * sol.dt;
        let e: Vec<f64> = u.iter().zip(&fe.nodes).map(|(v, &x)| v - exact(x, t)).collect();
        err += sol.dt * e.iter().zip(fe.mass.matvec(&e)).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(BeErrorRow {
        elements: fe.n_elements(),
        steps,
        l2_error: err.sqrt(),
        j_error: (crate::baselines::be_objective(&fe, &sol) - j_exact).abs(),
    })
}

/// Backward Euler / linear elements on the manufactured problem for every
/// `(refinement, steps)` pair.
pub fn be_convergence(setup: &ManufacturedSetup, runs: &[(usize, usize)]) -> Result<Vec<BeErrorRow>> {
    let (spec, rho, sol) = setup.problem(1, 1)?;
    let u = sol.u.clone();
    let j_exact = space_time_integral(&spec.breakpoints, spec.t_final, |x, t| u(x, t).powi(2))?;
    runs.iter()
        .map(|&(m, steps)| {
            let (fine, fine_rho) = refine_partition(&spec, &rho, m)?;
            be_error(&fine, &fine_rho, steps, &|x, t| u(x, t), j_exact)
        })
        .collect()
}

/// State and objective errors on the two-subdomain problem at a fixed
/// diffusivity pair, against the modal expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalRow {
    pub n: usize,
    pub state_error: f64,
    pub j_rel_error: f64,
}

pub fn functional_convergence(
    setup: &TwoDomainSetup,
    kappa: (f64, f64),
    degrees: &[usize],
    n_modes: usize,
) -> Result<Vec<FunctionalRow>> {
    let reference = setup.reference(n_modes)?;
    let exact = reference.expand(kappa.0, kappa.1)?;
    let j_exact = exact.objective(setup.t_final)?;
    let u0 = setup.initial();
    degrees
        .iter()
        .map(|&n| {
            let spec = setup.problem(n, n);
            let sat = sat_for_problem(&spec, &SatOverrides::default())?;
            let disc = Discretization::new(spec, sat)?;
            let u = solve_forward(&disc.assemble_kappa(&[kappa.0, kappa.1])?)?;
            // The expansion converges slowly at t = 0, where the data is known.
            let state_error = st_l2_error(&disc, &u, |x, t| if t == 0.0 { u0(x) } else { exact.evaluate(x, t) });
            Ok(FunctionalRow {
                n,
                state_error,
                j_rel_error: (objective(&u, &disc.ops) - j_exact).abs() / j_exact.abs(),
            })
        })
        .collect()
}

/// Terminal energy against the bound from the initial data for a problem
/// with homogeneous source and boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCheck {
    pub terminal: f64,
    pub initial: f64,
    /// `1 / (2σ₀ - 1)`, or `None` when `σ₀ ≤ 1/2` leaves no bound.
    pub factor: Option<f64>,
    /// `σ₀² / (2σ₀ - 1)`, the constant obtained by completing the square
    /// for the penalty `σ₀ (R_s u - q)`. Both agree at `σ₀ = 1`; for
    /// `σ₀ > 1` only this one is a valid bound.
    pub sharp_factor: Option<f64>,
}

fn within(terminal: f64, initial: f64, factor: Option<f64>) -> bool {
    factor.is_some_and(|c| terminal <= c * initial * (1.0 + 1e-12) + 1e-14)
}

impl EnergyCheck {
    pub fn holds(&self) -> bool {
        within(self.terminal, self.initial, self.factor)
    }

    pub fn holds_sharp(&self) -> bool {
        within(self.terminal, self.initial, self.sharp_factor)
    }
}

pub fn energy_check(spec: &ProblemSpec, sat: SatCoefficients, rho: &[f64]) -> Result<EnergyCheck> {
    let sigma0 = sat.sigma0;
    let disc = Discretization::new(spec.clone(), sat)?;
    let u = solve_forward(&disc.assemble(rho)?)?;
    let n = disc.block_size();
    let mut terminal = 0.0;
    let mut initial = 0.0;
    for (k, op) in disc.ops.iter().enumerate() {
        terminal += op.face_norm_sq(Face::North, &u[k * n..(k + 1) * n]);
        let q = op.sample(|x, _| (spec.initial)(x));
        initial += op.face_norm_sq(Face::South, &q);
    }
    Ok(EnergyCheck {
        terminal,
        initial,
        factor: (sigma0 > 0.5).then(|| 1.0 / (2.0 * sigma0 - 1.0)),
        sharp_factor: (sigma0 > 0.5).then(|| sigma0 * sigma0 / (2.0 * sigma0 - 1.0)),
    })
}

/// Optimum of the two-subdomain problem along the budget line, found by
/// scalar minimization of the modal-expansion objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptimum {
    pub kappa1: f64,
    pub kappa2: f64,
    pub objective: f64,
    pub evaluations: usize,
}

pub fn reference_optimum(setup: &TwoDomainSetup, n_modes: usize, tol: f64) -> Result<ReferenceOptimum> {
    let reference: ModalReference = setup.reference(n_modes)?;
    let m = setup.material();
    let budget = 2.0 * setup.volume_bound;
    let span = m.kappa_max - m.kappa_min;
    // κ = κ_min + span ρ with ρ₁ + ρ₂ = 2V*; keep both diffusivities positive.
    let lo_rho = (budget - 1.0).max(0.0);
    let hi_rho = budget.min(1.0);
    let edge = 1e-6 * (hi_rho - lo_rho);
    let to_kappa = |r1: f64| (m.kappa_min + span * r1, m.kappa_min + span * (budget - r1));
    let best = scalar_minimize(
        |r1| {
            let (k1, k2) = to_kappa(r1);
            reference.objective(k1, k2)
        },
        lo_rho + edge,
        hi_rho - edge,
        tol,
    )?;
    let (k1, k2) = to_kappa(best.x);
    Ok(ReferenceOptimum {
        kappa1: k1,
        kappa2: k2,
        objective: best.f,
        evaluations: best.evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationRow {
    pub degree_x: usize,
    pub degree_t: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub objective: f64,
    pub design_error: f64,
    pub objective_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// MMA on the space-time discretization at one resolution, compared with
/// the reference optimum.
pub fn crossvalidate_point(
    setup: &TwoDomainSetup,
    reference: &ReferenceOptimum,
    resolution: (usize, usize),
    tol: Tolerances,
    max_iters: usize,
    mma: MmaConfig,
) -> Result<CrossValidationRow> {
    let spec = setup.problem(resolution.0, resolution.1);
    let sat = sat_for_problem(&spec, &SatOverrides::default())?;
    let problem = SpaceTimeProblem {
        disc: Discretization::new(spec, sat)?,
        volume_bound: setup.volume_bound,
    };
    let initial = problem.uniform_design();
    let trace = run_topology_optimization(&problem, &initial, tol, max_iters, mma)?;
    let kap = problem.disc.kappas(&trace.final_rho)?;
    let diff = (kap[0] - reference.kappa1).abs().max((kap[1] - reference.kappa2).abs());
    Ok(CrossValidationRow {
        degree_x: resolution.0,
        degree_t: resolution.1,
        kappa1: kap[0],
        kappa2: kap[1],
        objective: trace.final_objective,
        design_error: diff / reference.kappa1.abs().max(reference.kappa2.abs()),
        objective_error: (trace.final_objective - reference.objective).abs() / reference.objective.abs(),
        iterations: trace.iterations(),
        converged: trace.stop == crate::optimizer::StopReason::DesignConverged,
    })
}

pub fn crossvalidate_optimum(
    setup: &TwoDomainSetup,
    reference: &ReferenceOptimum,
    resolutions: &[(usize, usize)],
    tol: Tolerances,
    max_iters: usize,
    mma: MmaConfig,
) -> Result<Vec<CrossValidationRow>> {
    resolutions
        .iter()
        .map(|&r| crossvalidate_point(setup, reference, r, tol, max_iters, mma))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    StSe,
    BeFe,
    BeFeAao,
}

impl SolverKind {
    pub fn label(self) -> &'static str {
        match self {
            SolverKind::StSe => "st-se",
            SolverKind::BeFe => "be-fe",
            SolverKind::BeFeAao => "be-fe-aao",
        }
    }
}

/// One temporal resolution of a solver sweep on the heat-sink problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    pub solver: SolverKind,
    /// Temporal degree for the space-time solver, step count otherwise.
    pub nt: usize,
    pub dof: usize,
    /// Median wall time of the repetitions.
    pub wall_s: f64,
    pub iterations: usize,
    pub objective: f64,
    pub rho: Vec<f64>,
    /// `‖ρ⁽ⁱ⁾ - ρ⁽ⁱ⁻¹⁾‖∞` against the previous level.
    pub delta_rho_inf: Option<f64>,
    pub j_rel: Option<f64>,
    /// Per-iteration design change of the optimization at this level.
    pub history: Vec<f64>,
}

/// A design problem for one solver at one temporal resolution.
pub fn heat_sink_problem(
    setup: &HeatSinkSetup,
    solver: SolverKind,
    nt: usize,
    sat: &SatOverrides,
) -> Result<(Box<dyn DesignProblem>, usize)> {
    match solver {
        SolverKind::StSe => {
            let spec = setup.problem(nt);
            let dof = spec.total_unknowns();
            let coeffs = sat_for_problem(&spec, sat)?;
            let p = SpaceTimeProblem {
                disc: Discretization::new(spec, coeffs)?,
                volume_bound: setup.volume_bound,
            };
            Ok((Box::new(p), dof))
        }
        SolverKind::BeFe | SolverKind::BeFeAao => {
            let p = BackwardEulerProblem {
                spec: setup.problem(1),
                n_steps: nt,
                solver: if solver == SolverKind::BeFe {
                    BeSolver::March
                } else {
                    BeSolver::AllAtOnce
                },
                volume_bound: setup.volume_bound,
            };
            let dof = p.dof();
            Ok((Box::new(p), dof))
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_level(
    setup: &HeatSinkSetup,
    solver: SolverKind,
    nt: usize,
    sat: &SatOverrides,
    tol: Tolerances,
    max_iters: usize,
    mma: MmaConfig,
    repetitions: usize,
) -> Result<SweepLevel> {
    let (problem, dof) = heat_sink_problem(setup, solver, nt, sat)?;
    let initial = problem.uniform_design();
    let mut times = Vec::new();
    let mut trace = None;
    for _ in 0..repetitions.max(1) {
        let tr = run_topology_optimization(problem.as_ref(), &initial, tol, max_iters, mma)?;
        times.push(tr.total_wall_s());
        trace = Some(tr);
    }
    let trace = trace.expect("at least one repetition");
    times.sort_by(f64::total_cmp);
    Ok(SweepLevel {
        solver,
        nt,
        dof,
        wall_s: times[times.len() / 2],
        iterations: trace.iterations(),
        objective: trace.final_objective,
        history: trace.records.iter().map(|r| r.delta_rho_inf).collect(),
        rho: trace.final_rho,
        delta_rho_inf: None,
        j_rel: None,
    })
}

/// Fills the level-to-level design and objective changes of a sweep sorted
/// by resolution.
pub fn attach_level_changes(levels: &mut [SweepLevel]) {
    for i in 1..levels.len() {
        let (prev, cur) = levels.split_at_mut(i);
        let p = &prev[i - 1];
        cur[0].delta_rho_inf = Some(max_abs_diff(&cur[0].rho, &p.rho));
        cur[0].j_rel = Some(relative_change(cur[0].objective, p.objective));
    }
}

/// First level whose design change is at or below `tol`.
pub fn first_level_below(levels: &[SweepLevel], tol: f64) -> Option<usize> {
    levels
        .iter()
        .find(|l| l.delta_rho_inf.is_some_and(|d| d <= tol))
        .map(|l| l.nt)
}

/// Resolution at which the design change has stayed below `tol` for two
/// consecutive sweeps.
pub fn declared_convergence(levels: &[SweepLevel], tol: f64) -> Option<usize> {
    levels
        .windows(2)
        .find(|w| w.iter().all(|l| l.delta_rho_inf.is_some_and(|d| d < tol)))
        .map(|w| w[1].nt)
}
