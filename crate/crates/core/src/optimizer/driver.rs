//! Optimization loop: forward solve, adjoint, sensitivities, MMA update.

use serde::{Deserialize, Serialize};

use crate::adjoint;
use crate::error::{invalid, Error, Result};
use crate::heat::Discretization;
use crate::optimizer::mma::{mma_update, MmaConfig, MmaState};

/// Guard in the relative objective change denominator.
pub const J_REL_EPS: f64 = 1e-12;

/// A design problem with one volume constraint `Σ ρ_k V_k ≤ V*`.
pub trait DesignProblem {
    fn volumes(&self) -> Vec<f64>;
    fn volume_bound(&self) -> f64;
    /// Objective and gradient at `rho`.
    fn evaluate(&self, rho: &[f64]) -> Result<(f64, Vec<f64>)>;
    /// Objective only; defaults to a full evaluation.
    fn objective(&self, rho: &[f64]) -> Result<f64> {
        Ok(self.evaluate(rho)?.0)
    }

    /// Uniform design that exhausts the volume budget.
    fn uniform_design(&self) -> Vec<f64> {
        let v = self.volumes();
        let fill = (self.volume_bound() / v.iter().sum::<f64>()).clamp(0.0, 1.0);
        vec![fill; v.len()]
    }
}

/// The space-time spectral element problem.
#[derive(Debug, Clone)]
pub struct SpaceTimeProblem {
    pub disc: Discretization,
    pub volume_bound: f64,
}

impl DesignProblem for SpaceTimeProblem {
    fn volumes(&self) -> Vec<f64> {
        self.disc.spec.element_lengths()
    }

    fn volume_bound(&self) -> f64 {
        self.volume_bound
    }

    fn evaluate(&self, rho: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ev = adjoint::evaluate(&self.disc, rho)?;
        Ok((ev.objective, ev.gradient))
    }

    fn objective(&self, rho: &[f64]) -> Result<f64> {
        adjoint::evaluate_objective(&self.disc, rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tau_rho: f64,
    pub tau_j: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tau_rho: 1e-4,
            tau_j: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Design after the update of this iteration.
    pub rho: Vec<f64>,
    /// Objective at the design entering this iteration.
    pub objective: f64,
    pub delta_rho_inf: f64,
    /// Relative objective change against the previous iteration.
    pub j_rel: Option<f64>,
    pub wall_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    DesignConverged,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
    pub final_rho: Vec<f64>,
    pub final_objective: f64,
    /// Whether the last relative objective change fell below `τ_J`.
    pub objective_converged: bool,
}

impl OptimizationTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn total_wall_s(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.wall_s)
    }
}

/// `|a - b| / max(|b|, ε)`.
pub fn relative_change(current: f64, previous: f64) -> f64 {
    (current - previous).abs() / previous.abs().max(J_REL_EPS)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    pub(crate) fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    /// Elapsed seconds; always zero where no monotonic clock is available.
    pub(crate) fn elapsed(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64()
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

/// Runs MMA until `‖Δρ‖∞ < τ_ρ` or `max_iters` updates.
pub fn run_topology_optimization<P: DesignProblem + ?Sized>(
    problem: &P,
    initial: &[f64],
    tol: Tolerances,
    max_iters: usize,
    config: MmaConfig,
) -> Result<OptimizationTrace> {
    let volumes = problem.volumes();
    if initial.len() != volumes.len() {
        return invalid("initial design length does not match the problem");
    }
    if !(tol.tau_rho > 0.0) || !(tol.tau_j > 0.0) {
        return invalid("tolerances must be positive");
    }
    if max_iters == 0 {
        return invalid("at least one iteration is required");
    }
    let clock = Stopwatch::start();
    let mut state = MmaState::new(volumes.len(), config);
    let mut rho = initial.to_vec();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut stop = StopReason::MaxIterations;
    let context = |iter: usize, e: Error| match e {
        Error::NumericalFailure(m) => Error::NumericalFailure(format!("iteration {iter}: {m}")),
        Error::InvalidArgument(m) => Error::InvalidArgument(format!("iteration {iter}: {m}")),
        other => other,
    };
    for iter in 1..=max_iters {
        let (j, grad) = problem.evaluate(&rho).map_err(|e| context(iter, e))?;
        let new =
            mma_update(&rho, &grad, &volumes, problem.volume_bound(), &mut state).map_err(|e| context(iter, e))?;
        let delta = max_abs_diff(&new, &rho);
        let j_rel = records.last().map(|r| relative_change(j, r.objective));
        rho = new;
        records.push(IterationRecord {
            iter,
            rho: rho.clone(),
            objective: j,
            delta_rho_inf: delta,
            j_rel,
            wall_s: clock.elapsed(),
        });
        if delta < tol.tau_rho {
            stop = StopReason::DesignConverged;
            break;
        }
    }
    let final_objective = problem.objective(&rho)?;
    let last_j = records.last().map(|r| r.objective).unwrap_or(final_objective);
    Ok(OptimizationTrace {
        objective_converged: relative_change(final_objective, last_j) < tol.tau_j,
        records,
        stop,
        final_rho: rho,
        final_objective,
    })
}
