//! Browser bindings. The plain functions do the work and are tested
//! natively; the `wasm_bindgen` wrappers only convert errors.

use stheat::heat::{sat_for_problem, Discretization, SatOverrides};
use stheat::optimizer::{run_topology_optimization, DesignProblem, MmaConfig, SpaceTimeProblem, Tolerances};
use stheat::presets::{HeatSinkSetup, TwoDomainSetup};
use stheat::verification::transient_eigenvalue;
use wasm_bindgen::prelude::*;

/// Objective of the two-subdomain problem at `κ₁` with `κ₂` from the
/// budget, from the space-time solver at degree `n` and from the modal
/// expansion.
pub fn two_domain_pair(kappa1: f64, n: usize, n_modes: usize) -> stheat::Result<(f64, f64)> {
    let setup = TwoDomainSetup::default();
    let kappa2 = 2.0 * setup.volume_bound - kappa1;
    let spec = setup.problem(n, n);
    let sat = sat_for_problem(&spec, &SatOverrides::default())?;
    let disc = Discretization::new(spec, sat)?;
    let discrete = stheat::adjoint::evaluate_objective_kappa(&disc, &[kappa1, kappa2])?;
    let modal = setup.reference(n_modes)?.objective(kappa1, kappa2)?;
    Ok((discrete, modal))
}

/// Result of a heat-sink optimization run.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct SinkDesign {
    rho: Vec<f64>,
    objectives: Vec<f64>,
    changes: Vec<f64>,
    converged: bool,
}

#[wasm_bindgen]
impl SinkDesign {
    /// Element densities from x = 0 to x = 1.
    #[wasm_bindgen(getter)]
    pub fn rho(&self) -> Vec<f64> {
        self.rho.clone()
    }

    /// Objective per iteration, then the final objective.
    #[wasm_bindgen(getter)]
    pub fn objectives(&self) -> Vec<f64> {
        self.objectives.clone()
    }

    /// Design change per iteration.
    #[wasm_bindgen(getter)]
    pub fn changes(&self) -> Vec<f64> {
        self.changes.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn converged(&self) -> bool {
        self.converged
    }
}

pub fn heat_sink(
    elements: usize,
    degree_t: usize,
    p: f64,
    volume: f64,
    max_iters: usize,
) -> stheat::Result<SinkDesign> {
    let setup = HeatSinkSetup {
        elements,
        degree_x: 4,
        p,
        volume_bound: volume,
        ..HeatSinkSetup::default()
    };
    let spec = setup.problem(degree_t);
    let sat = sat_for_problem(&spec, &SatOverrides::default())?;
    let problem = SpaceTimeProblem {
        disc: Discretization::new(spec, sat)?,
        volume_bound: volume,
    };
    let trace = run_topology_optimization(
        &problem,
        &problem.uniform_design(),
        Tolerances::default(),
        max_iters,
        MmaConfig::default(),
    )?;
    let mut objectives: Vec<f64> = trace.records.iter().map(|r| r.objective).collect();
    objectives.push(trace.final_objective);
    Ok(SinkDesign {
        changes: trace.records.iter().map(|r| r.delta_rho_inf).collect(),
        converged: trace.stop == stheat::optimizer::StopReason::DesignConverged,
        rho: trace.final_rho,
        objectives,
    })
}

fn js(e: stheat::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[J_discrete, J_modal]` for the two-subdomain problem.
#[wasm_bindgen(js_name = twoDomainObjective)]
pub fn two_domain_objective(kappa1: f64, degree: usize) -> Result<Vec<f64>, JsError> {
    let (a, b) = two_domain_pair(kappa1, degree, 200).map_err(js)?;
    Ok(vec![a, b])
}

#[wasm_bindgen(js_name = optimizeHeatSink)]
pub fn optimize_heat_sink(
    elements: usize,
    degree_t: usize,
    p: f64,
    volume: f64,
    max_iters: usize,
) -> Result<SinkDesign, JsError> {
    heat_sink(elements, degree_t, p, volume, max_iters).map_err(js)
}

/// Decay rate of the slowest transient mode of the two-subdomain problem
/// (`branch = 0`) or of higher modes.
#[wasm_bindgen(js_name = transientEigenvalue)]
pub fn eigenvalue(kappa1: f64, kappa2: f64, xi: f64, branch: usize) -> Result<f64, JsError> {
    transient_eigenvalue(kappa1, kappa2, xi, branch).map_err(js)
}
