//! Ready-made problem setups: the two-subdomain validation problem, the
//! heat-sink benchmark and the heterogeneous manufactured-solution problem.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::heat::{kappa, uniform_breakpoints, BoundaryCondition, Fn1, MaterialModel, ProblemSpec};
use crate::verification::{flux_compatible_solution, mms_source, ManufacturedSolution, ModalReference};

/// Two elements split at `ξ`, `u(0) = 0`, `u(1) = u_R`, constant source,
/// linear interpolation with `κ = ρ` and the budget `κ₁ + κ₂ = 2 V*`.
/// The initial state is the closed-form solution at the nominal design
/// `κ₁ = κ₂ = κ_nom`, kept fixed for every design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TwoDomainSetup {
    pub xi: f64,
    pub f: f64,
    pub u_r: f64,
    pub t_final: f64,
    pub nominal_kappa: f64,
    pub volume_bound: f64,
}

impl Default for TwoDomainSetup {
    fn default() -> Self {
        Self {
            xi: 0.5,
            f: 1.0,
            u_r: 1.0,
            t_final: 1.0,
            nominal_kappa: 0.375,
            volume_bound: 0.375,
        }
    }
}

impl TwoDomainSetup {
    /// `u₀(x) = -f x²/(2κ) + (u_R + f/(2κ)) x + sin(πx)` at `κ = κ_nom`.
    pub fn initial(&self) -> Fn1 {
        let (f, u_r, k) = (self.f, self.u_r, self.nominal_kappa);
        Arc::new(move |x: f64| -f * x * x / (2.0 * k) + (u_r + f / (2.0 * k)) * x + (std::f64::consts::PI * x).sin())
    }

    pub fn material(&self) -> MaterialModel {
        MaterialModel {
            kappa_min: 0.0,
            kappa_max: 1.0,
            p: 1.0,
        }
    }

    pub fn problem(&self, degree_x: usize, degree_t: usize) -> ProblemSpec {
        let (f, u_r) = (self.f, self.u_r);
        ProblemSpec {
            breakpoints: vec![0.0, self.xi, 1.0],
            t_final: self.t_final,
            degree_x,
            degree_t,
            west: BoundaryCondition::homogeneous_dirichlet(),
            east: BoundaryCondition::dirichlet(move |_| u_r),
            initial: self.initial(),
            source: Arc::new(move |_, _| f),
            material: self.material(),
        }
    }

    pub fn reference(&self, n_modes: usize) -> Result<ModalReference> {
        ModalReference::new(self.xi, self.f, self.u_r, self.t_final, self.initial(), n_modes)
    }
}

/// Heat-sink benchmark on `[0, 1] x [0, T]`: insulated left end, zero
/// temperature on the right, zero initial state and source
/// `c + sin(10(x + t)) + sin(10 t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatSinkSetup {
    pub elements: usize,
    pub degree_x: usize,
    pub p: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub volume_bound: f64,
    pub source_constant: f64,
    pub t_final: f64,
}

impl Default for HeatSinkSetup {
    fn default() -> Self {
        Self {
            elements: 50,
            degree_x: 5,
            p: 3.0,
            kappa_min: 1e-3,
            kappa_max: 1.0,
            volume_bound: 0.5,
            source_constant: 10.0,
            t_final: 1.0,
        }
    }
}

impl HeatSinkSetup {
    pub fn material(&self) -> MaterialModel {
        MaterialModel {
            kappa_min: self.kappa_min,
            kappa_max: self.kappa_max,
            p: self.p,
        }
    }

    pub fn source(&self) -> crate::heat::Fn2 {
        let c = self.source_constant;
        Arc::new(move |x: f64, t: f64| c + (10.0 * (x + t)).sin() + (10.0 * t).sin())
    }

    pub fn problem(&self, degree_t: usize) -> ProblemSpec {
        ProblemSpec {
            breakpoints: uniform_breakpoints(0.0, 1.0, self.elements),
            t_final: self.t_final,
            degree_x: self.degree_x,
            degree_t,
            west: BoundaryCondition::homogeneous_neumann(),
            east: BoundaryCondition::homogeneous_dirichlet(),
            initial: Arc::new(|_| 0.0),
            source: self.source(),
            material: self.material(),
        }
    }
}

/// Heterogeneous manufactured problem on `[-2, 1] x [0, 1]` with homogeneous
/// Dirichlet conditions and a seeded random design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManufacturedSetup {
    pub a: f64,
    pub b: f64,
    pub t_final: f64,
    pub elements: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub p: f64,
    pub seed: u64,
}

impl Default for ManufacturedSetup {
    fn default() -> Self {
        Self {
            a: -2.0,
            b: 1.0,
            t_final: 1.0,
            elements: 10,
            kappa_min: 0.1,
            kappa_max: 1.0,
            p: 1.0,
            seed: 2024,
        }
    }
}

impl ManufacturedSetup {
    pub fn design(&self) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.elements).map(|_| rng.random::<f64>()).collect()
    }

    pub fn material(&self) -> MaterialModel {
        MaterialModel {
            kappa_min: self.kappa_min,
            kappa_max: self.kappa_max,
            p: self.p,
        }
    }

    /// Problem at degree `n` in space and time, the design, and the exact
    /// solution.
    pub fn problem(&self, degree_x: usize, degree_t: usize) -> Result<(ProblemSpec, Vec<f64>, ManufacturedSolution)> {
        let rho = self.design();
        let m = self.material();
        let kap: Vec<f64> = rho.iter().map(|&r| kappa(r, &m)).collect::<Result<_>>()?;
        let breakpoints = uniform_breakpoints(self.a, self.b, self.elements);
        let sol = flux_compatible_solution(&breakpoints, &kap)?;
        let u = sol.u.clone();
        let mut spec = ProblemSpec {
            breakpoints,
            t_final: self.t_final,
            degree_x,
            degree_t,
            west: BoundaryCondition::homogeneous_dirichlet(),
            east: BoundaryCondition::homogeneous_dirichlet(),
            initial: Arc::new(move |x| u(x, 0.0)),
            source: Arc::new(|_, _| 0.0),
            material: m,
        };
        spec.source = mms_source(&sol, &rho, &spec)?;
        Ok((spec, rho, sol))
    }
}
