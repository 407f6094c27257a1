use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::heat::problem::{MaterialModel, ProblemSpec};
use crate::sbp::SbpOperator1D;

/// SAT penalty coefficients.
///
/// The interface coefficients follow the one-parameter family
/// `σ₂ = s`, `σ₄ = 1 + s`, `τ₁ = -(1 + s)`, `τ₂ = -s` with `σ₃ = σ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatCoefficients {
    pub sigma0: f64,
    pub sigma_w: f64,
    pub sigma_e: f64,
    pub s: f64,
    pub sigma1: f64,
}

impl SatCoefficients {
    pub fn sigma2(&self) -> f64 {
        self.s
    }

    pub fn sigma3(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma4(&self) -> f64 {
        1.0 + self.s
    }

    pub fn tau1(&self) -> f64 {
        -(1.0 + self.s)
    }

    pub fn tau2(&self) -> f64 {
        -self.s
    }

    /// Lists the violated stability conditions for the given boundary
    /// operators; an empty list means the energy estimate applies.
    pub fn stability_violations(
        &self,
        west_op: &SbpOperator1D,
        east_op: &SbpOperator1D,
        kappa_max: f64,
    ) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.sigma0 > 0.5) {
            out.push(format!("sigma0 = {} must exceed 1/2", self.sigma0));
        }
        let w = kappa_max / (2.0 * west_op.p_first());
        if !(self.sigma_w >= w * (1.0 - 1e-14)) {
            out.push(format!("sigma_w = {} below {w}", self.sigma_w));
        }
        let e = kappa_max / (2.0 * east_op.p_last());
        if !(self.sigma_e >= e * (1.0 - 1e-14)) {
            out.push(format!("sigma_e = {} below {e}", self.sigma_e));
        }
        if !(self.sigma1 > 0.0) {
            out.push(format!("sigma1 = {} must be positive", self.sigma1));
        }
        if !(self.s > 0.0) {
            out.push(format!("s = {} must be positive", self.s));
        }
        out
    }
}

/// Default coefficients from the spatial operator of the first element.
pub fn choose_sat_coefficients(
    op_x: &SbpOperator1D,
    m: &MaterialModel,
    s: f64,
    safety: f64,
) -> Result<SatCoefficients> {
    if !(s > 0.0) {
        return invalid(format!("interface parameter s must be positive, got {s}"));
    }
    if !(safety >= 1.0) {
        return invalid(format!("safety factor must be >= 1, got {safety}"));
    }
    Ok(SatCoefficients {
        sigma0: 1.0,
        sigma_w: safety * m.kappa_max / (2.0 * op_x.p_first()),
        sigma_e: safety * m.kappa_max / (2.0 * op_x.p_last()),
        s,
        sigma1: m.kappa_max / op_x.length(),
    })
}

/// Optional overrides applied on top of the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatOverrides {
    pub sigma0: Option<f64>,
    pub sigma_w: Option<f64>,
    pub sigma_e: Option<f64>,
    pub s: Option<f64>,
    pub sigma1: Option<f64>,
    pub safety: Option<f64>,
}

impl SatOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Default coefficients for a whole problem: boundary penalties use the
/// first and last elements, `σ₁` uses the shortest element.
pub fn sat_for_problem(spec: &ProblemSpec, overrides: &SatOverrides) -> Result<SatCoefficients> {
    spec.validate()?;
    let n = spec.degree_x + 1;
    let first = crate::sbp::build_sbp_1d(n, spec.element_interval(0))?;
    let last = crate::sbp::build_sbp_1d(n, spec.element_interval(spec.n_elements() - 1))?;
    let safety = overrides.safety.unwrap_or(1.0);
    let s = overrides.s.unwrap_or(0.5);
    let mut sat = choose_sat_coefficients(&first, &spec.material, s, safety)?;
    sat.sigma_e = safety * spec.material.kappa_max / (2.0 * last.p_last());
    let h_min = spec.element_lengths().into_iter().fold(f64::INFINITY, f64::min);
    sat.sigma1 = spec.material.kappa_max / h_min;
    if let Some(v) = overrides.sigma0 {
        sat.sigma0 = v;
    }
    if let Some(v) = overrides.sigma_w {
        sat.sigma_w = v;
    }
    if let Some(v) = overrides.sigma_e {
        sat.sigma_e = v;
    }
    if let Some(v) = overrides.sigma1 {
        sat.sigma1 = v;
    }
    for (name, v) in [
        ("sigma0", sat.sigma0),
        ("sigma_w", sat.sigma_w),
        ("sigma_e", sat.sigma_e),
        ("sigma1", sat.sigma1),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return invalid(format!("{name} must be positive and finite, got {v}"));
        }
    }
    Ok(sat)
}
