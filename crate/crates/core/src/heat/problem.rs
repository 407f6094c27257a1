use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sbp::build_sbp_1d;
use crate::spacetime::{build_element_ops, SpaceTimeElementOps};

pub type Fn1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

const RHO_SLACK: f64 = 1e-12;

/// Material interpolation `κ(ρ) = κ_min + (κ_max - κ_min) ρ^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialModel {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub p: f64,
}

impl MaterialModel {
    pub fn new(kappa_min: f64, kappa_max: f64, p: f64) -> Result<Self> {
        let m = Self {
            kappa_min,
            kappa_max,
            p,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_min >= 0.0) || !(self.kappa_max > 0.0) || self.kappa_max < self.kappa_min {
            return invalid(format!(
                "need 0 <= kappa_min <= kappa_max and kappa_max > 0, got [{}, {}]",
                self.kappa_min, self.kappa_max
            ));
        }
        if !(self.p >= 1.0) {
            return invalid(format!("penalization exponent must be >= 1, got {}", self.p));
        }
        Ok(())
    }
}

fn checked_rho(rho: f64) -> Result<f64> {
    if !(rho >= -RHO_SLACK && rho <= 1.0 + RHO_SLACK) {
        return invalid(format!("design value {rho} outside [0, 1]"));
    }
    Ok(rho.clamp(0.0, 1.0))
}

pub fn kappa(rho: f64, m: &MaterialModel) -> Result<f64> {
    let r = checked_rho(rho)?;
    Ok(m.kappa_min + (m.kappa_max - m.kappa_min) * r.powf(m.p))
}

pub fn dkappa_drho(rho: f64, m: &MaterialModel) -> Result<f64> {
    let r = checked_rho(rho)?;
    let scale = m.p * (m.kappa_max - m.kappa_min);
    if m.p == 1.0 {
        return Ok(scale);
    }
    Ok(scale * r.powf(m.p - 1.0))
}

/// Per-element design variables with the volume budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignField {
    pub rho: Vec<f64>,
    pub element_volumes: Vec<f64>,
    pub volume_bound: f64,
}

impl DesignField {
    /// Uniform design `ρ_k = V* / Σ V_k` that exactly exhausts the budget.
    pub fn uniform(element_volumes: Vec<f64>, volume_bound: f64) -> Result<Self> {
        let total: f64 = element_volumes.iter().sum();
        if element_volumes.iter().any(|v| !(*v > 0.0)) {
            return invalid("element volumes must be positive");
        }
        let fill = volume_bound / total;
        if !(0.0..=1.0).contains(&fill) {
            return invalid(format!("volume bound {volume_bound} outside [0, {total}]"));
        }
        Ok(Self {
            rho: vec![fill; element_volumes.len()],
            element_volumes,
            volume_bound,
        })
    }

    pub fn volume(&self) -> f64 {
        self.rho.iter().zip(&self.element_volumes).map(|(r, v)| r * v).sum()
    }

    pub fn is_feasible(&self, tol: f64) -> bool {
        self.rho.iter().all(|r| (-tol..=1.0 + tol).contains(r)) && self.volume() <= self.volume_bound + tol
    }
}

/// Boundary condition at one end of the spatial domain.
#[derive(Clone)]
pub enum BoundaryCondition {
    /// `u = h(t)`.
    Dirichlet(Fn1),
    /// Prescribed flux `κ u_x = g(t)`.
    Neumann(Fn1),
}

impl BoundaryCondition {
    pub fn dirichlet(h: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Dirichlet(Arc::new(h))
    }

    pub fn neumann(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::Neumann(Arc::new(g))
    }

    pub fn homogeneous_dirichlet() -> Self {
        Self::dirichlet(|_| 0.0)
    }

    pub fn homogeneous_neumann() -> Self {
        Self::neumann(|_| 0.0)
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Self::Dirichlet(_))
    }

    pub fn data(&self, t: f64) -> f64 {
        match self {
            Self::Dirichlet(f) | Self::Neumann(f) => f(t),
        }
    }
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dirichlet(_) => f.write_str("Dirichlet"),
            Self::Neumann(_) => f.write_str("Neumann"),
        }
    }
}

/// Continuous problem data and its space-time element discretization.
///
/// Each element carries `degree_x + 1` spatial and `degree_t + 1` temporal
/// LGL nodes; there is a single time element covering `[0, T]`.
#[derive(Clone)]
pub struct ProblemSpec {
    /// Element partition `a = x_0 < x_1 < ... < x_K = b`.
    pub breakpoints: Vec<f64>,
    pub t_final: f64,
    pub degree_x: usize,
    pub degree_t: usize,
    pub west: BoundaryCondition,
    pub east: BoundaryCondition,
    pub initial: Fn1,
    /// Source `f(x, t)`.
    pub source: Fn2,
    pub material: MaterialModel,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("breakpoints", &self.breakpoints)
            .field("t_final", &self.t_final)
            .field("degree_x", &self.degree_x)
            .field("degree_t", &self.degree_t)
            .field("west", &self.west)
            .field("east", &self.east)
            .field("material", &self.material)
            .finish()
    }
}

pub fn uniform_breakpoints(a: f64, b: f64, k: usize) -> Vec<f64> {
    (0..=k)
        .map(|i| if i == k { b } else { a + (b - a) * i as f64 / k as f64 })
        .collect()
}

impl ProblemSpec {
    pub fn n_elements(&self) -> usize {
        self.breakpoints.len().saturating_sub(1)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn element_interval(&self, k: usize) -> (f64, f64) {
        (self.breakpoints[k], self.breakpoints[k + 1])
    }

    /// Spatial element lengths, used as the element volumes of the design.
    pub fn element_lengths(&self) -> Vec<f64> {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Unknowns per element, `(N_x + 1)(N_t + 1)`.
    pub fn nodes_per_element(&self) -> usize {
        (self.degree_x + 1) * (self.degree_t + 1)
    }

    pub fn total_unknowns(&self) -> usize {
        self.n_elements() * self.nodes_per_element()
    }

    pub fn validate(&self) -> Result<()> {
        if self.breakpoints.len() < 2 {
            return invalid("need at least one element");
        }
        if self.breakpoints.iter().any(|x| !x.is_finite()) {
            return invalid("element breakpoints must be finite");
        }
        if self.breakpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return invalid("element breakpoints must be strictly increasing");
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return invalid(format!("terminal time must be positive, got {}", self.t_final));
        }
        if self.degree_x < 1 || self.degree_t < 1 {
            return invalid("polynomial degrees must be at least 1");
        }
        self.material.validate()
    }

    /// Builds the space-time operators of every element.
    pub fn element_ops(&self) -> Result<Vec<Arc<SpaceTimeElementOps>>> {
        self.validate()?;
        let op_t = build_sbp_1d(self.degree_t + 1, (0.0, self.t_final))?;
        (0..self.n_elements())
            .map(|k| {
                let op_x = build_sbp_1d(self.degree_x + 1, self.element_interval(k))?;
                Ok(Arc::new(build_element_ops(op_x, op_t.clone())?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> MaterialModel {
        MaterialModel::new(0.0, 1.0, 3.0).unwrap()
    }

    #[test]
    fn kappa_endpoints_and_interior() {
        let m = MaterialModel::new(0.1, 2.0, 3.0).unwrap();
        assert_eq!(kappa(0.0, &m).unwrap(), 0.1);
        assert_eq!(kappa(1.0, &m).unwrap(), 2.0);
        assert_eq!(kappa(0.5, &cubic()).unwrap(), 0.125);
        let linear = MaterialModel::new(0.0, 1.0, 1.0).unwrap();
        assert_eq!(kappa(0.5, &linear).unwrap(), 0.5);
    }

    #[test]
    fn kappa_derivative() {
        assert_eq!(dkappa_drho(1.0, &cubic()).unwrap(), 3.0);
        assert_eq!(dkappa_drho(0.0, &cubic()).unwrap(), 0.0);
        assert_eq!(dkappa_drho(0.5, &cubic()).unwrap(), 0.75);
        let linear = MaterialModel::new(0.25, 1.0, 1.0).unwrap();
        assert_eq!(dkappa_drho(0.0, &linear).unwrap(), 0.75);
    }

    #[test]
    fn kappa_rejects_out_of_range_design() {
        assert!(kappa(1.1, &cubic()).is_err());
        assert!(kappa(-1e-6, &cubic()).is_err());
        assert!(dkappa_drho(f64::NAN, &cubic()).is_err());
        // Within round-off the design is clamped.
        assert_eq!(kappa(1.0 + 1e-13, &cubic()).unwrap(), 1.0);
    }

    #[test]
    fn kappa_monotone() {
        let m = MaterialModel::new(1e-3, 1.0, 3.0).unwrap();
        let mut prev = kappa(0.0, &m).unwrap();
        for i in 1..=100 {
            let k = kappa(i as f64 / 100.0, &m).unwrap();
            assert!(k >= prev);
            prev = k;
        }
    }

    #[test]
    fn material_validation() {
        assert!(MaterialModel::new(-0.1, 1.0, 1.0).is_err());
        assert!(MaterialModel::new(0.5, 0.2, 1.0).is_err());
        assert!(MaterialModel::new(0.0, 1.0, 0.5).is_err());
        assert!(MaterialModel::new(0.5, 0.5, 1.0).is_ok());
    }

    #[test]
    fn uniform_design_is_tight() {
        let d = DesignField::uniform(vec![0.25; 4], 0.5).unwrap();
        assert_eq!(d.rho, vec![0.5; 4]);
        assert!(d.is_feasible(1e-12));
        assert!(DesignField::uniform(vec![0.25; 4], 2.0).is_err());
    }

    #[test]
    fn breakpoints_end_exactly() {
        let b = uniform_breakpoints(-2.0, 1.0, 10);
        assert_eq!(b.len(), 11);
        assert_eq!(b[0], -2.0);
        assert_eq!(b[10], 1.0);
    }
}
