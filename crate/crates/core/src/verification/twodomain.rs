//! Closed-form solution of the heat equation on `[0, 1]` with a material
//! interface at `ξ`, constant source `f`, `u(0) = 0` and `u(1) = u_R`:
//! a piecewise-quadratic steady state plus one decaying eigenmode.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Steady coefficients `(A₁, A₂, B₂)` of
/// `u_s = -f x²/(2κ₁) + A₁ x` on `[0, ξ]` and
/// `u_s = -f x²/(2κ₂) + A₂ x + B₂` on `[ξ, 1]`.
pub fn steady_coefficients(k1: f64, k2: f64, xi: f64, f: f64, u_r: f64) -> Result<(f64, f64, f64)> {
    check_inputs(k1, k2, xi)?;
    let a1 = (k2 * u_r + 0.5 * f * (1.0 + xi * xi * (k2 / k1 - 1.0))) / (xi * k2 + (1.0 - xi) * k1);
    let a2 = k1 / k2 * a1;
    let b2 = u_r + f / (2.0 * k2) - a2;
    Ok((a1, a2, b2))
}

fn check_inputs(k1: f64, k2: f64, xi: f64) -> Result<()> {
    if !(k1 > 0.0 && k2 > 0.0) || !k1.is_finite() || !k2.is_finite() {
        return invalid(format!("diffusivities must be positive, got {k1}, {k2}"));
    }
    if !(xi > 0.0 && xi < 1.0) {
        return invalid(format!("interface must lie in (0, 1), got {xi}"));
    }
    Ok(())
}

/// `√κ₁ cot(α₁ ξ) + √κ₂ cot(α₂ (1 - ξ))` with `αᵢ = √(λ/κᵢ)`.
pub fn eigen_condition(lambda: f64, k1: f64, k2: f64, xi: f64) -> f64 {
    let s = lambda.sqrt();
    let a = s / k1.sqrt() * xi;
    let b = s / k2.sqrt() * (1.0 - xi);
    k1.sqrt() / a.tan() + k2.sqrt() / b.tan()
}

/// Upper end of the eigenvalue scan relative to `max(κ₁, κ₂)`.
pub const EIGEN_SCAN_FACTOR: f64 = 400.0;

/// Root number `branch` (0 = smallest) of the eigenvalue condition.
///
/// Between consecutive poles of either cotangent the condition decreases
/// from `+∞` to `-∞`, so each such interval holds exactly one root.
pub fn transient_eigenvalue(k1: f64, k2: f64, xi: f64, branch: usize) -> Result<f64> {
    check_inputs(k1, k2, xi)?;
    let lambda_max = EIGEN_SCAN_FACTOR * k1.max(k2);
    let mut poles = Vec::new();
    for (kappa, len) in [(k1, xi), (k2, 1.0 - xi)] {
        let mut m = 1.0;
        loop {
            let p = kappa * (m * std::f64::consts::PI / len).powi(2);
            if p > lambda_max {
                break;
            }
            poles.push(p);
            m += 1.0;
        }
    }
    poles.sort_by(f64::total_cmp);
    poles.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    let lo = if branch == 0 {
        0.0
    } else {
        *poles.get(branch - 1).ok_or_else(|| scan_error(branch, lambda_max))?
    };
    let hi = *poles.get(branch).ok_or_else(|| scan_error(branch, lambda_max))?;
    // Bisection in `√λ`, where the cotangents are evenly resolved.
    let (mut a, mut b) = (lo.sqrt(), hi.sqrt());
    loop {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || (b - a) <= 1e-15 * b {
            return Ok(m * m);
        }
        let g = eigen_condition(m * m, k1, k2, xi);
        if g > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
}

fn scan_error(branch: usize, lambda_max: f64) -> Error {
    Error::NumericalFailure(format!(
        "no bracket for eigenvalue branch {branch} in (0, {lambda_max}]"
    ))
}

/// The two-subdomain solution `u = u_s(x) + e^{-λt} w(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoDomainSolution {
    pub k1: f64,
    pub k2: f64,
    pub xi: f64,
    pub f: f64,
    pub u_r: f64,
    pub a1: f64,
    pub a2: f64,
    pub b2: f64,
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub r: f64,
}

impl TwoDomainSolution {
    pub fn new(k1: f64, k2: f64, xi: f64, f: f64, u_r: f64, branch: usize) -> Result<Self> {
        let (a1, a2, b2) = steady_coefficients(k1, k2, xi, f, u_r)?;
        let lambda = transient_eigenvalue(k1, k2, xi, branch)?;
        let alpha1 = (lambda / k1).sqrt();
        let alpha2 = (lambda / k2).sqrt();
        let r = (alpha1 * xi).sin() / (alpha2 * (1.0 - xi)).sin();
        Ok(Self {
            k1,
            k2,
            xi,
            f,
            u_r,
            a1,
            a2,
            b2,
            lambda,
            alpha1,
            alpha2,
            r,
        })
    }

    pub fn steady(&self, x: f64) -> f64 {
        if x <= self.xi {
            -self.f * x * x / (2.0 * self.k1) + self.a1 * x
        } else {
            -self.f * x * x / (2.0 * self.k2) + self.a2 * x + self.b2
        }
    }

    pub fn steady_dx(&self, x: f64) -> f64 {
        if x <= self.xi {
            -self.f * x / self.k1 + self.a1
        } else {
            -self.f * x / self.k2 + self.a2
        }
    }

    pub fn mode(&self, x: f64) -> f64 {
        if x <= self.xi {
            (self.alpha1 * x).sin()
        } else {
            self.r * (self.alpha2 * (1.0 - x)).sin()
        }
    }

    pub fn mode_dx(&self, x: f64) -> f64 {
        if x <= self.xi {
            self.alpha1 * (self.alpha1 * x).cos()
        } else {
            -self.r * self.alpha2 * (self.alpha2 * (1.0 - x)).cos()
        }
    }

    pub fn kappa_at(&self, x: f64) -> f64 {
        if x <= self.xi {
            self.k1
        } else {
            self.k2
        }
    }

    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        self.steady(x) + (-self.lambda * t).exp() * self.mode(x)
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        self.steady_dx(x) + (-self.lambda * t).exp() * self.mode_dx(x)
    }

    /// Value of the left (`left = true`) or right branch at `x`, ignoring
    /// which subdomain `x` lies in.
    pub fn branch_value(&self, left: bool, x: f64, t: f64) -> f64 {
        let e = (-self.lambda * t).exp();
        if left {
            -self.f * x * x / (2.0 * self.k1) + self.a1 * x + e * (self.alpha1 * x).sin()
        } else {
            -self.f * x * x / (2.0 * self.k2) + self.a2 * x + self.b2 + e * self.r * (self.alpha2 * (1.0 - x)).sin()
        }
    }

    /// Flux `κ u_x` of one branch at `x`.
    pub fn branch_flux(&self, left: bool, x: f64, t: f64) -> f64 {
        let e = (-self.lambda * t).exp();
        if left {
            self.k1 * (-self.f * x / self.k1 + self.a1 + e * self.alpha1 * (self.alpha1 * x).cos())
        } else {
            self.k2 * (-self.f * x / self.k2 + self.a2 - e * self.r * self.alpha2 * (self.alpha2 * (1.0 - x)).cos())
        }
    }

    pub fn eigen_residual(&self) -> f64 {
        eigen_condition(self.lambda, self.k1, self.k2, self.xi)
    }

    /// `κ₁ w'(ξ⁻) - κ₂ w'(ξ⁺)`.
    pub fn mode_flux_jump(&self) -> f64 {
        let l = self.k1 * self.alpha1 * (self.alpha1 * self.xi).cos();
        let r = -self.k2 * self.r * self.alpha2 * (self.alpha2 * (1.0 - self.xi)).cos();
        l - r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn homogeneous_linear_profile() {
        let (a1, a2, b2) = steady_coefficients(0.7, 0.7, 0.3, 0.0, 2.0).unwrap();
        assert!((a1 - 2.0).abs() < 1e-14 && (a2 - 2.0).abs() < 1e-14 && b2.abs() < 1e-14);
    }

    #[test]
    fn parabolic_profile() {
        let (a1, _, _) = steady_coefficients(1.0, 1.0, 0.5, 2.0, 0.0).unwrap();
        assert!((a1 - 1.0).abs() < 1e-14);
        let s = TwoDomainSolution::new(1.0, 1.0, 0.5, 2.0, 0.0, 0).unwrap();
        for x in [0.1, 0.5, 0.8] {
            assert!((s.steady(x) - (x - x * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn homogeneous_eigenvalue() {
        let l = transient_eigenvalue(1.0, 1.0, 0.5, 0).unwrap();
        assert!((l - PI * PI).abs() < 1e-10 * PI * PI);
        let l = transient_eigenvalue(0.3, 0.3, 0.5, 0).unwrap();
        assert!((l - 0.3 * PI * PI).abs() < 1e-10 * l);
    }

    #[test]
    fn heterogeneous_eigenvalue() {
        let s = TwoDomainSolution::new(4.0, 1.0, 0.5, 1.0, 1.0, 0).unwrap();
        assert!(s.eigen_residual().abs() <= 1e-12);
        assert!(s.mode_flux_jump().abs() <= 1e-11);
        assert!((s.branch_value(true, 0.5, 0.3) - s.branch_value(false, 0.5, 0.3)).abs() <= 1e-12);
    }

    #[test]
    fn boundary_values() {
        let s = TwoDomainSolution::new(0.4, 0.35, 0.5, 1.0, 1.0, 0).unwrap();
        for t in [0.0, 0.5, 3.0] {
            assert!(s.evaluate(0.0, t).abs() < 1e-14);
            assert!((s.evaluate(1.0, t) - 1.0).abs() < 1e-12);
        }
        assert!((s.evaluate(0.3, 200.0) - s.steady(0.3)).abs() < 1e-14);
    }

    #[test]
    fn scan_limit() {
        assert!(matches!(
            transient_eigenvalue(1.0, 1.0, 0.5, 50),
            Err(Error::NumericalFailure(_))
        ));
        assert!(transient_eigenvalue(-1.0, 1.0, 0.5, 0).is_err());
    }
}
