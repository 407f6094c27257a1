//! Eigenfunction expansion of the two-subdomain problem with an arbitrary
//! initial state, used as an independent reference for the objective
//! `∫∫ u² dx dt`.
//!
//! With `u = u_s + Σ c_n e^{-λ_n t} w_n` and orthogonal modes,
//!
//! ```text
//! J = T ‖u_s‖² + 2 Σ c_n ⟨u_s, w_n⟩ (1 - e^{-λ_n T}) / λ_n
//!              + Σ c_n² ‖w_n‖² (1 - e^{-2 λ_n T}) / (2 λ_n).
//! ```

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::heat::Fn1;
use crate::sbp::lgl_rule;
use crate::verification::twodomain::steady_coefficients;

/// One eigenpair `(λ, w)` with `w = A sin(α₁x)` on `[0, ξ]` and
/// `w = B sin(α₂(1 - x))` on `[ξ, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a: f64,
    pub b: f64,
}

impl Mode {
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        if x <= xi {
            self.a * (self.alpha1 * x).sin()
        } else {
            self.b * (self.alpha2 * (1.0 - x)).sin()
        }
    }
}

/// First `n` eigenpairs of `-(κ w')' = λ w`, `w(0) = w(1) = 0`.
///
/// Roots are sought in `s = √λ` with the pole-free determinant
/// `h(s) = √κ₁ cos(a) sin(b) + √κ₂ sin(a) cos(b)`, `a = sξ/√κ₁`,
/// `b = s(1-ξ)/√κ₂`. With `ω = ξ/√κ₁ + (1-ξ)/√κ₂`, `h((m+½)π/ω)` has sign
/// `(-1)^m`, which brackets the `n`-th root between consecutive such points.
pub fn modes(k1: f64, k2: f64, xi: f64, n: usize) -> Result<Vec<Mode>> {
    if !(k1 > 0.0 && k2 > 0.0) || !(xi > 0.0 && xi < 1.0) {
        return invalid("need positive diffusivities and an interior interface");
    }
    let (r1, r2) = (k1.sqrt(), k2.sqrt());
    let (c1, c2) = (xi / r1, (1.0 - xi) / r2);
    let omega = c1 + c2;
    let h = |s: f64| {
        let (a, b) = (s * c1, s * c2);
        r1 * a.cos() * b.sin() + r2 * a.sin() * b.cos()
    };
    let mut out = Vec::with_capacity(n);
    for m in 1..=n {
        let (mut lo, mut hi) = ((m as f64 - 0.5) * PI / omega, (m as f64 + 0.5) * PI / omega);
        let (hlo, hhi) = (h(lo), h(hi));
        if hlo * hhi > 0.0 {
            return Err(Error::NumericalFailure(format!("mode {m} not bracketed")));
        }
        let lo_positive = hlo > 0.0;
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (h(mid) > 0.0) == lo_positive {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        let (a, b) = (s * c1, s * c2);
        // Null vector of [[sin a, -sin b], [√κ₁ cos a, √κ₂ cos b]] from its
        // better-conditioned row.
        let row1 = (a.sin(), -b.sin());
        let row2 = (r1 * a.cos(), r2 * b.cos());
        let n1 = row1.0.hypot(row1.1);
        let n2 = row2.0.hypot(row2.1);
        let (ca, cb) = if n1 >= n2 {
            (-row1.1 / n1, row1.0 / n1)
        } else {
            (row2.1 / n2, -row2.0 / n2)
        };
        out.push(Mode {
            lambda: s * s,
            alpha1: s / r1,
            alpha2: s / r2,
            a: ca,
            b: cb,
        });
    }
    Ok(out)
}

/// Composite Lobatto quadrature on `[lo, hi]`.
pub(crate) fn composite_rule(lo: f64, hi: f64, panels: usize, nodes: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = lgl_rule(nodes)?;
    let h = (hi - lo) / panels as f64;
    let mut x = Vec::with_capacity(panels * nodes);
    let mut w = Vec::with_capacity(panels * nodes);
    for p in 0..panels {
        let a = lo + p as f64 * h;
        for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
            x.push(a + 0.5 * h * (xi + 1.0));
            w.push(0.5 * h * wi);
        }
    }
    Ok((x, w))
}

/// Reference objective for the two-subdomain problem with a fixed initial
/// state.
pub struct ModalReference {
    pub xi: f64,
    pub f: f64,
    pub u_r: f64,
    pub t_final: f64,
    pub n_modes: usize,
    left: (Vec<f64>, Vec<f64>),
    right: (Vec<f64>, Vec<f64>),
    u0_left: Vec<f64>,
    u0_right: Vec<f64>,
}

const QUAD_NODES: usize = 12;

impl ModalReference {
    pub fn new(xi: f64, f: f64, u_r: f64, t_final: f64, initial: Fn1, n_modes: usize) -> Result<Self> {
        if !(xi > 0.0 && xi < 1.0) || !(t_final > 0.0) || n_modes == 0 {
            return invalid("invalid modal reference parameters");
        }
        // Every mode has at most n + 1 half-waves per subdomain.
        let panels = 2 * n_modes + 8;
        let left = composite_rule(0.0, xi, panels, QUAD_NODES)?;
        let right = composite_rule(xi, 1.0, panels, QUAD_NODES)?;
        let u0_left = left.0.iter().map(|&x| initial(x)).collect();
        let u0_right = right.0.iter().map(|&x| initial(x)).collect();
        Ok(Self {
            xi,
            f,
            u_r,
            t_final,
            n_modes,
            left,
            right,
            u0_left,
            u0_right,
        })
    }

    /// Expansion coefficients of the solution for `(κ₁, κ₂)`.
    pub fn expand(&self, k1: f64, k2: f64) -> Result<ModalSolution> {
        let (a1, a2, b2) = steady_coefficients(k1, k2, self.xi, self.f, self.u_r)?;
        let us_l: Vec<f64> = self
            .left
            .0
            .iter()
            .map(|&x| -self.f * x * x / (2.0 * k1) + a1 * x)
            .collect();
        let us_r: Vec<f64> = self
            .right
            .0
            .iter()
            .map(|&x| -self.f * x * x / (2.0 * k2) + a2 * x + b2)
            .collect();
        let dot =
            |w: &[f64], a: &[f64], b: &[f64]| -> f64 { w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum() };
        let steady_norm_sq = dot(&self.left.1, &us_l, &us_l) + dot(&self.right.1, &us_r, &us_r);
        let v0_l: Vec<f64> = self.u0_left.iter().zip(&us_l).map(|(a, b)| a - b).collect();
        let v0_r: Vec<f64> = self.u0_right.iter().zip(&us_r).map(|(a, b)| a - b).collect();
        let ms = modes(k1, k2, self.xi, self.n_modes)?;
        let mut terms = Vec::with_capacity(ms.len());
        for m in ms {
            let wl: Vec<f64> = self.left.0.iter().map(|&x| m.a * (m.alpha1 * x).sin()).collect();
            let wr: Vec<f64> = self
                .right
                .0
                .iter()
                .map(|&x| m.b * (m.alpha2 * (1.0 - x)).sin())
                .collect();
            let norm_sq = dot(&self.left.1, &wl, &wl) + dot(&self.right.1, &wr, &wr);
            let coeff = (dot(&self.left.1, &v0_l, &wl) + dot(&self.right.1, &v0_r, &wr)) / norm_sq;
            let cross = dot(&self.left.1, &us_l, &wl) + dot(&self.right.1, &us_r, &wr);
            terms.push(ModalTerm {
                mode: m,
                coeff,
                norm_sq,
                cross,
            });
        }
        Ok(ModalSolution {
            k1,
            k2,
            xi: self.xi,
            f: self.f,
            steady: (a1, a2, b2),
            steady_norm_sq,
            terms,
        })
    }

    /// `J(κ₁, κ₂) = ∫₀ᵀ ∫₀¹ u² dx dt`.
    pub fn objective(&self, k1: f64, k2: f64) -> Result<f64> {
        self.expand(k1, k2)?.objective(self.t_final)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalTerm {
    pub mode: Mode,
    /// `c_n = ⟨u₀ - u_s, w_n⟩ / ‖w_n‖²`.
    pub coeff: f64,
    pub norm_sq: f64,
    /// `⟨u_s, w_n⟩`.
    pub cross: f64,
}

/// Truncated eigenfunction expansion of the solution.
#[derive(Debug, Clone)]
pub struct ModalSolution {
    pub k1: f64,
    pub k2: f64,
    pub xi: f64,
    pub f: f64,
    pub steady: (f64, f64, f64),
    pub steady_norm_sq: f64,
    pub terms: Vec<ModalTerm>,
}

impl ModalSolution {
    pub fn steady_value(&self, x: f64) -> f64 {
        let (a1, a2, b2) = self.steady;
        if x <= self.xi {
            -self.f * x * x / (2.0 * self.k1) + a1 * x
        } else {
            -self.f * x * x / (2.0 * self.k2) + a2 * x + b2
        }
    }

    pub fn evaluate(&self, x: f64, t: f64) -> f64 {
        self.steady_value(x)
            + self
                .terms
                .iter()
                .map(|m| m.coeff * (-m.mode.lambda * t).exp() * m.mode.eval(x, self.xi))
                .sum::<f64>()
    }

    pub fn objective(&self, t_final: f64) -> Result<f64> {
        let t = t_final;
        let mut j = t * self.steady_norm_sq;
        for m in &self.terms {
            let l = m.mode.lambda;
            j += 2.0 * m.coeff * m.cross * (-(-l * t).exp_m1()) / l;
            j += m.coeff * m.coeff * m.norm_sq * (-(-2.0 * l * t).exp_m1()) / (2.0 * l);
        }
        if !j.is_finite() {
            return Err(Error::NumericalFailure(format!("modal objective is {j}")));
        }
        Ok(j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn homogeneous_spectrum() {
        let ms = modes(0.5, 0.5, 0.5, 8).unwrap();
        for (n, m) in ms.iter().enumerate() {
            let exact = 0.5 * ((n + 1) as f64 * PI).powi(2);
            assert!((m.lambda - exact).abs() < 1e-11 * exact, "{n}: {} vs {exact}", m.lambda);
        }
    }

    #[test]
    fn single_mode_initial_state() {
        // u0 = sin(πx) with κ = 1, f = 0, u_R = 0 gives u = e^{-π²t} sin(πx).
        let r = ModalReference::new(0.5, 0.0, 0.0, 1.0, Arc::new(|x| (PI * x).sin()), 20).unwrap();
        let exact = 0.5 * (1.0 - (-2.0 * PI * PI).exp()) / (2.0 * PI * PI);
        assert!((r.objective(1.0, 1.0).unwrap() - exact).abs() < 1e-13);
    }

    #[test]
    fn steady_initial_state() {
        // Starting from the steady state, J = T ‖u_s‖².
        let (k1, k2, xi) = (0.6, 0.2, 0.4);
        let (a1, a2, b2) = steady_coefficients(k1, k2, xi, 1.0, 1.0).unwrap();
        let us = move |x: f64| {
            if x <= xi {
                -x * x / (2.0 * k1) + a1 * x
            } else {
                -x * x / (2.0 * k2) + a2 * x + b2
            }
        };
        let r = ModalReference::new(xi, 1.0, 1.0, 2.0, Arc::new(us), 10).unwrap();
        let (x, w) = composite_rule(0.0, xi, 4, 8).unwrap();
        let (y, v) = composite_rule(xi, 1.0, 4, 8).unwrap();
        let norm: f64 = x
            .iter()
            .zip(&w)
            .chain(y.iter().zip(&v))
            .map(|(x, w)| w * us(*x).powi(2))
            .sum();
        assert!((r.objective(k1, k2).unwrap() - 2.0 * norm).abs() < 1e-12);
    }
}
