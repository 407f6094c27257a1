//! Method of moving asymptotes for one linear volume constraint.
//!
//! The objective is replaced by the separable convex approximation
//! `Σ p_k/(U_k - x_k) + q_k/(x_k - L_k)` while the volume constraint is kept
//! exact. The subproblem dual has a single multiplier, found by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MmaConfig {
    pub asy_init: f64,
    pub asy_incr: f64,
    pub asy_decr: f64,
    pub move_limit: f64,
    pub raa0: f64,
    pub albefa: f64,
    /// Smallest allowed distance between an asymptote and the design.
    pub asy_min_gap: f64,
}

impl Default for MmaConfig {
    fn default() -> Self {
        Self {
            asy_init: 0.5,
            asy_incr: 1.2,
            asy_decr: 0.7,
            move_limit: 0.5,
            raa0: 1e-5,
            albefa: 0.1,
            asy_min_gap: 1e-9,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MmaState {
    pub iteration: usize,
    pub previous: Option<Vec<f64>>,
    pub previous2: Option<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub config: MmaConfig,
}

const FEAS_TOL: f64 = 1e-9;

impl MmaState {
    pub fn new(n: usize, config: MmaConfig) -> Self {
        Self {
            iteration: 0,
            previous: None,
            previous2: None,
            lower: vec![0.0; n],
            upper: vec![1.0; n],
            config,
        }
    }

    fn update_asymptotes(&mut self, x: &[f64]) {
        let c = self.config;
        match (&self.previous, &self.previous2) {
            (Some(x1), Some(x2)) if self.iteration > 2 => {
                for k in 0..x.len() {
                    let osc = (x[k] - x1[k]) * (x1[k] - x2[k]);
                    let gamma = if osc < 0.0 {
                        c.asy_decr
                    } else if osc > 0.0 {
                        c.asy_incr
                    } else {
                        1.0
                    };
                    let lo = x[k] - gamma * (x1[k] - self.lower[k]);
                    let up = x[k] + gamma * (self.upper[k] - x1[k]);
                    self.lower[k] = lo.clamp(x[k] - 10.0, x[k] - c.asy_min_gap);
                    self.upper[k] = up.clamp(x[k] + c.asy_min_gap, x[k] + 10.0);
                }
            }
            _ => {
                for k in 0..x.len() {
                    self.lower[k] = x[k] - c.asy_init;
                    self.upper[k] = x[k] + c.asy_init;
                }
            }
        }
    }
}

struct Subproblem<'a> {
    p: Vec<f64>,
    q: Vec<f64>,
    low: &'a [f64],
    upp: &'a [f64],
    alpha: Vec<f64>,
    beta: Vec<f64>,
    volumes: &'a [f64],
}

impl Subproblem<'_> {
    /// Minimizer of `p/(U-x) + q/(x-L) + μ V x` over `[α, β]`.
    fn argmin(&self, k: usize, mu: f64) -> f64 {
        let (p, q, l, u, v) = (self.p[k], self.q[k], self.low[k], self.upp[k], self.volumes[k]);
        let slope = |x: f64| p / ((u - x) * (u - x)) - q / ((x - l) * (x - l)) + mu * v;
        let (mut a, mut b) = (self.alpha[k], self.beta[k]);
        if slope(a) >= 0.0 {
            return a;
        }
        if slope(b) <= 0.0 {
            return b;
        }
        loop {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                return if slope(m) >= 0.0 { a } else { b };
            }
            if slope(m) > 0.0 {
                b = m;
            } else {
                a = m;
            }
        }
    }

    fn solve_at(&self, mu: f64) -> Vec<f64> {
        (0..self.p.len()).map(|k| self.argmin(k, mu)).collect()
    }

    fn volume(&self, x: &[f64]) -> f64 {
        x.iter().zip(self.volumes).map(|(a, v)| a * v).sum()
    }
}

/// One MMA step. Returns the new design; `state` is advanced.
pub fn mma_update(
    rho: &[f64],
    grad: &[f64],
    volumes: &[f64],
    volume_bound: f64,
    state: &mut MmaState,
) -> Result<Vec<f64>> {
    let n = rho.len();
    if grad.len() != n || volumes.len() != n || state.lower.len() != n {
        return invalid("design, gradient, volumes and state must have equal length");
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return invalid("gradient contains non-finite entries");
    }
    if rho.iter().any(|r| !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(r)) {
        return invalid("design outside [0, 1]");
    }
    let x: Vec<f64> = rho.iter().map(|r| r.clamp(0.0, 1.0)).collect();
    let vol0: f64 = x.iter().zip(volumes).map(|(a, v)| a * v).sum();
    if vol0 > volume_bound + FEAS_TOL {
        return invalid(format!("design volume {vol0} exceeds bound {volume_bound}"));
    }

    state.iteration += 1;
    state.update_asymptotes(&x);
    let gscale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    let new = if gscale == 0.0 {
        x.clone()
    } else {
        let c = state.config;
        let mut sub = Subproblem {
            p: vec![0.0; n],
            q: vec![0.0; n],
            low: &state.lower,
            upp: &state.upper,
            alpha: vec![0.0; n],
            beta: vec![0.0; n],
            volumes,
        };
        for k in 0..n {
            let (l, u) = (state.lower[k], state.upper[k]);
            sub.alpha[k] = 0f64.max(l + c.albefa * (x[k] - l)).max(x[k] - c.move_limit);
            sub.beta[k] = 1f64.min(u - c.albefa * (u - x[k])).min(x[k] + c.move_limit);
            let (gp, gm) = (grad[k].max(0.0), (-grad[k]).max(0.0));
            let reg = c.raa0 * gscale / (u - l);
            sub.p[k] = (u - x[k]).powi(2) * (1.001 * gp + 0.001 * gm + reg);
            sub.q[k] = (x[k] - l).powi(2) * (0.001 * gp + 1.001 * gm + reg);
        }
        let free = sub.solve_at(0.0);
        if sub.volume(&free) <= volume_bound {
            free
        } else {
            let vmin = volumes.iter().fold(f64::INFINITY, |a, v| a.min(*v));
            let mut hi = gscale / vmin;
            while sub.volume(&sub.solve_at(hi)) > volume_bound {
                hi *= 2.0;
                if !hi.is_finite() {
                    return invalid("volume constraint cannot be satisfied within the move limits");
                }
            }
            let mut lo = 0.0;
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if sub.volume(&sub.solve_at(mid)) > volume_bound {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            sub.solve_at(hi)
        }
    };
    state.previous2 = state.previous.take();
    state.previous = Some(x);
    Ok(new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_gradient_decreases_design() {
        let rho = vec![0.5; 4];
        let mut st = MmaState::new(4, MmaConfig::default());
        let new = mma_update(&rho, &[1.0, 2.0, 0.5, 3.0], &[0.25; 4], 1.0, &mut st).unwrap();
        assert!(new.iter().all(|r| *r < 0.5));
    }

    #[test]
    fn equal_negative_gradient_fills_budget_uniformly() {
        let rho = vec![0.2; 5];
        let mut st = MmaState::new(5, MmaConfig::default());
        let new = mma_update(&rho, &[-1.0; 5], &[0.2; 5], 0.6, &mut st).unwrap();
        for r in &new {
            assert!((r - 0.6).abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn quadratic_converges() {
        let mut rho = vec![0.5, 0.5];
        let mut st = MmaState::new(2, MmaConfig::default());
        let mut iters = 0;
        for _ in 0..60 {
            iters += 1;
            let g = [2.0 * (rho[0] - 0.3), 2.0 * (rho[1] - 0.8)];
            let new = mma_update(&rho, &g, &[0.5, 0.5], 1.0, &mut st).unwrap();
            let change = new.iter().zip(&rho).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            rho = new;
            if change < 1e-9 {
                break;
            }
        }
        assert!(
            (rho[0] - 0.3).abs() < 1e-4 && (rho[1] - 0.8).abs() < 1e-4,
            "{rho:?} after {iters}"
        );
    }

    #[test]
    fn gradient_scale_does_not_change_step() {
        let rho = vec![0.3, 0.6, 0.1, 0.4];
        let g = [0.3, -1.2, 0.05, -0.4];
        let vols = [0.25; 4];
        let mut a = MmaState::new(4, MmaConfig::default());
        let mut b = MmaState::new(4, MmaConfig::default());
        let x = mma_update(&rho, &g, &vols, 0.35, &mut a).unwrap();
        let gs: Vec<f64> = g.iter().map(|v| v * 1234.5).collect();
        let y = mma_update(&rho, &gs, &vols, 0.35, &mut b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gradient_keeps_design() {
        let rho = vec![0.3, 0.7];
        let mut st = MmaState::new(2, MmaConfig::default());
        assert_eq!(mma_update(&rho, &[0.0, 0.0], &[0.5, 0.5], 0.5, &mut st).unwrap(), rho);
    }

    #[test]
    fn rejects_bad_input() {
        let mut st = MmaState::new(2, MmaConfig::default());
        assert!(mma_update(&[0.5, 0.5], &[f64::NAN, 0.0], &[0.5, 0.5], 1.0, &mut st).is_err());
        assert!(mma_update(&[0.5, 1.5], &[1.0, 0.0], &[0.5, 0.5], 1.0, &mut st).is_err());
        assert!(mma_update(&[0.9, 0.9], &[1.0, 0.0], &[0.5, 0.5], 0.5, &mut st).is_err());
    }
}
