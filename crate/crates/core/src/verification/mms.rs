//! Manufactured solutions for heterogeneous designs.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::heat::{kappa, Fn2, ProblemSpec};

/// A manufactured state with the derivatives needed for its source term.
#[derive(Clone)]
pub struct ManufacturedSolution {
    pub u: Fn2,
    pub u_t: Fn2,
    pub u_x: Fn2,
    pub u_xx: Fn2,
}

fn element_of(breakpoints: &[f64], x: f64) -> usize {
    let k = breakpoints.partition_point(|&b| b <= x);
    k.saturating_sub(1).min(breakpoints.len() - 2)
}

/// `f = u_t - κ(ρ(x)) u_xx` with the element-wise constant diffusivity.
///
/// The supplied derivatives are checked against central differences at
/// random points away from element boundaries.
pub fn mms_source(sol: &ManufacturedSolution, rho: &[f64], spec: &ProblemSpec) -> Result<Fn2> {
    spec.validate()?;
    if rho.len() != spec.n_elements() {
        return invalid("design length does not match element count");
    }
    let kap: Vec<f64> = rho.iter().map(|&r| kappa(r, &spec.material)).collect::<Result<_>>()?;
    let bp = spec.breakpoints.clone();
    let h_min = spec.element_lengths().into_iter().fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let step = 1e-4 * h_min;
    let mut checked = 0;
    while checked < 20 {
        let k = rng.random_range(0..spec.n_elements());
        let (a, b) = spec.element_interval(k);
        let x = a + (b - a) * rng.random_range(0.1..0.9);
        let t = spec.t_final * rng.random_range(0.05..0.95);
        let (u, ut, ux, uxx) = (&sol.u, &sol.u_t, &sol.u_x, &sol.u_xx);
        let fd_t = (u(x, t + step) - u(x, t - step)) / (2.0 * step);
        let fd_x = (u(x + step, t) - u(x - step, t)) / (2.0 * step);
        let fd_xx = (ux(x + step, t) - ux(x - step, t)) / (2.0 * step);
        for (name, exact, fd) in [
            ("u_t", ut(x, t), fd_t),
            ("u_x", ux(x, t), fd_x),
            ("u_xx", uxx(x, t), fd_xx),
        ] {
            if (exact - fd).abs() > 1e-6 * (1.0 + exact.abs()) {
                return invalid(format!("{name} inconsistent with u at ({x}, {t}): {exact} vs {fd}"));
            }
        }
        checked += 1;
    }
    let (ut, uxx) = (sol.u_t.clone(), sol.u_xx.clone());
    Ok(Arc::new(move |x, t| ut(x, t) - kap[element_of(&bp, x)] * uxx(x, t)))
}

/// `u = φ(x) e^{-t}` with flux `κ φ' = G - c`, `G(x) = cos(π(x - a)/(b - a))`,
/// so value and flux are continuous across element interfaces for any
/// element-wise constant `κ`, and `φ(a) = φ(b) = 0`.
pub fn flux_compatible_solution(breakpoints: &[f64], kap: &[f64]) -> Result<ManufacturedSolution> {
    if breakpoints.len() != kap.len() + 1 || kap.iter().any(|k| !(*k > 0.0)) {
        return invalid("need one positive diffusivity per element");
    }
    let (a, b) = (breakpoints[0], *breakpoints.last().unwrap());
    let w = std::f64::consts::PI / (b - a);
    let g = move |x: f64| (w * (x - a)).cos();
    let g_int = move |x: f64| (w * (x - a)).sin() / w;
    let g_dx = move |x: f64| -w * (w * (x - a)).sin();
    let num: f64 = breakpoints
        .windows(2)
        .zip(kap)
        .map(|(s, k)| (g_int(s[1]) - g_int(s[0])) / k)
        .sum();
    let den: f64 = breakpoints.windows(2).zip(kap).map(|(s, k)| (s[1] - s[0]) / k).sum();
    let c = num / den;
    let mut left_values = vec![0.0; kap.len()];
    for k in 1..kap.len() {
        let (x0, x1) = (breakpoints[k - 1], breakpoints[k]);
        left_values[k] = left_values[k - 1] + (g_int(x1) - g_int(x0) - c * (x1 - x0)) / kap[k - 1];
    }
    let bp: Arc<Vec<f64>> = Arc::new(breakpoints.to_vec());
    let kv: Arc<Vec<f64>> = Arc::new(kap.to_vec());
    let phi = {
        let (bp, kv) = (bp.clone(), kv.clone());
        move |x: f64| {
            let k = element_of(&bp, x);
            left_values[k] + (g_int(x) - g_int(bp[k]) - c * (x - bp[k])) / kv[k]
        }
    };
    let phi = Arc::new(phi);
    let dphi = {
        let (bp, kv) = (bp.clone(), kv.clone());
        move |x: f64| (g(x) - c) / kv[element_of(&bp, x)]
    };
    let ddphi = move |x: f64| g_dx(x) / kv[element_of(&bp, x)];
    let p1 = phi.clone();
    Ok(ManufacturedSolution {
        u: Arc::new(move |x, t| p1(x) * (-t).exp()),
        u_t: Arc::new(move |x, t| -phi(x) * (-t).exp()),
        u_x: Arc::new(move |x, t| dphi(x) * (-t).exp()),
        u_xx: Arc::new(move |x, t| ddphi(x) * (-t).exp()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::{uniform_breakpoints, BoundaryCondition, MaterialModel};

    fn spec(k: usize, material: MaterialModel) -> ProblemSpec {
        ProblemSpec {
            breakpoints: uniform_breakpoints(0.0, 1.0, k),
            t_final: 1.0,
            degree_x: 3,
            degree_t: 3,
            west: BoundaryCondition::homogeneous_dirichlet(),
            east: BoundaryCondition::homogeneous_dirichlet(),
            initial: Arc::new(|_| 0.0),
            source: Arc::new(|_, _| 0.0),
            material,
        }
    }

    #[test]
    fn constant_state_has_no_source() {
        let zero: Fn2 = Arc::new(|_, _| 0.0);
        let sol = ManufacturedSolution {
            u: Arc::new(|_, _| 3.0),
            u_t: zero.clone(),
            u_x: zero.clone(),
            u_xx: zero,
        };
        let s = spec(3, MaterialModel::new(0.1, 1.0, 3.0).unwrap());
        let f = mms_source(&sol, &[0.2, 0.5, 0.9], &s).unwrap();
        assert_eq!(f(0.3, 0.4), 0.0);
    }

    #[test]
    fn parabola_in_space() {
        let sol = ManufacturedSolution {
            u: Arc::new(|x, t| x * (1.0 - x) * (-t).exp()),
            u_t: Arc::new(|x, t| -x * (1.0 - x) * (-t).exp()),
            u_x: Arc::new(|x, t| (1.0 - 2.0 * x) * (-t).exp()),
            u_xx: Arc::new(|_, t| -2.0 * (-t).exp()),
        };
        let s = spec(2, MaterialModel::new(1.0, 1.0, 1.0).unwrap());
        let f = mms_source(&sol, &[0.5, 0.5], &s).unwrap();
        let (x, t) = (0.3f64, 0.7f64);
        let expect = -x * (1.0 - x) * (-t).exp() + 2.0 * (-t).exp();
        assert!((f(x, t) - expect).abs() < 1e-14);
    }

    #[test]
    fn inconsistent_derivatives_rejected() {
        let sol = ManufacturedSolution {
            u: Arc::new(|x, _| x * x),
            u_t: Arc::new(|_, _| 0.0),
            u_x: Arc::new(|x, _| x),
            u_xx: Arc::new(|_, _| 2.0),
        };
        let s = spec(2, MaterialModel::new(1.0, 1.0, 1.0).unwrap());
        assert!(mms_source(&sol, &[0.5, 0.5], &s).is_err());
    }

    #[test]
    fn flux_compatible_interfaces() {
        let bp = uniform_breakpoints(-2.0, 1.0, 4);
        let kap = [0.3, 1.0, 0.15, 0.7];
        let sol = flux_compatible_solution(&bp, &kap).unwrap();
        let u = &sol.u;
        assert!(u(-2.0, 0.2).abs() < 1e-14 && u(1.0, 0.2).abs() < 1e-13);
        for k in 1..4 {
            let x = bp[k];
            let e = 1e-9;
            assert!((u(x - e, 0.5) - u(x + e, 0.5)).abs() < 1e-7);
            let fl = kap[k - 1] * (sol.u_x)(x - e, 0.5);
            let fr = kap[k] * (sol.u_x)(x + e, 0.5);
            assert!((fl - fr).abs() < 1e-7);
        }
    }
}
