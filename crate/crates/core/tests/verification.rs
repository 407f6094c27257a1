use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stheat::presets::{ManufacturedSetup, TwoDomainSetup};
use stheat::verification::{
    be_convergence, eigen_condition, forward_convergence, functional_convergence, loglog_slope, modes,
    steady_coefficients, transient_eigenvalue, ModalReference, TwoDomainSolution,
};

#[test]
fn steady_parabolic_profile() {
    let (a1, a2, b2) = steady_coefficients(1.0, 1.0, 0.5, 2.0, 0.0).unwrap();
    assert!((a1 - 1.0).abs() < 1e-14 && (a2 - 1.0).abs() < 1e-14 && b2.abs() < 1e-14);
    let (a1, a2, b2) = steady_coefficients(0.7, 0.7, 0.3, 0.0, 2.0).unwrap();
    assert!((a1 - 2.0).abs() < 1e-14 && (a2 - 2.0).abs() < 1e-14 && b2.abs() < 1e-14);
}

#[test]
fn first_fourier_mode() {
    let l = transient_eigenvalue(1.0, 1.0, 0.5, 0).unwrap();
    assert!((l - std::f64::consts::PI.powi(2)).abs() < 1e-12);
}

// Two independent root finders: bisection on the cotangent condition and
// the pole-free determinant used for the modal expansion. The cotangent
// form cannot see eigenvalues sitting on a common pole of both cotangents,
// so every modal root must either match a cotangent root or sit on such a
// pole.
#[test]
fn eigenvalue_routes_agree() {
    for (k1, k2, xi) in [(4.0, 1.0, 0.5), (0.3, 0.9, 0.4), (1.0, 0.05, 0.7)] {
        let ms = modes(k1, k2, xi, 6).unwrap();
        let g_roots: Vec<f64> = (0..4).map(|b| transient_eigenvalue(k1, k2, xi, b).unwrap()).collect();
        for l in &g_roots {
            assert!(eigen_condition(*l, k1, k2, xi).abs() < 1e-10);
            assert!(
                ms.iter().any(|m| (m.lambda - l).abs() <= 1e-10 * l),
                "{k1} {k2} {xi}: root {l} not a mode"
            );
        }
        let top = *g_roots.last().unwrap();
        for m in ms.iter().filter(|m| m.lambda <= top) {
            let matched = g_roots.iter().any(|l| (m.lambda - l).abs() <= 1e-10 * l);
            let near_pi_multiple = |v: f64| {
                let r = v / std::f64::consts::PI;
                (r - r.round()).abs() < 1e-9
            };
            let on_poles = near_pi_multiple(m.alpha1 * xi) && near_pi_multiple(m.alpha2 * (1.0 - xi));
            assert!(matched || on_poles, "{k1} {k2} {xi}: mode {} unexplained", m.lambda);
        }
    }
}

#[test]
fn closed_form_satisfies_the_pde() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (k1, k2) in [(4.0, 1.0), (0.2, 0.6)] {
        let s = TwoDomainSolution::new(k1, k2, 0.5, 1.0, 1.0, 0).unwrap();
        for _ in 0..50 {
            let x: f64 = rng.random_range(0.01..0.99);
            if (x - 0.5).abs() < 1e-2 {
                continue;
            }
            let t: f64 = rng.random_range(0.0..1.0);
            let h = 1e-3;
            let d4 = |f: &dyn Fn(f64) -> f64, z: f64| {
                (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) / (12.0 * h)
            };
            let ut = d4(&|tt| s.evaluate(x, tt), t.max(2.0 * h));
            let uxx = d4(&|xx| s.dx(xx, t.max(2.0 * h)), x);
            let res = ut - s.kappa_at(x) * uxx - 1.0;
            assert!(res.abs() < 1e-7 * (1.0 + ut.abs()), "residual {res} at ({x}, {t})");
        }
        for t in [0.0, 0.5, 2.0] {
            assert!(s.evaluate(0.0, t).abs() < 1e-14);
            assert!((s.evaluate(1.0, t) - 1.0).abs() < 1e-13);
        }
        assert!((s.evaluate(0.3, 60.0) - s.steady(0.3)).abs() < 1e-12);
    }
}

#[test]
fn modal_expansion_reproduces_single_mode_initial_state() {
    let s = TwoDomainSolution::new(0.6, 0.2, 0.5, 1.0, 1.0, 0).unwrap();
    let r = ModalReference::new(0.5, 1.0, 1.0, 1.0, std::sync::Arc::new(move |x| s.evaluate(x, 0.0)), 40).unwrap();
    let sol = r.expand(0.6, 0.2).unwrap();
    for x in [0.1, 0.45, 0.8] {
        for t in [0.1, 0.7] {
            assert!((sol.evaluate(x, t) - s.evaluate(x, t)).abs() < 1e-9);
        }
    }
}

#[test]
fn manufactured_forward_convergence_is_spectral() {
    let rows = forward_convergence(&ManufacturedSetup::default(), &[4, 6, 8, 10]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].l2_error < 0.1 * w[0].l2_error, "{rows:?}");
    }
    assert!(rows[3].l2_error < 1e-10);
    assert!(rows[3].j_error < 1e-9);
}

#[test]
fn objective_superconverges() {
    let rows = functional_convergence(&TwoDomainSetup::default(), (0.55, 0.2), &[10, 14, 20, 30], 300).unwrap();
    let n: Vec<f64> = rows.iter().map(|r| 1.0 / r.n as f64).collect();
    let state = loglog_slope(&n, &rows.iter().map(|r| r.state_error).collect::<Vec<_>>());
    let func = loglog_slope(&n, &rows.iter().map(|r| r.j_rel_error).collect::<Vec<_>>());
    assert!(
        func >= state + 1.0,
        "state order {state:.2}, functional order {func:.2}: {rows:?}"
    );
}

#[test]
fn backward_euler_orders() {
    let s = ManufacturedSetup::default();
    let time = be_convergence(&s, &[(32, 16), (32, 32), (32, 64)]).unwrap();
    let x: Vec<f64> = time.iter().map(|r| 1.0 / r.steps as f64).collect();
    let slope_t = loglog_slope(&x, &time.iter().map(|r| r.l2_error).collect::<Vec<_>>());
    let slope_j = loglog_slope(&x, &time.iter().map(|r| r.j_error).collect::<Vec<_>>());
    assert!((slope_t - 1.0).abs() <= 0.2, "{slope_t}");
    assert!((slope_j - 1.0).abs() <= 0.2, "{slope_j}");
    let space = be_convergence(&s, &[(1, 16384), (2, 16384), (4, 16384)]).unwrap();
    let x: Vec<f64> = space.iter().map(|r| 1.0 / r.elements as f64).collect();
    let slope_h = loglog_slope(&x, &space.iter().map(|r| r.l2_error).collect::<Vec<_>>());
    assert!((slope_h - 2.0).abs() <= 0.2, "{slope_h}");
}
