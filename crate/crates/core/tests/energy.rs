use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stheat::heat::{
    choose_sat_coefficients, sat_for_problem, uniform_breakpoints, BoundaryCondition, MaterialModel, ProblemSpec,
    SatOverrides,
};
use stheat::sbp::build_sbp_1d;
use stheat::verification::energy_check;

fn spec(k: usize, west: BoundaryCondition, seed: u64) -> ProblemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..5).map(|_| rng.random_range(-1.0..1.0)).collect();
    ProblemSpec {
        breakpoints: uniform_breakpoints(0.0, 1.0, k),
        t_final: 0.5,
        degree_x: 5,
        degree_t: 5,
        west,
        east: BoundaryCondition::homogeneous_dirichlet(),
        initial: Arc::new(move |x| {
            c.iter()
                .enumerate()
                .map(|(m, a)| a * ((m as f64 + 0.5) * std::f64::consts::PI * x).cos())
                .sum()
        }),
        source: Arc::new(|_, _| 0.0),
        material: MaterialModel::new(1e-3, 1.0, 3.0).unwrap(),
    }
}

#[test]
fn sat_bounds_for_three_nodes() {
    let op = build_sbp_1d(3, (0.0, 1.0)).unwrap();
    let sat = choose_sat_coefficients(&op, &MaterialModel::new(0.0, 1.0, 1.0).unwrap(), 1.0, 1.0).unwrap();
    assert!((sat.sigma_w - 3.0).abs() < 1e-13);
    assert_eq!(
        (sat.sigma2(), sat.sigma4(), sat.tau1(), sat.tau2()),
        (1.0, 2.0, -2.0, -1.0)
    );
    assert!(choose_sat_coefficients(&op, &MaterialModel::new(0.0, 1.0, 1.0).unwrap(), 0.0, 1.0).is_err());
}

#[test]
fn estimate_with_insulated_end() {
    for k in [1, 3] {
        for seed in 0..10 {
            let s = spec(k, BoundaryCondition::homogeneous_neumann(), seed);
            let sat = sat_for_problem(&s, &SatOverrides::default()).unwrap();
            let rho: Vec<f64> = (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect();
            let e = energy_check(&s, sat, &rho).unwrap();
            assert!(e.holds(), "K={k} seed={seed}: {e:?}");
        }
    }
}

// Away from σ₀ = 1 the terminal energy obeys σ₀²/(2σ₀-1); the simpler
// constant 1/(2σ₀-1) is only valid for σ₀ ≤ 1.
#[test]
fn larger_penalties_stay_stable() {
    let s = spec(4, BoundaryCondition::homogeneous_dirichlet(), 3);
    for (sigma0, safety, sv) in [(1.5, 2.0, 0.25), (0.75, 1.0, 2.0), (3.0, 10.0, 1.0)] {
        let sat = sat_for_problem(
            &s,
            &SatOverrides {
                sigma0: Some(sigma0),
                safety: Some(safety),
                s: Some(sv),
                ..Default::default()
            },
        )
        .unwrap();
        let e = energy_check(&s, sat, &[0.1, 0.9, 0.4, 0.6]).unwrap();
        assert!(e.holds_sharp(), "{sigma0} {safety} {sv}: {e:?}");
        if sigma0 <= 1.0 {
            assert!(e.holds(), "{sigma0} {safety} {sv}: {e:?}");
        }
    }
}

#[test]
fn simple_constant_is_too_tight_for_large_temporal_penalty() {
    let s = spec(4, BoundaryCondition::homogeneous_dirichlet(), 3);
    let sat = sat_for_problem(
        &s,
        &SatOverrides {
            sigma0: Some(3.0),
            ..Default::default()
        },
    )
    .unwrap();
    let e = energy_check(&s, sat, &[0.1, 0.9, 0.4, 0.6]).unwrap();
    assert!(e.holds_sharp() && !e.holds(), "{e:?}");
}

#[test]
fn subcritical_temporal_penalty_has_no_bound() {
    let s = spec(2, BoundaryCondition::homogeneous_dirichlet(), 1);
    let sat = sat_for_problem(
        &s,
        &SatOverrides {
            sigma0: Some(0.4),
            ..Default::default()
        },
    )
    .unwrap();
    let e = energy_check(&s, sat, &[0.5, 0.5]).unwrap();
    assert!(e.factor.is_none() && !e.holds());
}
