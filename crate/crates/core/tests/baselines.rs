use std::sync::Arc;

use proptest::prelude::*;
use stheat::baselines::{
    be_aao_assemble, be_aao_solve, be_march, be_objective, fe_assemble, BackwardEulerProblem, BeSolver,
};
use stheat::checks::fd_gradient_error;
use stheat::heat::{uniform_breakpoints, BoundaryCondition, MaterialModel, ProblemSpec};
use stheat::optimizer::DesignProblem;

fn spec(k: usize, west: BoundaryCondition, east: BoundaryCondition) -> ProblemSpec {
    ProblemSpec {
        breakpoints: uniform_breakpoints(0.0, 1.0, k),
        t_final: 1.0,
        degree_x: 1,
        degree_t: 1,
        west,
        east,
        initial: Arc::new(|x: f64| x * (1.0 - x)),
        source: Arc::new(|x: f64, t: f64| 1.0 + (5.0 * (x + t)).sin()),
        material: MaterialModel::new(0.01, 1.0, 3.0).unwrap(),
    }
}

#[test]
fn linear_steady_state_is_exact() {
    let mut s = spec(
        4,
        BoundaryCondition::dirichlet(|_| 1.0),
        BoundaryCondition::dirichlet(|_| 3.0),
    );
    s.initial = Arc::new(|x| 1.0 + 2.0 * x);
    s.source = Arc::new(|_, _| 0.0);
    s.material = MaterialModel::new(1.0, 1.0, 1.0).unwrap();
    let fe = fe_assemble(&s, &[0.5; 4]).unwrap();
    let sol = be_march(&fe, &s, 7).unwrap();
    for u in &sol.states {
        for (v, x) in u.iter().zip(&fe.nodes) {
            assert!((v - (1.0 + 2.0 * x)).abs() < 1e-13);
        }
    }
}

#[test]
fn step_equation_residual() {
    let s = spec(
        6,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    let rho = [0.2, 0.9, 0.4, 0.6, 0.1, 0.8];
    let fe = fe_assemble(&s, &rho).unwrap();
    let sol = be_march(&fe, &s, 10).unwrap();
    let sys = be_aao_assemble(&fe, &s, 10).unwrap();
    let all: Vec<f64> = sol.states.iter().flatten().copied().collect();
    let r = sys.matvec(&all);
    let scale = sys.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for (a, b) in r.iter().zip(&sys.rhs) {
        assert!((a - b).abs() <= 1e-11 * scale, "{a} vs {b}");
    }
}

#[test]
fn homogeneous_problem_dissipates() {
    let mut s = spec(
        8,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    s.source = Arc::new(|_, _| 0.0);
    s.initial = Arc::new(|x| (3.0 * std::f64::consts::PI * x).sin() + x * (1.0 - x));
    let fe = fe_assemble(&s, &[0.3, 0.7, 0.1, 1.0, 0.5, 0.5, 0.0, 0.9]).unwrap();
    let sol = be_march(&fe, &s, 40).unwrap();
    let energy = |u: &Vec<f64>| u.iter().zip(fe.mass.matvec(u)).map(|(a, b)| a * b).sum::<f64>();
    for w in sol.states.windows(2) {
        assert!(energy(&w[1]) <= energy(&w[0]) * (1.0 + 1e-14));
    }
}

#[test]
fn symmetric_problem_has_symmetric_sensitivities() {
    let mut s = spec(
        6,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    s.source = Arc::new(|x, _| 1.0 + (x - 0.5).powi(2));
    let p = BackwardEulerProblem {
        spec: s,
        n_steps: 32,
        solver: BeSolver::March,
        volume_bound: 0.5,
    };
    let (_, g) = p.evaluate(&[0.5; 6]).unwrap();
    for k in 0..3 {
        assert!((g[k] - g[5 - k]).abs() <= 1e-10 * g[k].abs().max(1e-12), "{g:?}");
    }
}

#[test]
fn equal_bounds_give_zero_sensitivities() {
    let mut s = spec(
        4,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    s.material = MaterialModel::new(0.5, 0.5, 3.0).unwrap();
    let p = BackwardEulerProblem {
        spec: s,
        n_steps: 8,
        solver: BeSolver::AllAtOnce,
        volume_bound: 0.5,
    };
    let (_, g) = p.evaluate(&[0.5; 4]).unwrap();
    assert!(g.iter().all(|v| *v == 0.0));
}

#[test]
fn gradients_match_finite_differences() {
    let rho: Vec<f64> = (0..10).map(|k| 0.1 + 0.08 * k as f64).collect();
    for (west, east) in [
        (
            BoundaryCondition::homogeneous_dirichlet(),
            BoundaryCondition::homogeneous_dirichlet(),
        ),
        (
            BoundaryCondition::neumann(|t| 0.5 * t),
            BoundaryCondition::dirichlet(|t| t),
        ),
    ] {
        for solver in [BeSolver::March, BeSolver::AllAtOnce] {
            let p = BackwardEulerProblem {
                spec: spec(10, west.clone(), east.clone()),
                n_steps: 64,
                solver,
                volume_bound: 0.5,
            };
            let e = fd_gradient_error(&p, &rho).unwrap();
            assert!(e <= 1e-5, "{solver:?}: {e}");
        }
    }
}

#[test]
fn assembled_memory_grows_linearly() {
    let s = spec(
        5,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    let fe = fe_assemble(&s, &[0.5; 5]).unwrap();
    let a = be_aao_solve(&fe, &s, 10).unwrap().assembled_unknowns.unwrap();
    let b = be_aao_solve(&fe, &s, 20).unwrap().assembled_unknowns.unwrap();
    assert_eq!((a, b), (6 * 11, 6 * 21));
}

proptest! {
    #[test]
    fn aao_equals_marching(rho in prop::collection::vec(0.0f64..1.0, 7), steps in 1usize..40, neumann in any::<bool>()) {
        let west = if neumann { BoundaryCondition::neumann(|t| t.cos()) } else { BoundaryCondition::dirichlet(|t| 0.2 * t) };
        let s = spec(7, west, BoundaryCondition::dirichlet(|t| 1.0 - t));
        let fe = fe_assemble(&s, &rho).unwrap();
        let a = be_march(&fe, &s, steps).unwrap();
        let b = be_aao_solve(&fe, &s, steps).unwrap();
        let scale = a.states.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.states.iter().flatten().zip(b.states.iter().flatten()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale.max(1.0));
        }
        prop_assert!((be_objective(&fe, &a) - be_objective(&fe, &b)).abs() <= 1e-12 * be_objective(&fe, &a).abs());
    }
}
