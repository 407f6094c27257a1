use std::sync::Arc;

use faer::prelude::Solve;
use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stheat::adjoint::{evaluate, evaluate_objective, objective, solve_adjoint, solve_forward};
use stheat::block::{factor, BlockTridiagonal};
use stheat::heat::{
    residual, sat_for_problem, uniform_breakpoints, BoundaryCondition, Discretization, MaterialModel, ProblemSpec,
    SatOverrides,
};

fn problem(k: usize, nx: usize, nt: usize, west: BoundaryCondition, east: BoundaryCondition) -> ProblemSpec {
    ProblemSpec {
        breakpoints: uniform_breakpoints(0.0, 1.0, k),
        t_final: 1.0,
        degree_x: nx,
        degree_t: nt,
        west,
        east,
        initial: Arc::new(|x: f64| (std::f64::consts::PI * x).sin()),
        source: Arc::new(|x: f64, t: f64| 1.0 + x * t),
        material: MaterialModel::new(1e-3, 1.0, 3.0).unwrap(),
    }
}

fn disc(spec: ProblemSpec) -> Discretization {
    let sat = sat_for_problem(&spec, &SatOverrides::default()).unwrap();
    Discretization::new(spec, sat).unwrap()
}

fn random_rho(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.random_range(0.05..0.95)).collect()
}

fn dense_solve(m: &Mat<f64>, b: &[f64]) -> Vec<f64> {
    let rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
    let x = m.partial_piv_lu().solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn constant_state_is_exact() {
    for (west, east) in [
        (
            BoundaryCondition::dirichlet(|_| 2.5),
            BoundaryCondition::dirichlet(|_| 2.5),
        ),
        (
            BoundaryCondition::neumann(|_| 0.0),
            BoundaryCondition::dirichlet(|_| 2.5),
        ),
        (
            BoundaryCondition::dirichlet(|_| 2.5),
            BoundaryCondition::neumann(|_| 0.0),
        ),
    ] {
        let mut spec = problem(4, 4, 3, west, east);
        spec.initial = Arc::new(|_| 2.5);
        spec.source = Arc::new(|_, _| 0.0);
        let d = disc(spec);
        let sys = d.assemble(&random_rho(4, 1)).unwrap();
        let u = vec![2.5; sys.dim()];
        let r = residual(&u, &sys).unwrap();
        assert!(max_abs(&r) <= 1e-11 * sys.matrix.max_abs(), "{}", max_abs(&r));
    }
}

#[test]
fn block_counts_and_single_element() {
    let d = disc(problem(
        3,
        3,
        3,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::homogeneous_dirichlet(),
    ));
    let sys = d.assemble(&[0.5; 3]).unwrap();
    assert_eq!(
        (sys.matrix.diag.len(), sys.matrix.upper.len(), sys.matrix.lower.len()),
        (3, 2, 2)
    );

    let d1 = disc(problem(
        1,
        3,
        3,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::homogeneous_dirichlet(),
    ));
    let blocks = d1.assemble_element(0, &[0.5]).unwrap();
    assert!(blocks.upper.is_none() && blocks.lower.is_none());
}

#[test]
fn unknown_count_for_fifty_elements() {
    let spec = problem(
        50,
        5,
        15,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    assert_eq!(spec.total_unknowns(), 4800);
}

#[test]
fn rhs_does_not_depend_on_design() {
    let d = disc(problem(
        5,
        3,
        4,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::dirichlet(|t| t),
    ));
    let a = d.assemble(&random_rho(5, 2)).unwrap();
    let b = d.assemble(&random_rho(5, 3)).unwrap();
    assert_eq!(a.rhs, b.rhs);
}

#[test]
fn residual_basics() {
    let d = disc(problem(
        3,
        3,
        3,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::dirichlet(|_| 1.0),
    ));
    let sys = d.assemble(&random_rho(3, 4)).unwrap();
    let zero = vec![0.0; sys.dim()];
    let r = residual(&zero, &sys).unwrap();
    assert!(r.iter().zip(&sys.rhs).all(|(a, b)| *a == -b));
    assert!(residual(&zero[1..], &sys).is_err());

    let u = solve_forward(&sys).unwrap();
    let r = residual(&u, &sys).unwrap();
    assert!(max_abs(&r) <= 1e-10 * max_abs(&sys.rhs));

    let dense = sys.matrix.to_dense();
    let eps = 1e-3;
    let mut up = u.clone();
    up[7] += eps;
    let r2 = residual(&up, &sys).unwrap();
    for i in 0..r.len() {
        assert!((r2[i] - r[i] - eps * dense[(i, 7)]).abs() < 1e-12);
    }
}

#[test]
fn block_solve_matches_dense_oracle_on_assembled_system() {
    let d = disc(problem(
        4,
        4,
        5,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::dirichlet(|_| 0.5),
    ));
    let sys = d.assemble(&random_rho(4, 5)).unwrap();
    let dense = sys.matrix.to_dense();
    let x = solve_forward(&sys).unwrap();
    let y = dense_solve(&dense, &sys.rhs);
    let scale = max_abs(&y);
    for (a, b) in x.iter().zip(&y) {
        assert!((a - b).abs() <= 1e-11 * scale);
    }
    let xt = factor(&sys.matrix, true).unwrap().solve(&sys.rhs).unwrap();
    let yt = dense_solve(&dense.transpose().to_owned(), &sys.rhs);
    let scale = max_abs(&yt);
    for (a, b) in xt.iter().zip(&yt) {
        assert!((a - b).abs() <= 1e-11 * scale);
    }
}

#[test]
fn uniform_kappa_matches_single_element() {
    let mk = |k: usize, nx: usize| {
        let mut s = problem(
            k,
            nx,
            10,
            BoundaryCondition::homogeneous_dirichlet(),
            BoundaryCondition::homogeneous_dirichlet(),
        );
        s.source = Arc::new(|x: f64, _| (std::f64::consts::PI * x).sin());
        s
    };
    let j1 = evaluate_objective(&disc(mk(1, 16)), &[0.7]).unwrap();
    let j2 = evaluate_objective(&disc(mk(2, 10)), &[0.7, 0.7]).unwrap();
    assert!((j1 - j2).abs() / j1 < 1e-6, "{j1} {j2}");
}

#[test]
fn objective_of_unit_state_is_area() {
    let d = disc(problem(
        3,
        4,
        4,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::homogeneous_dirichlet(),
    ));
    let one = vec![1.0; d.dim()];
    assert!((objective(&one, &d.ops) - 1.0).abs() < 1e-12);
    assert_eq!(objective(&vec![0.0; d.dim()], &d.ops), 0.0);
}

#[test]
fn adjoint_identity() {
    let d = disc(problem(
        3,
        4,
        5,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::homogeneous_dirichlet(),
    ));
    let sys = d.assemble(&random_rho(3, 6)).unwrap();
    let u = solve_forward(&sys).unwrap();
    let adj = solve_adjoint(&sys, &u).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let du: Vec<f64> = (0..u.len()).map(|_| rng.random::<f64>() - 0.5).collect();
    let r0 = residual(&u, &sys).unwrap();
    let up: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + b).collect();
    let r1 = residual(&up, &sys).unwrap();
    let lhs: f64 = adj
        .lambda
        .iter()
        .zip(r1.iter().zip(&r0))
        .map(|(l, (a, b))| l * (a - b))
        .sum();
    let n = sys.block_size();
    let rhs: f64 = (0..u.len()).map(|i| 2.0 * sys.ops[i / n].p[i % n] * u[i] * du[i]).sum();
    assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs(), "{lhs} {rhs}");

    let zero = solve_adjoint(&sys, &vec![0.0; u.len()]).unwrap();
    assert!(zero.lambda.iter().all(|v| *v == 0.0));
}

fn fd_check(d: &Discretization, rho: &[f64], tol: f64) {
    let ev = evaluate(d, rho).unwrap();
    for k in 0..rho.len() {
        let mut best = f64::INFINITY;
        for h in [1e-4, 1e-5, 1e-6] {
            let mut rp = rho.to_vec();
            rp[k] += h;
            let mut rm = rho.to_vec();
            rm[k] -= h;
            let fd = (evaluate_objective(d, &rp).unwrap() - evaluate_objective(d, &rm).unwrap()) / (2.0 * h);
            best = best.min((ev.gradient[k] - fd).abs() / fd.abs().max(1e-12));
        }
        assert!(best <= tol, "element {k}: relative error {best}");
    }
}

#[test]
fn gradient_matches_finite_differences() {
    fd_check(
        &disc(problem(
            2,
            6,
            6,
            BoundaryCondition::homogeneous_dirichlet(),
            BoundaryCondition::dirichlet(|_| 1.0),
        )),
        &[0.4, 0.7],
        1e-5,
    );
    let mut spec = problem(
        10,
        4,
        6,
        BoundaryCondition::homogeneous_neumann(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    spec.source = Arc::new(|x: f64, t: f64| 3.0 + (4.0 * (x + t)).sin());
    fd_check(&disc(spec), &random_rho(10, 8), 1e-5);
    let spec = problem(
        4,
        3,
        4,
        BoundaryCondition::dirichlet(|t| t),
        BoundaryCondition::neumann(|t| 0.5 * t),
    );
    fd_check(&disc(spec), &random_rho(4, 9), 1e-5);
}

#[test]
fn no_material_contrast_gives_zero_gradient() {
    let mut spec = problem(
        3,
        3,
        3,
        BoundaryCondition::homogeneous_dirichlet(),
        BoundaryCondition::homogeneous_dirichlet(),
    );
    spec.material = MaterialModel::new(0.5, 0.5, 3.0).unwrap();
    let ev = evaluate(&disc(spec), &[0.2, 0.5, 0.9]).unwrap();
    assert!(ev.gradient.iter().all(|g| *g == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn block_solve_matches_dense(k in 1usize..=6, n in 1usize..=12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rand_block = |shift: f64| Mat::from_fn(n, n, |i, j| rng.random::<f64>() - 0.5 + if i == j { shift } else { 0.0 });
        let diag: Vec<_> = (0..k).map(|_| rand_block(3.0)).collect();
        let upper: Vec<_> = (1..k).map(|_| rand_block(0.0)).collect();
        let lower: Vec<_> = (1..k).map(|_| rand_block(0.0)).collect();
        let sys = BlockTridiagonal::new(diag, upper, lower).unwrap();
        let b: Vec<f64> = (0..k * n).map(|_| rng.random::<f64>() - 0.5).collect();
        let y: Vec<f64> = (0..k * n).map(|_| rng.random::<f64>() - 0.5).collect();
        let dense = sys.to_dense();
        let x = factor(&sys, false).unwrap().solve(&b).unwrap();
        let oracle = dense_solve(&dense, &b);
        let scale = max_abs(&oracle);
        for (a, o) in x.iter().zip(&oracle) {
            prop_assert!((a - o).abs() <= 1e-10 * scale);
        }
        let z = factor(&sys, true).unwrap().solve(&y).unwrap();
        let lhs: f64 = z.iter().zip(&b).map(|(a, c)| a * c).sum();
        let rhs: f64 = y.iter().zip(&x).map(|(a, c)| a * c).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-300));
    }
}
