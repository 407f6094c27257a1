use proptest::prelude::*;
use stheat::optimizer::{
    mma_update, relative_change, run_topology_optimization, scalar_minimize, MmaConfig, MmaState, StopReason,
    Tolerances,
};
use stheat::presets::TwoDomainSetup;
use stheat::verification::{crossvalidate_point, reference_optimum};

#[test]
fn scalar_examples() {
    let r = scalar_minimize(|x| Ok((x - 2.0).powi(2)), 0.0, 5.0, 1e-8).unwrap();
    assert!((r.x - 2.0).abs() <= 1e-8 && r.bracket <= 1e-8);
    let r = scalar_minimize(|x| Ok(x.powi(4) - x), 0.0, 2.0, 1e-8).unwrap();
    assert!((r.x - 0.25f64.powf(1.0 / 3.0)).abs() <= 1e-8);
    assert!(scalar_minimize(|_| Ok(f64::NAN), 0.0, 1.0, 1e-6).is_err());
}

#[test]
fn relative_change_guards_zero() {
    assert_eq!(relative_change(1.0, 0.0), 1e12);
    assert!((relative_change(1.1, 1.0) - 0.1).abs() < 1e-12);
}

// Coarse version of the cross-validation: the MMA pipeline finds the
// reference optimum of the modal expansion, with κ₁ > κ₂.
#[test]
fn two_subdomain_optimum_matches_reference() {
    let setup = TwoDomainSetup::default();
    let reference = reference_optimum(&setup, 200, 1e-10).unwrap();
    assert!(reference.kappa1 > reference.kappa2);
    assert!((reference.kappa1 + reference.kappa2 - 0.75).abs() < 1e-12);
    let tol = Tolerances {
        tau_rho: 1e-8,
        tau_j: 1e-8,
    };
    let row = crossvalidate_point(&setup, &reference, (12, 12), tol, 100, MmaConfig::default()).unwrap();
    assert!(row.converged);
    assert!(row.design_error < 1e-5, "{row:?}");
    assert!(row.kappa1 > row.kappa2);
}

#[test]
fn zero_sensitivity_stops_at_first_iteration() {
    use stheat::optimizer::{DesignProblem, SpaceTimeProblem};
    let setup = TwoDomainSetup::default();
    let mut spec = setup.problem(4, 4);
    spec.material.kappa_min = 0.4;
    spec.material.kappa_max = 0.4;
    let sat = stheat::heat::sat_for_problem(&spec, &Default::default()).unwrap();
    let p = SpaceTimeProblem {
        disc: stheat::heat::Discretization::new(spec, sat).unwrap(),
        volume_bound: 0.375,
    };
    let tr =
        run_topology_optimization(&p, &p.uniform_design(), Tolerances::default(), 10, MmaConfig::default()).unwrap();
    assert_eq!(tr.iterations(), 1);
    assert_eq!(tr.stop, StopReason::DesignConverged);
}

fn design_and_grad(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0f64..1.0, n),
        prop::collection::vec(-10.0f64..10.0, n),
        prop::collection::vec(0.1f64..2.0, n),
    )
}

proptest! {
    // Feasibility and asymptote ordering over a sequence of updates with
    // arbitrary gradients.
    #[test]
    fn updates_stay_feasible((rho0, g, v) in design_and_grad(6), frac in 0.2f64..0.9, steps in 1usize..6) {
        let total: f64 = v.iter().sum();
        let bound = frac * total;
        let vol: f64 = rho0.iter().zip(&v).map(|(r, w)| r * w).sum();
        let rho0: Vec<f64> = if vol > bound { rho0.iter().map(|r| r * bound / vol).collect() } else { rho0 };
        let mut st = MmaState::new(6, MmaConfig::default());
        let mut rho = rho0;
        for s in 0..steps {
            let grad: Vec<f64> = g.iter().enumerate().map(|(i, x)| x * (1.0 + 0.3 * ((s + i) as f64).sin())).collect();
            let new = mma_update(&rho, &grad, &v, bound, &mut st).unwrap();
            let used: f64 = new.iter().zip(&v).map(|(r, w)| r * w).sum();
            prop_assert!(used <= bound + 1e-9);
            prop_assert!(new.iter().all(|r| (0.0..=1.0).contains(r)));
            for k in 0..6 {
                prop_assert!(st.lower[k] < new[k] || new[k] == 0.0);
                prop_assert!(new[k] < st.upper[k] || new[k] == 1.0);
                prop_assert!(st.lower[k] < st.upper[k]);
            }
            rho = new;
        }
    }

    #[test]
    fn gradient_scaling_is_invisible((rho, g, v) in design_and_grad(5), scale in 1e-6f64..1e6) {
        let bound = 0.5 * v.iter().sum::<f64>();
        let vol: f64 = rho.iter().zip(&v).map(|(r, w)| r * w).sum();
        let rho: Vec<f64> = if vol > bound { rho.iter().map(|r| r * bound / vol).collect() } else { rho };
        let mut a = MmaState::new(5, MmaConfig::default());
        let mut b = MmaState::new(5, MmaConfig::default());
        let scaled: Vec<f64> = g.iter().map(|x| x * scale).collect();
        let x = mma_update(&rho, &g, &v, bound, &mut a).unwrap();
        let y = mma_update(&rho, &scaled, &v, bound, &mut b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
    }
}
