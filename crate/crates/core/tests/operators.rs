use proptest::prelude::*;
use stheat::sbp::{build_sbp_1d, lgl_rule, verify_sbp};
use stheat::spacetime::{build_element_ops, Face};

#[test]
fn lgl_weights_integrate_polynomials() {
    for n in 2..=16 {
        let r = lgl_rule(n).unwrap();
        for deg in 0..=(2 * n - 3) {
            let q: f64 = r
                .nodes
                .iter()
                .zip(&r.weights)
                .map(|(x, w)| w * x.powi(deg as i32))
                .sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
        }
    }
}

#[test]
fn three_node_boundary_weight() {
    let op = build_sbp_1d(3, (0.0, 1.0)).unwrap();
    assert!((op.p_first() - 1.0 / 6.0).abs() < 1e-15);
    assert!((op.p_last() - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn rejects_single_node_and_empty_interval() {
    assert!(build_sbp_1d(1, (0.0, 1.0)).is_err());
    assert!(build_sbp_1d(4, (1.0, 1.0)).is_err());
}

#[test]
fn space_time_faces_and_norm() {
    let ops = build_element_ops(
        build_sbp_1d(4, (0.0, 2.0)).unwrap(),
        build_sbp_1d(3, (0.0, 1.0)).unwrap(),
    )
    .unwrap();
    assert_eq!(ops.face(Face::South).len(), 4);
    assert_eq!(ops.face(Face::West).len(), 3);
    let ones = vec![1.0; ops.n()];
    assert!((ops.inner(&ones, &ones) - 2.0).abs() < 1e-14);
    assert!((ops.face_norm_sq(Face::North, &ones) - 2.0).abs() < 1e-14);
    assert!((ops.face_norm_sq(Face::East, &ones) - 1.0).abs() < 1e-14);
}

proptest! {
    #[test]
    fn sbp_properties_on_any_interval(n in 2usize..14, a in -5.0f64..5.0, len in 0.01f64..10.0) {
        let op = build_sbp_1d(n, (a, a + len)).unwrap();
        let rep = verify_sbp(&op);
        let scale = (1.0 + a.abs() + len).powi(n as i32 - 1) / len;
        prop_assert!(rep.sbp_identity <= 1e-12);
        prop_assert!(rep.accuracy <= 1e-10 * scale);
        prop_assert_eq!(rep.spd, 0.0);
        let total: f64 = op.p.iter().sum();
        prop_assert!((total - len).abs() <= 1e-13 * len.max(1.0));
    }

    #[test]
    fn space_time_derivative_is_exact_on_tensor_polynomials(nx in 2usize..7, nt in 2usize..7, px in 0i32..6, pt in 0i32..6) {
        prop_assume!((px as usize) < nx && (pt as usize) < nt);
        let ops = build_element_ops(build_sbp_1d(nx, (0.5, 1.5)).unwrap(), build_sbp_1d(nt, (0.0, 1.0)).unwrap()).unwrap();
        let u = ops.sample(|x, t| x.powi(px) * t.powi(pt));
        let du = ops.apply_dx(&u);
        let exact = ops.sample(|x, t| if px == 0 { 0.0 } else { px as f64 * x.powi(px - 1) * t.powi(pt) });
        for (a, b) in du.iter().zip(&exact) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
