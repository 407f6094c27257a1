use stheat_web::{heat_sink, two_domain_pair};

#[test]
fn discrete_and_modal_objectives_agree() {
    for k1 in [0.3, 0.5523, 0.7] {
        let (d, m) = two_domain_pair(k1, 12, 200).unwrap();
        assert!((d - m).abs() <= 1e-6 * m.abs(), "{k1}: {d} vs {m}");
    }
    assert!(two_domain_pair(0.9, 8, 50).is_err());
}

#[test]
fn small_heat_sink_run() {
    let d = heat_sink(10, 6, 3.0, 0.5, 40).unwrap();
    let rho = d.rho();
    assert_eq!(rho.len(), 10);
    assert!(rho[9] > 0.9 && rho[0] < 0.1);
    assert!(rho.iter().sum::<f64>() * 0.1 <= 0.5 + 1e-9);
    assert_eq!(d.objectives().len(), d.changes().len() + 1);
    assert!(d.converged());
}
