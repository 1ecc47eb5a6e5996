use evodyn::{
    integrate_mean_dynamic, make_linear_game, PopulationGame, RevisionProtocol, SocialState,
};

fn rps() -> PopulationGame {
    let a = vec![
        vec![0.0, -1.0, 1.0],
        vec![1.0, 0.0, -1.0],
        vec![-1.0, 1.0, 0.0],
    ];
    make_linear_game(&a, 1.0).unwrap()
}

fn final_state(protocol: &RevisionProtocol, dt: f64) -> Vec<f64> {
    let x0 = SocialState::single(vec![0.5, 0.3, 0.2]);
    integrate_mean_dynamic(&rps(), protocol, &x0, 1.0, dt)
        .unwrap()
        .last()
        .flat()
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn rk4_is_fourth_order_on_closed_form() {
    let exact = |t: f64| 1.0 / 3.0 + (0.5 - 1.0 / 3.0) * (-3.0 * t).exp();
    let err = |dt: f64| (final_state(&RevisionProtocol::constant(1.0), dt)[0] - exact(1.0)).abs();
    let order = (err(0.1) / err(0.05)).log2();
    assert!(order >= 3.9, "observed order {order}");
}

#[test]
fn rk4_is_fourth_order_on_sum_exponential() {
    let p = RevisionProtocol::sum_exponential(1.0);
    let (a, b, c) = (
        final_state(&p, 0.1),
        final_state(&p, 0.05),
        final_state(&p, 0.025),
    );
    let order = (sup(&a, &b) / sup(&b, &c)).log2();
    assert!(order >= 3.9, "observed order {order}");
}

#[test]
fn constant_protocol_reaches_barycenter() {
    let x0 = SocialState::single(vec![1.0, 0.0, 0.0]);
    let tr =
        integrate_mean_dynamic(&rps(), &RevisionProtocol::constant(1.0), &x0, 50.0, 0.01).unwrap();
    assert!(tr
        .last()
        .flat()
        .iter()
        .all(|v| (v - 1.0 / 3.0).abs() < 1e-6));
    let one =
        integrate_mean_dynamic(&rps(), &RevisionProtocol::constant(1.0), &x0, 0.01, 0.01).unwrap();
    assert_eq!(one.len(), 2);
}

#[test]
fn barycenter_is_fixed() {
    let g = rps();
    let tr = integrate_mean_dynamic(
        &g,
        &RevisionProtocol::constant(1.0),
        &g.barycenter(),
        5.0,
        0.01,
    )
    .unwrap();
    assert!(tr
        .last()
        .flat()
        .iter()
        .all(|v| (v - 1.0 / 3.0).abs() < 1e-12));
}

#[test]
fn mass_is_conserved_over_ten_thousand_steps() {
    let x0 = SocialState::single(vec![0.5, 0.3, 0.2]);
    for eta in [0.5, 1.0, 2.0] {
        let tr = integrate_mean_dynamic(
            &rps(),
            &RevisionProtocol::sum_exponential(eta),
            &x0,
            100.0,
            0.01,
        )
        .unwrap();
        assert_eq!(tr.len(), 10_001);
        assert!(tr.max_mass_drift(&[1.0]) <= 1e-9);
    }
}
