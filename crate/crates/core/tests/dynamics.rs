use proptest::prelude::*;
use voltroute::dynamics::{body_acceleration, inverse_dynamics, BodyState, VehicleParams};

proptest! {
    #[test]
    fn inverse_dynamics_round_trip(
        x_ddot in -2.0f64..2.0,
        z_ddot in -2.0f64..2.0,
        x_dot in -10.0f64..10.0,
        z_dot in -2.0f64..3.0,
    ) {
        let v = VehicleParams::default_octorotor();
        let cmd = inverse_dynamics((x_ddot, z_ddot), (x_dot, z_dot), &v).unwrap();
        prop_assert!(cmd.total_thrust > 0.0);
        prop_assert!(cmd.theta.abs() <= v.limits.theta_max);
        let state = BodyState { x_dot, z_dot, theta: cmd.theta, ..Default::default() };
        let per_rotor = vec![cmd.total_thrust / v.rotors(); v.rotor_count as usize];
        let acc = body_acceleration(&state, &per_rotor, &v).unwrap();
        prop_assert!((acc.x_ddot - x_ddot).abs() < 1e-9);
        prop_assert!((acc.z_ddot - z_ddot).abs() < 1e-9);
        prop_assert!(acc.theta_ddot.abs() < 1e-9);
    }

    #[test]
    fn body_acceleration_is_linear_in_thrust(
        t in proptest::collection::vec(0.0f64..30.0, 8),
        u in proptest::collection::vec(0.0f64..30.0, 8),
        k in 0.1f64..3.0,
        theta in -0.5f64..0.5,
    ) {
        // drag is thrust-independent, so compare at zero horizontal speed
        let v = VehicleParams::default_octorotor();
        let s = BodyState { theta, ..Default::default() };
        let sum: Vec<f64> = t.iter().zip(&u).map(|(a, b)| a + k * b).collect();
        let a = body_acceleration(&s, &t, &v).unwrap();
        let b = body_acceleration(&s, &u, &v).unwrap();
        let c = body_acceleration(&s, &sum, &v).unwrap();
        let g = v.gravity;
        prop_assert!((c.x_ddot - (a.x_ddot + k * b.x_ddot)).abs() < 1e-9);
        prop_assert!(((c.z_ddot + g) - ((a.z_ddot + g) + k * (b.z_ddot + g))).abs() < 1e-9);
        prop_assert!((c.theta_ddot - (a.theta_ddot + k * b.theta_ddot)).abs() < 1e-9);
    }
}

#[test]
fn parameter_file_round_trips() {
    let v = VehicleParams::<f64>::default_octorotor();
    let text = serde_json::to_string(&v).unwrap();
    let back = VehicleParams::<f64>::from_json_str(&text).unwrap();
    assert_eq!(back, v);
    assert_eq!(back.fingerprint(), v.fingerprint());
}

#[test]
fn invalid_parameter_files_are_rejected() {
    let base: serde_json::Value = serde_json::from_str(voltroute::dynamics::DEFAULT_PARAMS_JSON).unwrap();
    let cases: [(&str, serde_json::Value); 5] = [
        ("/mass", serde_json::json!(-1.0)),
        ("/rotor_count", serde_json::json!(3)),
        ("/rotor/root_radius", serde_json::json!(0.5)),
        ("/electrical/esc_efficiency", serde_json::json!(1.5)),
        ("/limits/theta_max", serde_json::json!(2.0)),
    ];
    for (ptr, value) in cases {
        let mut doc = base.clone();
        *doc.pointer_mut(ptr).unwrap() = value;
        assert!(VehicleParams::<f64>::from_json_str(&doc.to_string()).is_err(), "{ptr} accepted");
    }
    assert!(VehicleParams::<f64>::from_json_str("{").is_err());
}
