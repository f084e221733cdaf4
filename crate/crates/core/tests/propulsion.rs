use voltroute::dynamics::VehicleParams;
use voltroute::propulsion::{
    electrical_power, hover_performance, QuadratureSettings, RotorGeometry, RotorModel, RotorState, SolverSettings,
};

fn vehicle() -> VehicleParams<f64> {
    VehicleParams::default_octorotor()
}

fn model() -> RotorModel<f64> {
    vehicle().rotor_model().unwrap()
}

fn lerp_table(pts: &[[f64; 2]], r: f64) -> f64 {
    if r <= pts[0][0] {
        return pts[0][1];
    }
    for w in pts.windows(2) {
        if r <= w[1][0] {
            let t = (r - w[0][0]) / (w[1][0] - w[0][0]);
            return w[0][1] + t * (w[1][1] - w[0][1]);
        }
    }
    pts[pts.len() - 1][1]
}

/// Blade-element thrust and torque evaluated straight from the integrals,
/// on a much finer grid than the model uses.
fn oracle_loads(g: &RotorGeometry<f64>, rho: f64, omega: f64, v_x: f64, v_z: f64, v_i: f64) -> (f64, f64) {
    const NR: usize = 400;
    const NPSI: usize = 720;
    let n = g.blade_count as f64;
    let u_pr = v_i + v_z;
    let radial = |r0: f64, r1: f64, f: &dyn Fn(f64, f64) -> f64| {
        let dr = (r1 - r0) / NR as f64;
        let mut sum = 0.0;
        for i in 0..NR {
            let r = r0 + (i as f64 + 0.5) * dr;
            let mut ring = 0.0;
            for k in 0..NPSI {
                let psi = (k as f64 + 0.5) * std::f64::consts::TAU / NPSI as f64;
                let u_pl = omega * r + v_x * psi.sin();
                if u_pl != 0.0 {
                    ring += f(r, u_pl);
                }
            }
            sum += ring / NPSI as f64 * dr;
        }
        sum
    };
    let thrust = radial(g.root_radius, g.tip_loss_fraction * g.tip_radius, &|r, u_pl| {
        let c = lerp_table(&g.chord.0, r);
        let theta = lerp_table(&g.twist.0, r);
        0.5 * n * rho * u_pl * u_pl * c * g.lift_slope * (theta - u_pr / u_pl)
    });
    let torque = radial(g.root_radius, g.tip_radius, &|r, u_pl| {
        let c = lerp_table(&g.chord.0, r);
        let theta = lerp_table(&g.twist.0, r);
        let phi = (u_pr / u_pl).atan();
        0.5 * n * r * rho * u_pl * u_pl * c * (phi * g.lift_slope * (theta - u_pr / u_pl) + g.drag_coeff)
    });
    (thrust, torque)
}

/// Induced velocity balancing oracle blade thrust against momentum thrust,
/// by bisection.
fn oracle_induced(g: &RotorGeometry<f64>, rho: f64, omega: f64, v_x: f64, v_z: f64) -> (f64, f64, f64) {
    let k = 2.0 * rho * std::f64::consts::PI * g.tip_radius * g.tip_radius;
    let residual = |v_i: f64| oracle_loads(g, rho, omega, v_x, v_z, v_i).0 - k * v_i * v_x.hypot(v_z + v_i);
    let (mut lo, mut hi) = (0.0, 1.0);
    while residual(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v_i = 0.5 * (lo + hi);
    let (t, q) = oracle_loads(g, rho, omega, v_x, v_z, v_i);
    (t, q, v_i)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn zero_state_has_zero_loads() {
    let m = model();
    assert_eq!(m.blade_loads(&RotorState::new(0.0, 0.0, 0.0), 0.0).unwrap(), (0.0, 0.0));
}

#[test]
fn static_thrust_scales_with_omega_squared() {
    let m = model();
    let (t1, _) = m.blade_loads(&RotorState::new(300.0, 0.0, 0.0), 0.0).unwrap();
    let (t2, _) = m.blade_loads(&RotorState::new(600.0, 0.0, 0.0), 0.0).unwrap();
    assert!(rel(t2 / t1, 4.0) < 1e-12, "ratio {}", t2 / t1);
}

#[test]
fn blade_loads_match_fine_oracle() {
    let v = vehicle();
    let m = model();
    for (omega, v_x, v_z, v_i) in [(400.0, 0.0, 0.0, 4.0), (400.0, 10.0, 0.0, 2.0), (600.0, 5.0, 2.0, 3.0), (500.0, 3.0, -1.5, 4.5)] {
        let (t, q) = m.blade_loads(&RotorState::new(omega, v_x, v_z), v_i).unwrap();
        let (to, qo) = oracle_loads(&v.rotor, v.air.density, omega, v_x, v_z, v_i);
        assert!(rel(t, to) < 1e-3, "T {t} vs {to} at {omega} {v_x} {v_z}");
        assert!(rel(q, qo) < 1e-3, "Q {q} vs {qo} at {omega} {v_x} {v_z}");
    }
}

#[test]
fn forward_speed_raises_thrust_at_fixed_inflow() {
    let v = vehicle();
    let m = model();
    let s0 = RotorState::new(400.0, 0.0, 0.0);
    let s10 = RotorState::new(400.0, 10.0, 0.0);
    let v_i = 3.0;
    assert!(m.blade_loads(&s10, v_i).unwrap().0 > m.blade_loads(&s0, v_i).unwrap().0);
    let (o0, _) = oracle_loads(&v.rotor, v.air.density, 400.0, 0.0, 0.0, v_i);
    let (o10, _) = oracle_loads(&v.rotor, v.air.density, 400.0, 10.0, 0.0, v_i);
    assert!(o10 > o0);
}

#[test]
fn coupled_solution_matches_bisection_oracle() {
    let v = vehicle();
    let m = model();
    for (omega, v_x, v_z) in [(450.0, 0.0, 0.0), (450.0, 12.0, 0.0), (450.0, 0.0, 3.0), (600.0, 5.0, -1.0), (700.0, 8.0, 1.5)] {
        let loads = m.solve_induced_velocity(&RotorState::new(omega, v_x, v_z)).unwrap();
        let (t, q, v_i) = oracle_induced(&v.rotor, v.air.density, omega, v_x, v_z);
        assert!(rel(loads.thrust, t) < 2e-3, "T {} vs {t}", loads.thrust);
        assert!(rel(loads.torque, q) < 2e-3, "Q {} vs {q}", loads.torque);
        assert!(rel(loads.induced_velocity, v_i) < 2e-3, "v_i {} vs {v_i}", loads.induced_velocity);
    }
}

#[test]
fn directions_of_effect_at_fixed_omega() {
    let m = model();
    let omega = 450.0;
    let hover = m.solve_induced_velocity(&RotorState::new(omega, 0.0, 0.0)).unwrap();
    let fast = m.solve_induced_velocity(&RotorState::new(omega, 12.0, 0.0)).unwrap();
    let v10 = m.solve_induced_velocity(&RotorState::new(omega, 10.0, 0.0)).unwrap();
    let climb = m.solve_induced_velocity(&RotorState::new(omega, 0.0, 3.0)).unwrap();
    assert!(fast.induced_velocity < hover.induced_velocity);
    assert!(v10.thrust > hover.thrust);
    assert!(climb.thrust < hover.thrust);
}

#[test]
fn hover_momentum_identity() {
    let v = vehicle();
    let h = hover_performance(&v).unwrap();
    let rho_a = v.air.density * v.rotor.disk_area();
    let v_i = h.loads.induced_velocity;
    let expected = (h.loads.thrust / (2.0 * rho_a)).sqrt();
    assert!(rel(v_i, expected) < 1e-6);
    assert!(rel(h.loads.thrust, 2.0 * rho_a * v_i * v_i) < 1e-6);
    assert_eq!(h.thrust_per_rotor, v.mass * v.gravity / v.rotors());
}

#[test]
fn momentum_residual_small_everywhere() {
    let v = vehicle();
    let m = model();
    let hover = hover_performance(&v).unwrap();
    for omega in [250.0, 400.0, 550.0, 700.0, 850.0] {
        for v_x in [0.0, 0.5, 3.0, 8.0, 12.0] {
            for v_z in [-2.0, -0.5, 0.0, 1.0, 3.0] {
                let l = m.solve_induced_velocity(&RotorState::new(omega, v_x, v_z)).unwrap();
                assert!(l.induced_velocity >= 0.0);
                if l.regime.vortex_ring_clamp || l.thrust <= 0.0 {
                    continue;
                }
                let resid = (l.thrust - m.momentum_thrust(v_x, v_z, l.induced_velocity)).abs();
                assert!(resid / hover.loads.thrust < 1e-6, "residual {resid} at {omega} {v_x} {v_z}");
            }
        }
    }
}

#[test]
fn omega_round_trip() {
    let m = model();
    for (t, v_x, v_z) in [(13.5, 0.0, 0.0), (5.0, 4.0, 1.0), (20.0, 10.0, -1.5), (13.5, 0.0, 3.0), (0.3, 2.0, 2.0)] {
        let (omega, loads) = m.solve_omega_for_thrust(t, v_x, v_z).unwrap();
        let again = m.solve_induced_velocity(&RotorState::new(omega, v_x, v_z)).unwrap();
        assert!(rel(loads.thrust, t) < 1e-6, "{} vs {t}", loads.thrust);
        assert!(rel(again.thrust, t) < 1e-6);
    }
}

#[test]
fn omega_increases_with_thrust() {
    let m = model();
    for (v_x, v_z) in [(0.0, 0.0), (6.0, 0.0), (0.0, 3.0), (3.0, -2.0)] {
        let mut last = 0.0;
        for k in 1..=25 {
            let (omega, _) = m.solve_omega_for_thrust(k as f64, v_x, v_z).unwrap();
            assert!(omega > last, "omega not increasing at T={k} ({v_x}, {v_z})");
            last = omega;
        }
    }
}

#[test]
fn small_thrust_limit_approaches_zero_thrust_speed() {
    let m = model();
    let (v_x, v_z) = (0.0, 3.0);
    // dense sweep for the speed where thrust first turns positive
    let step = 0.01;
    let mut omega0 = None;
    let mut w: f64 = step;
    while w < m.max_omega() {
        if m.solve_induced_velocity(&RotorState::new(w, v_x, v_z)).unwrap().thrust > 0.0 {
            omega0 = Some(w);
            break;
        }
        w += step;
    }
    let omega0 = omega0.unwrap();
    assert!(omega0 > 1.0);

    let mut last = f64::INFINITY;
    for e in 0..8 {
        let t = 10f64.powi(-e);
        let (omega, _) = m.solve_omega_for_thrust(t, v_x, v_z).unwrap();
        assert!(omega < last);
        assert!(omega >= omega0 - step);
        last = omega;
    }
    assert!(last - omega0 < 2.0 * step, "{last} vs {omega0}");
}

#[test]
fn infeasible_thrust_reports_bracket() {
    let m = model();
    match m.solve_omega_for_thrust(1e4, 0.0, 0.0) {
        Err(voltroute::Error::InfeasibleThrust { requested, max, .. }) => {
            assert_eq!(requested, 1e4);
            assert!(max < 1e4);
        }
        other => panic!("expected infeasible thrust, got {other:?}"),
    }
}

#[test]
fn loads_increase_with_omega_and_efficiency_falls() {
    let v = vehicle();
    let m = model();
    let h = hover_performance(&v).unwrap();
    for (v_x, v_z) in [(0.0, 0.0), (5.0, 0.0), (0.0, 2.0)] {
        let mut prev: Option<(f64, f64, f64, f64)> = None;
        for k in 0..9 {
            let omega = h.omega * (0.7 + 0.1 * k as f64);
            let l = m.solve_induced_velocity(&RotorState::new(omega, v_x, v_z)).unwrap();
            let p = electrical_power(l.torque, omega, &v.electrical).battery_power;
            let shaft = l.thrust / (l.torque * omega);
            let batt = l.thrust / p;
            if let Some((t0, q0, s0, b0)) = prev {
                assert!(l.thrust > t0 && l.torque > q0);
                assert!(shaft < s0, "T/Q omega not decreasing at k={k}");
                assert!(batt < b0, "T/P not decreasing at k={k}");
            }
            prev = Some((l.thrust, l.torque, shaft, batt));
        }
    }
}

#[test]
fn hover_efficiency_beats_overspeed() {
    let v = vehicle();
    let m = model();
    let h = hover_performance(&v).unwrap();
    let tp = |omega: f64| {
        let l = m.solve_induced_velocity(&RotorState::new(omega, 0.0, 0.0)).unwrap();
        l.thrust / electrical_power(l.torque, omega, &v.electrical).battery_power
    };
    assert!(tp(h.omega) > tp(1.3 * h.omega));
}

#[test]
fn hover_power_matches_dense_sweep() {
    let v = vehicle();
    let m = model();
    let target = v.mass * v.gravity / v.rotors();
    let thrust = |w: f64| m.solve_induced_velocity(&RotorState::new(w, 0.0, 0.0)).unwrap().thrust;
    let mut lo = 1.0;
    while thrust(lo + 1.0) < target {
        lo += 1.0;
    }
    let mut hi = lo + 1.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if thrust(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let omega = 0.5 * (lo + hi);
    let l = m.solve_induced_velocity(&RotorState::new(omega, 0.0, 0.0)).unwrap();
    let p = v.rotors() * electrical_power(l.torque, omega, &v.electrical).battery_power;
    let h = hover_performance(&v).unwrap();
    assert!(rel(h.omega, omega) < 1e-6);
    assert!(rel(h.battery_power, p) < 1e-6, "{} vs {p}", h.battery_power);
}

#[test]
fn doubling_resolution_changes_loads_little() {
    let v = vehicle();
    let coarse = model();
    let fine = RotorModel::with_settings(
        v.rotor.clone(),
        v.air,
        v.electrical.max_omega(),
        QuadratureSettings {
            radial_nodes: 80,
            azimuth_nodes: 72,
        },
        SolverSettings::default(),
    )
    .unwrap();
    for (omega, v_x, v_z) in [(450.0, 0.0, 0.0), (500.0, 10.0, 0.0), (600.0, 3.0, 3.0), (550.0, 6.0, -2.0)] {
        let s = RotorState::new(omega, v_x, v_z);
        let a = coarse.solve_induced_velocity(&s).unwrap();
        let b = fine.solve_induced_velocity(&s).unwrap();
        assert!(rel(a.thrust, b.thrust) < 1e-3, "T {} vs {}", a.thrust, b.thrust);
        assert!(rel(a.torque, b.torque) < 1e-3, "Q {} vs {}", a.torque, b.torque);
    }
}

#[test]
fn affine_thrust_agrees_with_double_sum() {
    let m = model();
    for (omega, v_x, v_z, v_i) in [(450.0, 0.0, 0.0, 4.0), (500.0, 11.0, 0.5, 1.0), (300.0, 2.0, -1.0, 3.0)] {
        let (alpha, beta) = m.quadrature().thrust_affine(omega, v_x, v_z);
        let (t, _) = m.blade_loads(&RotorState::new(omega, v_x, v_z), v_i).unwrap();
        assert!(rel(alpha - beta * v_i, t) < 1e-12);
    }
}

#[test]
fn descent_flags_axial_regime() {
    let m = model();
    let l = m.solve_induced_velocity(&RotorState::new(450.0, 0.0, -1.0)).unwrap();
    assert!(l.regime.axial_descent);
    assert!(l.thrust.is_finite() && l.induced_velocity.is_finite());
    let l = m.solve_induced_velocity(&RotorState::new(450.0, 3.0, -1.0)).unwrap();
    assert!(!l.regime.axial_descent);
}

#[test]
fn single_precision_tracks_double() {
    let v64 = vehicle();
    let v32: VehicleParams<f32> = VehicleParams::from_json_str(voltroute::dynamics::DEFAULT_PARAMS_JSON).unwrap();
    let h64 = hover_performance(&v64).unwrap();
    let h32 = hover_performance(&v32).unwrap();
    assert!(rel(h32.omega as f64, h64.omega) < 1e-4);
    assert!(rel(h32.battery_power as f64, h64.battery_power) < 1e-4);
}
