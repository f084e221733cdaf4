//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p voltroute-core --test acceptance`.

#[path = "common/mod.rs"]
mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voltroute::bench::{run_benchmark, write_missions_csv, BenchmarkConfig};
use voltroute::dynamics::VehicleParams;
use voltroute::leg::{LegDisplacement, LegSimulator, DEFAULT_DT};
use voltroute::planner::milp::{mtz_model, tour_assignment, LpModel};
use voltroute::planner::{
    baseline_orders, order_metrics, solve_exhaustive, solve_held_karp, CostMatrix, Direction, Mission,
};
use voltroute::propulsion::{electrical_power, hover_performance, RotorState};
use voltroute::table::{EnergyTable, GridSpec};

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} {id}: {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn note(&self, id: &str, detail: String) {
        println!("INFO {id}: {detail}");
    }
}

fn within(a: f64, b: f64) -> bool {
    (a - b).abs() <= 0.1
}

/// Covers every leg of a mission in the ±30 m x/y, ±25 m z box.
fn acceptance_grid() -> GridSpec<f64> {
    GridSpec {
        x_min: 0.0,
        x_max: 86.0,
        x_step: 2.0,
        z_min: -50.0,
        z_max: 50.0,
        z_step: 2.0,
    }
}

fn criterion_1(r: &mut Report, table: &EnergyTable<f64>) {
    let t0 = Instant::now();
    let b = baseline_orders(&common::sample_mission_1(), table).unwrap();
    let (z, x, d) = (b.min_z.forward.z_m, b.min_x.forward.x_m, b.min_d.forward.d_m);
    let m3 = common::three_waypoint_mission();
    let b3 = baseline_orders(&m3, table).unwrap();
    let md = &b3.min_d.forward;
    let alt = order_metrics(&[2, 3, 1], Direction::Forward, &m3, table).unwrap();
    let pass = within(z, 76.0)
        && within(x, 183.2)
        && within(d, 284.4)
        && within(md.d_m, 167.8)
        && within(md.x_m, 136.6)
        && within(md.z_m, 50.0)
        && within(alt.d_m, 174.4)
        && within(alt.x_m, 160.0)
        && within(alt.z_m, 52.0);
    r.line(
        "1 geometric reproduction",
        pass,
        format!(
            "mission 1: min-Z Z_M={z:.1}, min-X X_M={x:.1}, min-D D_M={d:.1}; 3-waypoint min-D=({:.1}, {:.1}, {:.1}), O-B-C-A-O=({:.1}, {:.1}, {:.1}); {:.1} ms",
            md.d_m,
            md.x_m,
            md.z_m,
            alt.d_m,
            alt.x_m,
            alt.z_m,
            t0.elapsed().as_secs_f64() * 1e3
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut mismatches = 0;
    let count = 100;
    for k in 0..count {
        let n = 4 + k % 5;
        let size = n + 1;
        let vals: Vec<f64> = (0..size * size).map(|_| rng.gen_range(0.0..10_000.0)).collect();
        let c = CostMatrix::from_fn(size, |i, j| if i == j { 0.0 } else { vals[i * size + j] });
        let e = solve_exhaustive(&c).unwrap();
        let h = solve_held_karp(&c).unwrap();
        if e.cost != h.cost {
            mismatches += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    r.line(
        "2 solver exactness",
        mismatches == 0 && secs < 30.0,
        format!("{count} asymmetric matrices, N_W 4..8: {mismatches} cost mismatches; {secs:.2} s"),
    );
}

fn criterion_3(r: &mut Report, table: &EnergyTable<f64>) {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let dir = tempfile::tempdir().unwrap();
    let count = 24;
    let mut bad = 0;
    for k in 0..count {
        let n = 2 + k % 9;
        let w = (0..n)
            .map(|_| [rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0), rng.gen_range(-25.0..25.0)])
            .collect();
        let m = Mission::new([0.0; 3], w).unwrap();
        let c = CostMatrix::energies(&m, table).unwrap();
        let tour = solve_held_karp(&c).unwrap();
        let path = dir.path().join(format!("{k}.lp"));
        voltroute::planner::milp::export_milp(&c, &path).unwrap();
        let model = LpModel::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let eval = model.evaluate(&tour_assignment(&tour.order), 0.0);
        let nodes: Vec<usize> = std::iter::once(0).chain(tour.order.iter().copied()).chain(std::iter::once(0)).collect();
        if !eval.feasible() || model.objective_along(&nodes) != Some(tour.cost) || model != mtz_model(&c) {
            bad += 1;
        }
    }
    r.line(
        "3 MILP export validity",
        bad == 0,
        format!(
            "{count} energy instances (N_W 2..10) written, re-read and evaluated at the exact optimum: {bad} failures; {:.2} s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

fn criterion_4(r: &mut Report) {
    let v = VehicleParams::<f64>::default_octorotor();
    let model = v.rotor_model().unwrap();
    let h = hover_performance(&v).unwrap();

    let k = 2.0 * v.air.density * v.rotor.disk_area();
    let v_i = h.loads.induced_velocity;
    let resid = (h.loads.thrust - k * v_i * v_i).abs() / h.loads.thrust;
    r.line("4a hover momentum residual", resid < 1e-6, format!("relative residual {resid:.2e}"));

    let tp: Vec<f64> = (0..9)
        .map(|i| {
            let omega = h.omega * (0.7 + 0.1 * i as f64);
            let l = model.solve_induced_velocity(&RotorState::new(omega, 0.0, 0.0)).unwrap();
            l.thrust / electrical_power(l.torque, omega, &v.electrical).battery_power
        })
        .collect();
    let decreasing = tp.windows(2).all(|w| w[1] < w[0]);
    r.line(
        "4b T/P_batt decreasing",
        decreasing,
        format!("9 points over [0.7, 1.5] omega_h: {:.5} .. {:.5} N/W", tp[0], tp[8]),
    );

    let sim = LegSimulator::new(v, DEFAULT_DT).unwrap();
    let e = |x: f64, z: f64| sim.simulate(&LegDisplacement::new(x, z)).unwrap().energy;
    let (up, down) = (e(40.0, 25.0), e(40.0, -25.0));
    r.line("4c climb vs descent", up > down, format!("E(40,+25) = {up:.0} J > E(40,-25) = {down:.0} J"));

    let (diag, vert, horiz) = (e(50.0, 30.0), e(0.0, 30.0), e(50.0, 0.0));
    let excess = (vert + horiz) / diag - 1.0;
    r.line(
        "4d diagonal climb",
        diag < vert + horiz && excess >= 0.10,
        format!(
            "E(50,+30) = {diag:.0} J, E(0,+30) + E(50,0) = {:.0} J, sum exceeds diagonal by {:.1}%",
            vert + horiz,
            100.0 * excess
        ),
    );

    let (dd, dv, dh) = (e(30.0, -30.0), e(0.0, -30.0), e(30.0, 0.0));
    r.line(
        "4e diagonal descent (weak)",
        dd < dv + dh,
        format!("E(30,-30) = {dd:.0} J < E(0,-30) + E(30,0) = {:.0} J", dv + dh),
    );
    let ratio = dd / dv;
    if dd < dv {
        r.line("4e diagonal descent (strong)", true, format!("E(30,-30)/E(0,-30) = {ratio:.4}"));
    } else {
        r.note(
            "4e diagonal descent (strong)",
            format!("not realized by the default parameters: E(30,-30)/E(0,-30) = {ratio:.4} ({dd:.0} J vs {dv:.0} J)"),
        );
    }
}

fn criterion_5(r: &mut Report, table: &EnergyTable<f64>) {
    let t0 = Instant::now();
    let sim = LegSimulator::new(VehicleParams::default_octorotor(), DEFAULT_DT).unwrap();
    let s = &table.spec;
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let leg = LegDisplacement::new(rng.gen_range(s.x_min..=s.x_max), rng.gen_range(s.z_min..=s.z_max));
        let truth = sim.simulate(&leg).unwrap().energy;
        let err = (table.interpolate(&leg).unwrap() - truth).abs() / truth;
        worst = worst.max(err);
    }
    let secs = t0.elapsed().as_secs_f64();
    r.line(
        "5 interpolation fidelity",
        worst <= 0.02 && secs < 120.0,
        format!("50 random legs, worst relative error {:.3}%; {secs:.2} s", 100.0 * worst),
    );
}

fn criteria_6_7(r: &mut Report, table: &EnergyTable<f64>) {
    let config = BenchmarkConfig::new(6, 30.0, 25.0, 500, 2023);
    let t0 = Instant::now();
    let (records, stats) = run_benchmark(&config, table, 1).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let frac = stats.min_d_differs_fraction;
    r.line(
        "6 ensemble statistics",
        frac > 0.5 && stats.min_x.mean_pct >= stats.min_d.mean_pct,
        format!(
            "500 missions, N_W=6, +-30/+-25 m: min-D != min-E in {:.1}%; mean increase min-X {:.2}%, min-Z {:.2}%, min-D {:.2}%; {secs:.1} s",
            100.0 * frac,
            stats.min_x.mean_pct,
            stats.min_z.mean_pct,
            stats.min_d.mean_pct
        ),
    );

    let (records8, _) = run_benchmark(&config, table, 8).unwrap();
    let (mut a, mut b) = (Vec::new(), Vec::new());
    write_missions_csv(&records, &mut a).unwrap();
    write_missions_csv(&records8, &mut b).unwrap();
    r.line(
        "7 determinism",
        a == b,
        format!("per-mission CSV at 1 and 8 workers: {} bytes each, identical = {}", a.len(), a == b),
    );
}

fn main() {
    let mut r = Report { failed: 0 };
    let t0 = Instant::now();
    let table = EnergyTable::build(acceptance_grid(), &VehicleParams::default_octorotor(), DEFAULT_DT).unwrap();
    let (nx, nz) = table.shape();
    r.note("setup", format!("built {nx} x {nz} energy table in {:.1} s", t0.elapsed().as_secs_f64()));

    criterion_1(&mut r, &table);
    criterion_2(&mut r);
    criterion_3(&mut r, &table);
    criterion_4(&mut r);
    criterion_5(&mut r, &table);
    criteria_6_7(&mut r, &table);

    if r.failed > 0 {
        println!("{} acceptance criteria failed", r.failed);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
