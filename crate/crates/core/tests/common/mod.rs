#![allow(dead_code)]

use voltroute::planner::Mission;
use voltroute::table::{EnergyTable, GridSpec, TableMetadata};

/// A cheap stand-in energy surface, asymmetric in climb versus descent.
pub fn synthetic_energy(x: f64, z: f64) -> f64 {
    120.0 * x + 380.0 * z.max(0.0) + 140.0 * (-z).max(0.0) + 25.0 * x.hypot(z)
}

pub fn synthetic_table(x_max: f64, z_max: f64, step: f64) -> EnergyTable<f64> {
    let spec = GridSpec {
        x_min: 0.0,
        x_max,
        x_step: step,
        z_min: -z_max,
        z_max,
        z_step: step,
    };
    let (nx, nz) = (spec.x_count().unwrap(), spec.z_count().unwrap());
    let values = (0..nx)
        .flat_map(|i| (0..nz).map(move |j| (i, j)))
        .map(|(i, j)| synthetic_energy(spec.x_node(i), spec.z_node(j)))
        .collect();
    EnergyTable {
        spec,
        vehicle_fingerprint: "synthetic".into(),
        metadata: TableMetadata {
            dt: 0.0,
            code_version: "test".into(),
            vehicle_label: "synthetic".into(),
        },
        values,
    }
}

/// Table II waypoints A..H with the origin at zero.
pub fn sample_mission_1() -> Mission<f64> {
    Mission::new(
        [0.0; 3],
        vec![
            [-20.0, 20.0, 19.0],
            [20.0, -20.0, 19.0],
            [-12.0, -12.0, 11.0],
            [12.0, 12.0, 11.0],
            [-12.0, 12.0, -11.0],
            [12.0, -12.0, -11.0],
            [-20.0, -20.0, -19.0],
            [20.0, 20.0, -19.0],
        ],
    )
    .unwrap()
}

/// A, B, C of the three-waypoint mission.
pub fn three_waypoint_mission() -> Mission<f64> {
    Mission::new([0.0; 3], vec![[0.0, 40.0, 25.0], [40.0, 0.0, 25.0], [0.0, 0.0, 24.0]]).unwrap()
}
