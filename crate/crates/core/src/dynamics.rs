//! Planar rigid-body kinetics and the quasi-static inverse map from a
//! commanded acceleration to total thrust and pitch.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::propulsion::{AirProperties, ElectricalParams, RotorGeometry, RotorModel};
use crate::scalar::Scalar;

/// Default octorotor parameter document shipped with the crate.
pub const DEFAULT_PARAMS_JSON: &str = include_str!("../params/octorotor.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MotionLimits<T> {
    pub v_max_horiz: T,
    pub v_max_climb: T,
    pub v_max_descent: T,
    pub a_max: T,
    pub theta_max: T,
}

impl<T: Scalar> MotionLimits<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let positive = [self.v_max_horiz, self.v_max_climb, self.v_max_descent, self.a_max, self.theta_max]
            .iter()
            .all(|&v| v > zero && v.is_finite());
        if positive && self.theta_max < T::FRAC_PI_2() {
            Ok(())
        } else {
            Err(Error::InvalidParams("motion limits must be positive with theta_max < pi/2".into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct VehicleParams<T> {
    #[serde(default)]
    pub label: String,
    /// Mass (kg).
    pub mass: T,
    #[serde(default = "default_gravity")]
    pub gravity: T,
    pub rotor_count: u32,
    /// Horizontal body drag coefficient (kg/m).
    pub body_drag_coeff: T,
    /// Pitch moment of inertia (kg m^2).
    pub pitch_inertia: T,
    /// Per-rotor thrust arm about the pitch axis (m).
    pub rotor_arms: Vec<T>,
    /// Per-rotor longitudinal offset from the centre of mass (m).
    pub rotor_offsets: Vec<T>,
    pub rotor: RotorGeometry<T>,
    pub air: AirProperties<T>,
    pub electrical: ElectricalParams<T>,
    pub limits: MotionLimits<T>,
}

fn default_gravity<T: Scalar>() -> T {
    T::lit(9.81)
}

impl<T: Scalar> VehicleParams<T> {
    /// The shipped octorotor parameter set.
    pub fn default_octorotor() -> Self {
        Self::from_json_str(DEFAULT_PARAMS_JSON).expect("bundled parameter file is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(s).map_err(|e| Error::json("<parameters>", e))?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let params: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        if !(self.mass > zero) {
            return Err(Error::InvalidParams("mass must be positive".into()));
        }
        if !(self.gravity > zero) {
            return Err(Error::InvalidParams("gravity must be positive".into()));
        }
        if self.rotor_count < 4 {
            return Err(Error::InvalidParams("rotor_count must be at least 4".into()));
        }
        if !(self.body_drag_coeff >= zero) {
            return Err(Error::InvalidParams("body_drag_coeff must be non-negative".into()));
        }
        if !(self.pitch_inertia > zero) {
            return Err(Error::InvalidParams("pitch_inertia must be positive".into()));
        }
        let n = self.rotor_count as usize;
        if self.rotor_arms.len() != n || self.rotor_offsets.len() != n {
            return Err(Error::InvalidParams(format!(
                "rotor_arms and rotor_offsets need {n} entries"
            )));
        }
        self.rotor.validate()?;
        self.air.validate()?;
        self.electrical.validate()?;
        self.limits.validate()
    }

    /// Rotor model bounded by the motor's no-load speed.
    pub fn rotor_model(&self) -> Result<RotorModel<T>> {
        RotorModel::new(self.rotor.clone(), self.air, self.electrical.max_omega())
    }

    /// SHA-256 of the canonical JSON form of these parameters.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("parameters serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn rotors(&self) -> T {
        T::from_u32(self.rotor_count).expect("rotor count fits")
    }
}

/// Planar rigid-body state in the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState<T> {
    pub x: T,
    pub z: T,
    pub x_dot: T,
    pub z_dot: T,
    /// Pitch (rad).
    pub theta: T,
    pub theta_dot: T,
}

/// Airspeed seen by a rotor at longitudinal offset `offset`.
///
/// Returns `(|v_x|, v_z)`: the rotor response depends only on the magnitude
/// of the in-plane component.
pub fn rotor_inflow<T: Scalar>(state: &BodyState<T>, offset: T) -> (T, T) {
    let (s, c) = state.theta.sin_cos();
    let v_x = state.x_dot * c - state.z_dot * s;
    let v_z = state.x_dot * s + state.z_dot * c + state.theta_dot * offset;
    (v_x.abs(), v_z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyAcceleration<T> {
    pub x_ddot: T,
    pub z_ddot: T,
    pub theta_ddot: T,
}

/// Accelerations produced by per-rotor thrusts at a given state.
pub fn body_acceleration<T: Scalar>(
    state: &BodyState<T>,
    thrusts: &[T],
    vehicle: &VehicleParams<T>,
) -> Result<BodyAcceleration<T>> {
    if thrusts.len() != vehicle.rotor_count as usize {
        return Err(Error::InvalidParams(format!(
            "expected {} thrusts, got {}",
            vehicle.rotor_count,
            thrusts.len()
        )));
    }
    let total = thrusts.iter().fold(T::zero(), |acc, &t| acc + t);
    let torque = thrusts
        .iter()
        .zip(&vehicle.rotor_arms)
        .fold(T::zero(), |acc, (&t, &arm)| acc + arm * t);
    let (s, c) = state.theta.sin_cos();
    let m = vehicle.mass;
    Ok(BodyAcceleration {
        x_ddot: total * s / m - vehicle.body_drag_coeff * state.x_dot * state.x_dot.abs() / m,
        z_ddot: total * c / m - vehicle.gravity,
        theta_ddot: torque / vehicle.pitch_inertia,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThrustCommand<T> {
    /// Total thrust over all rotors (N).
    pub total_thrust: T,
    /// Pitch (rad).
    pub theta: T,
}

/// Total thrust and pitch that realise a commanded acceleration at the given
/// velocity, with the attitude treated as quasi-static.
pub fn inverse_dynamics<T: Scalar>(
    accel: (T, T),
    velocity: (T, T),
    vehicle: &VehicleParams<T>,
) -> Result<ThrustCommand<T>> {
    let (x_ddot, z_ddot) = accel;
    let (x_dot, _) = velocity;
    let m = vehicle.mass;
    let f_x = m * x_ddot + vehicle.body_drag_coeff * x_dot * x_dot.abs();
    let f_z = m * (z_ddot + vehicle.gravity);
    if !(f_z > T::zero()) {
        return Err(Error::InfeasibleCommand { f_z: f_z.as_f64() });
    }
    let theta = f_x.atan2(f_z);
    if theta.abs() > vehicle.limits.theta_max {
        return Err(Error::PitchLimit {
            theta: theta.as_f64(),
            limit: vehicle.limits.theta_max.as_f64(),
        });
    }
    Ok(ThrustCommand {
        total_thrust: f_x.hypot(f_z),
        theta,
    })
}
