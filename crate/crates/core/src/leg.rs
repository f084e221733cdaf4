//! Rest-to-rest leg trajectories and their battery energy.
//!
//! Each leg is flown along the straight line in the vertical plane that
//! contains both endpoints, with a trapezoidal path-speed profile. Battery
//! power is evaluated by inverse dynamics at every sample and integrated
//! with the trapezoidal rule.

use serde::{Deserialize, Serialize};

use crate::dynamics::{inverse_dynamics, rotor_inflow, BodyState, MotionLimits, VehicleParams};
use crate::error::{Error, RegimeWarning, Result};
use crate::propulsion::{electrical_power, hover_performance, RotorModel};
use crate::scalar::{from_usize, Scalar};

/// Default integration step (s).
pub const DEFAULT_DT: f64 = 0.02;

/// Horizontal distance and signed vertical displacement of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LegDisplacement<T> {
    pub x_f: T,
    pub z_f: T,
}

impl<T: Scalar> LegDisplacement<T> {
    pub fn new(x_f: T, z_f: T) -> Self {
        Self { x_f, z_f }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_f >= T::zero() && self.x_f.is_finite() && self.z_f.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "leg needs finite x_f >= 0 and finite z_f, got ({}, {})",
                self.x_f, self.z_f
            )))
        }
    }

    pub fn is_null(&self) -> bool {
        self.x_f == T::zero() && self.z_f == T::zero()
    }

    pub fn length(&self) -> T {
        self.x_f.hypot(self.z_f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    pub t: T,
    pub x: T,
    pub z: T,
    pub x_dot: T,
    pub z_dot: T,
    pub x_ddot: T,
    pub z_ddot: T,
}

/// Sampled straight-line trapezoidal trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryProfile<T> {
    pub duration: T,
    /// Peak path speed actually reached (m/s).
    pub peak_speed: T,
    /// Uniform samples from `t = 0` to `t = duration`, both included.
    pub samples: Vec<ProfileSample<T>>,
}

impl<T: Scalar> TrajectoryProfile<T> {
    /// Step between samples; zero for the null leg.
    pub fn step(&self) -> T {
        if self.samples.len() < 2 {
            T::zero()
        } else {
            self.samples[1].t - self.samples[0].t
        }
    }
}

/// Highest path speed that keeps every velocity component within limits.
fn path_speed_cap<T: Scalar>(cos_x: T, cos_z: T, limits: &MotionLimits<T>) -> T {
    let zero = T::zero();
    let mut cap = T::infinity();
    if cos_x > zero {
        cap = cap.min(limits.v_max_horiz / cos_x);
    }
    if cos_z > zero {
        cap = cap.min(limits.v_max_climb / cos_z);
    } else if cos_z < zero {
        cap = cap.min(limits.v_max_descent / -cos_z);
    }
    cap
}

/// Straight-line rest-to-rest profile with trapezoidal path speed; the
/// cruise phase is dropped when the leg is too short to reach the cap.
pub fn generate_profile<T: Scalar>(
    leg: &LegDisplacement<T>,
    limits: &MotionLimits<T>,
    dt: T,
) -> Result<TrajectoryProfile<T>> {
    leg.validate()?;
    if !(dt > T::zero()) {
        return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
    }
    let zero = T::zero();
    let half = T::lit(0.5);
    if leg.is_null() {
        return Ok(TrajectoryProfile {
            duration: zero,
            peak_speed: zero,
            samples: Vec::new(),
        });
    }

    let length = leg.length();
    let (cos_x, cos_z) = (leg.x_f / length, leg.z_f / length);
    let a = limits.a_max;
    let cap = path_speed_cap(cos_x, cos_z, limits);
    let (peak, t_acc, t_cruise) = if length >= cap * cap / a {
        (cap, cap / a, (length - cap * cap / a) / cap)
    } else {
        let peak = (a * length).sqrt();
        (peak, peak / a, zero)
    };
    let duration = t_acc + t_acc + t_cruise;

    // path position, speed, acceleration
    let path = |t: T| -> (T, T, T) {
        if t < t_acc {
            (half * a * t * t, a * t, a)
        } else if t < t_acc + t_cruise {
            (half * a * t_acc * t_acc + peak * (t - t_acc), peak, zero)
        } else {
            let tau = (duration - t).max(zero);
            (length - half * a * tau * tau, a * tau, -a)
        }
    };

    let steps = (duration / dt).ceil().to_usize().unwrap_or(1).max(1);
    let h = duration / from_usize(steps);
    let samples = (0..=steps)
        .map(|k| {
            let t = if k == steps { duration } else { h * from_usize(k) };
            let (s, v, acc) = path(t);
            ProfileSample {
                t,
                x: s * cos_x,
                z: s * cos_z,
                x_dot: v * cos_x,
                z_dot: v * cos_z,
                x_ddot: acc * cos_x,
                z_ddot: acc * cos_z,
            }
        })
        .collect();

    Ok(TrajectoryProfile {
        duration,
        peak_speed: peak,
        samples,
    })
}

/// A regime warning with where it first appeared and how often.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeNote {
    pub warning: RegimeWarning,
    pub first_sample: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LegResult<T> {
    /// Battery energy (J).
    pub energy: T,
    /// Duration (s).
    pub duration: T,
    pub peak_omega: T,
    /// Largest |pitch| (rad).
    pub peak_pitch: T,
    /// Largest total battery power (W).
    pub peak_power: T,
    pub regime_warnings: Vec<RegimeNote>,
}

/// One sample of a simulated leg, for plotting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TraceSample<T> {
    pub time: T,
    pub x: T,
    pub z: T,
    pub theta: T,
    pub omega: T,
    pub battery_power: T,
}

/// Writes a trace as CSV with header `time,x,z,theta,omega,battery_power`.
pub fn write_trace_csv<T: Scalar, W: std::io::Write>(trace: &[TraceSample<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in trace {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

/// Leg simulator with a prebuilt rotor model, reusable across legs.
#[derive(Debug, Clone)]
pub struct LegSimulator<T> {
    vehicle: VehicleParams<T>,
    model: RotorModel<T>,
    dt: T,
}

impl<T: Scalar> LegSimulator<T> {
    pub fn new(vehicle: VehicleParams<T>, dt: T) -> Result<Self> {
        vehicle.validate()?;
        if !(dt > T::zero()) {
            return Err(Error::InvalidParams(format!("dt must be positive, got {dt}")));
        }
        let model = vehicle.rotor_model()?;
        Ok(Self { vehicle, model, dt })
    }

    pub fn vehicle(&self) -> &VehicleParams<T> {
        &self.vehicle
    }

    pub fn model(&self) -> &RotorModel<T> {
        &self.model
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn simulate(&self, leg: &LegDisplacement<T>) -> Result<LegResult<T>> {
        self.run(leg, None)
    }

    /// Like [`simulate`](Self::simulate), also returning the per-sample trace.
    pub fn simulate_traced(&self, leg: &LegDisplacement<T>) -> Result<(LegResult<T>, Vec<TraceSample<T>>)> {
        let mut trace = Vec::new();
        let result = self.run(leg, Some(&mut trace))?;
        Ok((result, trace))
    }

    fn run(&self, leg: &LegDisplacement<T>, mut trace: Option<&mut Vec<TraceSample<T>>>) -> Result<LegResult<T>> {
        let profile = generate_profile(leg, &self.vehicle.limits, self.dt)?;
        let zero = T::zero();
        let rotors = self.vehicle.rotors();
        let mut result = LegResult {
            energy: zero,
            duration: profile.duration,
            peak_omega: zero,
            peak_pitch: zero,
            peak_power: zero,
            regime_warnings: Vec::new(),
        };

        let mut previous: Option<(T, T)> = None;
        for (k, p) in profile.samples.iter().enumerate() {
            let wrap = |e: Error| Error::LegSample {
                sample: k,
                time: p.t.as_f64(),
                source: Box::new(e),
            };
            let cmd = inverse_dynamics((p.x_ddot, p.z_ddot), (p.x_dot, p.z_dot), &self.vehicle).map_err(wrap)?;
            let body = BodyState {
                x: p.x,
                z: p.z,
                x_dot: p.x_dot,
                z_dot: p.z_dot,
                theta: cmd.theta,
                theta_dot: zero,
            };
            // zero pitch rate: every rotor sees the same inflow and carries an equal share
            let (v_x, v_z) = rotor_inflow(&body, self.vehicle.rotor_offsets[0]);
            let (omega, loads) = self
                .model
                .solve_omega_for_thrust(cmd.total_thrust / rotors, v_x, v_z)
                .map_err(wrap)?;
            let power = rotors * electrical_power(loads.torque, omega, &self.vehicle.electrical).battery_power;

            for w in loads.regime.iter() {
                match result.regime_warnings.iter_mut().find(|n| n.warning == w) {
                    Some(note) => note.count += 1,
                    None => result.regime_warnings.push(RegimeNote {
                        warning: w,
                        first_sample: k,
                        count: 1,
                    }),
                }
            }
            result.peak_omega = result.peak_omega.max(omega);
            result.peak_pitch = result.peak_pitch.max(cmd.theta.abs());
            result.peak_power = result.peak_power.max(power);
            if let Some((t0, p0)) = previous {
                result.energy = result.energy + T::lit(0.5) * (p.t - t0) * (p0 + power);
            }
            previous = Some((p.t, power));

            if let Some(trace) = trace.as_deref_mut() {
                trace.push(TraceSample {
                    time: p.t,
                    x: p.x,
                    z: p.z,
                    theta: cmd.theta,
                    omega,
                    battery_power: power,
                });
            }
        }
        Ok(result)
    }
}

/// Battery energy of a single rest-to-rest leg.
pub fn simulate_leg<T: Scalar>(leg: &LegDisplacement<T>, vehicle: &VehicleParams<T>, dt: T) -> Result<LegResult<T>> {
    LegSimulator::new(vehicle.clone(), dt)?.simulate(leg)
}

/// Energy to hover for `dwell` seconds (J).
pub fn hover_energy<T: Scalar>(vehicle: &VehicleParams<T>, dwell: T) -> Result<T> {
    if !(dwell >= T::zero()) {
        return Err(Error::InvalidParams(format!("dwell must be non-negative, got {dwell}")));
    }
    Ok(hover_performance(vehicle)?.battery_power * dwell)
}
