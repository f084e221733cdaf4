//! Rotor aerodynamics and electrical draw.
//!
//! Thrust and torque come from a blade-element integral averaged over one
//! revolution, coupled to momentum theory through the induced velocity.
//! Electrical power uses a lumped motor/ESC model.

mod electrical;
mod quadrature;
mod solver;

pub use electrical::{electrical_power, ElectricalDraw, ElectricalParams};
pub use quadrature::{BladeQuadrature, QuadratureSettings};
pub use solver::{hover_performance, HoverPerformance, RotorModel, SolverSettings};

use serde::{Deserialize, Serialize};

use crate::error::{Error, RegimeWarning, Result};
use crate::scalar::Scalar;

/// Piecewise-linear radial table stored as `[r, value]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "T: Scalar")]
pub struct PiecewiseLinear<T>(pub Vec<[T; 2]>);

impl<T: Scalar> PiecewiseLinear<T> {
    /// Linear interpolation, held constant beyond either end.
    pub fn eval(&self, r: T) -> T {
        let pts = &self.0;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if r <= first[0] {
            return first[1];
        }
        if r >= last[0] {
            return last[1];
        }
        let k = pts.partition_point(|p| p[0] <= r);
        let [r0, v0] = pts[k - 1];
        let [r1, v1] = pts[k];
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    fn validate(&self, name: &str, lo: T, hi: T) -> Result<()> {
        let pts = &self.0;
        if pts.len() < 2 {
            return Err(Error::InvalidParams(format!("{name} table needs at least two points")));
        }
        if pts.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidParams(format!("{name} table has non-finite entries")));
        }
        if pts.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::InvalidParams(format!("{name} radii must be strictly increasing")));
        }
        if pts[0][0] > lo || pts[pts.len() - 1][0] < hi {
            return Err(Error::InvalidParams(format!(
                "{name} table must cover [{lo}, {hi}]"
            )));
        }
        Ok(())
    }
}

fn default_tip_loss<T: Scalar>() -> T {
    T::lit(0.97)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RotorGeometry<T> {
    pub blade_count: u32,
    /// Blade root radius (m).
    pub root_radius: T,
    /// Tip radius (m).
    pub tip_radius: T,
    /// Chord (m) over radius.
    pub chord: PiecewiseLinear<T>,
    /// Twist (rad) over radius.
    pub twist: PiecewiseLinear<T>,
    /// Lift-curve slope (1/rad).
    pub lift_slope: T,
    pub drag_coeff: T,
    /// Fraction of the tip radius over which thrust is integrated.
    #[serde(default = "default_tip_loss")]
    pub tip_loss_fraction: T,
}

impl<T: Scalar> RotorGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        if !(self.root_radius > zero && self.root_radius < self.tip_radius) {
            return Err(Error::InvalidParams("need 0 < root_radius < tip_radius".into()));
        }
        if self.blade_count < 2 {
            return Err(Error::InvalidParams("blade_count must be at least 2".into()));
        }
        if !(self.lift_slope > zero) {
            return Err(Error::InvalidParams("lift_slope must be positive".into()));
        }
        if !(self.drag_coeff >= zero) {
            return Err(Error::InvalidParams("drag_coeff must be non-negative".into()));
        }
        if !(self.tip_loss_fraction > zero && self.tip_loss_fraction <= T::one()) {
            return Err(Error::InvalidParams("tip_loss_fraction must lie in (0, 1]".into()));
        }
        self.chord.validate("chord", self.root_radius, self.tip_radius)?;
        self.twist.validate("twist", self.root_radius, self.tip_radius)?;
        Ok(())
    }

    /// Rotor disk area `pi R^2`.
    pub fn disk_area(&self) -> T {
        T::PI() * self.tip_radius * self.tip_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AirProperties<T> {
    /// Air density (kg/m^3).
    pub density: T,
}

impl<T: Scalar> AirProperties<T> {
    pub fn validate(&self) -> Result<()> {
        if self.density > T::zero() && self.density.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParams("air density must be positive".into()))
        }
    }
}

/// Operating point of a single rotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorState<T> {
    /// Angular velocity (rad/s).
    pub omega: T,
    /// Airspeed parallel to the rotor plane (m/s, non-negative).
    pub v_x: T,
    /// Airspeed along the rotor axis (m/s, positive is climb-like inflow).
    pub v_z: T,
}

impl<T: Scalar> RotorState<T> {
    pub fn new(omega: T, v_x: T, v_z: T) -> Self {
        Self { omega, v_x, v_z }
    }
}

/// Which degraded-momentum regimes a solve passed through.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RegimeFlags {
    pub axial_descent: bool,
    pub vortex_ring_clamp: bool,
}

impl RegimeFlags {
    pub fn iter(self) -> impl Iterator<Item = RegimeWarning> {
        [
            self.axial_descent.then_some(RegimeWarning::AxialDescent),
            self.vortex_ring_clamp.then_some(RegimeWarning::VortexRingClamp),
        ]
        .into_iter()
        .flatten()
    }

    pub fn is_empty(self) -> bool {
        !self.axial_descent && !self.vortex_ring_clamp
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorLoads<T> {
    /// Thrust (N).
    pub thrust: T,
    /// Shaft torque (N m).
    pub torque: T,
    /// Induced velocity (m/s).
    pub induced_velocity: T,
    pub regime: RegimeFlags,
}
