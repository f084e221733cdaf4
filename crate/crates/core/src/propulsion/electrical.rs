use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lumped motor, ESC and battery constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ElectricalParams<T> {
    /// Motor torque constant (N m / A).
    pub torque_constant: T,
    /// No-load current (A).
    pub no_load_current: T,
    /// Winding resistance (ohm).
    pub winding_resistance: T,
    pub esc_efficiency: T,
    /// Battery voltage (V).
    pub battery_voltage: T,
}

impl<T: Scalar> ElectricalParams<T> {
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let ok = self.torque_constant > zero
            && self.no_load_current >= zero
            && self.winding_resistance >= zero
            && self.esc_efficiency > zero
            && self.esc_efficiency <= T::one()
            && self.battery_voltage > zero;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("electrical parameters out of range".into()))
        }
    }

    /// No-load speed `V_b / K_t` (rad/s), the upper bound on rotor speed.
    pub fn max_omega(&self) -> T {
        self.battery_voltage / self.torque_constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectricalDraw<T> {
    /// Power drawn from the battery (W).
    pub battery_power: T,
    /// Battery current (A).
    pub battery_current: T,
}

/// Battery-side draw of one motor delivering torque `torque` at `omega`.
///
/// `P_batt = (Q w + (Q / K_t + I_0)^2 R_m) / eta_esc`, `I_b = P_batt / V_b`.
pub fn electrical_power<T: Scalar>(torque: T, omega: T, elec: &ElectricalParams<T>) -> ElectricalDraw<T> {
    let current = torque / elec.torque_constant + elec.no_load_current;
    let motor_power = torque * omega + current * current * elec.winding_resistance;
    let battery_power = motor_power / elec.esc_efficiency;
    ElectricalDraw {
        battery_power,
        battery_current: battery_power / elec.battery_voltage,
    }
}
