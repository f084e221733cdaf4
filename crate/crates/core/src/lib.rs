//! Energy-optimal waypoint ordering for multirotor missions.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for everyday use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod dynamics;
pub mod error;
pub mod leg;
pub mod planner;
pub mod propulsion;
pub mod scalar;
pub mod table;

pub use error::{Error, RegimeWarning, Result};
pub use scalar::Scalar;

pub type VehicleParams = dynamics::VehicleParams<f64>;
pub type VehicleParams32 = dynamics::VehicleParams<f32>;
pub type RotorModel = propulsion::RotorModel<f64>;
pub type RotorModel32 = propulsion::RotorModel<f32>;
pub type LegDisplacement = leg::LegDisplacement<f64>;
pub type LegResult = leg::LegResult<f64>;
pub type LegSimulator = leg::LegSimulator<f64>;
pub type LegSimulator32 = leg::LegSimulator<f32>;
pub type GridSpec = table::GridSpec<f64>;
pub type EnergyTable = table::EnergyTable<f64>;
pub type EnergyTable32 = table::EnergyTable<f32>;
pub type Mission = planner::Mission<f64>;
pub type CostMatrix = planner::CostMatrix<f64>;
pub type OrderResult = planner::OrderResult<f64>;
pub type PlanReport = planner::PlanReport<f64>;
