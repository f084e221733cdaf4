use crate::dynamics::VehicleParams;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{
    electrical_power, AirProperties, BladeQuadrature, QuadratureSettings, RegimeFlags, RotorGeometry, RotorLoads,
    RotorState,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    /// Relaxation factor of the induced-velocity fixed point.
    pub damping: T,
    pub max_fixed_point_iterations: usize,
    pub max_bisection_iterations: usize,
    pub max_omega_iterations: usize,
    /// Relative residual at which a solve is accepted.
    pub tolerance: T,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            damping: T::lit(0.5),
            max_fixed_point_iterations: 200,
            max_bisection_iterations: 200,
            max_omega_iterations: 200,
            tolerance: T::solver_tolerance(),
        }
    }
}

/// Blade-element/momentum model of one rotor, with its quadrature tables
/// prebuilt. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct RotorModel<T> {
    geometry: RotorGeometry<T>,
    air: AirProperties<T>,
    max_omega: T,
    quadrature: BladeQuadrature<T>,
    settings: SolverSettings<T>,
}

/// Induced velocity at a fixed operating point.
#[derive(Debug, Clone, Copy)]
struct Inflow<T> {
    v_i: T,
    thrust: T,
    regime: RegimeFlags,
}

impl<T: Scalar> RotorModel<T> {
    pub fn new(geometry: RotorGeometry<T>, air: AirProperties<T>, max_omega: T) -> Result<Self> {
        Self::with_settings(geometry, air, max_omega, QuadratureSettings::default(), SolverSettings::default())
    }

    pub fn with_settings(
        geometry: RotorGeometry<T>,
        air: AirProperties<T>,
        max_omega: T,
        quadrature: QuadratureSettings,
        settings: SolverSettings<T>,
    ) -> Result<Self> {
        geometry.validate()?;
        air.validate()?;
        if !(max_omega > T::zero()) {
            return Err(Error::InvalidParams("max_omega must be positive".into()));
        }
        let quadrature = BladeQuadrature::new(&geometry, &air, quadrature)?;
        Ok(Self {
            geometry,
            air,
            max_omega,
            quadrature,
            settings,
        })
    }

    pub fn geometry(&self) -> &RotorGeometry<T> {
        &self.geometry
    }

    pub fn air(&self) -> &AirProperties<T> {
        &self.air
    }

    pub fn max_omega(&self) -> T {
        self.max_omega
    }

    pub fn quadrature(&self) -> &BladeQuadrature<T> {
        &self.quadrature
    }

    /// `2 rho A`, the momentum-theory thrust factor.
    fn momentum_factor(&self) -> T {
        T::lit(2.0) * self.air.density * self.geometry.disk_area()
    }

    /// Momentum-theory thrust `2 rho A v_i sqrt(v_x^2 + (v_z + v_i)^2)`.
    pub fn momentum_thrust(&self, v_x: T, v_z: T, v_i: T) -> T {
        self.momentum_factor() * v_i * v_x.hypot(v_z + v_i)
    }

    /// Blade thrust and torque at a prescribed induced velocity.
    pub fn blade_loads(&self, state: &RotorState<T>, v_i: T) -> Result<(T, T)> {
        self.quadrature.loads(state, v_i)
    }

    /// Balances blade thrust `alpha - beta v_i` against momentum thrust.
    fn induced(&self, alpha: T, beta: T, v_x: T, v_z: T) -> Result<Inflow<T>> {
        let zero = T::zero();
        let axial_descent = v_x < T::one() && v_z < zero;
        if !(alpha > zero) {
            // no positive thrust to sustain an induced flow
            return Ok(Inflow {
                v_i: zero,
                thrust: alpha,
                regime: RegimeFlags {
                    axial_descent,
                    vortex_ring_clamp: false,
                },
            });
        }

        let k = self.momentum_factor();
        let v_h = (alpha / k).sqrt();
        let floor = T::lit(0.1) * v_h;
        let denom = |v_i: T| {
            let d = v_x.hypot(v_z + v_i);
            if axial_descent && d < floor {
                (floor, true)
            } else {
                (d, false)
            }
        };
        let residual = |v_i: T| alpha - beta * v_i - k * v_i * denom(v_i).0;
        let tol = self.settings.tolerance * alpha;
        let finish = |v_i: T| Inflow {
            v_i,
            thrust: alpha - beta * v_i,
            regime: RegimeFlags {
                axial_descent,
                vortex_ring_clamp: denom(v_i).1,
            },
        };

        let lambda = self.settings.damping;
        let mut v_i = v_h;
        for _ in 0..self.settings.max_fixed_point_iterations {
            let blade = (alpha - beta * v_i).max(zero);
            let target = blade / (k * denom(v_i).0);
            v_i = (T::one() - lambda) * v_i + lambda * target;
            if residual(v_i).abs() <= tol {
                return Ok(finish(v_i));
            }
        }

        // bisection fallback; residual(0) = alpha > 0
        let mut lo = zero;
        let mut hi = T::lit(3.0) * v_h;
        let mut grow = 0;
        while residual(hi) > zero {
            hi = hi + hi;
            grow += 1;
            if grow > 64 {
                return Err(Error::NoConvergence {
                    what: "induced velocity bracket",
                    iterations: grow,
                    residual: residual(hi).as_f64(),
                });
            }
        }
        for _ in 0..self.settings.max_bisection_iterations {
            let mid = T::lit(0.5) * (lo + hi);
            let r = residual(mid);
            if r.abs() <= tol {
                return Ok(finish(mid));
            }
            if r > zero {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let last = T::lit(0.5) * (lo + hi);
        Err(Error::NoConvergence {
            what: "induced velocity",
            iterations: self.settings.max_fixed_point_iterations + self.settings.max_bisection_iterations,
            residual: (residual(last) / alpha).as_f64(),
        })
    }

    fn inflow_at(&self, omega: T, v_x: T, v_z: T) -> Result<Inflow<T>> {
        let (alpha, beta) = self.quadrature.thrust_affine(omega, v_x, v_z);
        self.induced(alpha, beta, v_x, v_z)
    }

    /// Converged induced velocity and the blade loads it produces.
    pub fn solve_induced_velocity(&self, state: &RotorState<T>) -> Result<RotorLoads<T>> {
        if !(state.omega > T::zero()) {
            return Err(Error::InvalidParams(format!(
                "induced-velocity solve needs omega > 0, got {}",
                state.omega
            )));
        }
        let inflow = self.inflow_at(state.omega, state.v_x, state.v_z)?;
        let (thrust, torque) = self.quadrature.loads(state, inflow.v_i)?;
        Ok(RotorLoads {
            thrust,
            torque,
            induced_velocity: inflow.v_i,
            regime: inflow.regime,
        })
    }

    /// Rotor speed that produces `thrust` at the given airspeed.
    pub fn solve_omega_for_thrust(&self, thrust: T, v_x: T, v_z: T) -> Result<(T, RotorLoads<T>)> {
        let zero = T::zero();
        if !(thrust > zero) || !thrust.is_finite() {
            return Err(Error::InvalidParams(format!("thrust request must be positive, got {thrust}")));
        }
        let thrust_at = |omega: T| self.inflow_at(omega, v_x, v_z).map(|f| f.thrust);

        // below the vertex of the zero-inflow thrust parabola thrust falls with omega
        let (c2, c1) = self.quadrature.alpha_quadratic(v_x, v_z);
        let mut lo = (-c1 / (T::lit(2.0) * c2)).max(zero).min(self.max_omega);
        let mut hi = self.max_omega;
        let mut f_lo = thrust_at(lo)? - thrust;
        let mut f_hi = thrust_at(hi)? - thrust;
        if f_lo > zero || f_hi < zero {
            return Err(Error::InfeasibleThrust {
                requested: thrust.as_f64(),
                min: (f_lo + thrust).as_f64(),
                max: (f_hi + thrust).as_f64(),
            });
        }

        let tol = self.settings.tolerance * thrust;
        let mut omega = hi;
        let mut converged = f_hi.abs() <= tol;
        if f_lo.abs() <= tol && lo > zero {
            omega = lo;
            converged = true;
        }
        // Illinois variant of regula falsi
        let mut side = 0i8;
        let mut iterations = 0;
        while !converged && iterations < self.settings.max_omega_iterations {
            iterations += 1;
            let mut next = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if !(next > lo && next < hi) {
                next = T::lit(0.5) * (lo + hi);
            }
            let f = thrust_at(next)? - thrust;
            omega = next;
            if f.abs() <= tol || hi - lo <= T::epsilon() * hi {
                converged = true;
            } else if f < zero {
                lo = next;
                f_lo = f;
                if side == -1 {
                    f_hi = f_hi * T::lit(0.5);
                }
                side = -1;
            } else {
                hi = next;
                f_hi = f;
                if side == 1 {
                    f_lo = f_lo * T::lit(0.5);
                }
                side = 1;
            }
        }
        if !converged {
            return Err(Error::NoConvergence {
                what: "rotor speed for thrust",
                iterations,
                residual: ((thrust_at(omega)? - thrust) / thrust).as_f64(),
            });
        }
        let loads = self.solve_induced_velocity(&RotorState::new(omega, v_x, v_z))?;
        Ok((omega, loads))
    }
}

/// Rotor speed and battery power in steady hover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoverPerformance<T> {
    pub thrust_per_rotor: T,
    pub omega: T,
    pub loads: RotorLoads<T>,
    /// Total battery power for all rotors (W).
    pub battery_power: T,
}

pub fn hover_performance<T: Scalar>(vehicle: &VehicleParams<T>) -> Result<HoverPerformance<T>> {
    let model = vehicle.rotor_model()?;
    hover_with_model(vehicle, &model)
}

pub(crate) fn hover_with_model<T: Scalar>(
    vehicle: &VehicleParams<T>,
    model: &RotorModel<T>,
) -> Result<HoverPerformance<T>> {
    let rotors = T::from_u32(vehicle.rotor_count).expect("rotor count fits");
    let thrust_per_rotor = vehicle.mass * vehicle.gravity / rotors;
    let zero = T::zero();
    let (omega, loads) = model.solve_omega_for_thrust(thrust_per_rotor, zero, zero)?;
    let draw = electrical_power(loads.torque, omega, &vehicle.electrical);
    Ok(HoverPerformance {
        thrust_per_rotor,
        omega,
        loads,
        battery_power: rotors * draw.battery_power,
    })
}
