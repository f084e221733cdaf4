use crate::error::{Error, Result};
use crate::scalar::{from_usize, Scalar};

use super::{AirProperties, RotorGeometry, RotorState};

/// Midpoint-rule resolution of the blade integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureSettings {
    pub radial_nodes: usize,
    pub azimuth_nodes: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            radial_nodes: 40,
            azimuth_nodes: 36,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct RadialNode<T> {
    r: T,
    twist: T,
    /// `0.5 N rho c(r) dr`
    weight: T,
}

/// Precomputed midpoint nodes for the revolution-averaged blade integral.
///
/// Thrust is integrated over `[R0, tip_loss_fraction R]`, torque over
/// `[R0, R]`. Azimuth nodes sharing the same `sin(psi)` are merged, since
/// the integrand depends on `psi` only through it.
#[derive(Debug, Clone)]
pub struct BladeQuadrature<T> {
    thrust_nodes: Vec<RadialNode<T>>,
    torque_nodes: Vec<RadialNode<T>>,
    /// `(sin psi, weight)`, weights summing to one.
    azimuth: Vec<(T, T)>,
    lift_slope: T,
    drag_coeff: T,
    moments: ThrustMoments<T>,
}

/// Radial moments of the thrust integrand. Thrust is a quadratic form in
/// `(omega, v_x)` minus a term linear in the perpendicular inflow, so a
/// solve only needs these five sums plus the two azimuth averages.
#[derive(Debug, Clone, Copy)]
struct ThrustMoments<T> {
    /// sum a w theta r^2
    theta_r2: T,
    /// sum a w theta r
    theta_r1: T,
    /// sum a w theta
    theta_r0: T,
    /// sum a w r
    r1: T,
    /// sum a w
    r0: T,
    /// mean sin psi
    sin1: T,
    /// mean sin^2 psi
    sin2: T,
}

fn radial_nodes<T: Scalar>(geom: &RotorGeometry<T>, air: &AirProperties<T>, outer: T, n: usize) -> Vec<RadialNode<T>> {
    let width = (outer - geom.root_radius) / from_usize(n);
    let half = T::lit(0.5);
    let blades: T = T::from_u32(geom.blade_count).expect("blade count fits");
    (0..n)
        .map(|k| {
            let r = geom.root_radius + (from_usize::<T>(k) + half) * width;
            RadialNode {
                r,
                twist: geom.twist.eval(r),
                weight: half * blades * air.density * geom.chord.eval(r) * width,
            }
        })
        .collect()
}

fn azimuth_nodes<T: Scalar>(n: usize) -> Vec<(T, T)> {
    let step = T::TAU() / from_usize(n);
    let sin_at = |m: usize| ((from_usize::<T>(m) + T::lit(0.5)) * step).sin();
    let w = T::one() / from_usize(n);
    if n % 2 == 1 {
        return (0..n).map(|m| (sin_at(m), w)).collect();
    }
    // psi_m and pi - psi_m = psi_partner share sin(psi)
    (0..n)
        .filter_map(|m| {
            let partner = (n + n / 2 - 1 - m) % n;
            match m.cmp(&partner) {
                std::cmp::Ordering::Less => Some(((sin_at(m) + sin_at(partner)) * T::lit(0.5), w + w)),
                std::cmp::Ordering::Equal => Some((sin_at(m), w)),
                std::cmp::Ordering::Greater => None,
            }
        })
        .collect()
}

impl<T: Scalar> BladeQuadrature<T> {
    pub fn new(geom: &RotorGeometry<T>, air: &AirProperties<T>, settings: QuadratureSettings) -> Result<Self> {
        if settings.radial_nodes == 0 || settings.azimuth_nodes == 0 {
            return Err(Error::InvalidParams("quadrature needs at least one node per axis".into()));
        }
        let thrust_nodes = radial_nodes(
            geom,
            air,
            geom.tip_loss_fraction * geom.tip_radius,
            settings.radial_nodes,
        );
        let torque_nodes = radial_nodes(geom, air, geom.tip_radius, settings.radial_nodes);
        let azimuth = azimuth_nodes(settings.azimuth_nodes);

        let a = geom.lift_slope;
        let zero = T::zero();
        let mut m = ThrustMoments {
            theta_r2: zero,
            theta_r1: zero,
            theta_r0: zero,
            r1: zero,
            r0: zero,
            sin1: zero,
            sin2: zero,
        };
        for n in &thrust_nodes {
            let aw = a * n.weight;
            m.theta_r2 = m.theta_r2 + aw * n.twist * n.r * n.r;
            m.theta_r1 = m.theta_r1 + aw * n.twist * n.r;
            m.theta_r0 = m.theta_r0 + aw * n.twist;
            m.r1 = m.r1 + aw * n.r;
            m.r0 = m.r0 + aw;
        }
        for &(s, w) in &azimuth {
            m.sin1 = m.sin1 + w * s;
            m.sin2 = m.sin2 + w * s * s;
        }

        Ok(Self {
            thrust_nodes,
            torque_nodes,
            azimuth,
            lift_slope: a,
            drag_coeff: geom.drag_coeff,
            moments: m,
        })
    }

    /// Number of distinct azimuth stations actually evaluated.
    pub fn azimuth_stations(&self) -> usize {
        self.azimuth.len()
    }

    /// Revolution-averaged blade thrust and torque at a given induced
    /// velocity, by full double quadrature.
    pub fn loads(&self, state: &RotorState<T>, v_i: T) -> Result<(T, T)> {
        let u_pr = v_i + state.v_z;
        let a = self.lift_slope;
        let mut thrust = T::zero();
        for n in &self.thrust_nodes {
            let spin = state.omega * n.r;
            let mut acc = T::zero();
            for &(s, w) in &self.azimuth {
                let u_pl = spin + state.v_x * s;
                acc = acc + w * (u_pl * u_pl * n.twist - u_pr * u_pl);
            }
            thrust = thrust + a * n.weight * acc;
        }

        let mut torque = T::zero();
        for n in &self.torque_nodes {
            let spin = state.omega * n.r;
            let mut acc = T::zero();
            for &(s, w) in &self.azimuth {
                let u_pl = spin + state.v_x * s;
                if u_pl == T::zero() {
                    continue;
                }
                let inflow_angle = (u_pr / u_pl).atan();
                let lift = u_pl * u_pl * n.twist - u_pr * u_pl;
                acc = acc + w * (inflow_angle * a * lift + self.drag_coeff * u_pl * u_pl);
            }
            torque = torque + n.r * n.weight * acc;
        }

        if thrust.is_finite() && torque.is_finite() {
            Ok((thrust, torque))
        } else {
            Err(Error::NonFinite {
                omega: state.omega.as_f64(),
                v_x: state.v_x.as_f64(),
                v_z: state.v_z.as_f64(),
                v_i: v_i.as_f64(),
            })
        }
    }

    /// Blade thrust as `alpha - beta * v_i`, the same quadrature sum
    /// regrouped by moments.
    pub fn thrust_affine(&self, omega: T, v_x: T, v_z: T) -> (T, T) {
        let m = &self.moments;
        let two = T::lit(2.0);
        let pitch_term = m.theta_r2 * omega * omega
            + two * m.theta_r1 * omega * v_x * m.sin1
            + m.theta_r0 * v_x * v_x * m.sin2;
        let beta = m.r1 * omega + m.r0 * v_x * m.sin1;
        (pitch_term - v_z * beta, beta)
    }

    /// Coefficients `(c2, c1)` of the `omega^2` and `omega` terms of the
    /// zero-induced-velocity thrust.
    pub(crate) fn alpha_quadratic(&self, v_x: T, v_z: T) -> (T, T) {
        let m = &self.moments;
        let c2 = m.theta_r2;
        let c1 = T::lit(2.0) * m.theta_r1 * v_x * m.sin1 - v_z * m.r1;
        (c2, c1)
    }
}
