//! Mission cost matrices, the exact minimum-energy order, and the three
//! minimum-distance baselines.

mod exact;
pub mod milp;

pub use exact::{
    solve_exhaustive, solve_held_karp, tour_cost, Tour, EXHAUSTIVE_MAX_WAYPOINTS, HELD_KARP_MAX_WAYPOINTS,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leg::LegDisplacement;
use crate::scalar::Scalar;
use crate::table::EnergyTable;

/// Largest mission the planner accepts.
pub const MAX_MISSION_WAYPOINTS: usize = 14;

pub type Point3<T> = [T; 3];

/// Origin plus waypoints, in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Mission<T> {
    pub origin: Point3<T>,
    pub waypoints: Vec<Point3<T>>,
}

impl<T: Scalar> Mission<T> {
    pub fn new(origin: Point3<T>, waypoints: Vec<Point3<T>>) -> Result<Self> {
        let m = Self { origin, waypoints };
        m.validate()?;
        Ok(m)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.waypoints.len();
        if n == 0 || n > MAX_MISSION_WAYPOINTS {
            return Err(Error::InvalidMission(format!(
                "need 1..={MAX_MISSION_WAYPOINTS} waypoints, got {n}"
            )));
        }
        let finite = |p: &Point3<T>| p.iter().all(|c| c.is_finite());
        if !finite(&self.origin) || !self.waypoints.iter().all(finite) {
            return Err(Error::InvalidMission("coordinates must be finite".into()));
        }
        for (i, a) in self.waypoints.iter().enumerate() {
            if self.waypoints[..i].contains(a) {
                return Err(Error::InvalidMission(format!("waypoint {} repeats an earlier one", i + 1)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Node `0` is the origin, node `k` is waypoint `k`.
    pub fn node(&self, k: usize) -> Point3<T> {
        if k == 0 {
            self.origin
        } else {
            self.waypoints[k - 1]
        }
    }
}

/// Horizontal distance and signed climb from `p` to `q`.
pub fn leg_geometry<T: Scalar>(p: &Point3<T>, q: &Point3<T>) -> LegDisplacement<T> {
    LegDisplacement {
        x_f: (q[0] - p[0]).hypot(q[1] - p[1]),
        z_f: q[2] - p[2],
    }
}

fn distance3<T: Scalar>(p: &Point3<T>, q: &Point3<T>) -> T {
    let (dx, dy, dz) = (q[0] - p[0], q[1] - p[1], q[2] - p[2]);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// Interpolated leg energy (J).
    Energy,
    /// 3D Euclidean distance (m).
    DistTotal,
    /// Horizontal distance (m).
    DistHoriz,
    /// Absolute vertical displacement (m).
    DistVert,
}

/// Square arc-cost matrix over origin and waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    size: usize,
    data: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn from_fn(size: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..size * size).map(|k| f(k / size, k % size)).collect();
        Self { size, data }
    }

    pub fn try_from_fn(size: usize, f: impl Fn(usize, usize) -> Result<T>) -> Result<Self> {
        let data = (0..size * size)
            .map(|k| f(k / size, k % size))
            .collect::<Result<Vec<T>>>()?;
        Ok(Self { size, data })
    }

    /// Number of nodes, origin included.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn waypoints(&self) -> usize {
        self.size.saturating_sub(1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.size + j]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Distance-mode matrix; needs no energy table.
    pub fn distances(mission: &Mission<T>, mode: CostMode) -> Result<Self> {
        let n = mission.len() + 1;
        Ok(match mode {
            CostMode::Energy => {
                return Err(Error::InvalidParams("energy costs need an energy table".into()));
            }
            CostMode::DistTotal => Self::from_fn(n, |i, j| distance3(&mission.node(i), &mission.node(j))),
            CostMode::DistHoriz => Self::from_fn(n, |i, j| leg_geometry(&mission.node(i), &mission.node(j)).x_f),
            CostMode::DistVert => Self::from_fn(n, |i, j| leg_geometry(&mission.node(i), &mission.node(j)).z_f.abs()),
        })
    }

    /// Interpolated energy of every directed leg.
    pub fn energies(mission: &Mission<T>, table: &EnergyTable<T>) -> Result<Self> {
        Self::try_from_fn(mission.len() + 1, |i, j| {
            if i == j {
                return Ok(T::zero());
            }
            table
                .interpolate(&leg_geometry(&mission.node(i), &mission.node(j)))
                .map_err(|e| Error::Pair {
                    from: i,
                    to: j,
                    source: Box::new(e),
                })
        })
    }
}

pub fn build_cost_matrix<T: Scalar>(mission: &Mission<T>, table: &EnergyTable<T>, mode: CostMode) -> Result<CostMatrix<T>> {
    match mode {
        CostMode::Energy => CostMatrix::energies(mission, table),
        _ => CostMatrix::distances(mission, mode),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

/// A visiting order with its energy and distance metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OrderResult<T> {
    /// Waypoint indices `1..=N_W` in forward order.
    pub order: Vec<usize>,
    pub direction: Direction,
    /// Closed-tour energy in the traversal direction (J).
    pub energy: T,
    pub d_m: T,
    pub x_m: T,
    pub z_m: T,
}

impl<T: Scalar> OrderResult<T> {
    /// Waypoints in the order they are flown.
    pub fn traversal(&self) -> Vec<usize> {
        match self.direction {
            Direction::Forward => self.order.clone(),
            Direction::Reverse => self.order.iter().rev().copied().collect(),
        }
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n + 1];
    if order.len() != n {
        return Err(Error::InvalidOrder(format!("expected {n} waypoints, got {}", order.len())));
    }
    for &k in order {
        if k == 0 || k > n || std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidOrder(format!("{order:?} is not a permutation of 1..={n}")));
        }
    }
    Ok(())
}

/// Energy in the traversal direction plus `D_M`, `X_M`, `Z_M`.
///
/// Distances are accumulated along the forward order regardless of
/// direction, so both directions report bit-identical distance metrics.
pub fn order_metrics<T: Scalar>(
    order: &[usize],
    direction: Direction,
    mission: &Mission<T>,
    table: &EnergyTable<T>,
) -> Result<OrderResult<T>> {
    check_permutation(order, mission.len())?;
    let forward: Vec<usize> = std::iter::once(0).chain(order.iter().copied()).chain(std::iter::once(0)).collect();

    let zero = T::zero();
    let (mut d_m, mut x_m, mut z_m) = (zero, zero, zero);
    for w in forward.windows(2) {
        let (p, q) = (mission.node(w[0]), mission.node(w[1]));
        let leg = leg_geometry(&p, &q);
        d_m = d_m + distance3(&p, &q);
        x_m = x_m + leg.x_f;
        z_m = z_m + leg.z_f.abs();
    }

    let mut nodes = forward;
    if direction == Direction::Reverse {
        nodes.reverse();
    }
    let mut energy = zero;
    for w in nodes.windows(2) {
        let leg = leg_geometry(&mission.node(w[0]), &mission.node(w[1]));
        let e = table.interpolate(&leg).map_err(|e| Error::Pair {
            from: w[0],
            to: w[1],
            source: Box::new(e),
        })?;
        energy = energy + e;
    }

    Ok(OrderResult {
        order: order.to_vec(),
        direction,
        energy,
        d_m,
        x_m,
        z_m,
    })
}

/// Exact minimum-energy order (forward direction).
pub fn solve_min_energy<T: Scalar>(mission: &Mission<T>, table: &EnergyTable<T>) -> Result<OrderResult<T>> {
    mission.validate()?;
    let matrix = CostMatrix::energies(mission, table)?;
    let tour = solve_held_karp(&matrix)?;
    order_metrics(&tour.order, Direction::Forward, mission, table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Baseline {
    #[serde(rename = "min_x")]
    MinX,
    #[serde(rename = "min_z")]
    MinZ,
    #[serde(rename = "min_d")]
    MinD,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::MinX, Baseline::MinZ, Baseline::MinD];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::MinX => "min_x",
            Baseline::MinZ => "min_z",
            Baseline::MinD => "min_d",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DirectionPair<T> {
    pub forward: OrderResult<T>,
    pub reverse: OrderResult<T>,
}

impl<T: Scalar> DirectionPair<T> {
    /// The cheaper direction; forward on a tie.
    pub fn best(&self) -> &OrderResult<T> {
        if self.reverse.energy < self.forward.energy {
            &self.reverse
        } else {
            &self.forward
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BaselineOrders<T> {
    pub min_x: DirectionPair<T>,
    pub min_z: DirectionPair<T>,
    pub min_d: DirectionPair<T>,
}

impl<T: Scalar> BaselineOrders<T> {
    pub fn get(&self, b: Baseline) -> &DirectionPair<T> {
        match b {
            Baseline::MinX => &self.min_x,
            Baseline::MinZ => &self.min_z,
            Baseline::MinD => &self.min_d,
        }
    }
}

/// Forward is whichever of the order and its reverse is lexicographically
/// smaller; distance metrics cannot tell them apart.
fn canonical(mut order: Vec<usize>) -> Vec<usize> {
    let rev: Vec<usize> = order.iter().rev().copied().collect();
    if rev < order {
        order = rev;
    }
    order
}

fn pair<T: Scalar>(order: Vec<usize>, mission: &Mission<T>, table: &EnergyTable<T>) -> Result<DirectionPair<T>> {
    let order = canonical(order);
    Ok(DirectionPair {
        forward: order_metrics(&order, Direction::Forward, mission, table)?,
        reverse: order_metrics(&order, Direction::Reverse, mission, table)?,
    })
}

/// Order minimising `Z_M`, ties broken by least `X_M`.
pub fn min_vertical_order<T: Scalar>(mission: &Mission<T>) -> Result<Vec<usize>> {
    let horiz = CostMatrix::distances(mission, CostMode::DistHoriz)?;
    let tour = exact::solve_unimodal(
        mission.len(),
        |i, j| horiz.get(i, j),
        |k| mission.node(k)[2],
        MAX_MISSION_WAYPOINTS,
    )?;
    Ok(tour.order)
}

/// Minimum-`X_M`, minimum-`Z_M` and minimum-`D_M` orders, each with its
/// energy in both traversal directions.
pub fn baseline_orders<T: Scalar>(mission: &Mission<T>, table: &EnergyTable<T>) -> Result<BaselineOrders<T>> {
    mission.validate()?;
    let min_x = solve_held_karp(&CostMatrix::distances(mission, CostMode::DistHoriz)?)?.order;
    let min_d = solve_held_karp(&CostMatrix::distances(mission, CostMode::DistTotal)?)?.order;
    let min_z = min_vertical_order(mission)?;
    Ok(BaselineOrders {
        min_x: pair(min_x, mission, table)?,
        min_z: pair(min_z, mission, table)?,
        min_d: pair(min_d, mission, table)?,
    })
}

/// Everything the planner reports for one mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PlanReport<T> {
    pub min_energy: OrderResult<T>,
    pub baselines: BaselineOrders<T>,
}

pub fn plan_mission<T: Scalar>(mission: &Mission<T>, table: &EnergyTable<T>) -> Result<PlanReport<T>> {
    Ok(PlanReport {
        min_energy: solve_min_energy(mission, table)?,
        baselines: baseline_orders(mission, table)?,
    })
}
