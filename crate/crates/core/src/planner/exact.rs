//! Exact closed-tour solvers over a [`CostMatrix`].
//!
//! Both solvers accumulate a tour's cost left to right from the origin, so
//! the same tour always gets a bit-identical cost and their optima compare
//! exactly. Ties go to the lexicographically smallest order.

use std::cmp::Ordering;

use itertools::Itertools;

use super::CostMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const EXHAUSTIVE_MAX_WAYPOINTS: usize = 10;
pub const HELD_KARP_MAX_WAYPOINTS: usize = 20;

/// A visiting order of waypoints `1..=n` (node 0 is the origin) and its
/// closed-tour cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Tour<T> {
    pub order: Vec<usize>,
    pub cost: T,
}

/// Cost of `0 -> order[0] -> ... -> order[n-1] -> 0`, summed left to right.
pub fn tour_cost<T: Scalar>(matrix: &CostMatrix<T>, order: &[usize]) -> T {
    let mut cost = T::zero();
    let mut at = 0;
    for &next in order {
        cost = cost + matrix.get(at, next);
        at = next;
    }
    cost + matrix.get(at, 0)
}

/// Enumerates all `N_W!` orders.
pub fn solve_exhaustive<T: Scalar>(matrix: &CostMatrix<T>) -> Result<Tour<T>> {
    let n = matrix.waypoints();
    if n == 0 || n > EXHAUSTIVE_MAX_WAYPOINTS {
        return Err(Error::SizeGuard {
            solver: "exhaustive search",
            n,
            max: EXHAUSTIVE_MAX_WAYPOINTS,
        });
    }
    let mut best: Option<Tour<T>> = None;
    // permutations of a sorted range come out in lexicographic order
    for order in (1..=n).permutations(n) {
        let cost = tour_cost(matrix, &order);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(Tour { order, cost });
        }
    }
    Ok(best.expect("at least one permutation"))
}

/// Held-Karp dynamic program over waypoint subsets.
pub fn solve_held_karp<T: Scalar>(matrix: &CostMatrix<T>) -> Result<Tour<T>> {
    let n = matrix.waypoints();
    if n == 0 || n > HELD_KARP_MAX_WAYPOINTS {
        return Err(Error::SizeGuard {
            solver: "Held-Karp",
            n,
            max: HELD_KARP_MAX_WAYPOINTS,
        });
    }
    let dp = SubsetDp::run(n, |i, j| matrix.get(i, j), 1, 0, |_, _, _| Some(0));
    dp.best().ok_or_else(|| Error::InvalidOrder("no feasible tour".into()))
}

/// Minimum-cost tour whose vertical profile is cyclically unimodal: one
/// climb run and one descent run around the closed loop, which is exactly
/// the set of tours achieving the least total vertical travel.
pub(crate) fn solve_unimodal<T: Scalar>(
    n: usize,
    cost: impl Fn(usize, usize) -> T,
    height: impl Fn(usize) -> T,
    max_waypoints: usize,
) -> Result<Tour<T>> {
    if n == 0 || n > max_waypoints {
        return Err(Error::SizeGuard {
            solver: "minimum vertical distance search",
            n,
            max: max_waypoints,
        });
    }
    // phase = direction * 3 + changes; direction 0 = none yet, 1 = up, 2 = down
    let step = |phase: usize, from: usize, to: usize| -> Option<usize> {
        let (dir, changes) = (phase / 3, phase % 3);
        let d = match height(to).partial_cmp(&height(from))? {
            Ordering::Greater => 1,
            Ordering::Less => 2,
            Ordering::Equal => return Some(phase),
        };
        if dir == 0 {
            Some(d * 3)
        } else if d == dir {
            Some(phase)
        } else if changes < 2 {
            Some(d * 3 + changes + 1)
        } else {
            None
        }
    };
    let dp = SubsetDp::run(n, cost, 9, 0, step);
    dp.best().ok_or_else(|| Error::InvalidOrder("no unimodal tour".into()))
}

const NO_PARENT: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;

/// Subset dynamic program with a small phase automaton on top.
///
/// State `(mask, last, phase)`: the cheapest path from the origin through
/// exactly the waypoints in `mask`, ending at `last`, with the automaton in
/// `phase`. Transitions the automaton rejects are pruned.
struct SubsetDp<T, C, S> {
    n: usize,
    phases: usize,
    cost: C,
    step: S,
    value: Vec<T>,
    parent: Vec<u32>,
}

impl<T, C, S> SubsetDp<T, C, S>
where
    T: Scalar,
    C: Fn(usize, usize) -> T,
    S: Fn(usize, usize, usize) -> Option<usize>,
{
    fn index(&self, mask: usize, last: usize, phase: usize) -> usize {
        (mask * self.n + (last - 1)) * self.phases + phase
    }

    fn encode(&self, last: usize, phase: usize) -> u32 {
        ((last - 1) * self.phases + phase) as u32
    }

    fn run(n: usize, cost: C, phases: usize, start: usize, step: S) -> Self {
        let states = (1usize << n) * n * phases;
        let mut dp = SubsetDp {
            n,
            phases,
            cost,
            step,
            value: vec![T::infinity(); states],
            parent: vec![NO_PARENT; states],
        };
        for j in 1..=n {
            if let Some(p) = (dp.step)(start, 0, j) {
                let idx = dp.index(1 << (j - 1), j, p);
                dp.value[idx] = (dp.cost)(0, j);
                dp.parent[idx] = ROOT;
            }
        }
        for mask in 1usize..(1 << n) {
            for last in 1..=n {
                if mask & (1 << (last - 1)) == 0 {
                    continue;
                }
                for phase in 0..phases {
                    let here = dp.index(mask, last, phase);
                    if dp.parent[here] == NO_PARENT {
                        continue;
                    }
                    let g = dp.value[here];
                    for next in 1..=n {
                        let bit = 1 << (next - 1);
                        if mask & bit != 0 {
                            continue;
                        }
                        let Some(p2) = (dp.step)(phase, last, next) else {
                            continue;
                        };
                        let candidate = g + (dp.cost)(last, next);
                        let there = dp.index(mask | bit, next, p2);
                        let better = match candidate.partial_cmp(&dp.value[there]) {
                            Some(Ordering::Less) => true,
                            Some(Ordering::Equal) => {
                                let incumbent = dp.parent[there];
                                incumbent == NO_PARENT
                                    || dp.path_from(mask, last, phase) < dp.path_from_code(mask, incumbent)
                            }
                            _ => false,
                        };
                        if better {
                            dp.value[there] = candidate;
                            dp.parent[there] = dp.encode(last, phase);
                        }
                    }
                }
            }
        }
        dp
    }

    fn path_from_code(&self, mask: usize, code: u32) -> Vec<usize> {
        let code = code as usize;
        self.path_from(mask, code / self.phases + 1, code % self.phases)
    }

    /// Waypoint sequence of the stored path for a state.
    fn path_from(&self, mut mask: usize, mut last: usize, mut phase: usize) -> Vec<usize> {
        let mut rev = Vec::with_capacity(self.n);
        loop {
            rev.push(last);
            let code = self.parent[self.index(mask, last, phase)];
            if code == ROOT {
                break;
            }
            mask &= !(1 << (last - 1));
            let code = code as usize;
            last = code / self.phases + 1;
            phase = code % self.phases;
        }
        rev.reverse();
        rev
    }

    fn best(&self) -> Option<Tour<T>> {
        let full = (1usize << self.n) - 1;
        let mut best: Option<(T, Vec<usize>)> = None;
        for last in 1..=self.n {
            for phase in 0..self.phases {
                let idx = self.index(full, last, phase);
                if self.parent[idx] == NO_PARENT || (self.step)(phase, last, 0).is_none() {
                    continue;
                }
                let total = self.value[idx] + (self.cost)(last, 0);
                let replace = match &best {
                    None => true,
                    Some((c, order)) => match total.partial_cmp(c) {
                        Some(Ordering::Less) => true,
                        Some(Ordering::Equal) => self.path_from(full, last, phase) < *order,
                        _ => false,
                    },
                };
                if replace {
                    best = Some((total, self.path_from(full, last, phase)));
                }
            }
        }
        best.map(|(cost, order)| Tour { order, cost })
    }
}
