//! Visiting order of the stops within one trip.
//!
//! A trip is an open path that starts at its school. Small stop sets are
//! ordered exactly by dynamic programming over subsets; larger ones use
//! nearest-neighbour construction followed by 2-opt.

use crate::instance::{Instance, Place, SchoolId, StopId};

/// Shortest open paths from a school over every subset of a fixed stop list.
///
/// `rest[mask * (n + 1) + cur]` is the cheapest way to visit every stop in
/// `mask` starting from `cur` (a stop position, or `n` for the school).
#[derive(Debug, Clone)]
pub struct SubsetPaths {
    stops: Vec<StopId>,
    legs: Vec<i64>,
    rest: Vec<i64>,
}

impl SubsetPaths {
    /// `stops` must be sorted ascending; local positions then follow stop id order.
    pub fn new(instance: &Instance, school: SchoolId, stops: &[StopId]) -> Self {
        let n = stops.len();
        assert!(n <= 20, "subset table for {n} stops is too large");
        debug_assert!(stops.windows(2).all(|w| w[0] < w[1]));
        let width = n + 1;
        let place = |i: usize| {
            if i == n {
                Place::School(school)
            } else {
                Place::Stop(stops[i])
            }
        };
        let mut legs = vec![0; width * width];
        for i in 0..width {
            for j in 0..width {
                legs[i * width + j] = instance.leg(place(i), place(j));
            }
        }
        let full = 1usize << n;
        let mut rest = vec![i64::MAX; full * width];
        rest[..width].fill(0);
        for mask in 1..full {
            for cur in 0..width {
                if cur < n && mask & (1 << cur) != 0 {
                    continue;
                }
                let mut best = i64::MAX;
                let mut bits = mask;
                while bits != 0 {
                    let j = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    let cand = legs[cur * width + j] + rest[(mask ^ (1 << j)) * width + j];
                    best = best.min(cand);
                }
                rest[mask * width + cur] = best;
            }
        }
        Self {
            stops: stops.to_vec(),
            legs,
            rest,
        }
    }

    pub fn stops(&self) -> &[StopId] {
        &self.stops
    }

    /// Minimum leg sum over the stops selected by `mask` (local positions).
    pub fn leg_sum(&self, mask: usize) -> i64 {
        let width = self.stops.len() + 1;
        self.rest[mask * width + self.stops.len()]
    }

    /// Lexicographically smallest optimal visiting order for `mask`.
    pub fn order(&self, mask: usize) -> Vec<StopId> {
        let n = self.stops.len();
        let width = n + 1;
        let mut out = Vec::with_capacity(mask.count_ones() as usize);
        let mut cur = n;
        let mut mask = mask;
        while mask != 0 {
            let target = self.rest[mask * width + cur];
            let next = (0..n)
                .find(|&j| {
                    mask & (1 << j) != 0
                        && self.legs[cur * width + j] + self.rest[(mask ^ (1 << j)) * width + j] == target
                })
                .expect("optimal successor exists");
            out.push(self.stops[next]);
            mask ^= 1 << next;
            cur = next;
        }
        out
    }
}

/// Sum of driving legs along `school -> stops[0] -> ... -> stops[last]`.
pub fn path_leg_sum(instance: &Instance, school: SchoolId, stops: &[StopId]) -> i64 {
    let mut prev = Place::School(school);
    let mut total = 0;
    for &s in stops {
        total += instance.leg(prev, Place::Stop(s));
        prev = Place::Stop(s);
    }
    total
}

/// Exact minimum-leg ordering by subset dynamic programming.
pub fn exact_order(instance: &Instance, school: SchoolId, stops: &[StopId]) -> (Vec<StopId>, i64) {
    let mut sorted = stops.to_vec();
    sorted.sort_unstable();
    let table = SubsetPaths::new(instance, school, &sorted);
    let mask = (1usize << sorted.len()) - 1;
    (table.order(mask), table.leg_sum(mask))
}

/// Nearest-neighbour path from the school, then 2-opt to local optimality.
pub fn heuristic_order(instance: &Instance, school: SchoolId, stops: &[StopId]) -> (Vec<StopId>, i64) {
    let mut remaining: Vec<StopId> = stops.to_vec();
    remaining.sort_unstable();
    let mut path = Vec::with_capacity(remaining.len());
    let mut cur = Place::School(school);
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .min_by_key(|&(i, &s)| (instance.leg(cur, Place::Stop(s)), i))
            .expect("non-empty");
        let s = remaining.remove(pos);
        path.push(s);
        cur = Place::Stop(s);
    }
    two_opt(instance, school, &mut path);
    let total = path_leg_sum(instance, school, &path);
    (path, total)
}

/// Best-improvement 2-opt on an open path anchored at the school.
pub fn two_opt(instance: &Instance, school: SchoolId, path: &mut [StopId]) {
    let n = path.len();
    if n < 2 {
        return;
    }
    let at = |path: &[StopId], i: usize| Place::Stop(path[i]);
    loop {
        let mut best = (0i64, 0usize, 0usize);
        for i in 0..n - 1 {
            let before = if i == 0 { Place::School(school) } else { at(path, i - 1) };
            for j in i + 1..n {
                let removed = instance.leg(before, at(path, i))
                    + if j + 1 < n { instance.leg(at(path, j), at(path, j + 1)) } else { 0 };
                let added = instance.leg(before, at(path, j))
                    + if j + 1 < n { instance.leg(at(path, i), at(path, j + 1)) } else { 0 };
                let delta = added - removed;
                if delta < best.0 {
                    best = (delta, i, j);
                }
            }
        }
        if best.0 >= 0 {
            return;
        }
        path[best.1..=best.2].reverse();
    }
}

/// Orders `stops` to minimise the leg sum: exactly up to `exact_threshold`
/// stops, heuristically above.
pub fn order_stops(
    instance: &Instance,
    school: SchoolId,
    stops: &[StopId],
    exact_threshold: usize,
) -> (Vec<StopId>, i64) {
    if stops.len() <= exact_threshold {
        exact_order(instance, school, stops)
    } else {
        heuristic_order(instance, school, stops)
    }
}
