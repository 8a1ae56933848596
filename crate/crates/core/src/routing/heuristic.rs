//! Heuristic single-school routing for schools too large to enumerate.
//!
//! Construction tries a polar sweep around the school from every starting
//! stop and a first-fit-decreasing packing, falling back to a bounded
//! depth-first search when neither fits the trip budget. The best start is
//! then improved by best-improvement local search over relocate, swap, merge
//! and split moves. Every changed trip is re-ordered from scratch, so 2-opt
//! style improvements inside a trip come for free.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::{Instance, SchoolId, StopId};
use crate::ordering::order_stops;
use crate::trips::{service_time, Trip};

use super::{Candidate, RoutingObjective, SchoolRoutingResult, SolveStatus};

/// Search nodes the depth-first feasibility fallback may expand.
const DFS_NODE_LIMIT: usize = 200_000;

/// Feasible trips by stop set, built on demand.
struct TripCache<'a> {
    instance: &'a Instance,
    school: SchoolId,
    mrt: Option<i64>,
    threshold: usize,
    trips: HashMap<Vec<StopId>, Option<Trip>>,
}

impl<'a> TripCache<'a> {
    fn new(instance: &'a Instance, school: SchoolId, config: &SolverConfig) -> Self {
        Self {
            instance,
            school,
            mrt: config.mrt,
            threshold: config.exact_threshold_stops,
            trips: HashMap::new(),
        }
    }

    /// The trip over `set` (sorted ascending), or `None` when it breaks
    /// capacity or ride time.
    fn get(&mut self, set: &[StopId]) -> Option<&Trip> {
        if !self.trips.contains_key(set) {
            let trip = self.build(set);
            self.trips.insert(set.to_vec(), trip);
        }
        self.trips[set].as_ref()
    }

    fn feasible(&mut self, set: &[StopId]) -> bool {
        self.get(set).is_some()
    }

    fn build(&self, set: &[StopId]) -> Option<Trip> {
        let load: u32 = set.iter().map(|&s| self.instance.stop(s).students).sum();
        if load > self.instance.capacity() {
            return None;
        }
        let (order, legs) = order_stops(self.instance, self.school, set, self.threshold);
        if self.mrt.is_some_and(|m| legs + service_time(self.instance, set) > m) {
            return None;
        }
        Some(Trip::new(self.instance, String::new(), self.school, order))
    }
}

fn with(set: &[StopId], s: StopId) -> Vec<StopId> {
    let mut out = set.to_vec();
    let pos = out.binary_search(&s).unwrap_err();
    out.insert(pos, s);
    out
}

fn without(set: &[StopId], s: StopId) -> Vec<StopId> {
    set.iter().copied().filter(|&x| x != s).collect()
}

/// Greedy fill in the given stop order, opening a trip whenever the next
/// stop does not fit.
fn fill_in_order(cache: &mut TripCache, order: &[StopId]) -> Vec<Vec<StopId>> {
    let mut sets: Vec<Vec<StopId>> = Vec::new();
    for &s in order {
        match sets.last() {
            Some(cur) if cache.feasible(&with(cur, s)) => {
                let grown = with(cur, s);
                *sets.last_mut().unwrap() = grown;
            }
            _ => sets.push(vec![s]),
        }
    }
    sets
}

fn first_fit_decreasing(cache: &mut TripCache, stops: &[StopId]) -> Vec<Vec<StopId>> {
    let mut order = stops.to_vec();
    order.sort_by_key(|&s| (std::cmp::Reverse(cache.instance.stop(s).students), s));
    let mut sets: Vec<Vec<StopId>> = Vec::new();
    for s in order {
        match (0..sets.len()).find(|&b| cache.feasible(&with(&sets[b], s))) {
            Some(b) => sets[b] = with(&sets[b], s),
            None => sets.push(vec![s]),
        }
    }
    sets
}

fn sweep_order(instance: &Instance, school: SchoolId, stops: &[StopId]) -> Vec<StopId> {
    let origin = instance.school(school).node;
    let mut keyed: Vec<(f64, i128, StopId)> = stops
        .iter()
        .map(|&s| {
            let node = instance.stop(s).node;
            let angle = ((node.y - origin.y) as f64).atan2((node.x - origin.x) as f64);
            (angle, origin.squared_distance(&node), s)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    keyed.into_iter().map(|(_, _, s)| s).collect()
}

/// Depth-first search for any split into at most `max_trips` feasible trips.
fn bounded_dfs(cache: &mut TripCache, stops: &[StopId], max_trips: usize) -> Option<Vec<Vec<StopId>>> {
    fn go(
        cache: &mut TripCache,
        order: &[StopId],
        i: usize,
        sets: &mut Vec<Vec<StopId>>,
        max_trips: usize,
        budget: &mut usize,
    ) -> bool {
        if i == order.len() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let s = order[i];
        for b in 0..sets.len() {
            let grown = with(&sets[b], s);
            if cache.feasible(&grown) {
                let old = std::mem::replace(&mut sets[b], grown);
                if go(cache, order, i + 1, sets, max_trips, budget) {
                    return true;
                }
                sets[b] = old;
            }
        }
        if sets.len() < max_trips {
            sets.push(vec![s]);
            if go(cache, order, i + 1, sets, max_trips, budget) {
                return true;
            }
            sets.pop();
        }
        false
    }

    let mut order = stops.to_vec();
    order.sort_by_key(|&s| (std::cmp::Reverse(cache.instance.stop(s).students), s));
    let mut sets = Vec::new();
    let mut budget = DFS_NODE_LIMIT;
    go(cache, &order, 0, &mut sets, max_trips, &mut budget).then_some(sets)
}

struct Search<'a, 'c> {
    cache: &'c mut TripCache<'a>,
    objective: &'a RoutingObjective,
    buffer: i64,
    bounds: (usize, usize),
    deadline: Option<Instant>,
    timed_out: bool,
    evaluations: usize,
}

impl Search<'_, '_> {
    fn evaluate(&mut self, sets: &[Vec<StopId>]) -> Option<Candidate> {
        let trips = sets
            .iter()
            .map(|s| self.cache.get(s).cloned())
            .collect::<Option<Vec<Trip>>>()?;
        self.evaluations += 1;
        Some(Candidate::evaluate(trips, self.objective, self.cache.instance, self.buffer))
    }

    fn out_of_time(&mut self) -> bool {
        if !self.timed_out && self.evaluations.is_multiple_of(32) {
            if let Some(deadline) = self.deadline {
                self.timed_out = Instant::now() >= deadline;
            }
        }
        self.timed_out
    }

    /// All neighbours of `sets` within the trip budget.
    fn neighbours(&mut self, sets: &[Vec<StopId>], current: &Candidate) -> Vec<Vec<Vec<StopId>>> {
        let m = sets.len();
        let (min, max) = self.bounds;
        let mut out = Vec::new();
        let replace = |pairs: &[(usize, Vec<StopId>)], extra: Option<Vec<StopId>>| {
            let mut next: Vec<Vec<StopId>> = sets.to_vec();
            for (i, set) in pairs {
                next[*i] = set.clone();
            }
            next.retain(|s| !s.is_empty());
            next.extend(extra);
            next
        };
        for a in 0..m {
            for &s in &sets[a] {
                let rest = without(&sets[a], s);
                if rest.is_empty() && m - 1 < min {
                    continue;
                }
                for b in (0..m).filter(|&b| b != a) {
                    let grown = with(&sets[b], s);
                    if self.cache.feasible(&grown) && (rest.is_empty() || self.cache.feasible(&rest)) {
                        out.push(replace(&[(a, rest.clone()), (b, grown)], None));
                    }
                }
                if !rest.is_empty() && m < max && self.cache.feasible(&rest) {
                    out.push(replace(&[(a, rest.clone())], Some(vec![s])));
                }
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                for &s in &sets[a] {
                    for &u in &sets[b] {
                        let na = with(&without(&sets[a], s), u);
                        let nb = with(&without(&sets[b], u), s);
                        if self.cache.feasible(&na) && self.cache.feasible(&nb) {
                            out.push(replace(&[(a, na), (b, nb)], None));
                        }
                    }
                }
            }
        }
        if m > min {
            for a in 0..m {
                for b in a + 1..m {
                    let mut union = sets[a].clone();
                    union.extend(&sets[b]);
                    union.sort_unstable();
                    if self.cache.feasible(&union) {
                        out.push(replace(&[(a, union), (b, Vec::new())], None));
                    }
                }
            }
        }
        if m < max {
            for trip in &current.trips {
                for cut in 1..trip.stops.len() {
                    let mut head = trip.stops[..cut].to_vec();
                    let mut tail = trip.stops[cut..].to_vec();
                    head.sort_unstable();
                    tail.sort_unstable();
                    let mut whole = trip.stops.clone();
                    whole.sort_unstable();
                    let a = sets.iter().position(|s| *s == whole).expect("trip of current plan");
                    if self.cache.feasible(&head) && self.cache.feasible(&tail) {
                        out.push(replace(&[(a, head)], Some(tail)));
                    }
                }
            }
        }
        out
    }

    /// Best-improvement descent from `sets`.
    fn descend(&mut self, mut sets: Vec<Vec<StopId>>) -> (Vec<Vec<StopId>>, Candidate) {
        let mut current = self.evaluate(&sets).expect("start is feasible");
        loop {
            if self.out_of_time() {
                return (sets, current);
            }
            let mut best: Option<(Vec<Vec<StopId>>, Candidate)> = None;
            for next in self.neighbours(&sets, &current) {
                if self.out_of_time() {
                    break;
                }
                let Some(cand) = self.evaluate(&next) else { continue };
                let reference = best.as_ref().map_or(&current, |(_, c)| c);
                if cand.cmp_key(reference).is_lt() {
                    best = Some((next, cand));
                }
            }
            match best {
                Some((next, cand)) => {
                    sets = next;
                    current = cand;
                }
                _ => return (sets, current),
            }
        }
    }
}

fn deadline_after(budget: Duration) -> Option<Instant> {
    Instant::now().checked_add(budget)
}

fn to_sets(trips: &[Trip]) -> Vec<Vec<StopId>> {
    trips
        .iter()
        .map(|t| {
            let mut s = t.stops.clone();
            s.sort_unstable();
            s
        })
        .collect()
}

/// Sweep and packing construction, then local search within `budget`.
/// A zero budget returns the best construction.
pub fn heuristic_solve(
    school: SchoolId,
    objective: &RoutingObjective,
    config: &SolverConfig,
    instance: &Instance,
    budget: Duration,
) -> Result<SchoolRoutingResult> {
    let start = Instant::now();
    let stops = instance.school(school).stops.clone();
    let bounds = config.trip_bounds(instance.mnt(school));
    let mut cache = TripCache::new(instance, school, config);
    let infeasible = |reason: String| Error::Infeasible {
        school: instance.school(school).id.clone(),
        reason,
    };
    if let Some(&s) = stops.iter().find(|&&s| !cache.feasible(&[s])) {
        return Err(infeasible(format!(
            "stop {} alone exceeds the maximum ride time",
            instance.stop(s).id
        )));
    }

    let sweep = sweep_order(instance, school, &stops);
    let mut starts: Vec<Vec<Vec<StopId>>> = (0..sweep.len())
        .map(|r| {
            let rotated: Vec<StopId> = sweep[r..].iter().chain(&sweep[..r]).copied().collect();
            fill_in_order(&mut cache, &rotated)
        })
        .collect();
    starts.push(first_fit_decreasing(&mut cache, &stops));
    starts.retain(|s| s.len() <= bounds.1);
    if starts.is_empty() {
        match bounded_dfs(&mut cache, &stops, bounds.1) {
            Some(sets) => starts.push(sets),
            None => {
                return Err(infeasible(format!(
                    "no split into at most {} trips found that satisfies capacity and ride time",
                    bounds.1
                )))
            }
        }
    }

    let mut search = Search {
        cache: &mut cache,
        objective,
        buffer: config.buffer,
        bounds,
        deadline: deadline_after(budget.saturating_sub(start.elapsed())),
        timed_out: budget.is_zero(),
        evaluations: 0,
    };
    let mut best: Option<(Vec<Vec<StopId>>, Candidate)> = None;
    for sets in starts {
        let cand = search.evaluate(&sets).expect("construction is feasible");
        if best.as_ref().is_none_or(|(_, b)| cand.cmp_key(b).is_lt()) {
            best = Some((sets, cand));
        }
    }
    let (sets, _) = best.expect("at least one start");
    let (_, result) = search.descend(sets);
    let status = if search.timed_out {
        SolveStatus::TimeLimited
    } else {
        SolveStatus::Heuristic
    };
    Ok(result.into_result(school, instance, status))
}

/// Runs the local search starting from `trips` (which must split the
/// school's stops feasibly within the trip budget).
pub fn local_search(
    school: SchoolId,
    trips: &[Trip],
    objective: &RoutingObjective,
    config: &SolverConfig,
    instance: &Instance,
    budget: Duration,
) -> Result<SchoolRoutingResult> {
    let mut cache = TripCache::new(instance, school, config);
    let sets = to_sets(trips);
    let bounds = config.trip_bounds(instance.mnt(school));
    if sets.len() < bounds.0 || sets.len() > bounds.1 || !sets.iter().all(|s| cache.feasible(s)) {
        return Err(Error::InvalidArgument("start plan is not feasible for this school".into()));
    }
    let mut search = Search {
        cache: &mut cache,
        objective,
        buffer: config.buffer,
        bounds,
        deadline: deadline_after(budget),
        timed_out: budget.is_zero(),
        evaluations: 0,
    };
    let (_, result) = search.descend(sets);
    let status = if search.timed_out {
        SolveStatus::TimeLimited
    } else {
        SolveStatus::Heuristic
    };
    Ok(result.into_result(school, instance, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::exact_enumerate;
    use crate::routing::test_support::single_school;
    use crate::trips::validate_trip;

    fn ring(n: usize, students: u32) -> Vec<((i64, i64), u32)> {
        (0..n)
            .map(|i| {
                let a = i as f64 * 2.4;
                let r = 3000.0 + 700.0 * i as f64;
                (((r * a.cos()) as i64, (r * a.sin()) as i64), students + (i as u32 % 7))
            })
            .collect()
    }

    #[test]
    fn never_beats_exact_and_stays_feasible() {
        let cfg = SolverConfig::default();
        for n in 3..=8 {
            let inst = single_school(&ring(n, 8), 66);
            for obj in [RoutingObjective::min_nt(&cfg), RoutingObjective::min_tt(&cfg)] {
                let exact = exact_enumerate(0, &obj, &cfg, &inst).unwrap();
                let heur = heuristic_solve(0, &obj, &cfg, &inst, Duration::from_secs(5)).unwrap();
                assert!(heur.objective_value >= exact.objective_value, "n={n}");
                for t in &heur.trips {
                    assert!(validate_trip(t, &cfg, &inst).is_empty());
                }
                let mut covered: Vec<StopId> = heur.trips.iter().flat_map(|t| t.stops.clone()).collect();
                covered.sort_unstable();
                assert_eq!(covered, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn zero_budget_returns_construction() {
        let cfg = SolverConfig::default();
        let inst = single_school(&ring(14, 10), 66);
        let r = heuristic_solve(0, &RoutingObjective::min_nt(&cfg), &cfg, &inst, Duration::ZERO).unwrap();
        assert_eq!(r.status, SolveStatus::TimeLimited);
        assert!(r.trips.len() >= inst.mnt(0));
        assert!(r.trips.iter().all(|t| validate_trip(t, &cfg, &inst).is_empty()));
    }

    #[test]
    fn local_search_is_idempotent() {
        let cfg = SolverConfig::default();
        let inst = single_school(&ring(14, 10), 66);
        let obj = RoutingObjective::min_nt(&cfg);
        let first = heuristic_solve(0, &obj, &cfg, &inst, Duration::from_secs(10)).unwrap();
        assert_eq!(first.status, SolveStatus::Heuristic);
        let again = local_search(0, &first.trips, &obj, &cfg, &inst, Duration::from_secs(10)).unwrap();
        assert_eq!(again.objective_value, first.objective_value);
        assert_eq!(again.trips, first.trips);
    }

    #[test]
    fn deterministic() {
        let cfg = SolverConfig::default();
        let inst = single_school(&ring(12, 9), 66);
        let obj = RoutingObjective::min_tt(&cfg);
        let a = heuristic_solve(0, &obj, &cfg, &inst, Duration::from_secs(10)).unwrap();
        let b = heuristic_solve(0, &obj, &cfg, &inst, Duration::from_secs(10)).unwrap();
        assert_eq!(a, b);
    }
}
