//! Exact single-school routing by enumerating set partitions of the stops.
//!
//! Partitions are generated as restricted-growth strings over the school's
//! stops (stop `i` joins an existing block or opens the next one), so every
//! partition appears once. Each block's best visiting order and travel time
//! come from one subset table. Blocks are pruned as soon as they break
//! capacity or the ride-time cap: both only grow when a stop is added, since
//! rounded-up legs still satisfy the triangle inequality.

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::{Instance, Place, SchoolId, StopId};
use crate::ordering::SubsetPaths;
use crate::trips::{service_time, stop_service_time, Trip, TRIP_BASE_SERVICE};

use super::{canonical_sort, Candidate, RoutingObjective, SchoolRoutingResult, SolveStatus};

/// Largest school the exact backend accepts regardless of configuration.
pub const EXACT_MAX_STOPS: usize = 12;

/// Every block that can be a trip, indexed by local stop mask.
struct BlockTable {
    stops: Vec<StopId>,
    students: Vec<u32>,
    trips: Vec<Option<Trip>>,
}

impl BlockTable {
    fn new(instance: &Instance, school: SchoolId, mrt: Option<i64>) -> Self {
        let stops = instance.school(school).stops.clone();
        let paths = SubsetPaths::new(instance, school, &stops);
        let capacity = instance.capacity();
        let n = stops.len();
        let trips = (0..1usize << n)
            .map(|mask| {
                if mask == 0 {
                    return None;
                }
                let members: Vec<StopId> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| stops[i]).collect();
                let load: u32 = members.iter().map(|&s| instance.stop(s).students).sum();
                if load > capacity {
                    return None;
                }
                let tt = paths.leg_sum(mask) + service_time(instance, &members);
                if mrt.is_some_and(|m| tt > m) {
                    return None;
                }
                let trip = Trip::new(instance, String::new(), school, paths.order(mask));
                debug_assert_eq!(trip.travel_time, tt);
                Some(trip)
            })
            .collect();
        let students = stops.iter().map(|&s| instance.stop(s).students).collect();
        Self { stops, students, trips }
    }

    fn feasible(&self, mask: usize) -> bool {
        self.trips[mask].is_some()
    }
}

trait Visitor {
    /// Whether a partial partition with `blocks` open blocks can be skipped.
    fn prune(&self, blocks: usize) -> bool;
    fn leaf(&mut self, masks: &[usize]);
}

fn walk(table: &BlockTable, bounds: (usize, usize), i: usize, masks: &mut Vec<usize>, visitor: &mut impl Visitor) {
    let n = table.stops.len();
    if masks.len() + (n - i) < bounds.0 {
        return;
    }
    if i == n {
        visitor.leaf(masks);
        return;
    }
    if visitor.prune(masks.len()) {
        return;
    }
    let bit = 1 << i;
    for b in 0..masks.len() {
        if table.feasible(masks[b] | bit) {
            masks[b] |= bit;
            walk(table, bounds, i + 1, masks, visitor);
            masks[b] &= !bit;
        }
    }
    if masks.len() < bounds.1 && table.feasible(bit) {
        masks.push(bit);
        walk(table, bounds, i + 1, masks, visitor);
        masks.pop();
    }
}

fn check_size(instance: &Instance, school: SchoolId, limit: usize) -> Result<()> {
    let n = instance.school(school).stops.len();
    if n > limit {
        return Err(Error::SizeLimit {
            what: format!("stops of school {} for exact routing", instance.school(school).id),
            size: n,
            limit,
        });
    }
    Ok(())
}

fn infeasible(instance: &Instance, school: SchoolId, table: &BlockTable, bounds: (usize, usize)) -> Error {
    let reason = match (0..table.stops.len()).find(|&i| !table.feasible(1 << i)) {
        Some(i) => format!("stop {} alone exceeds the maximum ride time", instance.stop(table.stops[i]).id),
        None => format!(
            "no split into {}..={} trips satisfies capacity and ride time",
            bounds.0, bounds.1
        ),
    };
    Error::Infeasible {
        school: instance.school(school).id.clone(),
        reason,
    }
}

struct BestSearch<'a> {
    table: &'a BlockTable,
    objective: &'a RoutingObjective,
    instance: &'a Instance,
    buffer: i64,
    /// `lower_bound[m]`: no completion with at least `m` trips scores below this.
    lower_bound: Vec<f64>,
    best: Option<Candidate>,
}

impl Visitor for BestSearch<'_> {
    fn prune(&self, blocks: usize) -> bool {
        match &self.best {
            Some(best) => self.lower_bound[blocks] > best.objective,
            None => false,
        }
    }

    fn leaf(&mut self, masks: &[usize]) {
        let trips = masks.iter().map(|&m| self.table.trips[m].clone().expect("feasible block")).collect();
        let cand = Candidate::evaluate(trips, self.objective, self.instance, self.buffer);
        if self.best.as_ref().is_none_or(|b| cand.cmp_key(b).is_lt()) {
            self.best = Some(cand);
        }
    }
}

/// Lower bounds on the objective by final trip count, as suffix minima so
/// that entry `m` covers every count `>= m`.
fn lower_bounds(
    table: &BlockTable,
    objective: &RoutingObjective,
    instance: &Instance,
    school: SchoolId,
    bounds: (usize, usize),
) -> Vec<f64> {
    let n = table.stops.len();
    // Each stop is entered exactly once, from the school or another stop.
    let entry_legs: i64 = table
        .stops
        .iter()
        .map(|&s| {
            std::iter::once(Place::School(school))
                .chain(table.stops.iter().filter(|&&u| u != s).map(|&u| Place::Stop(u)))
                .map(|p| instance.leg(p, Place::Stop(s)))
                .min()
                .expect("at least the school")
        })
        .sum();
    let stop_service: i64 = table.students.iter().map(|&stu| stop_service_time(stu as u64)).sum();
    let target_cap: usize = objective
        .active_targets()
        .iter()
        .map(|t| t.capacity.unwrap_or(n))
        .sum();
    let per_count = |m: usize| {
        let assignments = if objective.alpha_c > 0.0 { m.min(target_cap) } else { 0 };
        objective.value(m, assignments, entry_legs + stop_service + TRIP_BASE_SERVICE * m as i64, 0)
    };
    let mut out = vec![f64::INFINITY; bounds.1 + 2];
    for m in (0..=bounds.1).rev() {
        let here = if m >= bounds.0.max(1) { per_count(m) } else { f64::INFINITY };
        out[m] = here.min(out[m + 1]);
    }
    out
}

/// Global optimum of the routing objective for `school`.
pub fn exact_enumerate(
    school: SchoolId,
    objective: &RoutingObjective,
    config: &SolverConfig,
    instance: &Instance,
) -> Result<SchoolRoutingResult> {
    check_size(instance, school, config.exact_threshold_stops.min(EXACT_MAX_STOPS))?;
    let table = BlockTable::new(instance, school, config.mrt);
    let bounds = config.trip_bounds(instance.mnt(school));
    let mut search = BestSearch {
        lower_bound: lower_bounds(&table, objective, instance, school, bounds),
        table: &table,
        objective,
        instance,
        buffer: config.buffer,
        best: None,
    };
    walk(&table, bounds, 0, &mut Vec::new(), &mut search);
    match search.best {
        Some(best) => Ok(best.into_result(school, instance, SolveStatus::Optimal)),
        None => Err(infeasible(instance, school, &table, bounds)),
    }
}

struct Collect<'a> {
    table: &'a BlockTable,
    out: Vec<Vec<Trip>>,
}

impl Visitor for Collect<'_> {
    fn prune(&self, _: usize) -> bool {
        false
    }

    fn leaf(&mut self, masks: &[usize]) {
        let mut trips: Vec<Trip> = masks.iter().map(|&m| self.table.trips[m].clone().expect("feasible block")).collect();
        canonical_sort(&mut trips);
        self.out.push(trips);
    }
}

/// Every feasible split of the school's stops into trips within the trip
/// budget, each trip optimally ordered. Used by the integrated exact oracle.
pub fn feasible_partitions(instance: &Instance, school: SchoolId, config: &SolverConfig) -> Result<Vec<Vec<Trip>>> {
    check_size(instance, school, EXACT_MAX_STOPS)?;
    let table = BlockTable::new(instance, school, config.mrt);
    let bounds = config.trip_bounds(instance.mnt(school));
    let mut collect = Collect { table: &table, out: Vec::new() };
    walk(&table, bounds, 0, &mut Vec::new(), &mut collect);
    if collect.out.is_empty() {
        return Err(infeasible(instance, school, &table, bounds));
    }
    Ok(collect.out)
}
