//! Single-school routing: split a school's stops into trips.
//!
//! Every variant minimises a weighted sum over the school's trips:
//!
//! `w_n * |trips| - w_c * |assignments| + w_t * sum(tt) + w_d * sum(assigned dd)`
//!
//! The traditional baselines only use the trip-count and travel-time terms.
//! The compatibility-aware variant additionally rewards assigning a trip to a
//! later school it can reach in time (a "target"), at most one target per
//! trip and at most a target's remaining capacity per target.
//!
//! Schools with few stops are solved exactly by enumerating set partitions;
//! larger ones by sweep construction plus local search.

mod assignment;
mod exact;
mod heuristic;

use std::cmp::Ordering;
use std::time::Duration;

use crate::config::SolverConfig;
use crate::error::Result;
use crate::instance::{Instance, SchoolId};
use crate::trips::Trip;

pub use assignment::assign_targets;
pub use exact::{exact_enumerate, feasible_partitions, EXACT_MAX_STOPS};
pub use heuristic::{heuristic_solve, local_search};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectiveKind {
    /// Fewest trips.
    MinN,
    /// Least total travel time.
    MinTT,
    /// Weighted trips plus travel time.
    MinNT,
    /// Trips, travel time, and rewarded trip-to-school assignments.
    CompatAware,
}

/// A later school that trips of the current school may be assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompatTarget {
    pub school: SchoolId,
    pub bell_time: i64,
    /// Remaining trips of `school` that still lack a predecessor; `None` is unlimited.
    pub capacity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingObjective {
    pub kind: ObjectiveKind,
    pub alpha_n: f64,
    pub alpha_c: f64,
    pub alpha_t: f64,
    pub alpha_d: f64,
    /// Only used by [`ObjectiveKind::CompatAware`].
    pub targets: Vec<CompatTarget>,
}

impl RoutingObjective {
    pub fn min_n(config: &SolverConfig) -> Self {
        Self::baseline(ObjectiveKind::MinN, config.alpha_n, 0.0)
    }

    pub fn min_tt(config: &SolverConfig) -> Self {
        Self::baseline(ObjectiveKind::MinTT, 0.0, config.alpha_t)
    }

    pub fn min_nt(config: &SolverConfig) -> Self {
        Self::baseline(ObjectiveKind::MinNT, config.alpha_n, config.alpha_t)
    }

    fn baseline(kind: ObjectiveKind, alpha_n: f64, alpha_t: f64) -> Self {
        Self {
            kind,
            alpha_n,
            alpha_c: 0.0,
            alpha_t,
            alpha_d: 0.0,
            targets: Vec::new(),
        }
    }

    pub fn compat_aware(alpha_n: f64, alpha_c: f64, alpha_t: f64, alpha_d: f64, targets: Vec<CompatTarget>) -> Self {
        Self {
            kind: ObjectiveKind::CompatAware,
            alpha_n,
            alpha_c,
            alpha_t,
            alpha_d,
            targets,
        }
    }

    /// Targets that take part in the assignment (none for the baselines).
    pub fn active_targets(&self) -> &[CompatTarget] {
        match self.kind {
            ObjectiveKind::CompatAware => &self.targets,
            _ => &[],
        }
    }

    /// Objective value from integer totals. Always evaluated in this exact
    /// order so a recomputation is bit-identical.
    pub fn value(&self, trips: usize, assignments: usize, travel_time: i64, assigned_deadhead: i64) -> f64 {
        self.alpha_n * trips as f64 - self.alpha_c * assignments as f64
            + self.alpha_t * travel_time as f64
            + self.alpha_d * assigned_deadhead as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// Proven optimal by the exact backend.
    Optimal,
    /// Heuristic search stopped by its time budget.
    TimeLimited,
    /// Heuristic search reached a local optimum.
    Heuristic,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::TimeLimited => "time_limited",
            SolveStatus::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchoolRoutingResult {
    pub school: SchoolId,
    /// Sorted by non-increasing travel time, then stop sequence.
    pub trips: Vec<Trip>,
    /// Target school per trip, parallel to `trips`.
    pub assignments: Vec<Option<SchoolId>>,
    pub objective_value: f64,
    pub status: SolveStatus,
}

impl SchoolRoutingResult {
    pub fn total_travel_time(&self) -> i64 {
        self.trips.iter().map(|t| t.travel_time).sum()
    }

    pub fn assignment_count(&self) -> usize {
        self.assignments.iter().flatten().count()
    }

    /// Trips assigned to `target`.
    pub fn assigned_to(&self, target: SchoolId) -> usize {
        self.assignments.iter().filter(|a| **a == Some(target)).count()
    }

    /// Deadhead of every assigned trip to its target, seconds.
    pub fn assigned_deadhead(&self, instance: &Instance) -> i64 {
        self.trips
            .iter()
            .zip(&self.assignments)
            .filter_map(|(t, a)| a.map(|k| crate::compatibility::deadhead_to_school(t, k, instance)))
            .sum()
    }

    /// Objective recomputed from trips and assignments.
    pub fn recompute_objective(&self, objective: &RoutingObjective, instance: &Instance) -> f64 {
        objective.value(
            self.trips.len(),
            self.assignment_count(),
            self.total_travel_time(),
            self.assigned_deadhead(instance),
        )
    }
}

/// A candidate solution with everything needed for deterministic comparison.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub trips: Vec<Trip>,
    pub assignments: Vec<Option<SchoolId>>,
    pub objective: f64,
    pub travel_time: i64,
}

impl Candidate {
    /// Canonicalises trip order, solves the target assignment and scores it.
    pub fn evaluate(mut trips: Vec<Trip>, objective: &RoutingObjective, instance: &Instance, buffer: i64) -> Self {
        canonical_sort(&mut trips);
        let (assignments, assigned_dd) = assign_targets(&trips, objective, instance, buffer);
        let count = assignments.iter().flatten().count();
        let travel_time = trips.iter().map(|t| t.travel_time).sum();
        Self {
            objective: objective.value(trips.len(), count, travel_time, assigned_dd),
            trips,
            assignments,
            travel_time,
        }
    }

    /// Order by (objective, trip count, total travel time, stop sequence).
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.objective
            .total_cmp(&other.objective)
            .then(self.trips.len().cmp(&other.trips.len()))
            .then(self.travel_time.cmp(&other.travel_time))
            .then_with(|| {
                self.trips
                    .iter()
                    .map(|t| &t.stops)
                    .cmp(other.trips.iter().map(|t| &t.stops))
            })
    }

    pub fn into_result(self, school: SchoolId, instance: &Instance, status: SolveStatus) -> SchoolRoutingResult {
        let mut trips = self.trips;
        let prefix = &instance.school(school).id;
        for (i, t) in trips.iter_mut().enumerate() {
            t.id = format!("{prefix}-{}", i + 1);
        }
        SchoolRoutingResult {
            school,
            trips,
            assignments: self.assignments,
            objective_value: self.objective,
            status,
        }
    }
}

/// Non-increasing travel time, then stop sequence.
pub(crate) fn canonical_sort(trips: &mut [Trip]) {
    trips.sort_by(|a, b| b.travel_time.cmp(&a.travel_time).then_with(|| a.stops.cmp(&b.stops)));
}

/// Solves the routing subproblem of `school`: exactly when it has at most
/// `config.exact_threshold_stops` stops, otherwise heuristically within `budget`.
pub fn solve_school(
    school: SchoolId,
    objective: &RoutingObjective,
    config: &SolverConfig,
    instance: &Instance,
    budget: Duration,
) -> Result<SchoolRoutingResult> {
    if instance.school(school).stops.len() <= config.exact_threshold_stops.min(EXACT_MAX_STOPS) {
        exact_enumerate(school, objective, config, instance)
    } else {
        heuristic_solve(school, objective, config, instance, budget)
    }
}
