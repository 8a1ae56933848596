//! End-to-end solvers: route every school, then chain all trips into buses.
//!
//! - Baselines route each school with a surrogate objective that knows
//!   nothing about other schools (fewest trips, least travel time, or both).
//! - Algorithm 1 routes each school independently but rewards trips that can
//!   reach some later school in time, with a reduced reward weight.
//! - Algorithm 2 routes schools from the latest bell to the earliest and caps
//!   how many trips may be pointed at each school by its unassigned trip
//!   capacity (UTC), the number of its trips still lacking a predecessor.
//!   The weight-adjusted variant lowers the reward below the per-trip cost so
//!   that an assigned trip still costs something.
//! - The integrated exact oracle enumerates every joint routing plan of a
//!   tiny instance and schedules each one.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::compatibility::{is_school_compatible, CompatibilityGraph};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::{Instance, SchoolId, StopId};
use crate::routing::{
    feasible_partitions, solve_school, CompatTarget, RoutingObjective, SchoolRoutingResult, SolveStatus,
};
use crate::scheduling::{solve_schedule, verify_schedule, Schedule, ScheduleViolation};
use crate::trips::{PlanViolation, RoutingPlan, Trip};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Exact,
    Alg1,
    Alg2,
    Alg2W,
    MinN,
    MinTT,
    MinNT,
}

impl Method {
    /// Report column order.
    pub const ALL: [Method; 7] = [
        Method::MinN,
        Method::MinTT,
        Method::MinNT,
        Method::Alg1,
        Method::Alg2,
        Method::Alg2W,
        Method::Exact,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Alg1 => "alg1",
            Method::Alg2 => "alg2",
            Method::Alg2W => "alg2w",
            Method::MinN => "minn",
            Method::MinTT => "mintt",
            Method::MinNT => "minnt",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method {s:?}, expected one of exact, alg1, alg2, alg2w, minn, mintt, minnt"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    MinN,
    MinTT,
    MinNT,
}

impl Baseline {
    fn method(self) -> Method {
        match self {
            Baseline::MinN => Method::MinN,
            Baseline::MinTT => Method::MinTT,
            Baseline::MinNT => Method::MinNT,
        }
    }

    fn objective(self, config: &SolverConfig) -> RoutingObjective {
        match self {
            Baseline::MinN => RoutingObjective::min_n(config),
            Baseline::MinTT => RoutingObjective::min_tt(config),
            Baseline::MinNT => RoutingObjective::min_nt(config),
        }
    }
}

/// Unassigned trip capacity per school.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtcState {
    pub utc: Vec<usize>,
    pub solved: Vec<bool>,
    /// Trips of other schools assigned to each school so far.
    pub consumed: Vec<usize>,
}

impl UtcState {
    /// Every school starts with its minimum trip count.
    pub fn new(instance: &Instance) -> Self {
        let n = instance.schools().len();
        Self {
            utc: (0..n).map(|k| instance.mnt(k)).collect(),
            solved: vec![false; n],
            consumed: vec![0; n],
        }
    }
}

/// Applies a solved school: its own capacity becomes its trip count minus
/// what earlier solves already pointed at it, and every target it assigned
/// trips to loses that many.
pub fn update_utc(state: &UtcState, school: SchoolId, result: &SchoolRoutingResult, instance: &Instance) -> Result<UtcState> {
    if state.solved[school] {
        return Err(Error::AlreadySolved {
            school: instance.school(school).id.clone(),
        });
    }
    let mut next = state.clone();
    let mut per_target: Vec<usize> = vec![0; state.utc.len()];
    for &k2 in result.assignments.iter().flatten() {
        per_target[k2] += 1;
    }
    for (k2, &count) in per_target.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let underflow = || Error::UtcUnderflow {
            school: instance.school(k2).id.clone(),
        };
        if k2 == school {
            return Err(underflow());
        }
        next.utc[k2] = next.utc[k2].checked_sub(count).ok_or_else(underflow)?;
        next.consumed[k2] += count;
    }
    next.utc[school] = result
        .trips
        .len()
        .checked_sub(next.consumed[school])
        .ok_or_else(|| Error::UtcUnderflow {
            school: instance.school(school).id.clone(),
        })?;
    next.solved[school] = true;
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub method: Method,
    pub nob: usize,
    pub not: usize,
    /// Sum of trip travel times, seconds.
    pub trip_travel_time: i64,
    pub internal_deadhead: i64,
    pub depot_deadhead: i64,
    /// Trip travel time plus all deadhead, seconds.
    pub tvt: i64,
    pub max_trip_travel_time: i64,
    /// Wall clock; never part of any determinism guarantee.
    pub runtime: Duration,
}

impl Metrics {
    pub fn compute(method: Method, plan: &RoutingPlan, schedule: &Schedule, runtime: Duration) -> Self {
        let trip_travel_time = plan.total_travel_time();
        Self {
            method,
            nob: schedule.nob,
            not: plan.len(),
            trip_travel_time,
            internal_deadhead: schedule.internal_deadhead(),
            depot_deadhead: schedule.depot_deadhead(),
            tvt: trip_travel_time + schedule.total_deadhead,
            max_trip_travel_time: plan.trips.iter().map(|t| t.travel_time).max().unwrap_or(0),
            runtime,
        }
    }

    /// Total vehicle time in minutes, rounded half-up.
    pub fn tvt_minutes(&self) -> i64 {
        (self.tvt + 30).div_euclid(60)
    }

    /// Mean trip travel time, seconds.
    pub fn avg_trip_travel_time(&self) -> f64 {
        if self.not == 0 {
            0.0
        } else {
            self.trip_travel_time as f64 / self.not as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub plan: RoutingPlan,
    pub schedule: Schedule,
    /// Routing-stage target per trip, parallel to `plan.trips`.
    pub assignments: Vec<Option<SchoolId>>,
    /// Backend status per school; `None` for the integrated oracle.
    pub school_status: Vec<Option<SolveStatus>>,
    /// Final UTC bookkeeping for Algorithm 2 runs.
    pub utc: Option<UtcState>,
    pub metrics: Metrics,
}

impl Solution {
    /// `z = alpha_b * nob + alpha_t * sum(tt) + alpha_d * total deadhead`.
    pub fn integrated_cost(&self, config: &SolverConfig) -> f64 {
        integrated_cost(config, self.schedule.nob, self.plan.total_travel_time(), self.schedule.total_deadhead)
    }
}

fn integrated_cost(config: &SolverConfig, nob: usize, travel_time: i64, deadhead: i64) -> f64 {
    config.alpha_b * nob as f64 + config.alpha_t * travel_time as f64 + config.alpha_d * deadhead as f64
}

/// Schedules per-school routing results and packages the solution.
fn assemble(
    method: Method,
    instance: &Instance,
    config: &SolverConfig,
    mut results: Vec<SchoolRoutingResult>,
    utc: Option<UtcState>,
    started: Instant,
) -> Solution {
    results.sort_by_key(|r| r.school);
    let mut school_status = vec![None; instance.schools().len()];
    let mut target_of: HashMap<Vec<StopId>, Option<SchoolId>> = HashMap::new();
    let mut trips = Vec::new();
    for r in results {
        school_status[r.school] = Some(r.status);
        for (t, a) in r.trips.into_iter().zip(r.assignments) {
            target_of.insert(t.stops.clone(), a);
            trips.push(t);
        }
    }
    let plan = RoutingPlan::new(instance, trips);
    let assignments = plan.trips.iter().map(|t| target_of[&t.stops]).collect();
    let graph = CompatibilityGraph::build(&plan, instance, config.buffer);
    let schedule = solve_schedule(&plan, &graph, config);
    let metrics = Metrics::compute(method, &plan, &schedule, started.elapsed());
    Solution {
        plan,
        schedule,
        assignments,
        school_status,
        utc,
        metrics,
    }
}

/// Route-then-schedule with a surrogate routing objective.
pub fn run_baseline(instance: &Instance, config: &SolverConfig, which: Baseline) -> Result<Solution> {
    config.validate()?;
    let started = Instant::now();
    let objective = which.objective(config);
    let results = (0..instance.schools().len())
        .map(|k| solve_school(k, &objective, config, instance, config.time_limit_per_subproblem))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(which.method(), instance, config, results, None, started))
}

/// Objective adjustment: every school is routed on its own, rewarding trips
/// that can reach any other school in time with the reduced weight
/// `alpha_c_oa` and charging their deadhead at `alpha_d_oa`.
pub fn run_algorithm1(instance: &Instance, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let started = Instant::now();
    let n = instance.schools().len();
    let results = (0..n)
        .map(|k| {
            let targets = (0..n)
                .filter(|&k2| k2 != k)
                .map(|k2| CompatTarget {
                    school: k2,
                    bell_time: instance.school(k2).bell_time,
                    capacity: None,
                })
                .collect();
            let objective =
                RoutingObjective::compat_aware(config.alpha_n, config.alpha_c_oa, config.alpha_t, config.alpha_d_oa, targets);
            solve_school(k, &objective, config, instance, config.time_limit_per_subproblem)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(Method::Alg1, instance, config, results, None, started))
}

/// Schools in Algorithm 2's solving order: latest bell first, ties by index.
pub fn algorithm2_order(instance: &Instance) -> Vec<SchoolId> {
    let mut order: Vec<SchoolId> = (0..instance.schools().len()).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(instance.school(k).bell_time), k));
    order
}

/// Compatibility assignment with UTC bookkeeping. With `weight_adjust` the
/// reward per assignment is `alpha_c_ca` instead of `alpha_c`.
pub fn run_algorithm2(instance: &Instance, config: &SolverConfig, weight_adjust: bool) -> Result<Solution> {
    config.validate()?;
    let started = Instant::now();
    let alpha_c = if weight_adjust { config.alpha_c_ca } else { config.alpha_c };
    let mut state = UtcState::new(instance);
    let mut results = Vec::with_capacity(instance.schools().len());
    for k in algorithm2_order(instance) {
        let targets = (0..instance.schools().len())
            .filter(|&k2| k2 != k && state.utc[k2] > 0)
            .map(|k2| CompatTarget {
                school: k2,
                bell_time: instance.school(k2).bell_time,
                capacity: Some(state.utc[k2]),
            })
            .collect();
        let objective = RoutingObjective::compat_aware(config.alpha_n, alpha_c, config.alpha_t, config.alpha_d, targets);
        let result = solve_school(k, &objective, config, instance, config.time_limit_per_subproblem)?;
        state = update_utc(&state, k, &result, instance)?;
        results.push(result);
    }
    let method = if weight_adjust { Method::Alg2W } else { Method::Alg2 };
    Ok(assemble(method, instance, config, results, Some(state), started))
}

/// Size limits of the integrated exact oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    /// Stops over all schools.
    pub max_stops: usize,
    /// Sum over schools of the largest possible trip count.
    pub max_trips: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self { max_stops: 8, max_trips: 6 }
    }
}

/// Whether `instance` is within the integrated oracle's limits; the error
/// names the limit that is exceeded.
pub fn check_exact_limits(instance: &Instance, config: &SolverConfig, limits: ExactLimits) -> Result<()> {
    let stops = instance.stops().len();
    if stops > limits.max_stops {
        return Err(Error::SizeLimit {
            what: "stops for the integrated exact oracle".into(),
            size: stops,
            limit: limits.max_stops,
        });
    }
    // A school cannot have more trips than stops, whatever the budget says.
    let trips: usize = (0..instance.schools().len())
        .map(|k| config.trip_bounds(instance.mnt(k)).1.min(instance.school(k).stops.len()))
        .sum();
    if trips > limits.max_trips {
        return Err(Error::SizeLimit {
            what: "trip budget for the integrated exact oracle".into(),
            size: trips,
            limit: limits.max_trips,
        });
    }
    Ok(())
}

/// Joint optimum of bus count, trip travel time and deadhead by exhaustive
/// search over every school's feasible trip splits.
pub fn run_integrated_exact(instance: &Instance, config: &SolverConfig, limits: ExactLimits) -> Result<Solution> {
    config.validate()?;
    check_exact_limits(instance, config, limits)?;
    let started = Instant::now();
    let per_school: Vec<Vec<Vec<Trip>>> = (0..instance.schools().len())
        .map(|k| feasible_partitions(instance, k, config))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, RoutingPlan, Schedule)> = None;
    let mut choice = vec![0usize; per_school.len()];
    loop {
        let trips: Vec<Trip> = choice
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| per_school[k][c].iter().cloned())
            .collect();
        let plan = RoutingPlan::new(instance, trips);
        let graph = CompatibilityGraph::build(&plan, instance, config.buffer);
        let schedule = solve_schedule(&plan, &graph, config);
        let cost = integrated_cost(config, schedule.nob, plan.total_travel_time(), schedule.total_deadhead);
        if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
            best = Some((cost, plan, schedule));
        }
        // Odometer over the per-school choices.
        let mut k = 0;
        while k < choice.len() {
            choice[k] += 1;
            if choice[k] < per_school[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == choice.len() {
            break;
        }
    }
    let (_, plan, schedule) = best.expect("every school has a feasible split");
    let metrics = Metrics::compute(Method::Exact, &plan, &schedule, started.elapsed());
    Ok(Solution {
        assignments: vec![None; plan.len()],
        school_status: vec![None; instance.schools().len()],
        utc: None,
        plan,
        schedule,
        metrics,
    })
}

/// Runs `method` with default oracle limits.
pub fn run_method(instance: &Instance, config: &SolverConfig, method: Method) -> Result<Solution> {
    match method {
        Method::Exact => run_integrated_exact(instance, config, ExactLimits::default()),
        Method::Alg1 => run_algorithm1(instance, config),
        Method::Alg2 => run_algorithm2(instance, config, false),
        Method::Alg2W => run_algorithm2(instance, config, true),
        Method::MinN => run_baseline(instance, config, Baseline::MinN),
        Method::MinTT => run_baseline(instance, config, Baseline::MinTT),
        Method::MinNT => run_baseline(instance, config, Baseline::MinNT),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolutionViolation {
    Plan(PlanViolation),
    Schedule(ScheduleViolation),
    Assignment { trip: String, target: String },
    Utc { school: String, consumed: usize, trips: usize },
    Metric { name: &'static str, recorded: i64, actual: i64 },
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionViolation::Plan(v) => write!(f, "{v}"),
            SolutionViolation::Schedule(v) => write!(f, "{v}"),
            SolutionViolation::Assignment { trip, target } => {
                write!(f, "trip {trip} is assigned to school {target} but cannot reach it in time")
            }
            SolutionViolation::Utc { school, consumed, trips } => {
                write!(f, "school {school}: {consumed} trips assigned to it but only {trips} trips")
            }
            SolutionViolation::Metric { name, recorded, actual } => {
                write!(f, "metric {name}: recorded {recorded} != recomputed {actual}")
            }
        }
    }
}

/// Full consistency check of a solution against its instance.
pub fn verify_solution(solution: &Solution, instance: &Instance, config: &SolverConfig) -> Vec<SolutionViolation> {
    let mut out: Vec<SolutionViolation> = solution
        .plan
        .validate(instance, config)
        .into_iter()
        .map(SolutionViolation::Plan)
        .collect();
    let graph = CompatibilityGraph::build(&solution.plan, instance, config.buffer);
    out.extend(
        verify_schedule(&solution.schedule, &solution.plan, &graph)
            .into_iter()
            .map(SolutionViolation::Schedule),
    );
    let mut consumed = vec![0usize; instance.schools().len()];
    for (trip, target) in solution.plan.trips.iter().zip(&solution.assignments) {
        if let Some(k2) = *target {
            consumed[k2] += 1;
            if !is_school_compatible(trip, k2, instance, config.buffer) {
                out.push(SolutionViolation::Assignment {
                    trip: trip.id.clone(),
                    target: instance.school(k2).id.clone(),
                });
            }
        }
    }
    if solution.utc.is_some() {
        for (k, &c) in consumed.iter().enumerate() {
            let trips = solution.plan.trips_of(k).count();
            if c > trips {
                out.push(SolutionViolation::Utc {
                    school: instance.school(k).id.clone(),
                    consumed: c,
                    trips,
                });
            }
        }
    }
    let fresh = Metrics::compute(solution.metrics.method, &solution.plan, &solution.schedule, Duration::ZERO);
    let m = &solution.metrics;
    for (name, recorded, actual) in [
        ("nob", m.nob as i64, fresh.nob as i64),
        ("not", m.not as i64, fresh.not as i64),
        ("trip_travel_time", m.trip_travel_time, fresh.trip_travel_time),
        ("internal_deadhead", m.internal_deadhead, fresh.internal_deadhead),
        ("depot_deadhead", m.depot_deadhead, fresh.depot_deadhead),
        ("tvt", m.tvt, fresh.tvt),
        ("max_trip_travel_time", m.max_trip_travel_time, fresh.max_trip_travel_time),
    ] {
        if recorded != actual {
            out.push(SolutionViolation::Metric { name, recorded, actual });
        }
    }
    out
}
