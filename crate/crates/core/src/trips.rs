//! Trips: one school, an ordered run of its stops, the load and travel time.
//!
//! Service times follow a linear boarding/alighting regression in seconds:
//! boarding at the school takes `29 + 1.9 * students` for the whole trip and
//! alighting takes `19 + 2.6 * students` at each stop. Per trip that is a
//! fixed 29 s plus `19 + 4.5 * students_s` at every stop `s`; each per-stop
//! term is rounded half-up so travel time stays additive over stops.

use std::collections::HashSet;
use std::fmt;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::{Instance, SchoolId, StopId};
use crate::ordering::{order_stops, path_leg_sum};

/// Fixed boarding time per trip, in seconds.
pub const TRIP_BASE_SERVICE: i64 = 29;

/// `29.0 + 1.9 * stu`, rounded half-up.
pub fn pickup_time(stu: u64) -> i64 {
    ((290 + 19 * stu + 5) / 10) as i64
}

/// `19.0 + 2.6 * stu`, rounded half-up.
pub fn dropoff_time(stu: u64) -> i64 {
    ((190 + 26 * stu + 5) / 10) as i64
}

/// Per-stop service term `19 + 4.5 * stu`, rounded half-up.
pub fn stop_service_time(stu: u64) -> i64 {
    ((190 + 45 * stu + 5) / 10) as i64
}

/// Order-independent part of a trip's travel time.
pub fn service_time(instance: &Instance, stops: &[StopId]) -> i64 {
    TRIP_BASE_SERVICE
        + stops
            .iter()
            .map(|&s| stop_service_time(instance.stop(s).students as u64))
            .sum::<i64>()
}

/// Travel time of the afternoon trip `school -> stops...` in seconds.
pub fn trip_travel_time(instance: &Instance, school: SchoolId, stops: &[StopId]) -> i64 {
    path_leg_sum(instance, school, stops) + service_time(instance, stops)
}

pub fn stops_load(instance: &Instance, stops: &[StopId]) -> u32 {
    stops.iter().map(|&s| instance.stop(s).students).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trip {
    pub id: String,
    pub school: SchoolId,
    /// Visiting order; the last element is where the bus ends the trip.
    pub stops: Vec<StopId>,
    pub load: u32,
    /// Seconds, including service times.
    pub travel_time: i64,
}

impl Trip {
    /// Builds a trip visiting `stops` in the given order.
    pub fn new(instance: &Instance, id: impl Into<String>, school: SchoolId, stops: Vec<StopId>) -> Self {
        let load = stops_load(instance, &stops);
        let travel_time = trip_travel_time(instance, school, &stops);
        Self {
            id: id.into(),
            school,
            stops,
            load,
            travel_time,
        }
    }

    pub fn last_stop(&self) -> StopId {
        *self.stops.last().expect("active trips have at least one stop")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TripViolation {
    Empty,
    DuplicateStop { stop: String },
    ForeignStop { stop: String, school: String },
    Capacity { load: u32, capacity: u32 },
    RideTime { travel_time: i64, mrt: i64 },
    LoadMismatch { recorded: u32, actual: u32 },
    TravelTimeMismatch { recorded: i64, actual: i64 },
}

impl fmt::Display for TripViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TripViolation::Empty => write!(f, "trip has no stops"),
            TripViolation::DuplicateStop { stop } => write!(f, "stop {stop} visited twice"),
            TripViolation::ForeignStop { stop, school } => {
                write!(f, "stop {stop} does not belong to school {school}")
            }
            TripViolation::Capacity { load, capacity } => {
                write!(f, "capacity: load {load} > capacity {capacity}")
            }
            TripViolation::RideTime { travel_time, mrt } => {
                write!(f, "maximum ride time: {travel_time} s > {mrt} s")
            }
            TripViolation::LoadMismatch { recorded, actual } => {
                write!(f, "recorded load {recorded} != actual {actual}")
            }
            TripViolation::TravelTimeMismatch { recorded, actual } => {
                write!(f, "recorded travel time {recorded} s != actual {actual} s")
            }
        }
    }
}

/// Checks a trip against capacity, ride time, membership and consistency.
/// Violations are returned as data; an empty list means the trip is feasible.
pub fn validate_trip(trip: &Trip, config: &SolverConfig, instance: &Instance) -> Vec<TripViolation> {
    let mut out = Vec::new();
    if trip.stops.is_empty() {
        out.push(TripViolation::Empty);
        return out;
    }
    let school_id = &instance.school(trip.school).id;
    let mut seen = HashSet::new();
    for &s in &trip.stops {
        let stop = instance.stop(s);
        if !seen.insert(s) {
            out.push(TripViolation::DuplicateStop { stop: stop.id.clone() });
        }
        if stop.school != trip.school {
            out.push(TripViolation::ForeignStop {
                stop: stop.id.clone(),
                school: school_id.clone(),
            });
        }
    }
    let load = stops_load(instance, &trip.stops);
    if load != trip.load {
        out.push(TripViolation::LoadMismatch { recorded: trip.load, actual: load });
    }
    if load > instance.capacity() {
        out.push(TripViolation::Capacity { load, capacity: instance.capacity() });
    }
    let tt = trip_travel_time(instance, trip.school, &trip.stops);
    if tt != trip.travel_time {
        out.push(TripViolation::TravelTimeMismatch { recorded: trip.travel_time, actual: tt });
    }
    if let Some(mrt) = config.mrt {
        if tt > mrt {
            out.push(TripViolation::RideTime { travel_time: tt, mrt });
        }
    }
    out
}

/// The trip over exactly `subset` with the smallest leg sum found: exact up to
/// `exact_threshold` stops, nearest neighbour plus 2-opt above.
pub fn optimal_stop_order(
    instance: &Instance,
    school: SchoolId,
    subset: &[StopId],
    exact_threshold: usize,
) -> Result<Trip> {
    if subset.is_empty() {
        return Err(Error::InvalidArgument("cannot order an empty stop subset".into()));
    }
    if let Some(&s) = subset.iter().find(|&&s| instance.stop(s).school != school) {
        return Err(Error::InvalidArgument(format!(
            "stop {} does not belong to school {}",
            instance.stop(s).id,
            instance.school(school).id
        )));
    }
    let (order, _) = order_stops(instance, school, subset, exact_threshold);
    Ok(Trip::new(instance, String::new(), school, order))
}

/// Trips of all schools, grouped by school in school order, and within a
/// school sorted by non-increasing travel time. Trip ids are `<school>-<n>`
/// with `n` counting from 1 in that order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoutingPlan {
    pub trips: Vec<Trip>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanViolation {
    Trip { trip: String, violation: TripViolation },
    StopNotCovered { stop: String },
    StopCoveredTwice { stop: String },
    TripCount { school: String, count: usize, min: usize, max: usize },
}

impl fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanViolation::Trip { trip, violation } => write!(f, "trip {trip}: {violation}"),
            PlanViolation::StopNotCovered { stop } => write!(f, "stop {stop} not visited"),
            PlanViolation::StopCoveredTwice { stop } => write!(f, "stop {stop} visited by more than one trip"),
            PlanViolation::TripCount { school, count, min, max } => {
                write!(f, "school {school}: {count} trips outside [{min}, {max}]")
            }
        }
    }
}

impl RoutingPlan {
    /// Canonicalises order and ids.
    pub fn new(instance: &Instance, mut trips: Vec<Trip>) -> Self {
        trips.sort_by(|a, b| {
            a.school
                .cmp(&b.school)
                .then(b.travel_time.cmp(&a.travel_time))
                .then_with(|| a.stops.cmp(&b.stops))
        });
        let mut counter = 0;
        let mut prev = None;
        for trip in &mut trips {
            if prev != Some(trip.school) {
                counter = 0;
                prev = Some(trip.school);
            }
            counter += 1;
            trip.id = format!("{}-{}", instance.school(trip.school).id, counter);
        }
        Self { trips }
    }

    pub fn len(&self) -> usize {
        self.trips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trips.is_empty()
    }

    pub fn trips_of(&self, school: SchoolId) -> impl Iterator<Item = &Trip> {
        self.trips.iter().filter(move |t| t.school == school)
    }

    pub fn total_travel_time(&self) -> i64 {
        self.trips.iter().map(|t| t.travel_time).sum()
    }

    /// Coverage, per-trip feasibility, and per-school trip-count bounds.
    pub fn validate(&self, instance: &Instance, config: &SolverConfig) -> Vec<PlanViolation> {
        let mut out = Vec::new();
        let mut visits = vec![0usize; instance.stops().len()];
        for trip in &self.trips {
            for violation in validate_trip(trip, config, instance) {
                out.push(PlanViolation::Trip { trip: trip.id.clone(), violation });
            }
            for &s in &trip.stops {
                visits[s] += 1;
            }
        }
        for (s, &n) in visits.iter().enumerate() {
            let stop = instance.stop(s).id.clone();
            match n {
                0 => out.push(PlanViolation::StopNotCovered { stop }),
                1 => {}
                _ => out.push(PlanViolation::StopCoveredTwice { stop }),
            }
        }
        for k in 0..instance.schools().len() {
            let count = self.trips_of(k).count();
            let (min, max) = config.trip_bounds(instance.mnt(k));
            if count < min || count > max {
                out.push(PlanViolation::TripCount {
                    school: instance.school(k).id.clone(),
                    count,
                    min,
                    max,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Node, SchoolSpec, StopSpec};

    fn line_instance(stops: &[(i64, u32)]) -> Instance {
        Instance::new(
            vec![SchoolSpec { id: "A".into(), node: Node::new(0, 0), bell_time: 46_800 }],
            stops
                .iter()
                .enumerate()
                .map(|(i, &(x, students))| StopSpec {
                    id: format!("p{i}"),
                    node: Node::new(x, 0),
                    students,
                    school: "A".into(),
                })
                .collect(),
            Node::new(0, 0),
            66,
            20.0,
            200_000,
        )
        .unwrap()
    }

    #[test]
    fn pickup_examples() {
        assert_eq!(pickup_time(0), 29);
        assert_eq!(pickup_time(10), 48);
        assert_eq!(pickup_time(66), 154);
    }

    #[test]
    fn dropoff_examples() {
        assert_eq!(dropoff_time(0), 19);
        assert_eq!(dropoff_time(10), 45);
        assert_eq!(dropoff_time(5), 32);
    }

    #[test]
    fn stop_service_is_sum_of_rates() {
        assert_eq!(stop_service_time(2), 28);
        assert_eq!(stop_service_time(3), 33); // 32.5 rounds up
        assert_eq!(stop_service_time(10), 64);
    }

    #[test]
    fn travel_time_single_stop() {
        // 600 s leg = 17600 ft at 20 mph.
        let inst = line_instance(&[(17_600, 10)]);
        assert_eq!(trip_travel_time(&inst, 0, &[0]), 600 + 29 + 19 + 45);
        assert_eq!(trip_travel_time(&inst, 0, &[0]), 693);
    }

    #[test]
    fn travel_time_two_stops_half_up_per_stop() {
        let inst = line_instance(&[(8_800, 2), (17_600, 3)]);
        assert_eq!(trip_travel_time(&inst, 0, &[0, 1]), 690);
    }

    #[test]
    fn travel_time_zero_length_legs() {
        let inst = line_instance(&[(0, 1)]);
        // 29 + 19 + 4.5 rounded half-up.
        assert_eq!(trip_travel_time(&inst, 0, &[0]), 29 + 24);
    }

    #[test]
    fn validation_capacity_and_mrt() {
        let inst = line_instance(&[(100, 40), (200, 27)]).with_capacity(67).unwrap();
        let tight = inst.with_capacity(67).unwrap();
        let trip = Trip::new(&tight, "t", 0, vec![0, 1]);
        assert_eq!(trip.load, 67);
        let over = Instance::new(
            tight.school_specs(),
            vec![
                StopSpec { id: "p0".into(), node: Node::new(100, 0), students: 40, school: "A".into() },
                StopSpec { id: "p1".into(), node: Node::new(200, 0), students: 27, school: "A".into() },
            ],
            Node::new(0, 0),
            66,
            20.0,
            200_000,
        )
        .unwrap();
        let v = validate_trip(&trip, &SolverConfig::default(), &over);
        assert_eq!(v, vec![TripViolation::Capacity { load: 67, capacity: 66 }]);

        let trip = Trip::new(&inst, "t", 0, vec![0]);
        let cfg = SolverConfig { mrt: Some(trip.travel_time - 1), ..Default::default() };
        assert_eq!(
            validate_trip(&trip, &cfg, &inst),
            vec![TripViolation::RideTime { travel_time: trip.travel_time, mrt: trip.travel_time - 1 }]
        );
        let cfg = SolverConfig { mrt: Some(trip.travel_time), ..Default::default() };
        assert!(validate_trip(&trip, &cfg, &inst).is_empty());
    }

    #[test]
    fn validation_structural() {
        let inst = line_instance(&[(100, 1), (200, 1)]);
        let mut trip = Trip::new(&inst, "t", 0, vec![0, 1]);
        trip.stops.push(0);
        let v = validate_trip(&trip, &SolverConfig::default(), &inst);
        assert!(v.contains(&TripViolation::DuplicateStop { stop: "p0".into() }));
        assert!(v.iter().any(|x| matches!(x, TripViolation::LoadMismatch { .. })));
        trip.stops.clear();
        assert_eq!(validate_trip(&trip, &SolverConfig::default(), &inst), vec![TripViolation::Empty]);
    }

    #[test]
    fn ordering_collinear_stops_in_geometric_order() {
        let inst = line_instance(&[(30_000, 1), (10_000, 1), (20_000, 1)]);
        let trip = optimal_stop_order(&inst, 0, &[0, 1, 2], 8).unwrap();
        assert_eq!(trip.stops, vec![1, 2, 0]);
        let trip = optimal_stop_order(&inst, 0, &[0, 1, 2], 0).unwrap();
        assert_eq!(trip.stops, vec![1, 2, 0]);
        assert!(optimal_stop_order(&inst, 0, &[], 8).is_err());
        assert_eq!(optimal_stop_order(&inst, 0, &[2], 8).unwrap().stops, vec![2]);
    }

    #[test]
    fn plan_canonical_labels() {
        let inst = line_instance(&[(1_000, 1), (50_000, 1)]);
        let plan = RoutingPlan::new(
            &inst,
            vec![Trip::new(&inst, "", 0, vec![0]), Trip::new(&inst, "", 0, vec![1])],
        );
        assert_eq!(plan.trips[0].stops, vec![1]);
        assert_eq!(plan.trips[0].id, "A-1");
        assert_eq!(plan.trips[1].id, "A-2");
    }
}
