//! Problem data: schools, stops, depot, fleet capacity and speed.
//!
//! All times are integer seconds since midnight and all durations integer
//! seconds. Driving legs are rounded up to whole seconds so compatibility
//! checks never become optimistic through rounding.

mod generate;
mod io;

pub use generate::{generate_instance, GeneratorParams};
pub use io::{instance_from_json, instance_to_json, load_instance, save_instance, InstanceFile};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type SchoolId = usize;
pub type StopId = usize;

pub const FEET_PER_MILE: f64 = 5280.0;
pub const SECONDS_PER_DAY: i64 = 86_400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub x: i64,
    pub y: i64,
}

impl Node {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn squared_distance(&self, other: &Node) -> i128 {
        let dx = (self.x - other.x) as i128;
        let dy = (self.y - other.y) as i128;
        dx * dx + dy * dy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct School {
    pub id: String,
    pub node: Node,
    /// Dismissal time, seconds since midnight.
    pub bell_time: i64,
    pub stops: Vec<StopId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub id: String,
    pub node: Node,
    pub students: u32,
    pub school: SchoolId,
}

/// A location in the instance, used to index the leg table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Place {
    Stop(StopId),
    School(SchoolId),
    Depot,
}

/// Driving time in whole seconds between two points at a constant speed,
/// rounded up.
pub fn leg_duration(a: Node, b: Node, speed_mph: f64) -> i64 {
    let d2 = a.squared_distance(&b);
    if d2 == 0 {
        return 0;
    }
    let feet_per_hour = speed_mph * FEET_PER_MILE;
    let estimate = ((d2 as f64).sqrt() * 3600.0 / feet_per_hour).ceil() as i64;
    if feet_per_hour.fract() != 0.0 || feet_per_hour > 1e15 {
        // No exact integer route; trim float noise from the estimate.
        let exact = (d2 as f64).sqrt() * 3600.0 / feet_per_hour;
        return (exact - 1e-9).ceil().max(1.0) as i64;
    }
    // Smallest n with n * fph >= dist * 3600, i.e. (n * fph)^2 >= d2 * 3600^2.
    let fph = feet_per_hour as i128;
    let rhs = d2 * 3600 * 3600;
    let covers = |n: i64| {
        let lhs = n as i128 * fph;
        lhs * lhs >= rhs
    };
    let mut n = estimate.max(1);
    while n > 1 && covers(n - 1) {
        n -= 1;
    }
    while !covers(n) {
        n += 1;
    }
    n
}

/// Minimum number of trips needed to carry `students` at the given capacity.
pub fn compute_mnt(students: u64, capacity: u32) -> usize {
    students.div_ceil(capacity as u64) as usize
}

#[derive(Debug, Clone)]
struct LegTable {
    n_stops: usize,
    n_schools: usize,
    seconds: Vec<i64>,
}

impl LegTable {
    fn build(stops: &[Stop], schools: &[School], depot: Node, speed_mph: f64) -> Self {
        let nodes: Vec<Node> = stops
            .iter()
            .map(|s| s.node)
            .chain(schools.iter().map(|k| k.node))
            .chain(std::iter::once(depot))
            .collect();
        let n = nodes.len();
        let mut seconds = vec![0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = leg_duration(nodes[i], nodes[j], speed_mph);
                seconds[i * n + j] = d;
                seconds[j * n + i] = d;
            }
        }
        Self {
            n_stops: stops.len(),
            n_schools: schools.len(),
            seconds,
        }
    }

    fn index(&self, place: Place) -> usize {
        match place {
            Place::Stop(s) => s,
            Place::School(k) => self.n_stops + k,
            Place::Depot => self.n_stops + self.n_schools,
        }
    }

    fn get(&self, a: Place, b: Place) -> i64 {
        let n = self.n_stops + self.n_schools + 1;
        self.seconds[self.index(a) * n + self.index(b)]
    }
}

/// A validated problem instance. Immutable once built.
#[derive(Debug, Clone)]
pub struct Instance {
    schools: Vec<School>,
    stops: Vec<Stop>,
    depot: Node,
    capacity: u32,
    speed_mph: f64,
    square_side: i64,
    legs: LegTable,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.schools == other.schools
            && self.stops == other.stops
            && self.depot == other.depot
            && self.capacity == other.capacity
            && self.speed_mph == other.speed_mph
            && self.square_side == other.square_side
    }
}

/// Input record for one school when building an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SchoolSpec {
    pub id: String,
    pub node: Node,
    pub bell_time: i64,
}

/// Input record for one stop when building an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct StopSpec {
    pub id: String,
    pub node: Node,
    pub students: u32,
    pub school: String,
}

impl Instance {
    /// Builds and validates an instance. Stop membership lists of the schools
    /// are derived from each stop's `school` field, in stop order.
    pub fn new(
        schools: Vec<SchoolSpec>,
        stops: Vec<StopSpec>,
        depot: Node,
        capacity: u32,
        speed_mph: f64,
        square_side: i64,
    ) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::invalid("capacity", "must be positive"));
        }
        if !(speed_mph.is_finite() && speed_mph > 0.0) {
            return Err(Error::invalid("speed_mph", "must be a positive number"));
        }
        if square_side <= 0 {
            return Err(Error::invalid("square_side_ft", "must be positive"));
        }
        if schools.is_empty() {
            return Err(Error::invalid("schools", "at least one school is required"));
        }
        let in_square = |n: Node| (0..=square_side).contains(&n.x) && (0..=square_side).contains(&n.y);
        if !in_square(depot) {
            return Err(Error::invalid("depot", "coordinates outside the square"));
        }

        let mut ids: HashMap<&str, String> = HashMap::new();
        let mut school_index: HashMap<&str, SchoolId> = HashMap::new();
        for (k, spec) in schools.iter().enumerate() {
            let field = format!("schools[{k}]");
            if spec.id.is_empty() {
                return Err(Error::invalid(field, "empty id"));
            }
            if ids.insert(&spec.id, field.clone()).is_some() {
                return Err(Error::invalid(field, format!("duplicate id {:?}", spec.id)));
            }
            if !in_square(spec.node) {
                return Err(Error::invalid(field, "coordinates outside the square"));
            }
            if !(0..SECONDS_PER_DAY).contains(&spec.bell_time) {
                return Err(Error::invalid(
                    format!("{field}.bell_time_s"),
                    format!("{} is not a time of day", spec.bell_time),
                ));
            }
            school_index.insert(&spec.id, k);
        }

        let mut members: Vec<Vec<StopId>> = vec![Vec::new(); schools.len()];
        let mut built_stops = Vec::with_capacity(stops.len());
        for (s, spec) in stops.iter().enumerate() {
            let field = format!("stops[{s}]");
            if spec.id.is_empty() {
                return Err(Error::invalid(field, "empty id"));
            }
            if let Some(prev) = ids.get(spec.id.as_str()) {
                return Err(Error::invalid(
                    field,
                    format!("id {:?} already used by {prev}", spec.id),
                ));
            }
            ids.insert(&spec.id, field.clone());
            if !in_square(spec.node) {
                return Err(Error::invalid(field, "coordinates outside the square"));
            }
            if spec.students == 0 {
                return Err(Error::invalid(format!("{field}.students"), "must be at least 1"));
            }
            if spec.students > capacity {
                return Err(Error::invalid(
                    format!("{field}.students"),
                    format!("{} exceeds bus capacity {capacity}", spec.students),
                ));
            }
            let Some(&k) = school_index.get(spec.school.as_str()) else {
                return Err(Error::invalid(
                    format!("{field}.school"),
                    format!("unknown school {:?}", spec.school),
                ));
            };
            members[k].push(s);
            built_stops.push(Stop {
                id: spec.id.clone(),
                node: spec.node,
                students: spec.students,
                school: k,
            });
        }

        let mut built_schools = Vec::with_capacity(schools.len());
        for (k, (spec, stops)) in schools.into_iter().zip(members).enumerate() {
            if stops.is_empty() {
                return Err(Error::invalid(format!("schools[{k}]"), "school has no stops"));
            }
            built_schools.push(School {
                id: spec.id,
                node: spec.node,
                bell_time: spec.bell_time,
                stops,
            });
        }

        let legs = LegTable::build(&built_stops, &built_schools, depot, speed_mph);
        Ok(Self {
            schools: built_schools,
            stops: built_stops,
            depot,
            capacity,
            speed_mph,
            square_side,
            legs,
        })
    }

    pub fn schools(&self) -> &[School] {
        &self.schools
    }

    pub fn stops(&self) -> &[Stop] {
        &self.stops
    }

    pub fn school(&self, k: SchoolId) -> &School {
        &self.schools[k]
    }

    pub fn stop(&self, s: StopId) -> &Stop {
        &self.stops[s]
    }

    pub fn depot(&self) -> Node {
        self.depot
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn speed_mph(&self) -> f64 {
        self.speed_mph
    }

    pub fn square_side(&self) -> i64 {
        self.square_side
    }

    /// Leg duration in seconds between two places, from the precomputed table.
    pub fn leg(&self, a: Place, b: Place) -> i64 {
        self.legs.get(a, b)
    }

    pub fn school_students(&self, k: SchoolId) -> u64 {
        self.schools[k]
            .stops
            .iter()
            .map(|&s| self.stops[s].students as u64)
            .sum()
    }

    pub fn mnt(&self, k: SchoolId) -> usize {
        compute_mnt(self.school_students(k), self.capacity)
    }

    pub fn school_by_id(&self, id: &str) -> Option<SchoolId> {
        self.schools.iter().position(|k| k.id == id)
    }

    pub fn stop_by_id(&self, id: &str) -> Option<StopId> {
        self.stops.iter().position(|s| s.id == id)
    }

    pub(crate) fn school_specs(&self) -> Vec<SchoolSpec> {
        self.schools
            .iter()
            .map(|k| SchoolSpec {
                id: k.id.clone(),
                node: k.node,
                bell_time: k.bell_time,
            })
            .collect()
    }

    pub(crate) fn stop_specs(&self) -> Vec<StopSpec> {
        self.stops
            .iter()
            .map(|s| StopSpec {
                id: s.id.clone(),
                node: s.node,
                students: s.students,
                school: self.schools[s.school].id.clone(),
            })
            .collect()
    }

    /// A copy of this instance with a different bus capacity.
    pub fn with_capacity(&self, capacity: u32) -> Result<Self> {
        Self::new(
            self.school_specs(),
            self.stop_specs(),
            self.depot,
            capacity,
            self.speed_mph,
            self.square_side,
        )
    }
}
