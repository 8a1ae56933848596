//! Deadheads and compatibility between trips.
//!
//! A trip departs its school at the bell time. An ordered pair `(t1, t2)` is
//! compatible when `t1` can finish, drive empty to `t2`'s school and arrive
//! no later than `t2`'s bell (plus an optional buffer). Because the successor
//! always starts at its school, trip-to-trip compatibility depends on the
//! successor only through its school: `t1 -> t2` is compatible exactly when
//! `t1` is compatible with the school of `t2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Instance, Place, SchoolId};
use crate::trips::{RoutingPlan, Trip};

/// Empty drive from the end of `t1` to the school of `t2`.
pub fn deadhead(t1: &Trip, t2: &Trip, instance: &Instance) -> i64 {
    deadhead_to_school(t1, t2.school, instance)
}

/// Empty drive from the end of `t` to school `k`.
pub fn deadhead_to_school(t: &Trip, k: SchoolId, instance: &Instance) -> i64 {
    instance.leg(Place::Stop(t.last_stop()), Place::School(k))
}

/// Depot to the trip's school.
pub fn pull_out(t: &Trip, instance: &Instance) -> i64 {
    instance.leg(Place::Depot, Place::School(t.school))
}

/// End of the trip back to the depot.
pub fn pull_in(t: &Trip, instance: &Instance) -> i64 {
    instance.leg(Place::Stop(t.last_stop()), Place::Depot)
}

/// Time at which `t` finishes, assuming it departs at its school's bell.
pub fn finish_time(t: &Trip, instance: &Instance) -> i64 {
    instance.school(t.school).bell_time + t.travel_time
}

pub fn is_compatible(t1: &Trip, t2: &Trip, instance: &Instance, buffer: i64) -> bool {
    finish_time(t1, instance) + deadhead(t1, t2, instance)
        <= instance.school(t2.school).bell_time + buffer
}

pub fn is_school_compatible(t: &Trip, k: SchoolId, instance: &Instance, buffer: i64) -> bool {
    finish_time(t, instance) + deadhead_to_school(t, k, instance) <= instance.school(k).bell_time + buffer
}

/// Endpoint of a pair in `E`: a real trip (by plan index) or a depot pseudo-trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    /// Start depot trip.
    Start,
    Trip(usize),
    /// End depot trip.
    End,
}

/// The compatible-pair set `E` over the active trips of a plan plus the depot
/// pseudo-trips, with deadheads on every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityGraph {
    successors: Vec<Vec<(usize, i64)>>,
    pull_out: Vec<i64>,
    pull_in: Vec<i64>,
}

#[derive(Debug, Serialize)]
struct EdgeRecord {
    from: String,
    to: String,
    dd_s: i64,
}

impl CompatibilityGraph {
    /// Builds `E` for the trips of `plan`. Every active trip gets a start-depot
    /// predecessor and an end-depot successor. Internal pairs must be
    /// compatible and go forward in (bell time, plan index) order, which keeps
    /// the internal graph acyclic even with a positive buffer; with a zero
    /// buffer compatibility already implies a strictly later bell.
    pub fn build(plan: &RoutingPlan, instance: &Instance, buffer: i64) -> Self {
        let trips = &plan.trips;
        let key = |i: usize| (instance.school(trips[i].school).bell_time, i);
        let successors = (0..trips.len())
            .map(|i| {
                (0..trips.len())
                    .filter(|&j| j != i && key(i) < key(j))
                    .filter(|&j| is_compatible(&trips[i], &trips[j], instance, buffer))
                    .map(|j| (j, deadhead(&trips[i], &trips[j], instance)))
                    .collect()
            })
            .collect();
        Self {
            successors,
            pull_out: trips.iter().map(|t| pull_out(t, instance)).collect(),
            pull_in: trips.iter().map(|t| pull_in(t, instance)).collect(),
        }
    }

    /// Builds a graph from explicit parts. Internal pairs must form a DAG.
    pub fn from_parts(pull_out: Vec<i64>, pull_in: Vec<i64>, internal: &[(usize, usize, i64)]) -> Result<Self> {
        let n = pull_out.len();
        if pull_in.len() != n {
            return Err(Error::InvalidArgument("pull_out and pull_in lengths differ".into()));
        }
        let mut successors: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for &(a, b, dd) in internal {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidArgument(format!("bad pair ({a}, {b})")));
            }
            if successors[a].iter().any(|&(x, _)| x == b) {
                return Err(Error::InvalidArgument(format!("duplicate pair ({a}, {b})")));
            }
            successors[a].push((b, dd));
        }
        for list in &mut successors {
            list.sort_unstable();
        }
        let graph = Self { successors, pull_out, pull_in };
        if !graph.is_acyclic() {
            return Err(Error::InvalidArgument("internal pairs contain a cycle".into()));
        }
        Ok(graph)
    }

    fn is_acyclic(&self) -> bool {
        let n = self.trip_count();
        let mut indegree = vec![0usize; n];
        for list in &self.successors {
            for &(b, _) in list {
                indegree[b] += 1;
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(a) = ready.pop() {
            seen += 1;
            for &(b, _) in &self.successors[a] {
                indegree[b] -= 1;
                if indegree[b] == 0 {
                    ready.push(b);
                }
            }
        }
        seen == n
    }

    pub fn trip_count(&self) -> usize {
        self.pull_out.len()
    }

    /// Internal successors of trip `t` with deadheads, sorted by index.
    pub fn successors(&self, t: usize) -> &[(usize, i64)] {
        &self.successors[t]
    }

    pub fn pull_out(&self, t: usize) -> i64 {
        self.pull_out[t]
    }

    pub fn pull_in(&self, t: usize) -> i64 {
        self.pull_in[t]
    }

    /// Deadhead of the pair if it is in `E`.
    pub fn deadhead(&self, from: Vertex, to: Vertex) -> Option<i64> {
        match (from, to) {
            (Vertex::Start, Vertex::Trip(t)) if t < self.trip_count() => Some(self.pull_out[t]),
            (Vertex::Trip(t), Vertex::End) if t < self.trip_count() => Some(self.pull_in[t]),
            (Vertex::Trip(a), Vertex::Trip(b)) if a < self.trip_count() => self.successors[a]
                .binary_search_by_key(&b, |&(x, _)| x)
                .ok()
                .map(|i| self.successors[a][i].1),
            _ => None,
        }
    }

    pub fn contains(&self, from: Vertex, to: Vertex) -> bool {
        self.deadhead(from, to).is_some()
    }

    pub fn internal_pair_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Every pair in `E` with its deadhead.
    pub fn pairs(&self) -> Vec<(Vertex, Vertex, i64)> {
        let n = self.trip_count();
        let mut out = Vec::with_capacity(2 * n + self.internal_pair_count());
        for t in 0..n {
            out.push((Vertex::Start, Vertex::Trip(t), self.pull_out[t]));
        }
        for (a, list) in self.successors.iter().enumerate() {
            for &(b, dd) in list {
                out.push((Vertex::Trip(a), Vertex::Trip(b), dd));
            }
        }
        for t in 0..n {
            out.push((Vertex::Trip(t), Vertex::End, self.pull_in[t]));
        }
        out
    }

    /// Edge list as JSON, naming trips by their plan ids.
    pub fn to_json(&self, plan: &RoutingPlan) -> String {
        let name = |v: Vertex| match v {
            Vertex::Start => "SDT".to_string(),
            Vertex::End => "EDT".to_string(),
            Vertex::Trip(t) => plan.trips[t].id.clone(),
        };
        let edges: Vec<EdgeRecord> = self
            .pairs()
            .into_iter()
            .map(|(a, b, dd)| EdgeRecord { from: name(a), to: name(b), dd_s: dd })
            .collect();
        serde_json::to_string_pretty(&edges).expect("edge list serializes")
    }
}
