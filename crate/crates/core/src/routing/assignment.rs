//! Optimal trip-to-target assignment for a fixed set of trips.
//!
//! Assigning trip `t` to target `k` earns `alpha_c - alpha_d * dd(t, k)` when
//! `t` can reach `k` before its bell. Each trip takes at most one target and
//! each target at most its capacity, so the best assignment is a maximum
//! weight b-matching, solved as a min-cost flow.

use crate::compatibility::{deadhead_to_school, is_school_compatible};
use crate::flow::MinCostFlow;
use crate::instance::{Instance, SchoolId};
use crate::trips::Trip;

use super::RoutingObjective;

/// Returns the target per trip (parallel to `trips`) and the summed deadhead
/// of the assigned trips to their targets.
pub fn assign_targets(
    trips: &[Trip],
    objective: &RoutingObjective,
    instance: &Instance,
    buffer: i64,
) -> (Vec<Option<SchoolId>>, i64) {
    let targets = objective.active_targets();
    let mut result = vec![None; trips.len()];
    if targets.is_empty() || trips.is_empty() {
        return (result, 0);
    }
    let n = trips.len();
    let source = 0;
    let sink = n + targets.len() + 1;
    let mut net = MinCostFlow::new(sink + 1);
    for i in 0..n {
        net.add_edge(source, 1 + i, 1, 0.0);
    }
    for (j, target) in targets.iter().enumerate() {
        let cap = target.capacity.unwrap_or(n).min(n);
        if cap > 0 {
            net.add_edge(1 + n + j, sink, cap as i64, 0.0);
        }
    }
    let mut arcs = Vec::new();
    for (i, trip) in trips.iter().enumerate() {
        for (j, target) in targets.iter().enumerate() {
            if target.capacity == Some(0) || !is_school_compatible(trip, target.school, instance, buffer) {
                continue;
            }
            let dd = deadhead_to_school(trip, target.school, instance);
            let gain = objective.alpha_c - objective.alpha_d * dd as f64;
            if gain > 0.0 {
                arcs.push((net.add_edge(1 + i, 1 + n + j, 1, -gain), i, target.school, dd));
            }
        }
    }
    if arcs.is_empty() {
        return (result, 0);
    }
    net.min_cost_any_flow(source, sink);
    let mut total_dd = 0;
    for (id, i, school, dd) in arcs {
        if net.flow(id) > 0 {
            result[i] = Some(school);
            total_dd += dd;
        }
    }
    (result, total_dd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Node, SchoolSpec, StopSpec};
    use crate::routing::CompatTarget;

    /// School A (bell 40000) with three one-stop trips; schools B and C later.
    fn setup() -> (Instance, Vec<Trip>) {
        let inst = Instance::new(
            vec![
                SchoolSpec { id: "A".into(), node: Node::new(0, 0), bell_time: 40_000 },
                SchoolSpec { id: "B".into(), node: Node::new(5280, 0), bell_time: 45_000 },
                SchoolSpec { id: "C".into(), node: Node::new(0, 5280), bell_time: 45_000 },
            ],
            (0..3)
                .map(|i| StopSpec {
                    id: format!("p{i}"),
                    node: Node::new(1000 * (i + 1), 0),
                    students: 5,
                    school: "A".into(),
                })
                .chain(["B", "C"].map(|k| StopSpec {
                    id: format!("q{k}"),
                    node: Node::new(9000, 9000),
                    students: 5,
                    school: k.into(),
                }))
                .collect(),
            Node::new(0, 0),
            66,
            20.0,
            105_600,
        )
        .unwrap();
        let trips = (0..3).map(|i| Trip::new(&inst, "", 0, vec![i])).collect();
        (inst, trips)
    }

    fn objective(targets: Vec<CompatTarget>) -> RoutingObjective {
        RoutingObjective::compat_aware(1e5, 1e5, 1.0, 0.5, targets)
    }

    #[test]
    fn respects_target_capacity() {
        let (inst, trips) = setup();
        let obj = objective(vec![
            CompatTarget { school: 1, bell_time: 45_000, capacity: Some(1) },
            CompatTarget { school: 2, bell_time: 45_000, capacity: Some(1) },
        ]);
        let (a, _) = assign_targets(&trips, &obj, &inst, 0);
        assert_eq!(a.iter().filter(|x| **x == Some(1)).count(), 1);
        assert_eq!(a.iter().filter(|x| **x == Some(2)).count(), 1);
    }

    #[test]
    fn unlimited_target_takes_everything() {
        let (inst, trips) = setup();
        let obj = objective(vec![CompatTarget { school: 1, bell_time: 45_000, capacity: None }]);
        let (a, dd) = assign_targets(&trips, &obj, &inst, 0);
        assert!(a.iter().all(|x| *x == Some(1)));
        let expected: i64 = trips.iter().map(|t| deadhead_to_school(t, 1, &inst)).sum();
        assert_eq!(dd, expected);
    }

    #[test]
    fn prefers_smaller_deadhead_when_capacity_binds() {
        let (inst, trips) = setup();
        let obj = objective(vec![CompatTarget { school: 1, bell_time: 45_000, capacity: Some(1) }]);
        let (a, _) = assign_targets(&trips, &obj, &inst, 0);
        // Stop p2 at x=3000 is closest to B at x=5280.
        assert_eq!(a, vec![None, None, Some(1)]);
    }

    #[test]
    fn zero_capacity_or_baseline_assigns_nothing() {
        let (inst, trips) = setup();
        let obj = objective(vec![CompatTarget { school: 1, bell_time: 45_000, capacity: Some(0) }]);
        assert!(assign_targets(&trips, &obj, &inst, 0).0.iter().all(Option::is_none));
        let baseline = RoutingObjective::min_nt(&crate::SolverConfig::default());
        assert!(assign_targets(&trips, &baseline, &inst, 0).0.iter().all(Option::is_none));
    }
}
