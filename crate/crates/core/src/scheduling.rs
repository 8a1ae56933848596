//! Chaining trips into buses.
//!
//! With every trip's start time fixed, choosing a successor for each trip is
//! an assignment problem: a minimum path cover of the compatibility DAG with
//! deadhead costs. It is solved exactly as a min-cost bipartite matching
//! between "trip needs a successor" and "trip needs a predecessor" slots.
//! Each matched pair saves one bus; its cost relative to sending both ends
//! to the depot is `alpha_d * (dd - pull_in(a) - pull_out(b)) - alpha_b`.

use std::fmt;

use crate::compatibility::{CompatibilityGraph, Vertex};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::flow::MinCostFlow;
use crate::trips::RoutingPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub deadhead: i64,
}

/// One bus: depot, trips in order, depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusBlock {
    /// Plan indices of the trips served.
    pub trips: Vec<usize>,
    pub pull_out: i64,
    pub links: Vec<Link>,
    pub pull_in: i64,
}

impl BusBlock {
    pub fn deadhead(&self) -> i64 {
        self.pull_out + self.pull_in + self.links.iter().map(|l| l.deadhead).sum::<i64>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub blocks: Vec<BusBlock>,
    pub nob: usize,
    /// Internal links plus depot pull-outs and pull-ins, seconds.
    pub total_deadhead: i64,
}

impl Schedule {
    /// Decodes chains from a successor map over the trips of `graph`.
    /// `successor[a] = Some(b)` must be a pair in `E`, with no trip chosen twice.
    pub fn from_successors(graph: &CompatibilityGraph, successor: &[Option<usize>]) -> Self {
        let n = graph.trip_count();
        let mut has_pred = vec![false; n];
        for &b in successor.iter().flatten() {
            has_pred[b] = true;
        }
        let mut blocks = Vec::new();
        for head in (0..n).filter(|&t| !has_pred[t]) {
            let mut trips = vec![head];
            let mut links = Vec::new();
            let mut cur = head;
            while let Some(next) = successor[cur] {
                let dd = graph
                    .deadhead(Vertex::Trip(cur), Vertex::Trip(next))
                    .expect("successor pair in E");
                links.push(Link { from: cur, to: next, deadhead: dd });
                trips.push(next);
                cur = next;
            }
            blocks.push(BusBlock {
                trips,
                pull_out: graph.pull_out(head),
                links,
                pull_in: graph.pull_in(cur),
            });
        }
        let total_deadhead = blocks.iter().map(BusBlock::deadhead).sum();
        Self {
            nob: blocks.len(),
            blocks,
            total_deadhead,
        }
    }

    pub fn link_count(&self) -> usize {
        self.blocks.iter().map(|b| b.links.len()).sum()
    }

    pub fn trip_count(&self) -> usize {
        self.blocks.iter().map(|b| b.trips.len()).sum()
    }

    pub fn internal_deadhead(&self) -> i64 {
        self.blocks
            .iter()
            .flat_map(|b| &b.links)
            .map(|l| l.deadhead)
            .sum()
    }

    pub fn depot_deadhead(&self) -> i64 {
        self.blocks.iter().map(|b| b.pull_out + b.pull_in).sum()
    }

    /// `alpha_b * nob + alpha_d * total_deadhead`.
    pub fn cost(&self, config: &SolverConfig) -> f64 {
        config.alpha_b * self.nob as f64 + config.alpha_d * self.total_deadhead as f64
    }
}

/// Optimal chaining of the plan's trips over `graph`.
pub fn solve_schedule(plan: &RoutingPlan, graph: &CompatibilityGraph, config: &SolverConfig) -> Schedule {
    let n = graph.trip_count();
    assert_eq!(plan.len(), n, "graph was built from a different plan");
    let source = 0;
    let sink = 2 * n + 1;
    let mut net = MinCostFlow::new(2 * n + 2);
    for t in 0..n {
        net.add_edge(source, 1 + t, 1, 0.0);
        net.add_edge(1 + n + t, sink, 1, 0.0);
    }
    let mut pairs: Vec<(i64, usize, usize)> = (0..n)
        .flat_map(|a| graph.successors(a).iter().map(move |&(b, dd)| (dd, a, b)))
        .collect();
    pairs.sort_unstable();
    let mut arcs = Vec::with_capacity(pairs.len());
    for (dd, a, b) in pairs {
        let saving = config.alpha_d * (dd - graph.pull_in(a) - graph.pull_out(b)) as f64 - config.alpha_b;
        if saving < 0.0 {
            arcs.push((net.add_edge(1 + a, 1 + n + b, 1, saving), a, b));
        }
    }
    net.min_cost_any_flow(source, sink);
    let mut successor = vec![None; n];
    for (id, a, b) in arcs {
        if net.flow(id) > 0 {
            successor[a] = Some(b);
        }
    }
    Schedule::from_successors(graph, &successor)
}

/// Largest plan accepted by [`brute_force_schedule`].
pub const BRUTE_FORCE_MAX_TRIPS: usize = 9;

/// Exhaustive search over all successor assignments consistent with `E`.
/// Ties on cost keep the first schedule found.
pub fn brute_force_schedule(
    plan: &RoutingPlan,
    graph: &CompatibilityGraph,
    config: &SolverConfig,
) -> Result<Schedule> {
    let n = graph.trip_count();
    if n > BRUTE_FORCE_MAX_TRIPS {
        return Err(Error::SizeLimit {
            what: "trips for brute-force scheduling".into(),
            size: n,
            limit: BRUTE_FORCE_MAX_TRIPS,
        });
    }
    assert_eq!(plan.len(), n, "graph was built from a different plan");

    struct Search<'a> {
        graph: &'a CompatibilityGraph,
        config: &'a SolverConfig,
        successor: Vec<Option<usize>>,
        taken: Vec<bool>,
        best: Option<(f64, Vec<Option<usize>>)>,
    }

    impl Search<'_> {
        fn cost(&self) -> f64 {
            let n = self.successor.len();
            let mut links = 0;
            let mut dd: i64 = 0;
            for a in 0..n {
                match self.successor[a] {
                    Some(b) => {
                        links += 1;
                        dd += self.graph.deadhead(Vertex::Trip(a), Vertex::Trip(b)).unwrap();
                    }
                    None => dd += self.graph.pull_in(a),
                }
                if !self.taken[a] {
                    dd += self.graph.pull_out(a);
                }
            }
            self.config.alpha_b * (n - links) as f64 + self.config.alpha_d * dd as f64
        }

        fn go(&mut self, a: usize) {
            if a == self.successor.len() {
                let c = self.cost();
                if self.best.as_ref().is_none_or(|(b, _)| c < *b) {
                    self.best = Some((c, self.successor.clone()));
                }
                return;
            }
            self.successor[a] = None;
            self.go(a + 1);
            for &(b, _) in self.graph.successors(a) {
                if !self.taken[b] {
                    self.taken[b] = true;
                    self.successor[a] = Some(b);
                    self.go(a + 1);
                    self.taken[b] = false;
                }
            }
            self.successor[a] = None;
        }
    }

    let mut search = Search {
        graph,
        config,
        successor: vec![None; n],
        taken: vec![false; n],
        best: None,
    };
    search.go(0);
    let (_, successor) = search.best.expect("the all-singleton schedule always exists");
    Ok(Schedule::from_successors(graph, &successor))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    EmptyBlock { block: usize },
    UnknownTrip { block: usize, trip: usize },
    TripNotCovered { trip: String },
    TripCoveredTwice { trip: String },
    LinkNotInE { from: String, to: String },
    LinksInconsistent { block: usize },
    DeadheadMismatch { block: usize },
    NobMismatch { recorded: usize, actual: usize },
    TotalDeadheadMismatch { recorded: i64, actual: i64 },
    BusCountIdentity { nob: usize, trips: usize, links: usize },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleViolation::EmptyBlock { block } => write!(f, "block {block} is empty"),
            ScheduleViolation::UnknownTrip { block, trip } => {
                write!(f, "block {block} references unknown trip index {trip}")
            }
            ScheduleViolation::TripNotCovered { trip } => write!(f, "trip {trip} not served by any bus"),
            ScheduleViolation::TripCoveredTwice { trip } => write!(f, "trip {trip} served more than once"),
            ScheduleViolation::LinkNotInE { from, to } => write!(f, "link {from} -> {to} is not compatible"),
            ScheduleViolation::LinksInconsistent { block } => {
                write!(f, "block {block}: links do not match its trip sequence")
            }
            ScheduleViolation::DeadheadMismatch { block } => {
                write!(f, "block {block}: recorded deadheads differ from the pair set")
            }
            ScheduleViolation::NobMismatch { recorded, actual } => {
                write!(f, "recorded bus count {recorded} != {actual} blocks")
            }
            ScheduleViolation::TotalDeadheadMismatch { recorded, actual } => {
                write!(f, "recorded total deadhead {recorded} s != {actual} s")
            }
            ScheduleViolation::BusCountIdentity { nob, trips, links } => {
                write!(f, "bus count {nob} != trips {trips} - links {links}")
            }
        }
    }
}

/// Checks that a schedule covers every trip once, only uses pairs in `E`,
/// and that its recorded totals recompute exactly.
pub fn verify_schedule(
    schedule: &Schedule,
    plan: &RoutingPlan,
    graph: &CompatibilityGraph,
) -> Vec<ScheduleViolation> {
    let mut out = Vec::new();
    let n = plan.len();
    let name = |t: usize| plan.trips.get(t).map_or_else(|| format!("#{t}"), |x| x.id.clone());
    let mut served = vec![0usize; n];
    let mut total_dd = 0;
    for (bi, block) in schedule.blocks.iter().enumerate() {
        if block.trips.is_empty() {
            out.push(ScheduleViolation::EmptyBlock { block: bi });
            continue;
        }
        if let Some(&bad) = block.trips.iter().find(|&&t| t >= n || t >= graph.trip_count()) {
            out.push(ScheduleViolation::UnknownTrip { block: bi, trip: bad });
            continue;
        }
        for &t in &block.trips {
            served[t] += 1;
        }
        let consistent = block.links.len() + 1 == block.trips.len()
            && block
                .links
                .iter()
                .zip(block.trips.windows(2))
                .all(|(l, w)| l.from == w[0] && l.to == w[1]);
        if !consistent {
            out.push(ScheduleViolation::LinksInconsistent { block: bi });
        }
        let mut dd_ok = block.pull_out == graph.pull_out(block.trips[0])
            && block.pull_in == graph.pull_in(*block.trips.last().unwrap());
        for w in block.trips.windows(2) {
            match graph.deadhead(Vertex::Trip(w[0]), Vertex::Trip(w[1])) {
                None => out.push(ScheduleViolation::LinkNotInE { from: name(w[0]), to: name(w[1]) }),
                Some(dd) => {
                    if consistent {
                        let recorded = block.links.iter().find(|l| l.from == w[0]).map(|l| l.deadhead);
                        dd_ok &= recorded == Some(dd);
                    }
                }
            }
        }
        if !dd_ok {
            out.push(ScheduleViolation::DeadheadMismatch { block: bi });
        }
        total_dd += block.deadhead();
    }
    for (t, &count) in served.iter().enumerate() {
        match count {
            0 => out.push(ScheduleViolation::TripNotCovered { trip: name(t) }),
            1 => {}
            _ => out.push(ScheduleViolation::TripCoveredTwice { trip: name(t) }),
        }
    }
    if schedule.nob != schedule.blocks.len() {
        out.push(ScheduleViolation::NobMismatch {
            recorded: schedule.nob,
            actual: schedule.blocks.len(),
        });
    }
    if schedule.total_deadhead != total_dd {
        out.push(ScheduleViolation::TotalDeadheadMismatch {
            recorded: schedule.total_deadhead,
            actual: total_dd,
        });
    }
    let links = schedule.link_count();
    if schedule.nob + links != n {
        out.push(ScheduleViolation::BusCountIdentity {
            nob: schedule.nob,
            trips: n,
            links,
        });
    }
    out
}
