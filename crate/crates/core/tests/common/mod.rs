//! Brute-force oracles written independently of the library internals.
//! Each one recomputes from coordinates and raw instance fields.

#![allow(dead_code)]

use busroute::compatibility::CompatibilityGraph;
use busroute::instance::Instance;
use busroute::{Node, SchoolId, StopId};

/// Driving seconds at 20 mph, rounded up: the smallest `t` with
/// `88 t >= 3 d`, i.e. `(88 t)^2 >= 9 d^2` in exact integers.
pub fn leg_20mph(a: Node, b: Node) -> i64 {
    let (dx, dy) = ((a.x - b.x) as i128, (a.y - b.y) as i128);
    let rhs = 9 * (dx * dx + dy * dy);
    let mut t = ((rhs as f64).sqrt() / 88.0) as i64;
    while t > 0 && (88 * (t - 1) as i128).pow(2) >= rhs {
        t -= 1;
    }
    while (88 * t as i128).pow(2) < rhs {
        t += 1;
    }
    t
}

/// Boarding plus alighting seconds of a trip over `stops`.
pub fn service(instance: &Instance, stops: &[StopId]) -> i64 {
    // Per trip 29 s; per stop 19 s plus 4.5 s per student, half-up.
    29 + stops
        .iter()
        .map(|&s| {
            let tenths = 190 + 45 * instance.stop(s).students as i64;
            (tenths + 5) / 10
        })
        .sum::<i64>()
}

pub fn travel_time(instance: &Instance, school: SchoolId, order: &[StopId]) -> i64 {
    let mut at = instance.school(school).node;
    let mut total = 0;
    for &s in order {
        let next = instance.stop(s).node;
        total += leg_20mph(at, next);
        at = next;
    }
    total + service(instance, order)
}

/// Calls `f` with every permutation of `items` in lexicographic order.
pub fn for_each_permutation(items: &[usize], f: &mut impl FnMut(&[usize])) {
    let mut perm = items.to_vec();
    perm.sort_unstable();
    loop {
        f(&perm);
        // Next lexicographic permutation.
        let Some(i) = (1..perm.len()).rev().find(|&i| perm[i - 1] < perm[i]) else {
            return;
        };
        let j = (i..perm.len()).rev().find(|&j| perm[j] > perm[i - 1]).unwrap();
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// Lexicographically first order of minimum travel time, with that time.
pub fn best_order(instance: &Instance, school: SchoolId, stops: &[StopId]) -> (Vec<StopId>, i64) {
    let mut best: Option<(Vec<StopId>, i64)> = None;
    for_each_permutation(stops, &mut |p| {
        let tt = travel_time(instance, school, p);
        if best.as_ref().is_none_or(|(_, b)| tt < *b) {
            best = Some((p.to_vec(), tt));
        }
    });
    best.expect("non-empty stop set")
}

/// Calls `f` with every set partition of `0..n` as block label vectors.
pub fn for_each_partition(n: usize, f: &mut impl FnMut(&[usize], usize)) {
    fn grow(labels: &mut Vec<usize>, n: usize, blocks: usize, f: &mut impl FnMut(&[usize], usize)) {
        if labels.len() == n {
            f(labels, blocks);
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            grow(labels, n, blocks.max(b + 1), f);
            labels.pop();
        }
    }
    grow(&mut Vec::new(), n, 0, f);
}

/// Minimum (bus count, total deadhead) over every set of links in which each
/// trip has at most one successor and one predecessor.
pub fn schedule_oracle(graph: &CompatibilityGraph) -> (usize, i64) {
    let n = graph.trip_count();
    let mut has_pred = vec![false; n];
    let mut next: Vec<Option<(usize, i64)>> = vec![None; n];
    let mut best = (usize::MAX, i64::MAX);
    fn search(
        i: usize,
        graph: &CompatibilityGraph,
        has_pred: &mut Vec<bool>,
        next: &mut Vec<Option<(usize, i64)>>,
        best: &mut (usize, i64),
    ) {
        let n = graph.trip_count();
        if i == n {
            let links = next.iter().flatten().count();
            let mut dd: i64 = next.iter().flatten().map(|&(_, d)| d).sum();
            for t in 0..n {
                if !has_pred[t] {
                    dd += graph.pull_out(t);
                }
                if next[t].is_none() {
                    dd += graph.pull_in(t);
                }
            }
            *best = (*best).min((n - links, dd));
            return;
        }
        search(i + 1, graph, has_pred, next, best);
        for &(j, d) in graph.successors(i) {
            if !has_pred[j] {
                has_pred[j] = true;
                next[i] = Some((j, d));
                search(i + 1, graph, has_pred, next, best);
                next[i] = None;
                has_pred[j] = false;
            }
        }
    }
    search(0, graph, &mut has_pred, &mut next, &mut best);
    best
}

/// Routing objective weights and the schools a trip may feed.
#[derive(Debug, Clone)]
pub struct OracleObjective {
    pub alpha_n: f64,
    pub alpha_c: f64,
    pub alpha_t: f64,
    pub alpha_d: f64,
    /// (school, capacity); `None` is unlimited.
    pub targets: Vec<(SchoolId, Option<usize>)>,
}

pub struct OracleLimits {
    pub capacity: u32,
    pub mrt: Option<i64>,
    pub min_trips: usize,
    pub max_trips: usize,
    pub buffer: i64,
}

/// Best assignment gain for trips ending at `last` with travel times `tt`,
/// by dynamic programming over targets and the set of trips already used.
fn best_assignment_gain(
    instance: &Instance,
    school: SchoolId,
    trips: &[(StopId, i64)],
    objective: &OracleObjective,
    buffer: i64,
) -> f64 {
    let n = trips.len();
    let full = 1usize << n;
    let mut dp = vec![f64::NEG_INFINITY; full];
    dp[0] = 0.0;
    let finish = |(_, tt): (StopId, i64)| instance.school(school).bell_time + tt;
    for &(k2, cap) in &objective.targets {
        let gain: Vec<Option<f64>> = trips
            .iter()
            .map(|&(last, tt)| {
                let dd = leg_20mph(instance.stop(last).node, instance.school(k2).node);
                let ok = finish((last, tt)) + dd <= instance.school(k2).bell_time + buffer;
                let g = objective.alpha_c - objective.alpha_d * dd as f64;
                (ok && g > 0.0).then_some(g)
            })
            .collect();
        let cap = cap.unwrap_or(n);
        let mut next = dp.clone();
        for used in 0..full {
            if dp[used] == f64::NEG_INFINITY {
                continue;
            }
            let free = (full - 1) & !used;
            // Every non-empty subset of the free trips.
            let mut sub = free;
            while sub != 0 {
                if sub.count_ones() as usize <= cap {
                    let total: Option<f64> = (0..n)
                        .filter(|&i| sub & (1 << i) != 0)
                        .map(|i| gain[i])
                        .sum();
                    if let Some(g) = total {
                        let v = dp[used] + g;
                        if v > next[used | sub] {
                            next[used | sub] = v;
                        }
                    }
                }
                sub = (sub - 1) & free;
            }
        }
        dp = next;
    }
    dp.into_iter().fold(0.0, f64::max)
}

/// Minimum routing objective for one school by enumerating every split of
/// its stops into trips and every visiting order. `None` when infeasible.
pub fn routing_oracle(
    instance: &Instance,
    school: SchoolId,
    objective: &OracleObjective,
    limits: &OracleLimits,
) -> Option<f64> {
    let stops = instance.school(school).stops.clone();
    let n = stops.len();
    let mut block_cache: Vec<Option<Option<(StopId, i64)>>> = vec![None; 1 << n];
    let mut block = |mask: usize| -> Option<(StopId, i64)> {
        if let Some(v) = block_cache[mask] {
            return v;
        }
        let members: Vec<StopId> = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| stops[i]).collect();
        let load: u32 = members.iter().map(|&s| instance.stop(s).students).sum();
        let value = if load > limits.capacity {
            None
        } else {
            let (order, tt) = best_order(instance, school, &members);
            match limits.mrt {
                Some(m) if tt > m => None,
                _ => Some((*order.last().unwrap(), tt)),
            }
        };
        block_cache[mask] = Some(value);
        value
    };
    let mut best: Option<f64> = None;
    for_each_partition(n, &mut |labels, blocks| {
        if blocks < limits.min_trips || blocks > limits.max_trips {
            return;
        }
        let mut masks = vec![0usize; blocks];
        for (i, &b) in labels.iter().enumerate() {
            masks[b] |= 1 << i;
        }
        let Some(trips) = masks.iter().map(|&m| block(m)).collect::<Option<Vec<_>>>() else {
            return;
        };
        let tt: i64 = trips.iter().map(|t| t.1).sum();
        let gain = best_assignment_gain(instance, school, &trips, objective, limits.buffer);
        let value = objective.alpha_n * blocks as f64 + objective.alpha_t * tt as f64 - gain;
        if best.is_none_or(|b| value < b) {
            best = Some(value);
        }
    });
    best
}
