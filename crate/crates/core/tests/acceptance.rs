//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Tolerances and corpus sizes are pinned in the constants below.

mod common;

use std::cell::Cell;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use busroute::compatibility::{is_compatible, is_school_compatible, CompatibilityGraph};
use busroute::decomposition::{
    check_exact_limits, run_algorithm2, run_integrated_exact, run_method, verify_solution, ExactLimits, Method,
    Solution,
};
use busroute::fixtures::{fuzz_instance, merge_tradeoff, tiny_instance};
use busroute::harness::{bench, grid2, sweep, BenchOptions, EXPERIMENT1_GRID, GRID2_DEFAULT, GRID2_MRT, SWEEP_DEFAULT_VALUES};
use busroute::instance::{generate_instance, GeneratorParams, Instance};
use busroute::routing::{exact_enumerate, CompatTarget, RoutingObjective};
use busroute::scheduling::{brute_force_schedule, solve_schedule, verify_schedule, Schedule};
use busroute::trips::{RoutingPlan, Trip};
use busroute::SolverConfig;

use common::{leg_20mph, routing_oracle, schedule_oracle, OracleLimits, OracleObjective};

const SCHEDULER_PLANS: u64 = 200;
const SCHEDULER_MAX_TRIPS: usize = 9;
const SCHEDULER_RUNTIME: Duration = Duration::from_secs(30);
const COMPAT_PAIRS: usize = 10_000;
const TINY_INSTANCES: u64 = 50;
const TINY_MIN_AGREEMENT: f64 = 0.90;
const TINY_RUNTIME: Duration = Duration::from_secs(300);
const ORDERING_SEEDS: u64 = 20;
const ORDERING_SCALE: (usize, usize) = (8, 80);
const FUZZ_CORPUS: u64 = 1000;
const ORACLE_MAX_STOPS: usize = 6;
const ORACLE_RUNTIME: Duration = Duration::from_secs(60);
/// Relative tolerance on objective values rebuilt from the same integer totals.
const OBJECTIVE_RTOL: f64 = 1e-9;
/// Per-school budget for the larger runs; every school converges well inside it.
const BENCH_TIME_LIMIT: Duration = Duration::from_secs(5);

thread_local! {
    static SCHEDULES_CHECKED: Cell<usize> = const { Cell::new(0) };
    static IDENTITY_FAILURES: Cell<usize> = const { Cell::new(0) };
}

/// Records the bus-count identity for a schedule produced anywhere below.
fn check_identity(schedule: &Schedule) {
    SCHEDULES_CHECKED.with(|c| c.set(c.get() + 1));
    let ok = schedule.nob == schedule.trip_count() - schedule.link_count() && schedule.nob == schedule.blocks.len();
    if !ok {
        IDENTITY_FAILURES.with(|c| c.set(c.get() + 1));
    }
}

fn check_solution(solution: &Solution) {
    check_identity(&solution.schedule);
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// A random grouping of every stop into at most `max_trips` trips.
fn random_plan(instance: &Instance, rng: &mut ChaCha8Rng, max_trips: usize) -> RoutingPlan {
    let mut trips = Vec::new();
    for (k, school) in instance.schools().iter().enumerate() {
        let mut stops = school.stops.clone();
        stops.shuffle(rng);
        let mut rest = stops.as_slice();
        while !rest.is_empty() {
            let take = rng.gen_range(1..=rest.len());
            trips.push(Trip::new(instance, "", k, rest[..take].to_vec()));
            rest = &rest[take..];
        }
    }
    while trips.len() > max_trips {
        let last = trips.pop().unwrap();
        if let Some(t) = trips.iter_mut().find(|t| t.school == last.school) {
            let mut stops = t.stops.clone();
            stops.extend(&last.stops);
            *t = Trip::new(instance, "", t.school, stops);
        } else {
            trips.push(last);
            trips.remove(0);
        }
    }
    RoutingPlan::new(instance, trips)
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let config = SolverConfig::default();
    let params = GeneratorParams { square_side: 52_800, ..GeneratorParams::default() };
    let mut mismatches = Vec::new();
    let mut linked = 0;
    for seed in 0..SCHEDULER_PLANS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let schools = rng.gen_range(2..=5);
        let stops = rng.gen_range(schools..=SCHEDULER_MAX_TRIPS);
        let instance = generate_instance(schools, stops, seed, &params).expect("generator");
        let plan = random_plan(&instance, &mut rng, SCHEDULER_MAX_TRIPS);
        let graph = CompatibilityGraph::build(&plan, &instance, config.buffer);
        let fast = solve_schedule(&plan, &graph, &config);
        let brute = brute_force_schedule(&plan, &graph, &config).expect("within brute-force size");
        check_identity(&fast);
        check_identity(&brute);
        let oracle = schedule_oracle(&graph);
        linked += usize::from(fast.link_count() > 0);
        let ok = verify_schedule(&fast, &plan, &graph).is_empty()
            && fast.nob == brute.nob
            && (fast.nob, fast.total_deadhead) == oracle;
        if !ok {
            mismatches.push(seed);
        }
    }
    let elapsed = started.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < SCHEDULER_RUNTIME,
        format!(
            "{SCHEDULER_PLANS} plans, {linked} with links, mismatching seeds {mismatches:?}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = GeneratorParams { square_side: 52_800, ..GeneratorParams::default() };
    let mut checked = 0;
    let mut failures = 0;
    let mut compatible = 0;
    let mut instance_seed = 0;
    while checked < COMPAT_PAIRS {
        let instance = generate_instance(4, 12, instance_seed, &params).expect("generator");
        instance_seed += 1;
        let random_trip = |rng: &mut ChaCha8Rng| {
            let k = rng.gen_range(0..instance.schools().len());
            let mut stops = instance.school(k).stops.clone();
            stops.shuffle(rng);
            stops.truncate(rng.gen_range(1..=stops.len()));
            Trip::new(&instance, "", k, stops)
        };
        for _ in 0..100 {
            let t1 = random_trip(&mut rng);
            let t2 = random_trip(&mut rng);
            let buffer = [0, 300][rng.gen_range(0..2)];
            let pair = is_compatible(&t1, &t2, &instance, buffer);
            let school = is_school_compatible(&t1, t2.school, &instance, buffer);
            let dd = leg_20mph(instance.stop(t1.last_stop()).node, instance.school(t2.school).node);
            let tt = common::travel_time(&instance, t1.school, &t1.stops);
            let direct = instance.school(t1.school).bell_time + tt + dd <= instance.school(t2.school).bell_time + buffer;
            if pair != school || pair != direct {
                failures += 1;
            }
            compatible += usize::from(pair);
            checked += 1;
        }
    }
    outcome(failures == 0, format!("{checked} pairs, {compatible} compatible, {failures} disagreements"))
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let config = SolverConfig::default();
    let limits = ExactLimits { max_stops: 6, max_trips: 8 };
    let mut equal = 0;
    let mut below = Vec::new();
    let mut above = Vec::new();
    let mut errors = Vec::new();
    for seed in 0..TINY_INSTANCES {
        let instance = tiny_instance(seed).expect("tiny instance");
        let heuristic = run_algorithm2(&instance, &config, true);
        let exact = run_integrated_exact(&instance, &config, limits);
        match (heuristic, exact) {
            (Ok(h), Ok(e)) => {
                check_solution(&h);
                check_solution(&e);
                match h.metrics.nob.cmp(&e.metrics.nob) {
                    std::cmp::Ordering::Equal => equal += 1,
                    std::cmp::Ordering::Less => below.push(seed),
                    std::cmp::Ordering::Greater => above.push(seed),
                }
            }
            (h, e) => errors.push(format!("seed {seed}: {:?} / {:?}", h.err(), e.err())),
        }
    }
    let rate = equal as f64 / TINY_INSTANCES as f64;
    let elapsed = started.elapsed();
    outcome(
        rate >= TINY_MIN_AGREEMENT && below.is_empty() && errors.is_empty() && elapsed < TINY_RUNTIME,
        format!(
            "equal {equal}/{TINY_INSTANCES} ({:.0}%), above exact {above:?}, below exact {below:?}, errors {errors:?}, {:.1} s",
            rate * 100.0,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_5() -> Outcome {
    let config = SolverConfig { time_limit_per_subproblem: BENCH_TIME_LIMIT, ..SolverConfig::default() };
    let methods = [Method::Alg2W, Method::Alg1, Method::MinNT, Method::MinN];
    let mut sums = [0usize; 4];
    let mut errors = Vec::new();
    for seed in 0..ORDERING_SEEDS {
        let instance = generate_instance(ORDERING_SCALE.0, ORDERING_SCALE.1, seed, &GeneratorParams::default())
            .expect("generator");
        for (i, &m) in methods.iter().enumerate() {
            match run_method(&instance, &config, m) {
                Ok(s) => {
                    check_solution(&s);
                    sums[i] += s.metrics.nob;
                }
                Err(e) => errors.push(format!("seed {seed} {m}: {e}")),
            }
        }
    }
    let means: Vec<f64> = sums.iter().map(|&s| s as f64 / ORDERING_SEEDS as f64).collect();
    let ordered = means.windows(2).all(|w| w[0] <= w[1]);
    outcome(
        ordered && errors.is_empty(),
        format!(
            "mean nob alg2w {:.2} <= alg1 {:.2} <= minnt {:.2} <= minn {:.2}; errors {errors:?}",
            means[0], means[1], means[2], means[3]
        ),
    )
}

fn criterion_6() -> Outcome {
    let instance = merge_tradeoff();
    let config = SolverConfig::default();
    let plain = run_algorithm2(&instance, &config, false).expect("alg2");
    let adjusted = run_algorithm2(&instance, &config, true).expect("alg2w");
    check_solution(&plain);
    check_solution(&adjusted);
    outcome(
        plain.metrics.nob == 3 && adjusted.metrics.nob == 2,
        format!("alg2 {} buses, alg2w {} buses", plain.metrics.nob, adjusted.metrics.nob),
    )
}

struct CorpusReport {
    solutions: usize,
    skipped_exact: usize,
    violations: Vec<String>,
    utc_checked: usize,
    utc_failures: Vec<String>,
}

/// Criteria 7 and 8 share one pass over the fuzz corpus.
fn corpus_pass() -> CorpusReport {
    let config = SolverConfig::default();
    let mut report = CorpusReport {
        solutions: 0,
        skipped_exact: 0,
        violations: Vec::new(),
        utc_checked: 0,
        utc_failures: Vec::new(),
    };
    for seed in 0..FUZZ_CORPUS {
        let instance = fuzz_instance(seed).expect("fuzz instance");
        for method in Method::ALL {
            if method == Method::Exact && check_exact_limits(&instance, &config, ExactLimits::default()).is_err() {
                report.skipped_exact += 1;
                continue;
            }
            let solution = match run_method(&instance, &config, method) {
                Ok(s) => s,
                Err(e) => {
                    report.violations.push(format!("seed {seed} {method}: {e}"));
                    continue;
                }
            };
            report.solutions += 1;
            check_solution(&solution);
            let violations = verify_solution(&solution, &instance, &config);
            if !violations.is_empty() {
                report.violations.push(format!("seed {seed} {method}: {}", violations[0]));
            }
            if matches!(method, Method::Alg2 | Method::Alg2W) {
                for k in 0..instance.schools().len() {
                    let trips = solution.plan.trips_of(k).count();
                    let assigned = solution.assignments.iter().filter(|a| **a == Some(k)).count();
                    let recorded = solution.utc.as_ref().map_or(usize::MAX, |u| u.consumed[k]);
                    report.utc_checked += 1;
                    if assigned > trips || recorded != assigned {
                        report.utc_failures.push(format!(
                            "seed {seed} {method} school {k}: {assigned} assigned, {recorded} recorded, {trips} trips"
                        ));
                    }
                }
            }
        }
    }
    report
}

fn criterion_9() -> Outcome {
    let started = Instant::now();
    let config = SolverConfig::default();
    let (mut checked, mut infeasible_agree) = (0, 0);
    let mut mismatches = Vec::new();
    for seed in 0..FUZZ_CORPUS {
        let instance = fuzz_instance(seed).expect("fuzz instance");
        let n = instance.schools().len();
        for k in 0..n {
            if instance.school(k).stops.len() > ORACLE_MAX_STOPS {
                continue;
            }
            let others: Vec<usize> = (0..n).filter(|&k2| k2 != k).collect();
            let target = |k2: usize, capacity| CompatTarget {
                school: k2,
                bell_time: instance.school(k2).bell_time,
                capacity,
            };
            let objectives = [
                RoutingObjective::min_nt(&config),
                RoutingObjective::min_tt(&config),
                RoutingObjective::compat_aware(
                    config.alpha_n,
                    config.alpha_c_oa,
                    config.alpha_t,
                    config.alpha_d_oa,
                    others.iter().map(|&k2| target(k2, None)).collect(),
                ),
                RoutingObjective::compat_aware(
                    config.alpha_n,
                    config.alpha_c_ca,
                    config.alpha_t,
                    config.alpha_d,
                    others.iter().map(|&k2| target(k2, Some(instance.mnt(k2).min(2)))).collect(),
                ),
            ];
            let (min_trips, max_trips) = config.trip_bounds(instance.mnt(k));
            let limits = OracleLimits {
                capacity: instance.capacity(),
                mrt: config.mrt,
                min_trips,
                max_trips,
                buffer: config.buffer,
            };
            for (i, objective) in objectives.iter().enumerate() {
                let oracle_objective = OracleObjective {
                    alpha_n: objective.alpha_n,
                    alpha_c: objective.alpha_c,
                    alpha_t: objective.alpha_t,
                    alpha_d: objective.alpha_d,
                    targets: objective.active_targets().iter().map(|t| (t.school, t.capacity)).collect(),
                };
                let expected = routing_oracle(&instance, k, &oracle_objective, &limits);
                let got = exact_enumerate(k, objective, &config, &instance).ok();
                checked += 1;
                match (expected, got) {
                    (None, None) => infeasible_agree += 1,
                    (Some(e), Some(g)) if (e - g.objective_value).abs() <= OBJECTIVE_RTOL * e.abs().max(1.0) => {}
                    (e, g) => mismatches.push(format!(
                        "seed {seed} school {k} objective {i}: oracle {e:?}, exact {:?}",
                        g.map(|g| g.objective_value)
                    )),
                }
            }
        }
    }
    let elapsed = started.elapsed();
    let shown: Vec<&String> = mismatches.iter().take(5).collect();
    outcome(
        mismatches.is_empty() && elapsed < ORACLE_RUNTIME,
        format!(
            "{checked} school objectives ({infeasible_agree} infeasible on both), {} mismatches {shown:?}, {:.1} s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_10() -> Outcome {
    let config = SolverConfig { time_limit_per_subproblem: BENCH_TIME_LIMIT, ..SolverConfig::default() };
    let options = BenchOptions { config: config.clone(), ..BenchOptions::default() };
    let report = bench(&options);
    let expected: Vec<((usize, usize), Method)> = EXPERIMENT1_GRID
        .iter()
        .flat_map(|&g| Method::ALL.iter().map(move |&m| (g, m)))
        .collect();
    let got: Vec<((usize, usize), Method)> =
        report.rows.iter().map(|r| ((r.scenario.schools, r.scenario.stops), r.method)).collect();
    let bench_ok = got == expected && report.rows.iter().all(|r| r.outcome.metrics().is_some() || r.method == Method::Exact);
    for r in &report.rows {
        if let Some(m) = r.outcome.metrics() {
            assert!(m.nob <= m.not);
        }
    }

    let instance = generate_instance(8, 80, 0, &GeneratorParams::default()).expect("generator");
    let sweep_rows = sweep(&instance, &SWEEP_DEFAULT_VALUES, &config, 0).expect("sweep");
    let sweep_ok = sweep_rows.len() == 13 && sweep_rows.iter().all(|r| r.outcome.metrics().is_some());

    let grid_rows = grid2(&instance, &GRID2_DEFAULT, &config, 0);
    let names: Vec<String> = grid_rows.iter().map(|r| r.combo.name()).collect();
    let capped_ok = grid_rows
        .iter()
        .filter(|r| r.combo.mrt)
        .all(|r| r.outcome.metrics().is_some_and(|m| m.max_trip_travel_time <= GRID2_MRT));
    let grid_ok = names
        == ["A0TL15", "A0TL30", "A1TL15", "A1TL30", "A1TL120", "A1TL30MRT", "A2TL30MRT", "A3TL30MRT"]
        && capped_ok;
    outcome(
        bench_ok && sweep_ok && grid_ok,
        format!(
            "bench {} rows ({} skipped), sweep {} rows, grid2 {names:?}, ride cap held: {capped_ok}",
            report.rows.len(),
            report.rows.iter().filter(|r| r.outcome.metrics().is_none()).count(),
            sweep_rows.len()
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let started = Instant::now();
        let out = f();
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1} s]",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail,
            started.elapsed().as_secs_f64()
        );
        results.push((id, name, out));
    };
    run(1, "scheduler exactness", &criterion_1);
    run(3, "compatibility transformation identity", &criterion_3);
    run(4, "integrated oracle agreement", &criterion_4);
    run(5, "method ordering", &criterion_5);
    run(6, "merge trade-off fixture", &criterion_6);
    let corpus = corpus_pass();
    run(7, "constraint cleanliness", &|| {
        outcome(
            corpus.violations.is_empty(),
            format!(
                "{} solutions over {FUZZ_CORPUS} instances ({} exact runs over limits), violations {:?}",
                corpus.solutions,
                corpus.skipped_exact,
                corpus.violations.iter().take(5).collect::<Vec<_>>()
            ),
        )
    });
    run(8, "unassigned trip capacity safety", &|| {
        outcome(
            corpus.utc_failures.is_empty() && corpus.utc_checked > 0,
            format!(
                "{} school checks, failures {:?}",
                corpus.utc_checked,
                corpus.utc_failures.iter().take(5).collect::<Vec<_>>()
            ),
        )
    });
    run(9, "exact routing backend", &criterion_9);
    run(10, "harness shape", &criterion_10);
    let checked = SCHEDULES_CHECKED.with(Cell::get);
    let failures = IDENTITY_FAILURES.with(Cell::get);
    run(2, "bus count identity", &|| {
        outcome(failures == 0 && checked > 0, format!("{checked} schedules, {failures} exceptions"))
    });
    results.sort_by_key(|r| r.0);
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() { String::new() } else { format!("; failing {failed:?}") }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
