//! Experiment drivers and CSV reports.
//!
//! - `bench`: every method on every (scenario, seed) of a grid, with a `*`
//!   on the lowest bus count per cell row and mean/min/max rows across seeds.
//! - `sweep`: Algorithm 1 over a list of compatibility weights.
//! - `grid2`: the weight-adjusted Algorithm 2 under combinations of extra
//!   trips, time limit and ride-time cap.
//!
//! Cells run on worker threads; rows are sorted before emission so output
//! order never depends on scheduling. Runtime columns are informational.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::config::{Aat, SolverConfig};
use crate::decomposition::{
    check_exact_limits, run_algorithm1, run_algorithm2, run_integrated_exact, run_method, ExactLimits, Method, Metrics,
};
use crate::error::{Error, Result};
use crate::instance::{generate_instance, GeneratorParams, Instance};

/// (schools, stops) rows of the default benchmark grid.
pub const EXPERIMENT1_GRID: [(usize, usize); 8] =
    [(2, 20), (4, 40), (6, 60), (8, 80), (10, 100), (15, 150), (20, 200), (30, 300)];

/// Default compatibility weights for [`sweep`].
pub const SWEEP_DEFAULT_VALUES: [f64; 13] =
    [1.0, 10.0, 100.0, 1e3, 1e4, 2e4, 3e4, 4e4, 5e4, 6e4, 7e4, 8e4, 9e4];

/// Ride-time cap used by the capped grid2 combinations, seconds.
pub const GRID2_MRT: i64 = 40 * 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioSpec {
    pub schools: usize,
    pub stops: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn id(&self) -> String {
        format!("{}x{}", self.schools, self.stops)
    }

    pub fn instance(&self, params: &GeneratorParams) -> Result<Instance> {
        generate_instance(self.schools, self.stops, self.seed, params)
    }
}

/// Outcome of one method on one instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Solved(Metrics),
    Skipped(String),
    Failed(String),
}

impl Outcome {
    pub fn metrics(&self) -> Option<&Metrics> {
        match self {
            Outcome::Solved(m) => Some(m),
            _ => None,
        }
    }

    fn status(&self) -> &'static str {
        match self {
            Outcome::Solved(_) => "ok",
            Outcome::Skipped(_) => "skipped",
            Outcome::Failed(_) => "failed",
        }
    }

    fn note(&self) -> String {
        match self {
            Outcome::Solved(_) => String::new(),
            Outcome::Skipped(s) | Outcome::Failed(s) => s.clone(),
        }
    }
}

/// One (scenario, seed, method) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: ScenarioSpec,
    pub method: Method,
    pub outcome: Outcome,
    /// Lowest bus count among the methods of this (scenario, seed).
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct BenchRecord {
    kind: &'static str,
    scenario: String,
    schools: usize,
    stops: usize,
    seed: Option<u64>,
    method: String,
    status: String,
    nob: Option<String>,
    not: Option<String>,
    tvt_minutes: Option<String>,
    tvt_s: Option<String>,
    internal_deadhead_s: Option<i64>,
    depot_deadhead_s: Option<i64>,
    avg_trip_tt_s: Option<String>,
    max_trip_tt_s: Option<i64>,
    runtime_s: Option<String>,
    best: &'static str,
    note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    /// Cells sorted by scenario grid order, seed, then method column order.
    pub rows: Vec<ReportRow>,
}

fn fmt_f(x: f64) -> String {
    format!("{x:.3}")
}

impl BenchReport {
    fn summary_records(&self) -> Vec<BenchRecord> {
        let mut out = Vec::new();
        let mut keys: Vec<(usize, usize, Method)> = Vec::new();
        for r in &self.rows {
            let key = (r.scenario.schools, r.scenario.stops, r.method);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        for (schools, stops, method) in keys {
            let solved: Vec<&Metrics> = self
                .rows
                .iter()
                .filter(|r| (r.scenario.schools, r.scenario.stops, r.method) == (schools, stops, method))
                .filter_map(|r| r.outcome.metrics())
                .collect();
            if solved.is_empty() {
                continue;
            }
            let nob: Vec<f64> = solved.iter().map(|m| m.nob as f64).collect();
            let not: Vec<f64> = solved.iter().map(|m| m.not as f64).collect();
            let tvt: Vec<f64> = solved.iter().map(|m| m.tvt as f64).collect();
            let rt: Vec<f64> = solved.iter().map(|m| m.runtime.as_secs_f64()).collect();
            type Agg = fn(&[f64]) -> f64;
            let aggs: [(&'static str, Agg); 3] = [
                ("mean", |v| v.iter().sum::<f64>() / v.len() as f64),
                ("min", |v| v.iter().copied().fold(f64::INFINITY, f64::min)),
                ("max", |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            ];
            for (kind, agg) in aggs {
                out.push(BenchRecord {
                    kind,
                    scenario: format!("{schools}x{stops}"),
                    schools,
                    stops,
                    seed: None,
                    method: method.name().to_string(),
                    status: format!("{} of {} solved", solved.len(), self.rows.iter().filter(|r| (r.scenario.schools, r.scenario.stops, r.method) == (schools, stops, method)).count()),
                    nob: Some(fmt_f(agg(&nob))),
                    not: Some(fmt_f(agg(&not))),
                    tvt_minutes: Some(fmt_f(agg(&tvt) / 60.0)),
                    tvt_s: Some(fmt_f(agg(&tvt))),
                    internal_deadhead_s: None,
                    depot_deadhead_s: None,
                    avg_trip_tt_s: None,
                    max_trip_tt_s: None,
                    runtime_s: Some(fmt_f(agg(&rt))),
                    best: "",
                    note: String::new(),
                });
            }
        }
        out
    }

    fn cell_records(&self) -> Vec<BenchRecord> {
        self.rows
            .iter()
            .map(|r| {
                let m = r.outcome.metrics();
                BenchRecord {
                    kind: "cell",
                    scenario: r.scenario.id(),
                    schools: r.scenario.schools,
                    stops: r.scenario.stops,
                    seed: Some(r.scenario.seed),
                    method: r.method.name().to_string(),
                    status: r.outcome.status().to_string(),
                    nob: m.map(|m| m.nob.to_string()),
                    not: m.map(|m| m.not.to_string()),
                    tvt_minutes: m.map(|m| m.tvt_minutes().to_string()),
                    tvt_s: m.map(|m| m.tvt.to_string()),
                    internal_deadhead_s: m.map(|m| m.internal_deadhead),
                    depot_deadhead_s: m.map(|m| m.depot_deadhead),
                    avg_trip_tt_s: m.map(|m| fmt_f(m.avg_trip_travel_time())),
                    max_trip_tt_s: m.map(|m| m.max_trip_travel_time),
                    runtime_s: m.map(|m| fmt_f(m.runtime.as_secs_f64())),
                    best: if r.best { "*" } else { "" },
                    note: r.outcome.note(),
                }
            })
            .collect()
    }

    /// Cell rows followed by mean/min/max rows, with a header.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let records = self.cell_records().into_iter().chain(self.summary_records());
        let mut wrote = false;
        for rec in records {
            writer.serialize(rec)?;
            wrote = true;
        }
        if !wrote {
            writer.write_record(BENCH_HEADER)?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

const BENCH_HEADER: [&str; 18] = [
    "kind",
    "scenario",
    "schools",
    "stops",
    "seed",
    "method",
    "status",
    "nob",
    "not",
    "tvt_minutes",
    "tvt_s",
    "internal_deadhead_s",
    "depot_deadhead_s",
    "avg_trip_tt_s",
    "max_trip_tt_s",
    "runtime_s",
    "best",
    "note",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SolveRecord<'a> {
    scenario: &'a str,
    method: &'static str,
    nob: usize,
    not: usize,
    tvt_minutes: i64,
    tvt_s: i64,
    runtime_s: String,
}

/// Header plus one row describing a single solve.
pub fn write_solve_csv(scenario: &str, metrics: &Metrics, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.serialize(SolveRecord {
        scenario,
        method: metrics.method.name(),
        nob: metrics.nob,
        not: metrics.not,
        tvt_minutes: metrics.tvt_minutes(),
        tvt_s: metrics.tvt,
        runtime_s: fmt_f(metrics.runtime.as_secs_f64()),
    })?;
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub grid: Vec<(usize, usize)>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    pub config: SolverConfig,
    pub params: GeneratorParams,
    pub exact_limits: ExactLimits,
    /// Worker threads; 0 means one per available core.
    pub threads: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            grid: EXPERIMENT1_GRID.to_vec(),
            methods: Method::ALL.to_vec(),
            seeds: vec![0],
            config: SolverConfig::default(),
            params: GeneratorParams::default(),
            exact_limits: ExactLimits::default(),
            threads: 0,
        }
    }
}

/// Runs `f` over `0..n` on worker threads and returns results by index.
fn parallel_map<T: Send>(n: usize, threads: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let workers = match threads {
        0 => std::thread::available_parallelism().map_or(1, |p| p.get()),
        t => t,
    }
    .min(n.max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let value = f(i);
                results.lock().expect("no worker panicked")[i] = Some(value);
            });
        }
    });
    results
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|v| v.expect("every index computed"))
        .collect()
}

fn run_cell(instance: &Instance, method: Method, config: &SolverConfig, limits: ExactLimits) -> Outcome {
    if method == Method::Exact {
        if let Err(e) = check_exact_limits(instance, config, limits) {
            return Outcome::Skipped(e.to_string());
        }
        return match run_integrated_exact(instance, config, limits) {
            Ok(s) => Outcome::Solved(s.metrics),
            Err(e) => Outcome::Failed(e.to_string()),
        };
    }
    match run_method(instance, config, method) {
        Ok(s) => Outcome::Solved(s.metrics),
        Err(e) => Outcome::Failed(e.to_string()),
    }
}

/// Every method on every (scenario, seed); failures become cells.
pub fn bench(options: &BenchOptions) -> BenchReport {
    let scenarios: Vec<ScenarioSpec> = options
        .grid
        .iter()
        .flat_map(|&(schools, stops)| options.seeds.iter().map(move |&seed| ScenarioSpec { schools, stops, seed }))
        .collect();
    let instances: Vec<std::result::Result<Instance, String>> = scenarios
        .iter()
        .map(|s| s.instance(&options.params).map_err(|e| e.to_string()))
        .collect();
    let cells: Vec<(usize, Method)> = (0..scenarios.len())
        .flat_map(|i| options.methods.iter().map(move |&m| (i, m)))
        .collect();
    let outcomes = parallel_map(cells.len(), options.threads, |c| {
        let (i, method) = cells[c];
        match &instances[i] {
            Ok(inst) => run_cell(inst, method, &options.config, options.exact_limits),
            Err(e) => Outcome::Failed(format!("instance generation: {e}")),
        }
    });
    let mut rows: Vec<ReportRow> = cells
        .iter()
        .zip(outcomes)
        .map(|(&(i, method), outcome)| ReportRow {
            scenario: scenarios[i],
            method,
            outcome,
            best: false,
        })
        .collect();
    for &scenario in &scenarios {
        let best = rows
            .iter()
            .filter(|r| r.scenario == scenario)
            .filter_map(|r| r.outcome.metrics().map(|m| m.nob))
            .min();
        for r in rows.iter_mut().filter(|r| r.scenario == scenario) {
            r.best = best.is_some() && r.outcome.metrics().map(|m| m.nob) == best;
        }
    }
    let grid_pos = |r: &ReportRow| {
        options
            .grid
            .iter()
            .position(|&g| g == (r.scenario.schools, r.scenario.stops))
            .unwrap_or(usize::MAX)
    };
    let column = |m: Method| Method::ALL.iter().position(|&x| x == m).unwrap_or(usize::MAX);
    rows.sort_by_key(|r| (grid_pos(r), r.scenario.seed, column(r.method)));
    BenchReport { rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha_c_oa: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SweepRecord {
    alpha_c_oa: f64,
    status: &'static str,
    nob: Option<usize>,
    not: Option<usize>,
    tvt_minutes: Option<i64>,
    tvt_s: Option<i64>,
    runtime_s: Option<String>,
    note: String,
}

/// Algorithm 1 per compatibility weight, with the per-trip, travel-time
/// and deadhead weights fixed at 1e5, 1 and 0.5.
pub fn sweep(instance: &Instance, values: &[f64], base: &SolverConfig, threads: usize) -> Result<Vec<SweepRow>> {
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidArgument(format!("sweep weights must be non-negative, got {v}")));
    }
    let outcomes = parallel_map(values.len(), threads, |i| {
        let config = SolverConfig {
            alpha_n: 1e5,
            alpha_t: 1.0,
            alpha_d: 0.5,
            alpha_c_oa: values[i],
            ..base.clone()
        };
        match run_algorithm1(instance, &config) {
            Ok(s) => Outcome::Solved(s.metrics),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    });
    Ok(values
        .iter()
        .zip(outcomes)
        .map(|(&alpha_c_oa, outcome)| SweepRow { alpha_c_oa, outcome })
        .collect())
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record(["alpha_c_oa", "status", "nob", "not", "tvt_minutes", "tvt_s", "runtime_s", "note"])?;
    }
    for r in rows {
        let m = r.outcome.metrics();
        writer.serialize(SweepRecord {
            alpha_c_oa: r.alpha_c_oa,
            status: r.outcome.status(),
            nob: m.map(|m| m.nob),
            not: m.map(|m| m.not),
            tvt_minutes: m.map(|m| m.tvt_minutes()),
            tvt_s: m.map(|m| m.tvt),
            runtime_s: m.map(|m| fmt_f(m.runtime.as_secs_f64())),
            note: r.outcome.note(),
        })?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One grid2 configuration: extra trips per school, per-school time limit
/// in seconds, and whether the 40-minute ride cap applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2Combo {
    pub aat: usize,
    pub time_limit_s: u64,
    pub mrt: bool,
}

impl Grid2Combo {
    pub fn name(&self) -> String {
        format!("A{}TL{}{}", self.aat, self.time_limit_s, if self.mrt { "MRT" } else { "" })
    }

    pub fn config(&self, base: &SolverConfig) -> SolverConfig {
        SolverConfig {
            aat: Aat::Fixed(self.aat),
            time_limit_per_subproblem: Duration::from_secs(self.time_limit_s),
            mrt: self.mrt.then_some(GRID2_MRT),
            ..base.clone()
        }
    }
}

pub const GRID2_DEFAULT: [Grid2Combo; 8] = [
    Grid2Combo { aat: 0, time_limit_s: 15, mrt: false },
    Grid2Combo { aat: 0, time_limit_s: 30, mrt: false },
    Grid2Combo { aat: 1, time_limit_s: 15, mrt: false },
    Grid2Combo { aat: 1, time_limit_s: 30, mrt: false },
    Grid2Combo { aat: 1, time_limit_s: 120, mrt: false },
    Grid2Combo { aat: 1, time_limit_s: 30, mrt: true },
    Grid2Combo { aat: 2, time_limit_s: 30, mrt: true },
    Grid2Combo { aat: 3, time_limit_s: 30, mrt: true },
];

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2Row {
    pub combo: Grid2Combo,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct Grid2Record {
    combo: String,
    aat: usize,
    time_limit_s: u64,
    mrt_s: Option<i64>,
    status: &'static str,
    nob: Option<usize>,
    not: Option<usize>,
    avg_tt_minutes: Option<String>,
    max_tt_minutes: Option<String>,
    max_tt_s: Option<i64>,
    tvt_minutes: Option<i64>,
    runtime_s: Option<String>,
    note: String,
}

/// The weight-adjusted Algorithm 2 under each combination.
pub fn grid2(instance: &Instance, combos: &[Grid2Combo], base: &SolverConfig, threads: usize) -> Vec<Grid2Row> {
    let outcomes = parallel_map(combos.len(), threads, |i| {
        let started = Instant::now();
        match run_algorithm2(instance, &combos[i].config(base), true) {
            Ok(s) => Outcome::Solved(Metrics { runtime: started.elapsed(), ..s.metrics }),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    });
    combos
        .iter()
        .zip(outcomes)
        .map(|(&combo, outcome)| Grid2Row { combo, outcome })
        .collect()
}

pub fn write_grid2_csv(rows: &[Grid2Row], out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in rows {
        let m = r.outcome.metrics();
        writer.serialize(Grid2Record {
            combo: r.combo.name(),
            aat: r.combo.aat,
            time_limit_s: r.combo.time_limit_s,
            mrt_s: r.combo.mrt.then_some(GRID2_MRT),
            status: r.outcome.status(),
            nob: m.map(|m| m.nob),
            not: m.map(|m| m.not),
            avg_tt_minutes: m.map(|m| fmt_f(m.avg_trip_travel_time() / 60.0)),
            max_tt_minutes: m.map(|m| fmt_f(m.max_trip_travel_time as f64 / 60.0)),
            max_tt_s: m.map(|m| m.max_trip_travel_time),
            tvt_minutes: m.map(|m| m.tvt_minutes()),
            runtime_s: m.map(|m| fmt_f(m.runtime.as_secs_f64())),
            note: r.outcome.note(),
        })?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
