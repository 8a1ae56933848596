//! `busroute`: generate instances, solve them, and run experiment grids.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use busroute::decomposition::{run_method, verify_solution, Method};
use busroute::harness::{
    bench, grid2, sweep, write_grid2_csv, write_solve_csv, write_sweep_csv, BenchOptions, EXPERIMENT1_GRID,
    GRID2_DEFAULT, SWEEP_DEFAULT_VALUES,
};
use busroute::instance::{generate_instance, load_instance, save_instance, GeneratorParams};
use busroute::solution_io::{load_solution, save_solution};
use busroute::{Aat, SolverConfig};

#[derive(Parser, Debug)]
#[command(name = "busroute", version, about = "Multi-school bus routing and scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random instance.
    Gen {
        #[arg(long)]
        schools: usize,
        #[arg(long)]
        stops: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        gen: GenArgs,
    },
    /// Solve an instance with one method.
    Solve {
        #[arg(long, value_parser = parse_method)]
        method: Method,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// One-row CSV report; printed to stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run methods over a grid of generated scenarios.
    Bench {
        /// Comma-separated `SCHOOLSxSTOPS` rows; defaults to the standard grid.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<GridList>,
        /// Comma-separated method names; an empty string runs nothing.
        #[arg(long, value_parser = parse_methods)]
        methods: Option<MethodList>,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Algorithm 1 over a list of compatibility weights.
    Sweep {
        #[arg(long = "in")]
        input: PathBuf,
        /// Comma-separated weights; defaults to the standard 13 values.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Weight-adjusted Algorithm 2 over trip, time-limit and ride-cap combinations.
    Grid2 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Check a solution file against its instance.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 66)]
    capacity: u32,
    #[arg(long, default_value_t = 20.0)]
    speed_mph: f64,
}

impl GenArgs {
    fn params(&self) -> GeneratorParams {
        GeneratorParams {
            capacity: self.capacity,
            speed_mph: self.speed_mph,
            ..GeneratorParams::default()
        }
    }
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// Maximum ride time in minutes, 0 disables.
    #[arg(long, default_value_t = 90)]
    mrt_min: i64,
    /// Extra trips per school: "mnt" or a count.
    #[arg(long, default_value = "mnt")]
    aat: Aat,
    #[arg(long, default_value_t = 0)]
    buffer_s: i64,
    /// Heuristic budget per single-school solve.
    #[arg(long, default_value_t = 30)]
    time_limit_s: u64,
    #[arg(long, default_value_t = 1e5)]
    alpha_b: f64,
    #[arg(long, default_value_t = 1e5)]
    alpha_n: f64,
    #[arg(long, default_value_t = 1e5)]
    alpha_c: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_t: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha_d: f64,
    #[arg(long, default_value_t = 5e4)]
    alpha_c_oa: f64,
    #[arg(long, default_value_t = 9e4)]
    alpha_c_ca: f64,
}

impl ConfigArgs {
    fn config(&self) -> anyhow::Result<SolverConfig> {
        if self.mrt_min < 0 {
            bail!("--mrt-min must be non-negative, got {}", self.mrt_min);
        }
        let config = SolverConfig {
            alpha_b: self.alpha_b,
            alpha_n: self.alpha_n,
            alpha_c: self.alpha_c,
            alpha_t: self.alpha_t,
            alpha_d: self.alpha_d,
            alpha_c_oa: self.alpha_c_oa,
            alpha_c_ca: self.alpha_c_ca,
            mrt: (self.mrt_min > 0).then_some(self.mrt_min * 60),
            aat: self.aat,
            buffer: self.buffer_s,
            time_limit_per_subproblem: Duration::from_secs(self.time_limit_s),
            ..SolverConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: busroute::Error| e.to_string())
}

#[derive(Debug, Clone)]
struct MethodList(Vec<Method>);

#[derive(Debug, Clone)]
struct GridList(Vec<(usize, usize)>);

fn parse_methods(s: &str) -> Result<MethodList, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_method)
        .collect::<Result<_, _>>()
        .map(MethodList)
}

fn parse_grid(s: &str) -> Result<GridList, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|row| {
            let (a, b) = row
                .split_once('x')
                .ok_or_else(|| format!("grid row {row:?} is not SCHOOLSxSTOPS"))?;
            let parse = |v: &str| v.parse::<usize>().map_err(|e| format!("grid row {row:?}: {e}"));
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<_, _>>()
        .map(GridList)
}

/// File when given, stdout otherwise.
fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Gen { schools, stops, out, gen } => {
            let instance = generate_instance(schools, stops, gen.seed, &gen.params())?;
            save_instance(&instance, &out)?;
        }
        Command::Solve { method, input, out, report, config } => {
            let instance = load_instance(&input)?;
            let config = config.config()?;
            let solution = run_method(&instance, &config, method)?;
            save_solution(&solution, &instance, &out)?;
            let label = input.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            write_solve_csv(&label, &solution.metrics, output(report.as_deref())?)?;
        }
        Command::Bench { grid, methods, seeds, threads, out, gen, config } => {
            let options = BenchOptions {
                grid: grid.map_or_else(|| EXPERIMENT1_GRID.to_vec(), |g| g.0),
                methods: methods.map_or_else(|| Method::ALL.to_vec(), |m| m.0),
                seeds: (gen.seed..gen.seed + seeds).collect(),
                config: SolverConfig { seed: gen.seed, ..config.config()? },
                params: gen.params(),
                threads,
                ..BenchOptions::default()
            };
            bench(&options).write_csv(output(out.as_deref())?)?;
        }
        Command::Sweep { input, values, threads, out, config } => {
            let instance = load_instance(&input)?;
            let values = values.unwrap_or_else(|| SWEEP_DEFAULT_VALUES.to_vec());
            let rows = sweep(&instance, &values, &config.config()?, threads)?;
            write_sweep_csv(&rows, output(out.as_deref())?)?;
        }
        Command::Grid2 { input, threads, out, config } => {
            let instance = load_instance(&input)?;
            let rows = grid2(&instance, &GRID2_DEFAULT, &config.config()?, threads);
            write_grid2_csv(&rows, output(out.as_deref())?)?;
        }
        Command::Verify { input, solution, config } => {
            let instance = load_instance(&input)?;
            let solution = load_solution(&solution, &instance)?;
            let violations = verify_solution(&solution, &instance, &config.config()?);
            if violations.is_empty() {
                println!("ok: {} buses, {} trips", solution.metrics.nob, solution.metrics.not);
            } else {
                for v in &violations {
                    eprintln!("violation: {v}");
                }
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
