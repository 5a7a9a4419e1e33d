//! Command-line front end: `safebo run|oracle|validate|compare`.
//!
//! Exit codes: 0 ok, 1 usage, 2 configuration, 3 numerical failure,
//! 4 safety violation observed.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::baselines::BaselineKind;
use crate::benchmarks::{tabulate, validate, Benchmark, BenchmarkSpec, Problem};
use crate::error::{Error, Result};
use crate::harness::config::{parse_grid, parse_seeds};
use crate::harness::log::format_float;
use crate::harness::{
    problem_spec, run_on, write_csv, Algorithm, ConfigOverrides, ExperimentConfig, RegretLog,
    SeedRun,
};
use crate::msafeopt::Case;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_SAFETY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "safebo", version, about = "Safe Bayesian optimization with a monotone safety variable")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one algorithm over every seed and write one CSV per seed.
    Run(Flags),
    /// Write the exact safe optima of a benchmark.
    Oracle(Flags),
    /// Check benchmark preconditions (all benchmarks unless one is named).
    Validate(Flags),
    /// Run M-SafeOpt, SafeOpt-MC and PredVar side by side.
    Compare(Flags),
}

#[derive(Debug, clap::Args)]
struct Flags {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Comma-separated seeds, ranges allowed (0-4).
    #[arg(long)]
    seeds: Option<String>,
    /// Grid resolution, one value or one per dimension.
    #[arg(long)]
    grid: Option<String>,
    /// Growth-rate scale c.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    refined: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Result<ConfigOverrides> {
        let file = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                ConfigOverrides::parse(&text)?
            }
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            benchmark: self.benchmark.as_deref().map(str::parse).transpose()?,
            algorithm: self.algo.as_deref().map(str::parse).transpose()?,
            rounds: self.rounds,
            seeds: self.seeds.as_deref().map(parse_seeds).transpose()?,
            growth_scale: self.c,
            refined_acq: self.refined.then_some(true),
            grid: self.grid.as_deref().map(parse_grid).transpose()?,
            out: self.out.clone(),
            ..Default::default()
        };
        Ok(file.merge(flags))
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => EXIT_USAGE,
        Error::Config(_) | Error::Io { .. } | Error::Csv { .. } => EXIT_CONFIG,
        Error::Numerical { .. } | Error::Contract(_) => EXIT_NUMERICAL,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(f) => cmd_run(&f),
        Command::Oracle(f) => cmd_oracle(&f),
        Command::Validate(f) => cmd_validate(&f),
        Command::Compare(f) => cmd_compare(&f),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("safebo: {e}");
            exit_code(&e)
        }
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn log_path(out: &Path, benchmark: Benchmark, algo: Algorithm, seed: u64) -> PathBuf {
    out.join(format!("{benchmark}_{algo}_seed{seed}.csv"))
}

/// Writes every completed seed and prints a line per seed. Returns the worst exit code.
fn report_runs(config: &ExperimentConfig, runs: &[SeedRun]) -> Result<i32> {
    let mut code = EXIT_OK;
    for run in runs {
        match &run.log {
            Ok(log) => {
                write_csv(log, &log_path(&config.out, config.benchmark, config.algorithm, run.seed))?;
                println!("{} seed {}: {}", config.algorithm, run.seed, summary_line(log));
                if log.violations() > 0 {
                    eprintln!(
                        "safebo: {} safety violation(s) in {} seed {}",
                        log.violations(),
                        config.algorithm,
                        run.seed
                    );
                    code = EXIT_SAFETY;
                }
            }
            Err(e) => {
                eprintln!("safebo: {} seed {} failed: {e}", config.algorithm, run.seed);
                code = code.max(exit_code(e));
            }
        }
    }
    Ok(code)
}

fn summary_line(log: &RegretLog) -> String {
    let t = log.rows.len();
    let (r, rp, rx) = log.normalized_at(t).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
    let mut line = format!(
        "{t} rounds, R/T = {r:.6}, R'/T = {rp:.6}, R^X/T = {rx:.6}, violations = {}",
        log.violations()
    );
    if let Some(reason) = &log.termination {
        line.push_str(&format!(" ({reason})"));
    }
    line
}

fn cmd_run(flags: &Flags) -> Result<i32> {
    let config = flags.overrides()?.build()?;
    let problem = Problem::build(problem_spec(&config)?)?;
    create_dir(&config.out)?;
    let runs = run_on(&problem, &config);
    report_runs(&config, &runs)
}

fn cmd_compare(flags: &Flags) -> Result<i32> {
    let o = flags.overrides()?;
    let main = match o.algorithm {
        None => Algorithm::MSafeOpt(Case::Case2),
        Some(a @ Algorithm::MSafeOpt(_)) => a,
        Some(a) => {
            return Err(Error::usage(format!(
                "compare runs an M-SafeOpt variant against both baselines; '{a}' is a baseline"
            )))
        }
    };
    let base = o.build()?;
    let problem = Problem::build(problem_spec(&base)?)?;
    create_dir(&base.out)?;
    let mut code = EXIT_OK;
    let mut summary = vec![vec![
        "algorithm".to_string(),
        "seed".into(),
        "rounds".into(),
        "R_T/T".into(),
        "R_prime_T/T".into(),
        "R_X_T/T".into(),
        "violations".into(),
        "termination".into(),
    ]];
    for algo in [
        main,
        Algorithm::Baseline(BaselineKind::SafeOptMc),
        Algorithm::Baseline(BaselineKind::PredVar),
    ] {
        let config = ExperimentConfig {
            algorithm: algo,
            ..base.clone()
        };
        let runs = run_on(&problem, &config);
        code = code.max(report_runs(&config, &runs)?);
        for run in &runs {
            let Ok(log) = &run.log else { continue };
            let t = log.rows.len();
            let (r, rp, rx) = log.normalized_at(t).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
            summary.push(vec![
                algo.to_string(),
                run.seed.to_string(),
                t.to_string(),
                format_float(r),
                format_float(rp),
                format_float(rx),
                log.violations().to_string(),
                log.termination.clone().unwrap_or_default(),
            ]);
        }
    }
    let path = base.out.join(format!("{}_summary.csv", base.benchmark));
    write_rows(&path, &summary)?;
    Ok(code)
}

fn write_rows(path: &Path, rows: &[Vec<String>]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_oracle(flags: &Flags) -> Result<i32> {
    let o = flags.overrides()?;
    let benchmark = o.benchmark.ok_or_else(|| Error::usage("oracle needs --benchmark"))?;
    let config = ConfigOverrides {
        benchmark: Some(benchmark),
        ..o
    }
    .build()?;
    let p = Problem::build(problem_spec(&config)?)?;
    let n_s = p.grid.n_s();
    let best = p.oracle.global;
    let point = p.grid.point(best.index);
    println!(
        "{benchmark}: global safe optimum f = {} at s = {}, x = {:?}; L_f = {:.6e}, L'_g = {:.6e}",
        format_float(best.value),
        point[0],
        &point[1..],
        p.l_f,
        p.l_g_prime
    );
    let mut head = vec!["x_index".to_string()];
    head.extend((1..=p.grid.x_dim()).map(|i| format!("x{i}")));
    head.extend(["s_star", "f_star", "g_star", "s_boundary"].map(String::from));
    let mut rows = vec![head];
    for (x, opt) in p.oracle.per_x.iter().enumerate() {
        let column = &p.oracle.safe_mask[x * n_s..(x + 1) * n_s];
        let boundary = column.iter().rposition(|m| *m).unwrap_or(0);
        let mut row = vec![x.to_string()];
        row.extend(p.grid.x_value(x).iter().map(|v| format_float(*v)));
        row.extend([
            format_float(p.grid.s_values()[opt.index.s]),
            format_float(opt.value),
            format_float(p.g_at(opt.index)),
            format_float(p.grid.s_values()[boundary]),
        ]);
        rows.push(row);
    }
    create_dir(&config.out)?;
    let path = config.out.join(format!("{benchmark}_oracle.csv"));
    write_rows(&path, &rows)?;
    println!("wrote {}", path.display());
    Ok(EXIT_OK)
}

fn cmd_validate(flags: &Flags) -> Result<i32> {
    let o = flags.overrides()?;
    let benchmarks = match o.benchmark {
        Some(b) => vec![b],
        None => Benchmark::ALL.to_vec(),
    };
    let mut code = EXIT_OK;
    for b in benchmarks {
        let spec = match &o.grid {
            Some(g) => BenchmarkSpec::new(b).with_resolution(g)?,
            None => BenchmarkSpec::new(b),
        };
        let report = validate(&spec, &tabulate(&spec)?);
        let res: Vec<String> = spec.resolution.iter().map(usize::to_string).collect();
        println!(
            "{b} ({}): {}",
            res.join("x"),
            if report.passed() { "valid" } else { "INVALID" }
        );
        for line in report.lines() {
            println!("  {line}");
        }
        if !report.passed() {
            code = EXIT_CONFIG;
        }
    }
    Ok(code)
}
