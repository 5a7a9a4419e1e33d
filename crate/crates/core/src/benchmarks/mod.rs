//! Benchmark problems, their grid tables, validity checks and exact optima.

pub mod functions;
pub mod pendulum;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::domain::{GridDomain, GridIndex};
use crate::error::{Error, Result};
use crate::gp::{KernelFamily, KernelSpec};

pub use functions::{eval_clinical, eval_synthetic2d, eval_synthetic3d, hartmann3};
pub use pendulum::{eval_pendulum, pendulum_episode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    ClinicalTrial,
    Synthetic2D,
    Synthetic3D,
    Pendulum,
}

impl Benchmark {
    pub const ALL: [Benchmark; 4] = [
        Benchmark::ClinicalTrial,
        Benchmark::Synthetic2D,
        Benchmark::Synthetic3D,
        Benchmark::Pendulum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::ClinicalTrial => "clinical",
            Benchmark::Synthetic2D => "synthetic2d",
            Benchmark::Synthetic3D => "synthetic3d",
            Benchmark::Pendulum => "pendulum",
        }
    }

    /// True (f, g) at a point `[s, x...]`.
    pub fn eval(self, point: &[f64]) -> (f64, f64) {
        match self {
            Benchmark::ClinicalTrial => eval_clinical(point),
            Benchmark::Synthetic2D => eval_synthetic2d(point),
            Benchmark::Synthetic3D => eval_synthetic3d(point),
            Benchmark::Pendulum => eval_pendulum(point),
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "clinical" | "clinical-trial" | "clinical_trial" => Ok(Benchmark::ClinicalTrial),
            "synthetic2d" | "syn2d" | "synthetic-2d" => Ok(Benchmark::Synthetic2D),
            "synthetic3d" | "syn3d" | "synthetic-3d" => Ok(Benchmark::Synthetic3D),
            "pendulum" => Ok(Benchmark::Pendulum),
            other => Err(Error::usage(format!(
                "unknown benchmark '{other}' (expected clinical, synthetic2d, synthetic3d or pendulum)"
            ))),
        }
    }
}

/// Everything a run needs to know about one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkSpec {
    pub benchmark: Benchmark,
    pub h: f64,
    /// Per-dimension box, s first.
    pub bounds: Vec<(f64, f64)>,
    pub resolution: Vec<usize>,
    /// Standard deviation of the additive observation noise on f.
    pub noise_std_f: f64,
    pub noise_std_g: f64,
    pub kernel_f: KernelSpec,
    pub kernel_g: KernelSpec,
    /// Noise variance the GP models assume.
    pub gp_noise_variance: f64,
    /// Supplied (L_f, L'_g); when `None` they are estimated from the grid tables.
    pub growth_bounds: Option<(f64, f64)>,
}

const LENGTHSCALE: f64 = 0.2;
const NOISELESS_GP_VARIANCE: f64 = 1e-5;
const PENDULUM_NOISE_VARIANCE: f64 = 0.05;

impl BenchmarkSpec {
    /// Defaults for `benchmark` at full resolution.
    pub fn new(benchmark: Benchmark) -> Self {
        let (h, bounds, resolution, variance): (f64, Vec<(f64, f64)>, Vec<usize>, f64) =
            match benchmark {
                Benchmark::ClinicalTrial => (0.9, vec![(0.0, 1.0), (0.0, 2.0)], vec![200, 200], 1.0),
                Benchmark::Synthetic2D => (2.0, vec![(0.0, 1.0), (0.0, 1.0)], vec![200, 200], 9.0),
                Benchmark::Synthetic3D => (2.0, vec![(0.0, 1.0); 3], vec![75, 75, 75], 1.0),
                Benchmark::Pendulum => (
                    9.0,
                    vec![(0.0, 1.0), (pendulum::X_MIN, pendulum::X_MAX)],
                    vec![100, 100],
                    25.0,
                ),
            };
        let dim = bounds.len();
        let kernel = KernelSpec::isotropic(KernelFamily::Matern52, variance, LENGTHSCALE, dim)
            .expect("built-in kernel constants are valid");
        let (noise_std, gp_noise_variance) = match benchmark {
            Benchmark::Pendulum => (PENDULUM_NOISE_VARIANCE.sqrt(), PENDULUM_NOISE_VARIANCE),
            _ => (0.0, NOISELESS_GP_VARIANCE),
        };
        Self {
            benchmark,
            h,
            bounds,
            resolution,
            noise_std_f: noise_std,
            noise_std_g: noise_std,
            kernel_f: kernel.clone(),
            kernel_g: kernel,
            gp_noise_variance,
            growth_bounds: None,
        }
    }

    /// Replaces the grid resolution. A single entry applies to every dimension.
    pub fn with_resolution(mut self, resolution: &[usize]) -> Result<Self> {
        let dim = self.bounds.len();
        self.resolution = match resolution.len() {
            1 => vec![resolution[0]; dim],
            n if n == dim => resolution.to_vec(),
            n => {
                return Err(Error::config(format!(
                    "{} has {dim} dimensions but {n} resolutions were given",
                    self.benchmark
                )))
            }
        };
        if let Some(r) = self.resolution.iter().find(|r| **r < 2) {
            return Err(Error::config(format!("grid resolution must be at least 2, got {r}")));
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn eval(&self, point: &[f64]) -> (f64, f64) {
        self.benchmark.eval(point)
    }

    pub fn grid(&self) -> Result<GridDomain> {
        GridDomain::build(&self.bounds, &self.resolution)
    }
}

/// True f and g at every grid point in flat order.
#[derive(Debug, Clone, PartialEq)]
pub struct Tables {
    pub grid: GridDomain,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

/// Evaluates the benchmark over its whole grid.
pub fn tabulate(spec: &BenchmarkSpec) -> Result<Tables> {
    let grid = spec.grid()?;
    let (f, g): (Vec<f64>, Vec<f64>) = (0..grid.len())
        .into_par_iter()
        .map(|i| spec.eval(grid.point(grid.index(i))))
        .unzip();
    Ok(Tables { grid, f, g })
}

/// Outcome of the structural checks a benchmark must pass before any run.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub benchmark: Benchmark,
    pub points: usize,
    pub nonfinite: usize,
    /// Adjacent s pairs where g decreases.
    pub monotone_violations: usize,
    pub worst_drop: f64,
    /// x columns whose s = 0 point has g > h.
    pub zero_row_violations: usize,
    pub max_g_at_zero: f64,
    pub h: f64,
    pub l_f: f64,
    pub l_g_prime: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.nonfinite == 0
            && self.monotone_violations == 0
            && self.zero_row_violations == 0
            && self.l_g_prime > 0.0
    }

    /// One line per check, each starting with `ok` or `FAIL`.
    pub fn lines(&self) -> Vec<String> {
        let tag = |ok: bool| if ok { "ok  " } else { "FAIL" };
        vec![
            format!("{} finite values ({} points, {} non-finite)", tag(self.nonfinite == 0), self.points, self.nonfinite),
            format!(
                "{} g nondecreasing in s ({} violations, worst drop {:.3e})",
                tag(self.monotone_violations == 0),
                self.monotone_violations,
                self.worst_drop
            ),
            format!(
                "{} s = 0 row safe (max g = {:.6}, h = {}, {} violations)",
                tag(self.zero_row_violations == 0),
                self.max_g_at_zero,
                self.h,
                self.zero_row_violations
            ),
            format!("{} L'_g > 0 (L'_g = {:.6e}, L_f = {:.6e})", tag(self.l_g_prime > 0.0), self.l_g_prime, self.l_f),
        ]
    }
}

/// Runs every check on precomputed tables.
pub fn validate(spec: &BenchmarkSpec, tables: &Tables) -> ValidationReport {
    let grid = &tables.grid;
    let n_s = grid.n_s();
    let nonfinite = tables
        .f
        .iter()
        .chain(&tables.g)
        .filter(|v| !v.is_finite())
        .count();
    let mut monotone_violations = 0;
    let mut worst_drop = 0.0_f64;
    let mut zero_row_violations = 0;
    let mut max_g_at_zero = f64::NEG_INFINITY;
    for column in tables.g.chunks(n_s) {
        for pair in column.windows(2) {
            if pair[1] < pair[0] {
                monotone_violations += 1;
                worst_drop = worst_drop.max(pair[0] - pair[1]);
            }
        }
        if !(column[0] <= spec.h) {
            zero_row_violations += 1;
        }
        max_g_at_zero = max_g_at_zero.max(column[0]);
    }
    let (l_f, l_g_prime) = growth_rates(grid, &tables.f, &tables.g);
    ValidationReport {
        benchmark: spec.benchmark,
        points: grid.len(),
        nonfinite,
        monotone_violations,
        worst_drop,
        zero_row_violations,
        max_g_at_zero,
        h: spec.h,
        l_f,
        l_g_prime,
    }
}

/// Largest f slope (clamped at 0) and smallest g slope over grid-adjacent s pairs.
fn growth_rates(grid: &GridDomain, f: &[f64], g: &[f64]) -> (f64, f64) {
    let n_s = grid.n_s();
    let s = grid.s_values();
    let mut l_f = 0.0_f64;
    let mut l_g = f64::INFINITY;
    for (fc, gc) in f.chunks(n_s).zip(g.chunks(n_s)) {
        for i in 0..n_s - 1 {
            let ds = s[i + 1] - s[i];
            l_f = l_f.max((fc[i + 1] - fc[i]) / ds);
            l_g = l_g.min((gc[i + 1] - gc[i]) / ds);
        }
    }
    (l_f, l_g)
}

/// (L_f, L'_g) from finite differences along s on the grid.
pub fn estimate_growth_bounds(grid: &GridDomain, f: &[f64], g: &[f64]) -> Result<(f64, f64)> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::contract("tables must cover the grid"));
    }
    let (l_f, l_g) = growth_rates(grid, f, g);
    if !(l_g > 0.0) {
        return Err(Error::config(format!(
            "g does not strictly increase in s on the grid (L'_g = {l_g:e})"
        )));
    }
    Ok((l_f, l_g))
}

/// A grid point and its true objective value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub index: GridIndex,
    pub value: f64,
}

/// Exact safe optima over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub global: Optimum,
    /// Safe per-x optimum for every x index.
    pub per_x: Vec<Optimum>,
    /// g ≤ h per grid point, flat order.
    pub safe_mask: Vec<bool>,
}

/// Exhaustive scan; ties go to the smallest flat index.
pub fn oracle_optima(grid: &GridDomain, f: &[f64], g: &[f64], h: f64) -> Result<OracleSolution> {
    if f.len() != grid.len() || g.len() != grid.len() {
        return Err(Error::contract("tables must cover the grid"));
    }
    let n_s = grid.n_s();
    let safe_mask: Vec<bool> = g.iter().map(|v| *v <= h).collect();
    let mut per_x = Vec::with_capacity(grid.n_x());
    for x in 0..grid.n_x() {
        let mut best: Option<Optimum> = None;
        for s in 0..n_s {
            let i = x * n_s + s;
            if safe_mask[i] && best.is_none_or(|b| f[i] > b.value) {
                best = Some(Optimum {
                    index: GridIndex { s, x },
                    value: f[i],
                });
            }
        }
        per_x.push(best.ok_or_else(|| {
            Error::contract(format!("x index {x} has no safe grid point"))
        })?);
    }
    let mut global = per_x[0];
    for o in &per_x[1..] {
        if o.value > global.value {
            global = *o;
        }
    }
    Ok(OracleSolution {
        global,
        per_x,
        safe_mask,
    })
}

/// A validated benchmark on its grid with tables, oracle and growth bounds.
#[derive(Debug, Clone)]
pub struct Problem {
    pub spec: BenchmarkSpec,
    pub grid: GridDomain,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub oracle: OracleSolution,
    pub l_f: f64,
    pub l_g_prime: f64,
}

impl Problem {
    /// Tabulates and validates; fails with a configuration error listing the failed checks.
    pub fn build(spec: BenchmarkSpec) -> Result<Self> {
        let tables = tabulate(&spec)?;
        let report = validate(&spec, &tables);
        if !report.passed() {
            let failed: Vec<String> = report
                .lines()
                .into_iter()
                .filter(|l| l.starts_with("FAIL"))
                .collect();
            return Err(Error::config(format!(
                "benchmark {} is invalid: {}",
                spec.benchmark,
                failed.join("; ")
            )));
        }
        let (l_f, l_g_prime) = match spec.growth_bounds {
            Some(b) => b,
            None => (report.l_f, report.l_g_prime),
        };
        let Tables { grid, f, g } = tables;
        let oracle = oracle_optima(&grid, &f, &g, spec.h)?;
        Ok(Self {
            spec,
            grid,
            f,
            g,
            oracle,
            l_f,
            l_g_prime,
        })
    }

    pub fn f_at(&self, idx: GridIndex) -> f64 {
        self.f[self.grid.flat(idx)]
    }

    pub fn g_at(&self, idx: GridIndex) -> f64 {
        self.g[self.grid.flat(idx)]
    }
}
