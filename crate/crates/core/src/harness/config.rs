//! Experiment configuration and its flat `key = value` file format.
//!
//! ```text
//! # comments start with '#'
//! benchmark    = clinical        # clinical | synthetic2d | synthetic3d | pendulum
//! algorithm    = case1           # case1 | case2 | case3 | msafeucb | safeopt-mc | predvar
//! rounds       = 100
//! seeds        = 0-4             # list and inclusive ranges, e.g. 0,3,7-9
//! growth_scale = 1.0             # c: L_f <- c L_f, L'_g <- L'_g / c
//! refined_acq  = false
//! robust_elim  = true
//! beta         = 3               # constant, or theoretical:B,R,delta
//! grid         = 50              # one resolution for every dimension, or 50,40
//! out          = results
//! timing       = false           # record wall-clock ms per round
//! ```

use std::path::PathBuf;

use crate::benchmarks::Benchmark;
use crate::confidence::BetaSchedule;
use crate::error::{Error, Result};
use crate::msafeopt::Case;

use super::Algorithm;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub algorithm: Algorithm,
    pub rounds: usize,
    pub seeds: Vec<u64>,
    pub growth_scale: f64,
    pub refined_acq: bool,
    pub robust_elim: bool,
    /// Used for both f and g.
    pub beta: BetaSchedule,
    /// Overrides the benchmark's default resolution.
    pub grid: Option<Vec<usize>>,
    pub out: PathBuf,
    /// When false the `ms` column is written as 0 so logs are reproducible byte for byte.
    pub timing: bool,
}

impl ExperimentConfig {
    /// Defaults: Case 1, T = 100, seeds 0-4, c = 1, β = 3, robust elimination.
    pub fn new(benchmark: Benchmark) -> Self {
        Self {
            benchmark,
            algorithm: Algorithm::MSafeOpt(Case::Case1),
            rounds: 100,
            seeds: (0..5).collect(),
            growth_scale: 1.0,
            refined_acq: false,
            robust_elim: true,
            beta: BetaSchedule::default(),
            grid: None,
            out: PathBuf::from("results"),
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::usage("rounds must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::usage("at least one seed is required"));
        }
        if !(self.growth_scale > 0.0 && self.growth_scale.is_finite()) {
            return Err(Error::config(format!(
                "growth_scale must be positive, got {}",
                self.growth_scale
            )));
        }
        self.beta.validate()
    }
}

/// Partially specified configuration, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub benchmark: Option<Benchmark>,
    pub algorithm: Option<Algorithm>,
    pub rounds: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub growth_scale: Option<f64>,
    pub refined_acq: Option<bool>,
    pub robust_elim: Option<bool>,
    pub beta: Option<BetaSchedule>,
    pub grid: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
    pub timing: Option<bool>,
}

impl ConfigOverrides {
    /// Parses the flat file format; unknown keys and repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ConfigOverrides::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| Error::config(format!("line {}: {msg}", n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected key = value, got '{line}'")))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            if !seen.insert(key.clone()) {
                return Err(at(format!("key '{key}' given twice")));
            }
            let wrap = |e: Error| match e {
                Error::Usage(m) | Error::Config(m) => at(m),
                other => other,
            };
            match key.as_str() {
                "benchmark" => c.benchmark = Some(value.parse().map_err(wrap)?),
                "algorithm" | "algo" => c.algorithm = Some(value.parse().map_err(wrap)?),
                "rounds" => c.rounds = Some(parse_number(value).map_err(wrap)?),
                "seeds" => c.seeds = Some(parse_seeds(value).map_err(wrap)?),
                "growth_scale" | "c" => c.growth_scale = Some(parse_number(value).map_err(wrap)?),
                "refined_acq" | "refined" => c.refined_acq = Some(parse_bool(value).map_err(wrap)?),
                "robust_elim" => c.robust_elim = Some(parse_bool(value).map_err(wrap)?),
                "beta" => c.beta = Some(parse_beta(value).map_err(wrap)?),
                "grid" => c.grid = Some(parse_grid(value).map_err(wrap)?),
                "out" => c.out = Some(PathBuf::from(value)),
                "timing" => c.timing = Some(parse_bool(value).map_err(wrap)?),
                other => return Err(at(format!("unknown key '{other}'"))),
            }
        }
        Ok(c)
    }

    /// Values set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            benchmark: other.benchmark.or(self.benchmark),
            algorithm: other.algorithm.or(self.algorithm),
            rounds: other.rounds.or(self.rounds),
            seeds: other.seeds.or(self.seeds),
            growth_scale: other.growth_scale.or(self.growth_scale),
            refined_acq: other.refined_acq.or(self.refined_acq),
            robust_elim: other.robust_elim.or(self.robust_elim),
            beta: other.beta.or(self.beta),
            grid: other.grid.or(self.grid),
            out: other.out.or(self.out),
            timing: other.timing.or(self.timing),
        }
    }

    /// Fills unset fields with defaults and validates. A benchmark is required.
    pub fn build(self) -> Result<ExperimentConfig> {
        let benchmark = self
            .benchmark
            .ok_or_else(|| Error::usage("no benchmark given"))?;
        let d = ExperimentConfig::new(benchmark);
        let config = ExperimentConfig {
            benchmark,
            algorithm: self.algorithm.unwrap_or(d.algorithm),
            rounds: self.rounds.unwrap_or(d.rounds),
            seeds: self.seeds.unwrap_or(d.seeds),
            growth_scale: self.growth_scale.unwrap_or(d.growth_scale),
            refined_acq: self.refined_acq.unwrap_or(d.refined_acq),
            robust_elim: self.robust_elim.unwrap_or(d.robust_elim),
            beta: self.beta.unwrap_or(d.beta),
            grid: self.grid.or(d.grid),
            out: self.out.unwrap_or(d.out),
            timing: self.timing.unwrap_or(d.timing),
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_number<T: std::str::FromStr>(value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("'{value}' is not a valid number")))
}

fn parse_bool(value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(format!("'{value}' is not a boolean"))),
    }
}

/// Comma-separated seeds and inclusive ranges such as `0-4`.
pub fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (parse_number(a.trim())?, parse_number(b.trim())?);
                if a > b {
                    return Err(Error::config(format!("empty seed range '{part}'")));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(parse_number(part)?),
        }
    }
    if seeds.is_empty() {
        return Err(Error::usage("at least one seed is required"));
    }
    Ok(seeds)
}

/// One resolution for every dimension, or a comma-separated list.
pub fn parse_grid(value: &str) -> Result<Vec<usize>> {
    let grid = value
        .split(',')
        .map(|p| parse_number::<usize>(p.trim()))
        .collect::<Result<Vec<_>>>()?;
    if grid.iter().any(|r| *r < 2) {
        return Err(Error::config("grid resolutions must be at least 2"));
    }
    Ok(grid)
}

/// `3` for a constant, `theoretical:B,R,delta` for the information-gain schedule.
pub fn parse_beta(value: &str) -> Result<BetaSchedule> {
    let beta = match value.split_once(':') {
        Some((kind, args)) if kind.trim().eq_ignore_ascii_case("theoretical") => {
            let nums = args
                .split(',')
                .map(|p| parse_number::<f64>(p.trim()))
                .collect::<Result<Vec<_>>>()?;
            let [rkhs_bound, noise_bound, delta] = nums[..] else {
                return Err(Error::config("theoretical beta needs B,R,delta"));
            };
            BetaSchedule::Theoretical {
                rkhs_bound,
                noise_bound,
                delta,
            }
        }
        Some((kind, _)) => return Err(Error::config(format!("unknown beta schedule '{kind}'"))),
        None => BetaSchedule::Constant(parse_number(value)?),
    };
    beta.validate()?;
    Ok(beta)
}
