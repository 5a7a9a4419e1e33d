//! The round loop: select, observe with noise, update both GPs, log regrets.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::baselines::{Baseline, BaselineConfig};
use crate::benchmarks::{BenchmarkSpec, Problem};
use crate::domain::GridDomain;
use crate::error::Result;
use crate::gp::{GpModel, Observation};
use crate::msafeopt::{AlgoConfig, MSafeOpt, RoundDecision, StepOutcome};

use super::config::ExperimentConfig;
use super::log::{RegretLog, RoundRecord};
use super::Algorithm;

enum Runner {
    MSafeOpt(MSafeOpt),
    Baseline(Baseline),
}

impl Runner {
    fn new(config: &ExperimentConfig, problem: &Problem) -> Result<Self> {
        let h = problem.spec.h;
        Ok(match config.algorithm {
            Algorithm::MSafeOpt(case) => {
                let mut c = AlgoConfig::new(case, problem.l_f, problem.l_g_prime, h);
                c.growth_scale = config.growth_scale;
                c.refined_acq = config.refined_acq;
                c.robust_elim = config.robust_elim;
                c.beta_f = config.beta;
                c.beta_g = config.beta;
                Runner::MSafeOpt(MSafeOpt::new(c)?)
            }
            Algorithm::Baseline(kind) => {
                let mut c = BaselineConfig::new(kind, h);
                c.beta_f = config.beta;
                c.beta_g = config.beta;
                Runner::Baseline(Baseline::new(c)?)
            }
        })
    }

    fn step(&mut self, grid: &GridDomain, mf: &GpModel, mg: &GpModel) -> Result<StepOutcome> {
        match self {
            Runner::MSafeOpt(a) => a.step(grid, mf, mg),
            Runner::Baseline(b) => b.step(grid, mf, mg),
        }
    }
}

/// The benchmark spec a config asks for, with its grid override applied.
pub fn problem_spec(config: &ExperimentConfig) -> Result<BenchmarkSpec> {
    let spec = BenchmarkSpec::new(config.benchmark);
    match &config.grid {
        Some(res) => spec.with_resolution(res),
        None => Ok(spec),
    }
}

/// Independent generators for the f and g observation noise of one seed.
/// One draw per function per round, so the sequences do not depend on the
/// algorithm's choices.
pub fn noise_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut f = ChaCha8Rng::seed_from_u64(seed);
    f.set_stream(0);
    let mut g = ChaCha8Rng::seed_from_u64(seed);
    g.set_stream(1);
    (f, g)
}

/// One seed of `config` on an already built problem.
pub fn run_seed(problem: &Problem, config: &ExperimentConfig, seed: u64) -> Result<RegretLog> {
    run_seed_observed(problem, config, seed, |_, _| {})
}

/// Like [`run_seed`], calling `observe(t, decision)` after every selection.
pub fn run_seed_observed(
    problem: &Problem,
    config: &ExperimentConfig,
    seed: u64,
    mut observe: impl FnMut(usize, &RoundDecision),
) -> Result<RegretLog> {
    config.validate()?;
    let spec = &problem.spec;
    let grid = &problem.grid;
    let oracle = &problem.oracle;
    let mut runner = Runner::new(config, problem)?;
    let mut model_f = GpModel::new(spec.kernel_f.clone(), spec.gp_noise_variance)?;
    let mut model_g = GpModel::new(spec.kernel_g.clone(), spec.gp_noise_variance)?;
    let (mut noise_f, mut noise_g) = noise_streams(seed);

    let mut log = RegretLog::new(grid.x_dim());
    for t in 1..=config.rounds {
        let start = config.timing.then(Instant::now);
        let decision = match runner.step(grid, &model_f, &model_g)? {
            StepOutcome::Select(d) => d,
            StepOutcome::Exhausted { reason, .. } => {
                log.termination = Some(format!("stopped before round {t}: {reason}"));
                break;
            }
        };
        observe(t, &decision);
        let idx = decision.selected;
        let point = grid.point(idx);
        let f_true = problem.f_at(idx);
        let g_true = problem.g_at(idx);
        let zf: f64 = noise_f.sample(StandardNormal);
        let zg: f64 = noise_g.sample(StandardNormal);
        model_f.add_observation(Observation::new(point.to_vec(), f_true + spec.noise_std_f * zf))?;
        model_g.add_observation(Observation::new(point.to_vec(), g_true + spec.noise_std_g * zg))?;

        let r_x = decision
            .state
            .maximizer
            .iter()
            .enumerate()
            .map(|(x, &s)| oracle.per_x[x].value - problem.f[x * grid.n_s() + s])
            .fold(f64::NEG_INFINITY, f64::max);
        log.push(RoundRecord {
            t,
            s: point[0],
            x: point[1..].to_vec(),
            f_true,
            g_true,
            violation: g_true > spec.h,
            r: oracle.global.value - f_true,
            r_prime: oracle.per_x[idx.x].value - f_true,
            r_x,
            cum_r: 0.0,
            cum_r_prime: 0.0,
            cum_r_x: 0.0,
            n_surviving_x: decision.state.n_surviving(),
            n_g: decision.state.expanders.len(),
            n_m: decision.state.maximizers.len(),
            ms: start.map_or(0.0, |s| s.elapsed().as_secs_f64() * 1e3),
        });
    }
    Ok(log)
}

/// Result of one seed; failures are kept per seed so other seeds still report.
#[derive(Debug)]
pub struct SeedRun {
    pub seed: u64,
    pub log: Result<RegretLog>,
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub problem: Problem,
    /// In the order of `config.seeds`.
    pub runs: Vec<SeedRun>,
}

impl ExperimentResult {
    /// Logs of the seeds that completed.
    pub fn logs(&self) -> impl Iterator<Item = (u64, &RegretLog)> {
        self.runs
            .iter()
            .filter_map(|r| r.log.as_ref().ok().map(|l| (r.seed, l)))
    }

    pub fn violations(&self) -> usize {
        self.logs().map(|(_, l)| l.violations()).sum()
    }
}

/// Builds the problem once and runs every seed in parallel.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let problem = Problem::build(problem_spec(config)?)?;
    let runs = run_on(&problem, config);
    Ok(ExperimentResult {
        config: config.clone(),
        problem,
        runs,
    })
}

/// Every seed of `config` on a shared problem.
pub fn run_on(problem: &Problem, config: &ExperimentConfig) -> Vec<SeedRun> {
    config
        .seeds
        .par_iter()
        .map(|&seed| SeedRun {
            seed,
            log: run_seed(problem, config, seed),
        })
        .collect()
}
