//! Confidence-width schedules and per-round confidence fields over the grid.

use crate::domain::{GridDomain, GridIndex};
use crate::error::{Error, Result};
use crate::gp::GpModel;

/// How the confidence multiplier β_t evolves with the round index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSchedule {
    Constant(f64),
    /// `B + R * sqrt(2 (γ_{t-1} + 1 + ln(2/δ)))`, with γ the information gain so far.
    Theoretical {
        rkhs_bound: f64,
        noise_bound: f64,
        delta: f64,
    },
}

impl Default for BetaSchedule {
    fn default() -> Self {
        BetaSchedule::Constant(3.0)
    }
}

impl BetaSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaSchedule::Constant(c) => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::config(format!("constant beta must be positive, got {c}")));
                }
            }
            BetaSchedule::Theoretical {
                rkhs_bound,
                noise_bound,
                delta,
            } => {
                if !(delta > 0.0 && delta < 1.0) {
                    return Err(Error::config(format!("delta must lie in (0, 1), got {delta}")));
                }
                if !(rkhs_bound >= 0.0 && noise_bound >= 0.0)
                    || !(rkhs_bound + noise_bound > 0.0)
                    || !(rkhs_bound + noise_bound).is_finite()
                {
                    return Err(Error::config(format!(
                        "theoretical beta needs nonnegative B, R not both zero (got B={rkhs_bound}, R={noise_bound})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether [`BetaSchedule::beta_at`] reads its `gamma_prev` argument.
    pub fn needs_info_gain(&self) -> bool {
        matches!(self, BetaSchedule::Theoretical { .. })
    }

    /// β_t for round `t >= 1`, given the information gain after `t - 1` observations.
    pub fn beta_at(&self, t: usize, gamma_prev: f64) -> Result<f64> {
        self.validate()?;
        if t == 0 {
            return Err(Error::contract("rounds are numbered from 1"));
        }
        match *self {
            BetaSchedule::Constant(c) => Ok(c),
            BetaSchedule::Theoretical {
                rkhs_bound,
                noise_bound,
                delta,
            } => {
                if !(gamma_prev >= 0.0) {
                    return Err(Error::contract(format!(
                        "information gain must be nonnegative, got {gamma_prev}"
                    )));
                }
                if noise_bound == 0.0 {
                    return Ok(rkhs_bound);
                }
                let inner = 2.0 * (gamma_prev + 1.0 + (2.0 / delta).ln());
                Ok(rkhs_bound + noise_bound * inner.sqrt())
            }
        }
    }
}

/// Free-function form of [`BetaSchedule::beta_at`].
pub fn beta_at(schedule: &BetaSchedule, t: usize, gamma_prev: f64) -> Result<f64> {
    schedule.beta_at(t, gamma_prev)
}

/// μ, σ, UCB and LCB of one function at every grid point, laid out in flat grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceField {
    n_s: usize,
    n_x: usize,
    beta: f64,
    mu: Vec<f64>,
    sigma: Vec<f64>,
    ucb: Vec<f64>,
    lcb: Vec<f64>,
}

impl ConfidenceField {
    /// One posterior sweep of `model` over every grid point.
    pub fn build(model: &GpModel, grid: &GridDomain, beta: f64) -> Result<Self> {
        let (mu, sigma) = model.posterior_flat(grid.coords())?;
        Self::from_parts(grid.n_s(), grid.n_x(), mu, sigma, beta)
    }

    /// Field from precomputed means and standard deviations.
    pub fn from_parts(
        n_s: usize,
        n_x: usize,
        mu: Vec<f64>,
        sigma: Vec<f64>,
        beta: f64,
    ) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::config(format!("beta must be nonnegative, got {beta}")));
        }
        let n = n_s * n_x;
        if mu.len() != n || sigma.len() != n {
            return Err(Error::contract(format!(
                "field for a {n_s}x{n_x} grid needs {n} values, got {} means and {} deviations",
                mu.len(),
                sigma.len()
            )));
        }
        if sigma.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::contract("standard deviations must be nonnegative"));
        }
        let ucb = mu.iter().zip(&sigma).map(|(m, s)| m + beta * s).collect();
        let lcb = mu.iter().zip(&sigma).map(|(m, s)| m - beta * s).collect();
        Ok(Self {
            n_s,
            n_x,
            beta,
            mu,
            sigma,
            ucb,
            lcb,
        })
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn flat(&self, idx: GridIndex) -> usize {
        debug_assert!(idx.s < self.n_s && idx.x < self.n_x);
        idx.x * self.n_s + idx.s
    }

    fn column<'a>(&self, values: &'a [f64], x: usize) -> &'a [f64] {
        &values[x * self.n_s..(x + 1) * self.n_s]
    }

    pub fn mu(&self, idx: GridIndex) -> f64 {
        self.mu[self.flat(idx)]
    }

    pub fn sigma(&self, idx: GridIndex) -> f64 {
        self.sigma[self.flat(idx)]
    }

    pub fn ucb(&self, idx: GridIndex) -> f64 {
        self.ucb[self.flat(idx)]
    }

    pub fn lcb(&self, idx: GridIndex) -> f64 {
        self.lcb[self.flat(idx)]
    }

    /// β·σ at one point, the quantity every acquisition rule compares.
    pub fn width(&self, idx: GridIndex) -> f64 {
        self.beta * self.sigma(idx)
    }

    /// UCB along s for a fixed x index.
    pub fn ucb_column(&self, x: usize) -> &[f64] {
        self.column(&self.ucb, x)
    }

    pub fn lcb_column(&self, x: usize) -> &[f64] {
        self.column(&self.lcb, x)
    }

    pub fn sigma_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn ucb_values(&self) -> &[f64] {
        &self.ucb
    }

    pub fn lcb_values(&self) -> &[f64] {
        &self.lcb
    }
}

/// Free-function form of [`ConfidenceField::build`].
pub fn build_field(model: &GpModel, grid: &GridDomain, beta: f64) -> Result<ConfidenceField> {
    ConfidenceField::build(model, grid, beta)
}
