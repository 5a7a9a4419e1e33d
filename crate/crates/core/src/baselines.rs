//! Comparison algorithms: a monotonicity-aware SafeOpt-MC and PredVar.
//!
//! Both share M-SafeOpt's safe set S_t and confidence fields but use no
//! growth-rate constants. The per-x best guess reported in their
//! [`SafeState`] is the safe UCB^f maximizer, the same rule M-SafeOpt uses.

use crate::confidence::{BetaSchedule, ConfidenceField};
use crate::domain::{
    best_safe_lcb, safe_boundary, safe_mask, ucb_maximizer, GridDomain, GridIndex, SafeState,
};
use crate::error::{Error, Result};
use crate::gp::GpModel;
use crate::msafeopt::{RoundDecision, SelectedFrom, StepOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    SafeOptMc,
    PredVar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub h: f64,
    pub beta_f: BetaSchedule,
    pub beta_g: BetaSchedule,
}

impl BaselineConfig {
    pub fn new(kind: BaselineKind, h: f64) -> Self {
        Self {
            kind,
            h,
            beta_f: BetaSchedule::default(),
            beta_g: BetaSchedule::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Baseline {
    config: BaselineConfig,
    round: usize,
}

impl Baseline {
    pub fn new(config: BaselineConfig) -> Result<Self> {
        if !config.h.is_finite() {
            return Err(Error::config("safety threshold must be finite"));
        }
        config.beta_f.validate()?;
        config.beta_g.validate()?;
        Ok(Self { config, round: 0 })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.config
    }

    pub fn step(
        &mut self,
        grid: &GridDomain,
        model_f: &GpModel,
        model_g: &GpModel,
    ) -> Result<StepOutcome> {
        let t = self.round + 1;
        let gain = |s: &BetaSchedule, m: &GpModel| {
            if s.needs_info_gain() {
                m.empirical_info_gain()
            } else {
                0.0
            }
        };
        let beta_f = self.config.beta_f.beta_at(t, gain(&self.config.beta_f, model_f))?;
        let beta_g = self.config.beta_g.beta_at(t, gain(&self.config.beta_g, model_g))?;
        let field_f = ConfidenceField::build(model_f, grid, beta_f)?;
        let field_g = ConfidenceField::build(model_g, grid, beta_g)?;
        self.decide(grid, &field_f, &field_g)
    }

    pub fn decide(
        &mut self,
        grid: &GridDomain,
        field_f: &ConfidenceField,
        field_g: &ConfidenceField,
    ) -> Result<StepOutcome> {
        self.round += 1;
        let round = self.round;
        let outcome = match self.config.kind {
            BaselineKind::SafeOptMc => safeopt_mc_step(grid, field_f, field_g, self.config.h),
            BaselineKind::PredVar => predvar_step(grid, field_f, field_g, self.config.h),
        };
        Ok(match outcome {
            StepOutcome::Select(mut d) => {
                d.state.round = round;
                StepOutcome::Select(d)
            }
            StepOutcome::Exhausted { reason, .. } => StepOutcome::Exhausted { round, reason },
        })
    }
}

/// Boundaries and UCB^f best guesses for every x; G_t and M_t left empty.
fn base_state(grid: &GridDomain, field_f: &ConfidenceField, field_g: &ConfidenceField, h: f64) -> SafeState {
    let n_x = grid.n_x();
    let boundary: Vec<usize> = (0..n_x).map(|x| safe_boundary(field_g, h, x)).collect();
    let maximizer = boundary
        .iter()
        .enumerate()
        .map(|(x, &b)| ucb_maximizer(field_f, b, x))
        .collect();
    let optimistic_boundary = boundary.iter().map(|&b| grid.s_values()[b]).collect();
    SafeState {
        round: 0,
        surviving: vec![true; n_x],
        boundary,
        optimistic_boundary,
        maximizer,
        expanders: Vec::new(),
        maximizers: Vec::new(),
    }
}

fn pick(
    state: SafeState,
    points: impl IntoIterator<Item = GridIndex>,
    value: impl Fn(GridIndex) -> f64,
) -> StepOutcome {
    let mut best: Option<(GridIndex, f64)> = None;
    for idx in points {
        let v = value(idx);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((idx, v));
        }
    }
    match best {
        Some((selected, acq_value)) => StepOutcome::Select(RoundDecision {
            selected,
            selected_from: if state.is_expander(selected) {
                SelectedFrom::Expander
            } else {
                SelectedFrom::Maximizer
            },
            acq_value,
            state,
        }),
        None => StepOutcome::Exhausted {
            round: state.round,
            reason: "no expander or maximizer left".into(),
        },
    }
}

/// SafeOpt-MC with monotone expanders: G_t is every boundary point below
/// s = 1, M_t every safe point whose UCB^f reaches the best safe LCB^f.
pub fn safeopt_mc_step(
    grid: &GridDomain,
    field_f: &ConfidenceField,
    field_g: &ConfidenceField,
    h: f64,
) -> StepOutcome {
    let mut state = base_state(grid, field_f, field_g, h);
    let last = grid.n_s() - 1;
    let safe = safe_mask(field_g, h);
    let best = best_safe_lcb(field_f, &safe);
    state.expanders = state
        .boundary
        .iter()
        .enumerate()
        .filter(|(_, &b)| b < last)
        .map(|(x, &b)| GridIndex { s: b, x })
        .collect();
    state.maximizers = safe
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| grid.index(i))
        .filter(|&idx| field_f.ucb(idx) >= best)
        .collect();
    let candidates = state.candidates();
    pick(state, candidates, |idx| field_f.width(idx).max(field_g.width(idx)))
}

/// PredVar: the widest confidence interval of f or g anywhere in S_t.
pub fn predvar_step(
    grid: &GridDomain,
    field_f: &ConfidenceField,
    field_g: &ConfidenceField,
    h: f64,
) -> StepOutcome {
    let state = base_state(grid, field_f, field_g, h);
    let safe = safe_mask(field_g, h);
    let points = safe
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| grid.index(i))
        .collect::<Vec<_>>();
    pick(state, points, |idx| field_f.width(idx).max(field_g.width(idx)))
}
