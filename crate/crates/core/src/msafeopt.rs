//! The M-SafeOpt round: eliminate x columns, gate expansion of the safe
//! boundary, collect expanders G_t and maximizers M_t, and pick the action
//! with the largest confidence width.
//!
//! Four variants share the loop and differ in their elimination, expansion
//! and acquisition rules:
//!
//! | variant   | eliminate                    | expand                                  | acquisition on G_t / M_t |
//! |-----------|------------------------------|-----------------------------------------|--------------------------|
//! | Case 1    | no safe UCB beats best LCB, and no optimistic gain either | optimistic gain > best safe LCB over S_t | max(βσ_f, βσ_g) / βσ_f |
//! | Case 2    | never                        | optimistic gain > best safe LCB of the same x | as Case 1 |
//! | Case 3    | optimistic gain ≤ best LCB   | always                                  | max(βσ_f, βσ_g) / none |
//! | M-SafeUCB | never                        | unless the boundary already sits at s = 1 | βσ_g / none |
//!
//! "Optimistic gain" is `UCB^f(s_b, x) + L_f (s̲ - s_b)`, the best f-value
//! reachable by growing the boundary up to the optimistic boundary s̲.

use crate::confidence::{BetaSchedule, ConfidenceField};
use crate::domain::{
    best_safe_lcb, optimistic_boundary, safe_boundary, safe_mask, ucb_maximizer, GridDomain,
    GridIndex, SafeState,
};
use crate::error::{Error, Result};
use crate::gp::GpModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// Global safe maximization.
    Case1,
    /// Best safe s for every x.
    Case2,
    /// Global maximization when f is also monotone in s.
    Case3,
    /// Safe-boundary identification using g alone.
    MSafeUcb,
}

impl Case {
    fn tracks_maximizers(self) -> bool {
        matches!(self, Case::Case1 | Case::Case2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgoConfig {
    pub case: Case,
    /// Maximum growth rate of f along s.
    pub l_f: f64,
    /// Minimum growth rate of g along s.
    pub l_g_prime: f64,
    /// Applied once at construction: `L_f <- c L_f`, `L'_g <- L'_g / c`.
    pub growth_scale: f64,
    pub refined_acq: bool,
    /// Re-run elimination over the whole of D_X every round instead of over D_X^{t-1}.
    pub robust_elim: bool,
    pub h: f64,
    pub beta_f: BetaSchedule,
    pub beta_g: BetaSchedule,
}

impl AlgoConfig {
    /// Config with c = 1, plain acquisition, robust elimination and β = 3 for both functions.
    pub fn new(case: Case, l_f: f64, l_g_prime: f64, h: f64) -> Self {
        Self {
            case,
            l_f,
            l_g_prime,
            growth_scale: 1.0,
            refined_acq: false,
            robust_elim: true,
            h,
            beta_f: BetaSchedule::default(),
            beta_g: BetaSchedule::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_f >= 0.0 && self.l_f.is_finite()) {
            return Err(Error::config(format!("L_f must be nonnegative, got {}", self.l_f)));
        }
        if !(self.l_g_prime > 0.0 && self.l_g_prime.is_finite()) {
            return Err(Error::config(format!(
                "L'_g must be positive, got {}",
                self.l_g_prime
            )));
        }
        if !(self.growth_scale > 0.0 && self.growth_scale.is_finite()) {
            return Err(Error::config(format!(
                "growth scale must be positive, got {}",
                self.growth_scale
            )));
        }
        if !self.h.is_finite() {
            return Err(Error::config("safety threshold must be finite"));
        }
        self.beta_f.validate()?;
        self.beta_g.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectedFrom {
    Expander,
    Maximizer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundDecision {
    pub selected: GridIndex,
    pub selected_from: SelectedFrom,
    pub acq_value: f64,
    pub state: SafeState,
}

/// Result of one round: an action, or the reason no candidate was left.
#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Select(RoundDecision),
    Exhausted { round: usize, reason: String },
}

impl StepOutcome {
    pub fn decision(&self) -> Option<&RoundDecision> {
        match self {
            StepOutcome::Select(d) => Some(d),
            StepOutcome::Exhausted { .. } => None,
        }
    }
}

/// Per-round quantities shared by the elimination and expansion tests.
#[derive(Debug, Clone)]
pub struct Geometry<'a> {
    pub field_f: &'a ConfidenceField,
    pub field_g: &'a ConfidenceField,
    pub s_values: &'a [f64],
    pub l_f: f64,
    /// S_t in flat order.
    pub safe: Vec<bool>,
    /// max LCB^f over S_t, across all of D_X.
    pub best_safe_lcb: f64,
    pub boundary: Vec<usize>,
    pub optimistic: Vec<f64>,
}

impl<'a> Geometry<'a> {
    pub fn compute(
        grid: &'a GridDomain,
        field_f: &'a ConfidenceField,
        field_g: &'a ConfidenceField,
        h: f64,
        l_f: f64,
        l_g_prime: f64,
    ) -> Result<Self> {
        let (n_s, n_x) = (grid.n_s(), grid.n_x());
        for f in [field_f, field_g] {
            if f.n_s() != n_s || f.n_x() != n_x {
                return Err(Error::contract(format!(
                    "field of shape {}x{} used with a {n_s}x{n_x} grid",
                    f.n_s(),
                    f.n_x()
                )));
            }
        }
        let safe = safe_mask(field_g, h);
        let best = best_safe_lcb(field_f, &safe);
        let boundary: Vec<usize> = (0..n_x).map(|x| safe_boundary(field_g, h, x)).collect();
        let optimistic = boundary
            .iter()
            .enumerate()
            .map(|(x, &b)| optimistic_boundary(field_g, grid, b, l_g_prime, h, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            field_f,
            field_g,
            s_values: grid.s_values(),
            l_f,
            safe,
            best_safe_lcb: best,
            boundary,
            optimistic,
        })
    }

    /// `UCB^f(s_b, x) + L_f |s̲ - s_b|`.
    pub fn optimistic_gain(&self, x: usize) -> f64 {
        let b = self.boundary[x];
        let s_b = self.s_values[b];
        self.field_f.ucb(GridIndex { s: b, x }) + self.l_f * (self.optimistic[x] - s_b).abs()
    }

    /// Every safe s of this column has UCB^f strictly below the best safe LCB^f.
    pub fn safe_part_dominated(&self, x: usize) -> bool {
        let b = self.boundary[x];
        let best_ucb = self.field_f.ucb_column(x)[..=b]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        best_ucb < self.best_safe_lcb
    }

    /// Growing the boundary of this column cannot beat the best safe LCB^f.
    pub fn expansion_dominated(&self, x: usize) -> bool {
        self.optimistic_gain(x) <= self.best_safe_lcb
    }

    pub fn elim_case1(&self, x: usize) -> bool {
        self.safe_part_dominated(x) && self.expansion_dominated(x)
    }

    pub fn elim_case3(&self, x: usize) -> bool {
        self.expansion_dominated(x)
    }

    pub fn expd_case1(&self, x: usize) -> bool {
        self.optimistic_gain(x) > self.best_safe_lcb
    }

    /// Compares against the best LCB^f among safe s of the same x only.
    pub fn expd_case2(&self, x: usize) -> bool {
        let b = self.boundary[x];
        let own_best = self.field_f.lcb_column(x)[..=b]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.optimistic_gain(x) > own_best
    }
}

/// One M-SafeOpt run. Holds D_X^{t-1} between rounds when elimination is not robust.
#[derive(Debug, Clone)]
pub struct MSafeOpt {
    config: AlgoConfig,
    l_f: f64,
    l_g_prime: f64,
    surviving: Option<Vec<bool>>,
    round: usize,
}

impl MSafeOpt {
    pub fn new(config: AlgoConfig) -> Result<Self> {
        config.validate()?;
        let l_f = config.l_f * config.growth_scale;
        let l_g_prime = config.l_g_prime / config.growth_scale;
        Ok(Self {
            config,
            l_f,
            l_g_prime,
            surviving: None,
            round: 0,
        })
    }

    pub fn config(&self) -> &AlgoConfig {
        &self.config
    }

    /// `(L_f, L'_g)` after the growth scale has been applied.
    pub fn growth_bounds(&self) -> (f64, f64) {
        (self.l_f, self.l_g_prime)
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.round
    }

    /// Builds both confidence fields from the models and runs one round.
    pub fn step(
        &mut self,
        grid: &GridDomain,
        model_f: &GpModel,
        model_g: &GpModel,
    ) -> Result<StepOutcome> {
        let t = self.round + 1;
        let beta_f = self.config.beta_f.beta_at(t, info_gain_if(&self.config.beta_f, model_f))?;
        let beta_g = self.config.beta_g.beta_at(t, info_gain_if(&self.config.beta_g, model_g))?;
        let field_f = ConfidenceField::build(model_f, grid, beta_f)?;
        let field_g = ConfidenceField::build(model_g, grid, beta_g)?;
        self.decide(grid, &field_f, &field_g)
    }

    /// One round on precomputed fields.
    pub fn decide(
        &mut self,
        grid: &GridDomain,
        field_f: &ConfidenceField,
        field_g: &ConfidenceField,
    ) -> Result<StepOutcome> {
        self.round += 1;
        let round = self.round;
        let case = self.config.case;
        let geo = Geometry::compute(
            grid,
            field_f,
            field_g,
            self.config.h,
            self.l_f,
            self.l_g_prime,
        )?;
        let n_x = grid.n_x();
        let last_s = grid.n_s() - 1;

        let candidates = match (&self.surviving, self.config.robust_elim) {
            (Some(prev), false) => prev.clone(),
            _ => vec![true; n_x],
        };
        let surviving: Vec<bool> = (0..n_x)
            .map(|x| {
                candidates[x]
                    && !match case {
                        Case::Case1 => geo.elim_case1(x),
                        Case::Case3 => geo.elim_case3(x),
                        Case::Case2 | Case::MSafeUcb => false,
                    }
            })
            .collect();

        let best_guess_field = if case == Case::MSafeUcb { field_g } else { field_f };
        let maximizer: Vec<usize> = (0..n_x)
            .map(|x| ucb_maximizer(best_guess_field, geo.boundary[x], x))
            .collect();

        let expanders: Vec<GridIndex> = (0..n_x)
            .filter(|&x| surviving[x])
            .filter(|&x| match case {
                Case::Case1 => geo.expd_case1(x),
                Case::Case2 => geo.expd_case2(x),
                Case::Case3 => true,
                Case::MSafeUcb => geo.boundary[x] < last_s,
            })
            .map(|x| GridIndex {
                s: geo.boundary[x],
                x,
            })
            .collect();
        let maximizers: Vec<GridIndex> = if case.tracks_maximizers() {
            (0..n_x)
                .filter(|&x| surviving[x])
                .map(|x| GridIndex { s: maximizer[x], x })
                .collect()
        } else {
            Vec::new()
        };

        if !self.config.robust_elim {
            self.surviving = Some(surviving.clone());
        }
        let state = SafeState {
            round,
            surviving,
            boundary: geo.boundary,
            optimistic_boundary: geo.optimistic,
            maximizer,
            expanders,
            maximizers,
        };

        let mut best: Option<(GridIndex, f64)> = None;
        for idx in state.candidates() {
            let a = self.acquisition(field_f, field_g, &state, idx);
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((idx, a));
            }
        }
        let Some((selected, acq_value)) = best else {
            let reason = if state.n_surviving() == 0 {
                "every x was eliminated"
            } else {
                "no expander or maximizer left"
            };
            return Ok(StepOutcome::Exhausted {
                round,
                reason: reason.into(),
            });
        };
        let selected_from = if state.is_expander(selected) {
            SelectedFrom::Expander
        } else {
            SelectedFrom::Maximizer
        };
        Ok(StepOutcome::Select(RoundDecision {
            selected,
            selected_from,
            acq_value,
            state,
        }))
    }

    /// Acquisition value of `point` given the round's candidate sets.
    pub fn acquisition(
        &self,
        field_f: &ConfidenceField,
        field_g: &ConfidenceField,
        state: &SafeState,
        point: GridIndex,
    ) -> f64 {
        let in_g = state.is_expander(point);
        let in_m = state.is_maximizer(point);
        let wf = field_f.width(point);
        let wg = field_g.width(point);
        let expander_value = if self.config.refined_acq {
            wf.max(self.l_f / self.l_g_prime * wg)
        } else {
            wf.max(wg)
        };
        match self.config.case {
            Case::MSafeUcb if in_g => wg,
            Case::Case1 | Case::Case2 | Case::Case3 if in_g => expander_value,
            Case::Case1 | Case::Case2 if in_m => wf,
            _ => 0.0,
        }
    }
}

fn info_gain_if(schedule: &BetaSchedule, model: &GpModel) -> f64 {
    if schedule.needs_info_gain() {
        model.empirical_info_gain()
    } else {
        0.0
    }
}
