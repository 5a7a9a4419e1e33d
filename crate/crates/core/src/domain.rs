//! Grid discretization of `[0, 1] x D_X` and the per-round safe-set geometry.
//!
//! Grid points are addressed by [`GridIndex`] `(s, x)`. The flat layout is
//! x-major, `flat = x * n_s + s`, so that the s-column of a fixed x is a
//! contiguous slice. Every argmax in the crate breaks ties toward the
//! smallest flat index.

use crate::confidence::ConfidenceField;
use crate::error::{Error, Result};

/// Position on the grid. Ordering matches flat order (x first, then s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub x: usize,
    pub s: usize,
}

impl GridIndex {
    pub fn new(s: usize, x: usize) -> Self {
        Self { x, s }
    }
}

/// Linearly spaced grid. Dimension 0 is the safety variable s on `[0, 1]`;
/// the remaining dimensions span D_X and are enumerated as a Cartesian
/// product with the last dimension varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    s_values: Vec<f64>,
    x_axes: Vec<Vec<f64>>,
    x_values: Vec<f64>,
    coords: Vec<f64>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect()
}

impl GridDomain {
    /// `bounds[i]` and `resolution[i]` describe dimension i; dimension 0 must be `[0, 1]`.
    pub fn build(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<Self> {
        if bounds.len() != resolution.len() {
            return Err(Error::config(format!(
                "{} bounds given for {} resolutions",
                bounds.len(),
                resolution.len()
            )));
        }
        if bounds.len() < 2 {
            return Err(Error::config(
                "domain needs the s dimension and at least one x dimension",
            ));
        }
        if bounds[0] != (0.0, 1.0) {
            return Err(Error::config(format!(
                "the safety dimension must span [0, 1], got [{}, {}]",
                bounds[0].0, bounds[0].1
            )));
        }
        for (i, (&(lo, hi), &n)) in bounds.iter().zip(resolution).enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::config(format!(
                    "dimension {i}: need lo < hi, got [{lo}, {hi}]"
                )));
            }
            if n < 2 {
                return Err(Error::config(format!(
                    "dimension {i}: resolution must be at least 2, got {n}"
                )));
            }
        }

        let s_values = linspace(0.0, 1.0, resolution[0]);
        let x_axes: Vec<Vec<f64>> = bounds[1..]
            .iter()
            .zip(&resolution[1..])
            .map(|(&(lo, hi), &n)| linspace(lo, hi, n))
            .collect();
        let d = x_axes.len();
        let n_x: usize = x_axes.iter().map(Vec::len).product();

        let mut x_values = Vec::with_capacity(n_x * d);
        let mut counter = vec![0usize; d];
        for _ in 0..n_x {
            x_values.extend(counter.iter().zip(&x_axes).map(|(&i, axis)| axis[i]));
            for k in (0..d).rev() {
                counter[k] += 1;
                if counter[k] < x_axes[k].len() {
                    break;
                }
                counter[k] = 0;
            }
        }

        let n_s = s_values.len();
        let mut coords = Vec::with_capacity(n_x * n_s * (d + 1));
        for x in 0..n_x {
            for &s in &s_values {
                coords.push(s);
                coords.extend_from_slice(&x_values[x * d..(x + 1) * d]);
            }
        }

        Ok(Self {
            s_values,
            x_axes,
            x_values,
            coords,
        })
    }

    pub fn n_s(&self) -> usize {
        self.s_values.len()
    }

    pub fn n_x(&self) -> usize {
        self.x_values.len() / self.x_dim()
    }

    /// Dimension d of D_X.
    pub fn x_dim(&self) -> usize {
        self.x_axes.len()
    }

    /// Full point dimension 1 + d.
    pub fn dim(&self) -> usize {
        self.x_dim() + 1
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.n_s() * self.n_x()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn x_axes(&self) -> &[Vec<f64>] {
        &self.x_axes
    }

    pub fn x_value(&self, x: usize) -> &[f64] {
        let d = self.x_dim();
        &self.x_values[x * d..(x + 1) * d]
    }

    pub fn flat(&self, idx: GridIndex) -> usize {
        idx.x * self.n_s() + idx.s
    }

    pub fn index(&self, flat: usize) -> GridIndex {
        GridIndex {
            x: flat / self.n_s(),
            s: flat % self.n_s(),
        }
    }

    /// Coordinates `[s, x_1, .., x_d]` of a grid point.
    pub fn point(&self, idx: GridIndex) -> &[f64] {
        let dim = self.dim();
        let f = self.flat(idx);
        &self.coords[f * dim..(f + 1) * dim]
    }

    /// All grid points packed in flat order.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// x index of the point whose per-axis indices are `axis_indices`.
    pub fn x_index(&self, axis_indices: &[usize]) -> Result<usize> {
        if axis_indices.len() != self.x_dim() {
            return Err(Error::contract("wrong number of axis indices"));
        }
        let mut x = 0;
        for (&i, axis) in axis_indices.iter().zip(&self.x_axes) {
            if i >= axis.len() {
                return Err(Error::contract(format!("axis index {i} out of range")));
            }
            x = x * axis.len() + i;
        }
        Ok(x)
    }
}

/// Free-function form of [`GridDomain::build`].
pub fn build_grid(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<GridDomain> {
    GridDomain::build(bounds, resolution)
}

/// Geometry of one round: surviving x columns, boundaries, and the candidate sets.
///
/// Per-x vectors are filled for every x in D_X, eliminated or not, so that
/// the harness can evaluate current best guesses everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct SafeState {
    pub round: usize,
    /// Membership in D_X^t.
    pub surviving: Vec<bool>,
    /// s-index of the safe boundary s_t^(x).
    pub boundary: Vec<usize>,
    /// Optimistic boundary s̲_t^(x), a continuous value in `[s_b, 1]`.
    pub optimistic_boundary: Vec<f64>,
    /// s-index of the current best guess ŝ_t^(x).
    pub maximizer: Vec<usize>,
    /// G_t, sorted in flat order.
    pub expanders: Vec<GridIndex>,
    /// M_t, sorted in flat order.
    pub maximizers: Vec<GridIndex>,
}

impl SafeState {
    pub fn n_surviving(&self) -> usize {
        self.surviving.iter().filter(|s| **s).count()
    }

    pub fn is_expander(&self, idx: GridIndex) -> bool {
        self.expanders.binary_search(&idx).is_ok()
    }

    pub fn is_maximizer(&self, idx: GridIndex) -> bool {
        self.maximizers.binary_search(&idx).is_ok()
    }

    /// G_t ∪ M_t in flat order, without duplicates.
    pub fn candidates(&self) -> Vec<GridIndex> {
        let mut all: Vec<GridIndex> = self
            .expanders
            .iter()
            .chain(&self.maximizers)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

/// S_t as a mask in flat order: UCB^g ≤ h, plus the whole s = 0 row.
pub fn safe_mask(field_g: &ConfidenceField, h: f64) -> Vec<bool> {
    let n_s = field_g.n_s();
    field_g
        .ucb_values()
        .iter()
        .enumerate()
        .map(|(i, u)| i % n_s == 0 || *u <= h)
        .collect()
}

/// Largest s-index with UCB^g ≤ h in column `x`, or 0 when none qualifies.
///
/// Failing indices below the returned one do not matter: monotonicity of g
/// in s bounds g there by g at the boundary.
pub fn safe_boundary(field_g: &ConfidenceField, h: f64, x: usize) -> usize {
    field_g
        .ucb_column(x)
        .iter()
        .rposition(|u| *u <= h)
        .unwrap_or(0)
}

/// Largest s in `[s_b, 1]` with `LCB^g(s_b, x) + L'_g (s - s_b) ≤ h`, solved in closed form.
pub fn optimistic_boundary(
    field_g: &ConfidenceField,
    grid: &GridDomain,
    boundary: usize,
    l_g_prime: f64,
    h: f64,
    x: usize,
) -> Result<f64> {
    if !(l_g_prime > 0.0 && l_g_prime.is_finite()) {
        return Err(Error::config(format!(
            "minimum growth rate of g must be positive, got {l_g_prime}"
        )));
    }
    let s_b = grid.s_values()[boundary];
    let slack = (h - field_g.lcb(GridIndex { s: boundary, x })).max(0.0);
    Ok((s_b + slack / l_g_prime).min(1.0))
}

/// argmax of the field's UCB over s-indices `0..=boundary` in column `x`, ties to the lowest index.
pub fn ucb_maximizer(field: &ConfidenceField, boundary: usize, x: usize) -> usize {
    argmax_first(&field.ucb_column(x)[..=boundary])
}

/// max LCB^f over the safe mask. The mask always contains the s = 0 row so this is finite.
pub fn best_safe_lcb(field_f: &ConfidenceField, mask: &[bool]) -> f64 {
    field_f
        .lcb_values()
        .iter()
        .zip(mask)
        .filter(|(_, m)| **m)
        .map(|(v, _)| *v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Index of the first maximum; panics on an empty slice.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
