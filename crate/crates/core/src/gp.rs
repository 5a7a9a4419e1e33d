//! Stationary kernels and exact Gaussian-process regression.
//!
//! Points are plain coordinate slices `[s, x_1, ..., x_d]`. A [`GpModel`]
//! keeps the lower Cholesky factor of `K + λI` in sync with its observation
//! set; every [`GpModel::add_observation`] refactors from scratch.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Jitter ladder tried, in order, when `K + λI` is not numerically positive definite.
const JITTER_LADDER: [f64; 8] = [0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4];

/// Queries per parallel work unit in [`GpModel::posterior_flat`].
const QUERY_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Matern52,
    SquaredExponential,
}

/// Kernel family plus output scale and per-dimension lengthscales.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    variance: f64,
    lengthscales: Vec<f64>,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, variance: f64, lengthscales: Vec<f64>) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::config(format!(
                "kernel variance must be positive, got {variance}"
            )));
        }
        if lengthscales.is_empty() {
            return Err(Error::config("kernel needs at least one lengthscale"));
        }
        if let Some(bad) = lengthscales.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(Error::config(format!(
                "kernel lengthscales must be positive, got {bad}"
            )));
        }
        Ok(Self {
            family,
            variance,
            lengthscales,
        })
    }

    /// Same lengthscale in every one of `dim` input dimensions.
    pub fn isotropic(
        family: KernelFamily,
        variance: f64,
        lengthscale: f64,
        dim: usize,
    ) -> Result<Self> {
        Self::new(family, variance, vec![lengthscale; dim])
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn lengthscales(&self) -> &[f64] {
        &self.lengthscales
    }

    /// Input dimension (1 + d).
    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    /// `k(a, b)`, checking that both points have the kernel's dimension.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != self.dim() || b.len() != self.dim() {
            return Err(Error::contract(format!(
                "kernel of dimension {} evaluated on points of dimension {} and {}",
                self.dim(),
                a.len(),
                b.len()
            )));
        }
        Ok(self.eval_unchecked(a, b))
    }

    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((ai, bi), l)| {
                let d = (ai - bi) / l;
                d * d
            })
            .sum();
        match self.family {
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                let sr = 5f64.sqrt() * r;
                self.variance * (1.0 + sr + 5.0 * r2 / 3.0) * (-sr).exp()
            }
            KernelFamily::SquaredExponential => self.variance * (-0.5 * r2).exp(),
        }
    }
}

/// `k(z1, z2)` for the given kernel.
pub fn kernel_eval(spec: &KernelSpec, z1: &[f64], z2: &[f64]) -> Result<f64> {
    spec.eval(z1, z2)
}

/// Dense Gram matrix `[k(p_i, p_j)]`, filled from the lower triangle so it is exactly symmetric.
pub fn gram_matrix<P: AsRef<[f64]>>(spec: &KernelSpec, points: &[P]) -> Result<DMatrix<f64>> {
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval(points[i].as_ref(), points[j].as_ref())?;
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(k)
}

/// One noisy evaluation of f or g.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub point: Vec<f64>,
    pub value: f64,
}

impl Observation {
    pub fn new(point: Vec<f64>, value: f64) -> Self {
        Self { point, value }
    }
}

/// Zero-mean GP with fixed hyperparameters.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelSpec,
    noise_variance: f64,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    /// Row-major lower factor of `K + (λ + jitter) I`.
    factor: Vec<f64>,
    alpha: Vec<f64>,
    jitter: f64,
}

impl GpModel {
    pub fn new(kernel: KernelSpec, noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::config(format!(
                "noise variance must be nonnegative, got {noise_variance}"
            )));
        }
        Ok(Self {
            kernel,
            noise_variance,
            points: Vec::new(),
            values: Vec::new(),
            factor: Vec::new(),
            alpha: Vec::new(),
            jitter: 0.0,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Jitter that had to be added on the diagonal at the last refactor (0 when none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn observations(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.values.iter().copied())
    }

    /// Adds one observation and refactors. On failure the model is left unchanged.
    pub fn add_observation(&mut self, obs: Observation) -> Result<()> {
        if obs.point.len() != self.kernel.dim() {
            return Err(Error::contract(format!(
                "observation of dimension {} added to a model of dimension {}",
                obs.point.len(),
                self.kernel.dim()
            )));
        }
        if !obs.value.is_finite() || obs.point.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract("observation contains non-finite values"));
        }
        self.points.push(obs.point);
        self.values.push(obs.value);
        let saved = (
            std::mem::take(&mut self.factor),
            std::mem::take(&mut self.alpha),
            self.jitter,
        );
        if let Err(e) = self.refactor() {
            self.points.pop();
            self.values.pop();
            (self.factor, self.alpha, self.jitter) = saved;
            return Err(e);
        }
        Ok(())
    }

    fn refactor(&mut self) -> Result<()> {
        let n = self.points.len();
        if n == 0 {
            self.factor.clear();
            self.alpha.clear();
            self.jitter = 0.0;
            return Ok(());
        }
        let gram = gram_matrix(&self.kernel, &self.points)?;
        let y = DVector::from_column_slice(&self.values);
        for &jitter in &JITTER_LADDER {
            let mut a = gram.clone();
            for i in 0..n {
                a[(i, i)] += self.noise_variance + jitter;
            }
            let Some(chol) = a.cholesky() else { continue };
            let alpha = chol.solve(&y);
            let l = chol.l();
            if alpha.iter().any(|v| !v.is_finite()) {
                continue;
            }
            let mut factor = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    factor[i * n + j] = l[(i, j)];
                }
            }
            self.factor = factor;
            self.alpha = alpha.iter().copied().collect();
            self.jitter = jitter;
            return Ok(());
        }
        Err(Error::Numerical {
            message: format!(
                "Cholesky of {n}x{n} Gram matrix failed with jitter up to {:e}",
                JITTER_LADDER[JITTER_LADDER.len() - 1]
            ),
            condition: f64::INFINITY,
        })
    }

    /// Rough condition number of `K + λI` from the Cholesky diagonal.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.len();
        if n == 0 {
            return 1.0;
        }
        let (lo, hi) = (0..n)
            .map(|i| self.factor[i * n + i])
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d), hi.max(d)));
        (hi / lo).powi(2)
    }

    /// Posterior means and standard deviations at each query point.
    pub fn posterior<P: AsRef<[f64]>>(&self, queries: &[P]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dim = self.kernel.dim();
        let mut coords = Vec::with_capacity(queries.len() * dim);
        for q in queries {
            let q = q.as_ref();
            if q.len() != dim {
                return Err(Error::contract(format!(
                    "query of dimension {} for a model of dimension {dim}",
                    q.len()
                )));
            }
            coords.extend_from_slice(q);
        }
        self.posterior_flat(&coords)
    }

    /// Same as [`GpModel::posterior`] with queries packed row by row into one slice.
    pub fn posterior_flat(&self, coords: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let dim = self.kernel.dim();
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::contract(format!(
                "packed query buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        let m = coords.len() / dim;
        let n = self.len();
        let mut means = vec![0.0; m];
        let mut stds = vec![0.0; m];

        means
            .par_chunks_mut(QUERY_CHUNK)
            .zip(stds.par_chunks_mut(QUERY_CHUNK))
            .zip(coords.par_chunks(QUERY_CHUNK * dim))
            .for_each(|((mu_out, sd_out), block)| {
                let mut kv = vec![0.0; n];
                let mut v = vec![0.0; n];
                for ((mu, sd), z) in mu_out.iter_mut().zip(sd_out).zip(block.chunks(dim)) {
                    let prior = self.kernel.eval_unchecked(z, z);
                    if n == 0 {
                        *mu = 0.0;
                        *sd = prior.sqrt();
                        continue;
                    }
                    for (k, p) in kv.iter_mut().zip(&self.points) {
                        *k = self.kernel.eval_unchecked(p, z);
                    }
                    *mu = kv.iter().zip(&self.alpha).map(|(a, b)| a * b).sum();
                    for i in 0..n {
                        let row = &self.factor[i * n..i * n + i];
                        let acc: f64 = row.iter().zip(&v[..i]).map(|(l, vj)| l * vj).sum();
                        v[i] = (kv[i] - acc) / self.factor[i * n + i];
                    }
                    let explained: f64 = v.iter().map(|x| x * x).sum();
                    *sd = (prior - explained).max(0.0).sqrt();
                }
            });

        if means.iter().chain(&stds).any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                message: "posterior produced non-finite values".into(),
                condition: self.condition_estimate(),
            });
        }
        Ok((means, stds))
    }

    /// `½ log det(I + K/λ)` over the observed points (uses the effective diagonal `λ + jitter`).
    pub fn empirical_info_gain(&self) -> f64 {
        let n = self.len();
        if n == 0 {
            return 0.0;
        }
        let log_det: f64 = (0..n).map(|i| self.factor[i * n + i].ln()).sum::<f64>() * 2.0;
        let gain = 0.5 * (log_det - n as f64 * (self.noise_variance + self.jitter).ln());
        gain.max(0.0)
    }
}
