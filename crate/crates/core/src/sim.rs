//! Seeded strong and weak periodic white noise and PVAR sample paths.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{is_causal, season_of, PeriodicSeries, PvarModel};

pub const DEFAULT_BURNIN_CYCLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum NoiseKind {
    /// iid Gaussian with covariance `Σ_ε(ν)`.
    StrongGaussian,
    /// `M_νᵀ (η_t ⊙ η_{t-1} ⊙ … ⊙ η_{t-m})` with iid standard normal `η`.
    WeakProduct { m: usize },
    /// All-zero innovations; the `Σ → 0` limit, used as a test hook.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    /// Per-season covariances; `None` means "take them from the model".
    pub sigma: Option<Vec<DMatrix<f64>>>,
}

impl NoiseSpec {
    pub fn strong() -> Self {
        Self {
            kind: NoiseKind::StrongGaussian,
            sigma: None,
        }
    }

    pub fn weak(m: usize) -> Self {
        Self {
            kind: NoiseKind::WeakProduct { m },
            sigma: None,
        }
    }

    pub fn zero() -> Self {
        Self {
            kind: NoiseKind::Zero,
            sigma: None,
        }
    }

    pub fn with_sigma(mut self, sigma: Vec<DMatrix<f64>>) -> Self {
        self.sigma = Some(sigma);
        self
    }
}

/// Upper-triangular `M` with positive diagonal and `MᵀM = Σ`.
pub fn cholesky_upper(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = sigma.nrows();
    if sigma.ncols() != d {
        return Err(Error::DimensionMismatch("covariance must be square".into()));
    }
    let mut m = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let mut pivot = sigma[(j, j)];
        for k in 0..j {
            pivot -= m[(k, j)] * m[(k, j)];
        }
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
        }
        let diag = pivot.sqrt();
        m[(j, j)] = diag;
        for c in (j + 1)..d {
            let mut v = sigma[(j, c)];
            for k in 0..j {
                v -= m[(k, j)] * m[(k, c)];
            }
            m[(j, c)] = v / diag;
        }
    }
    Ok(m)
}

/// Innovations for `n_cycles` full cycles, as a `d x (n_cycles s)` matrix whose
/// column `k` is `ε_{k+1}`. Covariances default to the identity when the spec
/// carries none.
pub fn gen_noise(spec: &NoiseSpec, s: usize, d: usize, n_cycles: usize, seed: u64) -> Result<DMatrix<f64>> {
    let sigma = match &spec.sigma {
        Some(sig) => sig.clone(),
        None => vec![DMatrix::identity(d, d); s],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    noise_path(spec.kind, &sigma, n_cycles * s, &mut rng)
}

fn noise_path(kind: NoiseKind, sigma: &[DMatrix<f64>], len: usize, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let s = sigma.len();
    let d = sigma.first().map_or(0, DMatrix::nrows);
    let factors = sigma.iter().map(cholesky_upper).collect::<Result<Vec<_>>>()?;
    let m = match kind {
        NoiseKind::Zero => return Ok(DMatrix::zeros(d, len)),
        NoiseKind::StrongGaussian => 0,
        NoiseKind::WeakProduct { m } => m,
    };
    // one η stream per channel in calendar time, m values of warm-up memory
    let mut eta = DMatrix::<f64>::zeros(d, len + m);
    for c in 0..len + m {
        for i in 0..d {
            eta[(i, c)] = StandardNormal.sample(rng);
        }
    }
    let mut out = DMatrix::zeros(d, len);
    let mut prod = DVector::zeros(d);
    for k in 0..len {
        for i in 0..d {
            prod[i] = (0..=m).map(|j| eta[(i, k + m - j)]).product();
        }
        let season = k % s;
        out.set_column(k, &(factors[season].transpose() * &prod));
    }
    Ok(out)
}

/// Run the centered recursion on a given innovation path, starting from
/// zero deviations. Column `k` of the result is `Y_{k+1} - μ(ν)`.
pub fn filter(model: &PvarModel, noise: &DMatrix<f64>) -> DMatrix<f64> {
    let (s, d) = (model.s(), model.d());
    let len = noise.ncols();
    let mut y = DMatrix::<f64>::zeros(d, len);
    for k in 0..len {
        let season = k % s + 1;
        let mut v = noise.column(k).into_owned();
        for (lag, ph) in model.phis(season).iter().enumerate() {
            let lag = lag + 1;
            if lag <= k {
                v += ph * y.column(k - lag);
            }
        }
        y.set_column(k, &v);
    }
    y
}

/// Simulate `n_cycles` cycles after discarding `burnin_cycles`, with a
/// pre-sample buffer of `max_ν p(ν)` observations.
pub fn simulate(
    model: &PvarModel,
    spec: &NoiseSpec,
    n_cycles: usize,
    burnin_cycles: usize,
    seed: u64,
) -> Result<PeriodicSeries> {
    let (causal, rho) = is_causal(model);
    if !causal {
        return Err(Error::NotCausal { spectral_radius: rho });
    }
    let (s, d) = (model.s(), model.d());
    let sigma = spec.sigma.clone().unwrap_or_else(|| model.sigmas().to_vec());
    if sigma.len() != s {
        return Err(Error::DimensionMismatch(format!(
            "noise has {} covariances for {s} seasons",
            sigma.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = (burnin_cycles + n_cycles) * s;
    let eps = noise_path(spec.kind, &sigma, total, &mut rng)?;
    let centered = filter(model, &eps);

    let start = burnin_cycles * s;
    let p = model.max_order();
    let mut pre = DMatrix::zeros(d, p);
    for c in 0..p {
        // presample column c is time t = c + 1 - p relative to the first kept value
        let t = c as i64 + 1 - p as i64;
        let idx = start as i64 + t - 1;
        let season = season_of(t, s);
        let dev = if idx >= 0 {
            centered.column(idx as usize).into_owned()
        } else {
            DVector::zeros(d)
        };
        pre.set_column(c, &(dev + model.mu(season)));
    }
    let mut data = centered.columns(start, n_cycles * s).into_owned();
    for k in 0..data.ncols() {
        let season = k % s + 1;
        let mut col = data.column_mut(k);
        col += model.mu(season);
    }
    PeriodicSeries::new(s, pre, data)
}
