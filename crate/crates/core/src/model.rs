//! Periodic VAR model representation, season/time indexing, the lifted
//! seasonal VAR form, causality and the moving-average expansion.
//!
//! Seasons are 1-based in every public signature. Calendar time `t = n*s + ν`
//! with cycle `n` 0-based and season `ν` in `1..=s`; times `t <= 0` belong to
//! the pre-sample.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};
use crate::linalg;

/// Margin below one required of the lifted spectral radius.
pub const CAUSAL_TOL: f64 = 1e-10;

/// Season (1-based) of calendar time `t`, valid for `t <= 0` as well.
pub fn season_of(t: i64, s: usize) -> usize {
    ((t - 1).rem_euclid(s as i64)) as usize + 1
}

/// `Y_t - μ(ν) = Σ_k Φ_k(ν) (Y_{t-k} - μ(ν_{t-k})) + ε_t` with season-varying
/// coefficients and innovation covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct PvarModel {
    s: usize,
    d: usize,
    phi: Vec<Vec<DMatrix<f64>>>,
    sigma: Vec<DMatrix<f64>>,
    mu: Vec<DVector<f64>>,
}

impl PvarModel {
    /// `phi[ν-1][k-1]` is `Φ_k(ν)`; `sigma[ν-1]` is `Σ_ε(ν)`.
    pub fn new(
        s: usize,
        d: usize,
        phi: Vec<Vec<DMatrix<f64>>>,
        sigma: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if s == 0 || d == 0 {
            return Err(Error::InvalidModel("s and d must be positive".into()));
        }
        if phi.len() != s || sigma.len() != s {
            return Err(Error::InvalidModel(format!(
                "expected {s} seasons, got {} coefficient lists and {} covariances",
                phi.len(),
                sigma.len()
            )));
        }
        for (v, lags) in phi.iter().enumerate() {
            for (k, m) in lags.iter().enumerate() {
                if m.shape() != (d, d) {
                    return Err(Error::InvalidModel(format!(
                        "Φ_{}({}) has shape {:?}, expected {d}x{d}",
                        k + 1,
                        v + 1,
                        m.shape()
                    )));
                }
            }
        }
        for (v, sig) in sigma.iter().enumerate() {
            check_spd(sig, d).map_err(|why| {
                Error::InvalidModel(format!("Σ_ε({}) {why}", v + 1))
            })?;
        }
        Ok(Self {
            s,
            d,
            phi,
            sigma,
            mu: vec![DVector::zeros(d); s],
        })
    }

    /// Attach per-season means `μ(ν)`.
    pub fn with_mean(mut self, mu: Vec<DVector<f64>>) -> Result<Self> {
        if mu.len() != self.s || mu.iter().any(|m| m.len() != self.d) {
            return Err(Error::InvalidModel("mean must have s vectors of length d".into()));
        }
        self.mu = mu;
        Ok(self)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn order(&self, season: usize) -> usize {
        self.phi[season - 1].len()
    }

    pub fn orders(&self) -> Vec<usize> {
        self.phi.iter().map(Vec::len).collect()
    }

    pub fn max_order(&self) -> usize {
        self.orders().into_iter().max().unwrap_or(0)
    }

    /// `Φ_lag(season)`, or `None` when `lag` is outside `1..=p(season)`.
    pub fn phi(&self, season: usize, lag: usize) -> Option<&DMatrix<f64>> {
        if lag == 0 {
            return None;
        }
        self.phi[season - 1].get(lag - 1)
    }

    pub fn phis(&self, season: usize) -> &[DMatrix<f64>] {
        &self.phi[season - 1]
    }

    pub fn sigma(&self, season: usize) -> &DMatrix<f64> {
        &self.sigma[season - 1]
    }

    pub fn sigmas(&self) -> &[DMatrix<f64>] {
        &self.sigma
    }

    pub fn mu(&self, season: usize) -> &DVector<f64> {
        &self.mu[season - 1]
    }

    /// `B(ν) = (Φ_1(ν), …, Φ_p(ν))`, a `d x dp` matrix.
    pub fn coefficient_block(&self, season: usize) -> DMatrix<f64> {
        let lags = self.phis(season);
        let mut b = DMatrix::zeros(self.d, self.d * lags.len());
        for (k, m) in lags.iter().enumerate() {
            b.view_mut((0, k * self.d), (self.d, self.d)).copy_from(m);
        }
        b
    }

    /// `β(ν) = vec B(ν)`.
    pub fn beta(&self, season: usize) -> DVector<f64> {
        linalg::vec_col(&self.coefficient_block(season))
    }

    /// Same model with seasons relabelled so that old season `shift+1` is new season 1.
    pub fn rotate_seasons(&self, shift: usize) -> Self {
        let idx = |v: usize| (v + shift) % self.s;
        Self {
            s: self.s,
            d: self.d,
            phi: (0..self.s).map(|v| self.phi[idx(v)].clone()).collect(),
            sigma: (0..self.s).map(|v| self.sigma[idx(v)].clone()).collect(),
            mu: (0..self.s).map(|v| self.mu[idx(v)].clone()).collect(),
        }
    }
}

fn check_spd(m: &DMatrix<f64>, d: usize) -> std::result::Result<(), String> {
    if m.shape() != (d, d) {
        return Err(format!("has shape {:?}, expected {d}x{d}", m.shape()));
    }
    let scale = m.abs().max().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).abs().max() > 1e-12 * scale {
        return Err("is not symmetric".into());
    }
    let eig = linalg::symmetrize(m).symmetric_eigenvalues();
    if eig.iter().any(|&e| e <= 0.0) {
        return Err("is not positive definite".into());
    }
    Ok(())
}

/// Observed periodic series with an optional pre-sample buffer.
///
/// `data` holds `Y_1 … Y_{N s}` as columns; `presample` holds the values at
/// `t = 1 - P, …, 0` in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSeries {
    s: usize,
    d: usize,
    presample: DMatrix<f64>,
    data: DMatrix<f64>,
}

impl PeriodicSeries {
    pub fn new(s: usize, presample: DMatrix<f64>, data: DMatrix<f64>) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidModel("s must be positive".into()));
        }
        let d = data.nrows();
        if data.ncols() == 0 || d == 0 {
            return Err(Error::EmptyInput);
        }
        if !data.ncols().is_multiple_of(s) {
            return Err(Error::InvalidModel(format!(
                "{} observations do not form complete cycles of length {s}",
                data.ncols()
            )));
        }
        let presample = if presample.ncols() == 0 {
            DMatrix::zeros(d, 0)
        } else {
            presample
        };
        if presample.nrows() != d {
            return Err(Error::DimensionMismatch(format!(
                "pre-sample has {} rows, data has {d}",
                presample.nrows()
            )));
        }
        Ok(Self {
            s,
            d,
            presample,
            data,
        })
    }

    pub fn without_presample(s: usize, data: DMatrix<f64>) -> Result<Self> {
        let d = data.nrows();
        Self::new(s, DMatrix::zeros(d, 0), data)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_cycles(&self) -> usize {
        self.data.ncols() / self.s
    }

    pub fn presample_len(&self) -> usize {
        self.presample.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn presample(&self) -> &DMatrix<f64> {
        &self.presample
    }

    /// `Y_t` for `1 - P <= t <= N s`.
    pub fn value(&self, t: i64) -> DVectorView<'_, f64> {
        if t >= 1 {
            self.data.column((t - 1) as usize)
        } else {
            let p = self.presample.ncols() as i64;
            assert!(t > -p, "time {t} precedes the pre-sample");
            self.presample.column((p - 1 + t) as usize)
        }
    }

    /// Move the first `cycles` cycles of data into the pre-sample buffer.
    pub fn consume_cycles(&self, cycles: usize) -> Result<Self> {
        let take = cycles * self.s;
        if take >= self.data.ncols() {
            return Err(Error::InsufficientData {
                season: 1,
                available: self.n_cycles(),
                required: cycles + 1,
            });
        }
        let p = self.presample.ncols();
        let mut pre = DMatrix::zeros(self.d, p + take);
        pre.view_mut((0, 0), (self.d, p)).copy_from(&self.presample);
        pre.view_mut((0, p), (self.d, take))
            .copy_from(&self.data.columns(0, take));
        let rest = self.data.columns(take, self.data.ncols() - take).into_owned();
        Self::new(self.s, pre, rest)
    }

    /// Same series with each value replaced by `f(t, season, value)`.
    pub fn map_values(&self, f: impl Fn(i64, usize, DVectorView<'_, f64>) -> DVector<f64>) -> Self {
        let p = self.presample.ncols() as i64;
        let mut pre = self.presample.clone();
        for c in 0..self.presample.ncols() {
            let t = c as i64 - p + 1;
            pre.set_column(c, &f(t, season_of(t, self.s), self.presample.column(c)));
        }
        let mut data = self.data.clone();
        for c in 0..self.data.ncols() {
            let t = c as i64 + 1;
            data.set_column(c, &f(t, season_of(t, self.s), self.data.column(c)));
        }
        Self {
            s: self.s,
            d: self.d,
            presample: pre,
            data,
        }
    }
}

/// Stacked one-cycle representation `Φ₀* Y*_n = Σ_k Φ_k* Y*_{n-k} + ε*_n` with
/// `Y*_n = (Y_{ns+s}, …, Y_{ns+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVar {
    pub phi0_star: DMatrix<f64>,
    pub phi_star: Vec<DMatrix<f64>>,
    pub p_star: usize,
}

impl LiftedVar {
    /// Companion matrix of the reduced form `Y*_n = Σ_k Φ₀*⁻¹Φ_k* Y*_{n-k} + e_n`.
    pub fn reduced_companion(&self) -> DMatrix<f64> {
        let m = self.phi0_star.nrows();
        let inv = self
            .phi0_star
            .clone()
            .try_inverse()
            .expect("Φ₀* is unit upper triangular");
        let p = self.p_star;
        let mut c = DMatrix::zeros(m * p, m * p);
        for (k, pk) in self.phi_star.iter().enumerate() {
            c.view_mut((0, k * m), (m, m)).copy_from(&(&inv * pk));
        }
        for k in 1..p {
            c.view_mut((k * m, (k - 1) * m), (m, m))
                .copy_from(&DMatrix::identity(m, m));
        }
        c
    }
}

pub fn build_lifted_var(model: &PvarModel) -> LiftedVar {
    let (s, d) = (model.s(), model.d());
    let p_star = model.max_order().div_ceil(s).max(1);
    let m = d * s;
    // block row i (0-based) carries season s - i
    let get = |season: usize, lag: i64| -> Option<&DMatrix<f64>> {
        if lag <= 0 {
            None
        } else {
            model.phi(season, lag as usize)
        }
    };
    let mut phi0 = DMatrix::identity(m, m);
    for i in 0..s {
        let season = s - i;
        for j in (i + 1)..s {
            if let Some(ph) = get(season, (j - i) as i64) {
                phi0.view_mut((i * d, j * d), (d, d)).copy_from(&(-ph));
            }
        }
    }
    let phi_star = (1..=p_star)
        .map(|k| {
            let mut pk = DMatrix::zeros(m, m);
            for i in 0..s {
                let season = s - i;
                for j in 0..s {
                    let lag = (k * s + j) as i64 - i as i64;
                    if let Some(ph) = get(season, lag) {
                        pk.view_mut((i * d, j * d), (d, d)).copy_from(ph);
                    }
                }
            }
            pk
        })
        .collect();
    LiftedVar {
        phi0_star: phi0,
        phi_star,
        p_star,
    }
}

/// Causality check; returns the flag and the lifted spectral radius.
pub fn is_causal(model: &PvarModel) -> (bool, f64) {
    let rho = linalg::spectral_radius(&build_lifted_var(model).reduced_companion());
    (rho < 1.0 - CAUSAL_TOL, rho)
}

/// `C_0(ν), …, C_{n_terms-1}(ν)` of `Y_{ns+ν} = Σ_i C_i(ν) ε_{ns+ν-i}`.
pub fn ma_coefficients(model: &PvarModel, season: usize, n_terms: usize) -> Result<Vec<DMatrix<f64>>> {
    let (causal, rho) = is_causal(model);
    if !causal {
        return Err(Error::NotCausal {
            spectral_radius: rho,
        });
    }
    Ok(ma_table(model, n_terms)
        .into_iter()
        .map(|mut row| row.swap_remove(season - 1))
        .collect())
}

/// `table[i][ν-1] = C_i(ν)` from the periodic recursion
/// `C_i(ν) = Σ_k Φ_k(ν) C_{i-k}(ν_{t-k})`.
pub(crate) fn ma_table(model: &PvarModel, n_terms: usize) -> Vec<Vec<DMatrix<f64>>> {
    let (s, d) = (model.s(), model.d());
    let mut table: Vec<Vec<DMatrix<f64>>> = Vec::with_capacity(n_terms);
    for i in 0..n_terms {
        let row = (1..=s)
            .map(|v| {
                if i == 0 {
                    return DMatrix::identity(d, d);
                }
                let mut c = DMatrix::zeros(d, d);
                for (k, ph) in model.phis(v).iter().enumerate() {
                    let lag = k + 1;
                    if lag > i {
                        break;
                    }
                    let prev_season = season_of(v as i64 - lag as i64, s);
                    c += ph * &table[i - lag][prev_season - 1];
                }
                c
            })
            .collect();
        table.push(row);
    }
    table
}
