//! Second-moment matrices of the regressors, the score process and its
//! long-run variance, and the covariance matrices built from them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{FitResult, MAX_DESIGN_CONDITION};
use crate::linalg::{self, kron};

/// Condition number above which `Φ̂_r(1)` is treated as singular.
pub const MAX_UNIT_CONDITION: f64 = 1e10;

/// `(1/N) Σ_n X_n X_nᵀ` for a `dp x N` design block.
pub fn omega_hat(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.ncols().max(1);
    linalg::symmetrize(&(x * x.transpose())) / n as f64
}

/// Scores `Ŵ_n = X_n ⊗ ε̂_n` as columns of a `d²p x N` matrix.
pub fn scores(x: &DMatrix<f64>, residuals: &DMatrix<f64>) -> DMatrix<f64> {
    let (dp, n) = x.shape();
    let d = residuals.nrows();
    let mut w = DMatrix::zeros(d * dp, n);
    for c in 0..n {
        for j in 0..dp {
            let xj = x[(j, c)];
            for i in 0..d {
                w[(j * d + i, c)] = xj * residuals[(i, c)];
            }
        }
    }
    w
}

/// Per-season score matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSeries {
    pub seasons: Vec<DMatrix<f64>>,
}

impl ScoreSeries {
    pub fn season(&self, season: usize) -> &DMatrix<f64> {
        &self.seasons[season - 1]
    }
}

pub fn score_series(fit: &FitResult) -> ScoreSeries {
    ScoreSeries {
        seasons: fit
            .seasons
            .iter()
            .map(|f| scores(&f.design.x, &f.residuals))
            .collect(),
    }
}

/// `Λ̂_h = (1/N) Σ_{n=h}^{N-1} Ŵ_n Ŵ_{n-h}ᵀ`, with `Λ̂_{-h} = Λ̂_hᵀ`.
pub fn lambda_hat(w: &DMatrix<f64>, h: i64) -> Result<DMatrix<f64>> {
    let n = w.ncols();
    let lag = h.unsigned_abs() as usize;
    if lag >= n {
        return Err(Error::LagOutOfRange { lag: h, n });
    }
    if h == 0 {
        return Ok(linalg::symmetrize(&(w * w.transpose())) / n as f64);
    }
    let m = cross_moment(w, w, lag);
    Ok(if h > 0 { m } else { m.transpose() })
}

/// `(1/N) Σ_{n=h}^{N-1} a_n b_{n-h}ᵀ` for `h ≥ 0`.
fn cross_moment(a: &DMatrix<f64>, b: &DMatrix<f64>, h: usize) -> DMatrix<f64> {
    let n = a.ncols();
    let len = n - h;
    a.columns(h, len) * b.columns(0, len).transpose() / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    Rectangular,
    Bartlett,
    Parzen,
    QuadraticSpectral,
}

impl KernelKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "rect" | "rectangular" | "truncated" => Self::Rectangular,
            "bartlett" | "bar" => Self::Bartlett,
            "parzen" | "par" => Self::Parzen,
            "qs" | "quadratic-spectral" => Self::QuadraticSpectral,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rectangular => "rect",
            Self::Bartlett => "bartlett",
            Self::Parzen => "parzen",
            Self::QuadraticSpectral => "qs",
        }
    }

    /// Support used for truncation. The quadratic-spectral window has
    /// unbounded support and is cut at 10, where its envelope
    /// `25 / (12 π² x²)` is about 2e-3.
    pub fn support(self) -> f64 {
        match self {
            Self::QuadraticSpectral => 10.0,
            _ => 1.0,
        }
    }
}

/// Bandwidth rules; `N` is the number of cycles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
#[derive(Default)]
pub enum Bandwidth {
    /// `1 / ln N`
    Log,
    /// `1 / (⌊4 (N/100)^{2/9}⌋ + 1)`
    NeweyWest,
    /// `1 / (⌊N^{1/4}⌋ + 1)`
    QuarterRoot,
    /// `1 / (⌊0.75 N^{1/3}⌋ + 1)`
    #[default]
    Andrews,
    /// `1 / (⌊1.3 N^{1/2}⌋ + 1)`
    SquareRoot,
    /// `1 / N`
    InverseN,
    Fixed(f64),
}


impl Bandwidth {
    pub fn value(self, n: usize) -> f64 {
        let nf = n as f64;
        let inv = |x: f64| 1.0 / (x.floor() + 1.0);
        match self {
            Self::Log => 1.0 / nf.ln(),
            Self::NeweyWest => inv(4.0 * (nf / 100.0).powf(2.0 / 9.0)),
            Self::QuarterRoot => inv(nf.powf(0.25)),
            Self::Andrews => inv(0.75 * nf.cbrt()),
            Self::SquareRoot => inv(1.3 * nf.sqrt()),
            Self::InverseN => 1.0 / nf,
            Self::Fixed(b) => b,
        }
    }

    /// Accepts a rule name or a number, optionally written as `1/k`.
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim().to_ascii_lowercase();
        let rule = match t.as_str() {
            "log" | "ln" => Self::Log,
            "nw" | "newey-west" => Self::NeweyWest,
            "quarter" | "n14" => Self::QuarterRoot,
            "andrews" => Self::Andrews,
            "sqrt" | "n12" => Self::SquareRoot,
            "inverse-n" | "1/n" => Self::InverseN,
            _ => {
                let b = match t.split_once('/') {
                    Some((num, den)) => num.trim().parse::<f64>().ok()? / den.trim().parse::<f64>().ok()?,
                    None => t.parse::<f64>().ok()?,
                };
                return (b.is_finite() && b > 0.0).then_some(Self::Fixed(b));
            }
        };
        Some(rule)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, bandwidth: f64) -> Self {
        Self { kind, bandwidth }
    }

    pub fn weight(&self, x: f64) -> f64 {
        kernel_weight(self.kind, x)
    }

    /// `T_N = ⌊a / b_N⌋`, capped at `N - 1`.
    pub fn truncation(&self, n: usize) -> usize {
        let raw = self.kind.support() / self.bandwidth;
        // 1/(1/21) evaluates to 20.999… in floating point
        let lag = (raw * (1.0 + 1e-12)).floor();
        if !lag.is_finite() || lag >= n as f64 {
            n.saturating_sub(1)
        } else {
            lag.max(0.0) as usize
        }
    }
}

pub fn kernel_weight(kind: KernelKind, x: f64) -> f64 {
    let ax = x.abs();
    match kind {
        KernelKind::Rectangular => f64::from(ax <= 1.0),
        KernelKind::Bartlett => (1.0 - ax).max(0.0),
        KernelKind::Parzen => {
            if ax <= 0.5 {
                1.0 - 6.0 * ax * ax + 6.0 * ax * ax * ax
            } else if ax <= 1.0 {
                2.0 * (1.0 - ax).powi(3)
            } else {
                0.0
            }
        }
        KernelKind::QuadraticSpectral => {
            if ax == 0.0 {
                return 1.0;
            }
            if ax > kind.support() {
                return 0.0;
            }
            let z = 6.0 * std::f64::consts::PI * x / 5.0;
            25.0 / (12.0 * std::f64::consts::PI.powi(2) * x * x) * (z.sin() / z - z.cos())
        }
    }
}

/// `Σ_{|h| ≤ T_N} f(h b_N) Λ̂_h`.
pub fn psi_hac(w: &DMatrix<f64>, spec: &KernelSpec) -> DMatrix<f64> {
    let n = w.ncols();
    if n == 0 {
        return DMatrix::zeros(w.nrows(), w.nrows());
    }
    let mut psi = linalg::symmetrize(&(w * w.transpose())) / n as f64;
    for h in 1..=spec.truncation(n) {
        let f = spec.weight(h as f64 * spec.bandwidth);
        if f == 0.0 {
            continue;
        }
        let lam = cross_moment(w, w, h);
        psi += (&lam + lam.transpose()) * f;
    }
    psi
}

/// Kernel-weighted sum of `(1/N) Σ_n Ŵ_n(ν) Ŵ_{n-h}(ν')ᵀ` over `|h| ≤ T_N`.
pub fn psi_cross_hac(wa: &DMatrix<f64>, wb: &DMatrix<f64>, spec: &KernelSpec) -> Result<DMatrix<f64>> {
    if wa.ncols() != wb.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "score series lengths {} and {} differ",
            wa.ncols(),
            wb.ncols()
        )));
    }
    let n = wa.ncols();
    if n == 0 {
        return Ok(DMatrix::zeros(wa.nrows(), wb.nrows()));
    }
    let mut psi = cross_moment(wa, wb, 0);
    for h in 1..=spec.truncation(n) {
        let f = spec.weight(h as f64 * spec.bandwidth);
        if f == 0.0 {
            continue;
        }
        psi += (cross_moment(wa, wb, h) + cross_moment(wb, wa, h).transpose()) * f;
    }
    Ok(psi)
}

/// Default upper bound for the autoregressive order search.
pub fn default_r_max(n: usize) -> usize {
    ((n as f64).cbrt() * (1.0 + 1e-12)).floor() as usize
}

/// Stack `r` lags: column `c` holds `(W_{r0+c-1}; …; W_{r0+c-r})`.
fn lag_design(w: &DMatrix<f64>, r: usize, start: usize) -> DMatrix<f64> {
    let (q, n) = w.shape();
    let len = n - start;
    let mut x = DMatrix::zeros(q * r, len);
    for k in 1..=r {
        x.view_mut(((k - 1) * q, 0), (q, len))
            .copy_from(&w.columns(start - k, len));
    }
    x
}

/// Order minimising `log det Σ̂_u(r) + 2 r q² / N_eff` over `0..=r_max`, all
/// candidates fitted on the common sample `n = r_max..N-1`.
pub fn select_ar_order_aic(w: &DMatrix<f64>, r_max: usize) -> usize {
    let (q, n) = w.shape();
    if r_max == 0 || q == 0 || n <= r_max {
        return 0;
    }
    let n_eff = n - r_max;
    let y = w.columns(r_max, n_eff);
    let x = lag_design(w, r_max, r_max);
    let yy = y * y.transpose();
    let xy = &x * y.transpose();
    let xx = &x * x.transpose();
    let mut best = (f64::INFINITY, 0);
    for r in 0..=r_max {
        let qr = q * r;
        if n_eff < qr + 1 {
            break;
        }
        let resid = if r == 0 {
            yy.clone()
        } else {
            let g = linalg::symmetrize(&xx.view((0, 0), (qr, qr)).into_owned());
            let Some(chol) = g.cholesky() else { continue };
            let c = xy.rows(0, qr).into_owned();
            &yy - c.transpose() * chol.solve(&c)
        };
        let cov = linalg::symmetrize(&resid) / n_eff as f64;
        let Some(chol) = cov.cholesky() else { continue };
        let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let aic = logdet + 2.0 * (r * q * q) as f64 / n_eff as f64;
        if aic < best.0 {
            best = (aic, r);
        }
    }
    best.1
}

/// Autoregressive order used by the spectral estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule", content = "value")]
#[derive(Default)]
pub enum ArOrder {
    Fixed(usize),
    /// AIC search over `0..=⌊N^{1/3}⌋`.
    #[default]
    Aic,
    /// AIC search over `0..=r_max`.
    AicUpTo(usize),
}


impl ArOrder {
    pub fn resolve(self, w: &DMatrix<f64>) -> usize {
        match self {
            Self::Fixed(r) => r,
            Self::Aic | Self::AicUpTo(_) => {
                let n = w.ncols();
                let bound = match self {
                    Self::AicUpTo(r) => r,
                    _ => default_r_max(n),
                };
                select_ar_order_aic(w, bound.min((n / 2).saturating_sub(1)))
            }
        }
    }

    /// `aic`, `aic:R` or a fixed order.
    pub fn parse(text: &str) -> Option<Self> {
        let t = text.trim().to_ascii_lowercase();
        if t == "aic" {
            return Some(Self::Aic);
        }
        if let Some(r) = t.strip_prefix("aic:") {
            return r.parse().ok().map(Self::AicUpTo);
        }
        t.parse().ok().map(Self::Fixed)
    }
}

/// `Φ̂_r(1)⁻¹ Σ̂_u Φ̂_r(1)⁻ᵀ` from a VAR(r) fitted by least squares to the scores.
pub fn psi_spectral(w: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let (q, n) = w.shape();
    if r == 0 {
        return lambda_hat(w, 0);
    }
    if n < r || n - r < q * r + 1 {
        return Err(Error::InsufficientData {
            season: 0,
            available: n.saturating_sub(r),
            required: q * r + 1,
        });
    }
    let len = n - r;
    let y = w.columns(r, len);
    let x = lag_design(w, r, r);
    let gram = &x * x.transpose();
    let condition = linalg::spd_condition(&gram);
    if condition > MAX_DESIGN_CONDITION {
        return Err(Error::SingularDesign { season: 0, condition });
    }
    let chol = linalg::symmetrize(&gram)
        .cholesky()
        .ok_or(Error::SingularDesign { season: 0, condition })?;
    let a = chol.solve(&(&x * y.transpose())).transpose();
    let u = y - &a * &x;
    let sigma_u = linalg::symmetrize(&(&u * u.transpose())) / len as f64;
    let mut unit = DMatrix::identity(q, q);
    for k in 0..r {
        unit -= a.columns(k * q, q);
    }
    let condition = linalg::condition(&unit);
    if !(condition <= MAX_UNIT_CONDITION) {
        return Err(Error::NearSingularUnit { condition });
    }
    let inv = unit.try_inverse().ok_or(Error::NearSingularUnit { condition })?;
    Ok(linalg::symmetrize(&(&inv * sigma_u * inv.transpose())))
}

fn invert_omega(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    linalg::spd_inverse(omega, MAX_DESIGN_CONDITION).ok_or(Error::SingularDesign {
        season: 0,
        condition: linalg::spd_condition(omega),
    })
}

/// `Ω⁻¹ ⊗ Σ`.
pub fn theta_strong(omega: &DMatrix<f64>, sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(kron(&invert_omega(omega)?, sigma))
}

/// `(Ω⁻¹ ⊗ I) Ψ (Ω⁻¹ ⊗ I)`.
pub fn theta_sandwich(omega: &DMatrix<f64>, psi: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let dp = omega.nrows();
    let d = if dp == 0 { 0 } else { psi.nrows() / dp };
    if d * dp != psi.nrows() || psi.nrows() != psi.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Ψ is {}x{} but Ω is {dp}x{dp}",
            psi.nrows(),
            psi.ncols()
        )));
    }
    let a = kron(&invert_omega(omega)?, &DMatrix::identity(d, d));
    Ok(linalg::symmetrize(&(&a * psi * &a)))
}

/// `B Rᵀ(I ⊗ Σ⁻¹) Ψ (I ⊗ Σ⁻¹) R B` with `B = [Rᵀ(Ω ⊗ Σ⁻¹)R]⁻¹`.
pub fn theta_xi(
    r: &DMatrix<f64>,
    omega: &DMatrix<f64>,
    sigma: &DMatrix<f64>,
    psi: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if r.ncols() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if linalg::rank(r, 1e-10) < r.ncols() {
        return Err(Error::RankDeficientConstraint { season: 0 });
    }
    let dp = omega.nrows();
    let sigma_inv = linalg::spd_inverse(sigma, MAX_DESIGN_CONDITION).ok_or(Error::SingularDesign {
        season: 0,
        condition: linalg::spd_condition(sigma),
    })?;
    let bread_inv = r.transpose() * kron(omega, &sigma_inv) * r;
    let bread = linalg::spd_inverse(&bread_inv, MAX_DESIGN_CONDITION).ok_or(Error::SingularDesign {
        season: 0,
        condition: linalg::spd_condition(&bread_inv),
    })?;
    let left = r.transpose() * kron(&DMatrix::identity(dp, dp), &sigma_inv);
    let meat = &left * psi * left.transpose();
    Ok(linalg::symmetrize(&(&bread * meat * &bread)))
}

/// Long-run variance estimator for the score process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord, Hash)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Strong,
    Sp,
    Hac,
}

impl Method {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "strong" | "s" => Self::Strong,
            "sp" | "spectral" => Self::Sp,
            "hac" => Self::Hac,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Strong => "strong",
            Self::Sp => "sp",
            Self::Hac => "hac",
        }
    }

    pub const ALL: [Method; 3] = [Method::Strong, Method::Sp, Method::Hac];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrvOptions {
    pub kernel: KernelKind,
    pub bandwidth: Bandwidth,
    pub ar_order: ArOrder,
}

impl Default for LrvOptions {
    fn default() -> Self {
        Self {
            kernel: KernelKind::Bartlett,
            bandwidth: Bandwidth::default(),
            ar_order: ArOrder::default(),
        }
    }
}

impl LrvOptions {
    pub fn kernel_spec(&self, n: usize) -> KernelSpec {
        KernelSpec::new(self.kernel, self.bandwidth.value(n))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonCovariance {
    pub season: usize,
    pub omega: DMatrix<f64>,
    pub sigma_tilde: DMatrix<f64>,
    /// `Ω̂⊗Σ̃`, the long-run variance implied by independent noise.
    pub psi_strong: DMatrix<f64>,
    pub theta_s: DMatrix<f64>,
    pub psi_sp: Option<DMatrix<f64>>,
    pub theta_sp: Option<DMatrix<f64>>,
    pub ar_order: Option<usize>,
    pub psi_hac: Option<DMatrix<f64>>,
    pub theta_hac: Option<DMatrix<f64>>,
}

impl SeasonCovariance {
    pub fn psi(&self, method: Method) -> Option<&DMatrix<f64>> {
        match method {
            Method::Strong => Some(&self.psi_strong),
            Method::Sp => self.psi_sp.as_ref(),
            Method::Hac => self.psi_hac.as_ref(),
        }
    }

    pub fn theta(&self, method: Method) -> Option<&DMatrix<f64>> {
        match method {
            Method::Strong => Some(&self.theta_s),
            Method::Sp => self.theta_sp.as_ref(),
            Method::Hac => self.theta_hac.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimates {
    pub n_cycles: usize,
    pub kernel: KernelSpec,
    pub seasons: Vec<SeasonCovariance>,
}

impl CovarianceEstimates {
    pub fn season(&self, season: usize) -> &SeasonCovariance {
        &self.seasons[season - 1]
    }
}

fn with_season(err: Error, season: usize) -> Error {
    match err {
        Error::SingularDesign { condition, .. } => Error::SingularDesign { season, condition },
        Error::InsufficientData { available, required, .. } => Error::InsufficientData {
            season,
            available,
            required,
        },
        Error::RankDeficientConstraint { .. } => Error::RankDeficientConstraint { season },
        other => other,
    }
}

/// Ω̂, Σ̃ and the strong covariance for every season, plus the spectral and
/// kernel estimators when requested.
pub fn covariance_estimates(
    fit: &FitResult,
    options: &LrvOptions,
    methods: &[Method],
) -> Result<CovarianceEstimates> {
    let kernel = options.kernel_spec(fit.n_cycles);
    let seasons = fit
        .seasons
        .iter()
        .map(|f| {
            let season = f.season;
            let wrap = |e| with_season(e, season);
            let omega = omega_hat(&f.design.x);
            let sigma_tilde = f.sigma_tilde.clone();
            let psi_strong = kron(&omega, &sigma_tilde);
            let theta_s = theta_strong(&omega, &sigma_tilde).map_err(wrap)?;
            let w = scores(&f.design.x, &f.residuals);
            let (mut psi_sp, mut theta_sp, mut ar_order) = (None, None, None);
            if methods.contains(&Method::Sp) {
                let r = options.ar_order.resolve(&w);
                let psi = psi_spectral(&w, r).map_err(wrap)?;
                theta_sp = Some(theta_sandwich(&omega, &psi).map_err(wrap)?);
                psi_sp = Some(psi);
                ar_order = Some(r);
            }
            let (mut psi_h, mut theta_hac) = (None, None);
            if methods.contains(&Method::Hac) {
                let psi = psi_hac(&w, &kernel);
                theta_hac = Some(theta_sandwich(&omega, &psi).map_err(wrap)?);
                psi_h = Some(psi);
            }
            Ok(SeasonCovariance {
                season,
                omega,
                sigma_tilde,
                psi_strong,
                theta_s,
                psi_sp,
                theta_sp,
                ar_order,
                psi_hac: psi_h,
                theta_hac,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CovarianceEstimates {
        n_cycles: fit.n_cycles,
        kernel,
        seasons,
    })
}

/// Joint long-run covariance block between the scores of two seasons.
pub fn theta_cross(
    omega_a: &DMatrix<f64>,
    omega_b: &DMatrix<f64>,
    wa: &DMatrix<f64>,
    wb: &DMatrix<f64>,
    d: usize,
    spec: &KernelSpec,
) -> Result<DMatrix<f64>> {
    let psi = psi_cross_hac(wa, wb, spec)?;
    let a = kron(&invert_omega(omega_a)?, &DMatrix::identity(d, d));
    let b = kron(&invert_omega(omega_b)?, &DMatrix::identity(d, d));
    Ok(a * psi * b)
}

/// Diagonal of a covariance matrix with tiny negative entries (within
/// `1e-10 · trace`) clamped to zero. The flag reports whether any clamp
/// happened.
pub fn clamped_diagonal(theta: &DMatrix<f64>) -> Result<(DVector<f64>, bool)> {
    let trace = theta.trace().abs();
    let mut clamped = false;
    let mut diag = theta.diagonal();
    for (index, v) in diag.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v >= -1e-10 * trace {
                *v = 0.0;
                clamped = true;
            } else {
                return Err(Error::NegativeVariance { index, value: *v });
            }
        }
    }
    Ok((diag, clamped))
}
