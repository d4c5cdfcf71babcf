//! Design matrices, unconstrained least squares and the one-step feasible
//! GLS estimator under linear constraints `β(ν) = R(ν) ξ(ν) + b(ν)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, kron};
use crate::model::PeriodicSeries;

/// Condition number above which `X Xᵀ` is treated as singular.
pub const MAX_DESIGN_CONDITION: f64 = 1e12;

/// Subtract per-season sample means (computed on the data, applied to the
/// pre-sample as well). Returns the centered series and `μ̂(ν)`.
pub fn demean_seasonal(series: &PeriodicSeries) -> (PeriodicSeries, Vec<DVector<f64>>) {
    let (s, d, n) = (series.s(), series.d(), series.n_cycles());
    let mut means = vec![DVector::zeros(d); s];
    for (k, col) in series.data().column_iter().enumerate() {
        means[k % s] += col;
    }
    for m in &mut means {
        *m /= n as f64;
    }
    let centered = series.map_values(|_, season, y| y - &means[season - 1]);
    (centered, means)
}

/// Responses and stacked lags for one season.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonDesign {
    pub season: usize,
    pub order: usize,
    /// `d x N`, column `n` is `Y_{ns+ν}`.
    pub z: DMatrix<f64>,
    /// `dp x N`, column `n` is `(Y_{ns+ν-1}; …; Y_{ns+ν-p})`.
    pub x: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignBlocks {
    pub s: usize,
    pub d: usize,
    pub n_cycles: usize,
    pub seasons: Vec<SeasonDesign>,
}

impl DesignBlocks {
    pub fn season(&self, season: usize) -> &SeasonDesign {
        &self.seasons[season - 1]
    }
}

/// Build `Z(ν)` and `X(ν)`. When the pre-sample is shorter than `max p(ν)`,
/// leading cycles are consumed as pre-sample and `N` shrinks accordingly.
pub fn build_design(series: &PeriodicSeries, orders: &[usize]) -> Result<DesignBlocks> {
    let (s, d) = (series.s(), series.d());
    if orders.len() != s {
        return Err(Error::DimensionMismatch(format!(
            "{} orders given for {s} seasons",
            orders.len()
        )));
    }
    let max_p = orders.iter().copied().max().unwrap_or(0);
    let have = series.presample_len();
    let owned;
    let series = if have < max_p {
        owned = series.consume_cycles((max_p - have).div_ceil(s))?;
        &owned
    } else {
        series
    };
    let n = series.n_cycles();
    let mut seasons = Vec::with_capacity(s);
    for (v, &p) in orders.iter().enumerate() {
        let season = v + 1;
        if p > 0 && n < d * p + 1 {
            return Err(Error::InsufficientData {
                season,
                available: n,
                required: d * p + 1,
            });
        }
        let mut z = DMatrix::zeros(d, n);
        let mut x = DMatrix::zeros(d * p, n);
        for c in 0..n {
            let t = (c * s + season) as i64;
            z.set_column(c, &series.value(t));
            for k in 1..=p {
                x.view_mut(((k - 1) * d, c), (d, 1))
                    .copy_from(&series.value(t - k as i64));
            }
        }
        seasons.push(SeasonDesign {
            season,
            order: p,
            z,
            x,
        });
    }
    Ok(DesignBlocks {
        s,
        d,
        n_cycles: n,
        seasons,
    })
}

/// Unconstrained least squares for one season.
#[derive(Debug, Clone, PartialEq)]
pub struct SeasonFit {
    pub season: usize,
    pub order: usize,
    /// `B̂(ν)`, `d x dp`.
    pub coefficients: DMatrix<f64>,
    /// `β̂(ν) = vec B̂(ν)`.
    pub beta: DVector<f64>,
    /// `d x N`, column `n` is `ε̂_{ns+ν}`.
    pub residuals: DMatrix<f64>,
    pub sigma_tilde: DMatrix<f64>,
    pub design: SeasonDesign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub s: usize,
    pub d: usize,
    pub n_cycles: usize,
    pub seasons: Vec<SeasonFit>,
}

impl FitResult {
    pub fn season(&self, season: usize) -> &SeasonFit {
        &self.seasons[season - 1]
    }

    pub fn orders(&self) -> Vec<usize> {
        self.seasons.iter().map(|f| f.order).collect()
    }

    pub fn design(&self) -> DesignBlocks {
        DesignBlocks {
            s: self.s,
            d: self.d,
            n_cycles: self.n_cycles,
            seasons: self.seasons.iter().map(|f| f.design.clone()).collect(),
        }
    }

    pub fn sigma_tildes(&self) -> Vec<DMatrix<f64>> {
        self.seasons.iter().map(|f| f.sigma_tilde.clone()).collect()
    }
}

pub fn fit_ols(series: &PeriodicSeries, orders: &[usize]) -> Result<FitResult> {
    fit_ols_design(&build_design(series, orders)?)
}

pub fn fit_ols_design(design: &DesignBlocks) -> Result<FitResult> {
    let seasons = design
        .seasons
        .iter()
        .map(|sd| fit_season(sd, design.d, design.n_cycles))
        .collect::<Result<Vec<_>>>()?;
    Ok(FitResult {
        s: design.s,
        d: design.d,
        n_cycles: design.n_cycles,
        seasons,
    })
}

fn fit_season(sd: &SeasonDesign, d: usize, n: usize) -> Result<SeasonFit> {
    let coefficients = if sd.order == 0 {
        DMatrix::zeros(d, 0)
    } else {
        let gram = &sd.x * sd.x.transpose();
        let condition = linalg::spd_condition(&gram);
        if condition > MAX_DESIGN_CONDITION {
            return Err(Error::SingularDesign {
                season: sd.season,
                condition,
            });
        }
        let chol = linalg::symmetrize(&gram).cholesky().ok_or(Error::SingularDesign {
            season: sd.season,
            condition,
        })?;
        // B̂ᵀ = (X Xᵀ)⁻¹ X Zᵀ
        chol.solve(&(&sd.x * sd.z.transpose())).transpose()
    };
    let residuals = &sd.z - &coefficients * &sd.x;
    let sigma_tilde = sigma_tilde(&residuals, sd.order);
    let _ = n;
    Ok(SeasonFit {
        season: sd.season,
        order: sd.order,
        beta: linalg::vec_col(&coefficients),
        coefficients,
        residuals,
        sigma_tilde,
        design: sd.clone(),
    })
}

/// `(N - d p)⁻¹ Ê Êᵀ` for a `d x N` residual block.
pub fn sigma_tilde(residuals: &DMatrix<f64>, order: usize) -> DMatrix<f64> {
    let (d, n) = residuals.shape();
    let dof = n.saturating_sub(d * order).max(1);
    linalg::symmetrize(&(residuals * residuals.transpose())) / dof as f64
}

/// Linear constraints `β(ν) = R(ν) ξ(ν) + b(ν)` for every season.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub r: Vec<DMatrix<f64>>,
    pub b: Vec<DVector<f64>>,
}

impl ConstraintSpec {
    pub fn new(r: Vec<DMatrix<f64>>, b: Vec<DVector<f64>>) -> Result<Self> {
        if r.len() != b.len() {
            return Err(Error::DimensionMismatch("R and b season counts differ".into()));
        }
        for (v, (rv, bv)) in r.iter().zip(&b).enumerate() {
            if rv.nrows() != bv.len() {
                return Err(Error::DimensionMismatch(format!(
                    "season {}: R has {} rows, b has {}",
                    v + 1,
                    rv.nrows(),
                    bv.len()
                )));
            }
            if rv.ncols() > 0 && linalg::rank(rv, 1e-10) < rv.ncols() {
                return Err(Error::RankDeficientConstraint { season: v + 1 });
            }
        }
        Ok(Self { r, b })
    }

    /// `R(ν) = I`, `b(ν) = 0`: the unconstrained case.
    pub fn identity(d: usize, orders: &[usize]) -> Self {
        let r = orders.iter().map(|&p| DMatrix::identity(d * d * p, d * d * p)).collect();
        let b = orders.iter().map(|&p| DVector::zeros(d * d * p)).collect();
        Self { r, b }
    }

    /// Coordinates listed per season (0-based indices into `β(ν)`) are pinned
    /// to zero; the rest are free.
    pub fn zeros(d: usize, orders: &[usize], pinned: &[Vec<usize>]) -> Result<Self> {
        let mut r = Vec::new();
        let mut b = Vec::new();
        for (v, &p) in orders.iter().enumerate() {
            let dim = d * d * p;
            let free: Vec<usize> = (0..dim)
                .filter(|i| !pinned.get(v).is_some_and(|z| z.contains(i)))
                .collect();
            let mut rv = DMatrix::zeros(dim, free.len());
            for (col, &i) in free.iter().enumerate() {
                rv[(i, col)] = 1.0;
            }
            r.push(rv);
            b.push(DVector::zeros(dim));
        }
        Self::new(r, b)
    }

    pub fn season(&self, season: usize) -> (&DMatrix<f64>, &DVector<f64>) {
        (&self.r[season - 1], &self.b[season - 1])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedFit {
    pub xi: Vec<DVector<f64>>,
    pub beta: Vec<DVector<f64>>,
}

/// Feasible GLS: `ξ̂̂ = [Rᵀ(XXᵀ⊗Σ⁻¹)R]⁻¹ Rᵀ(X⊗Σ⁻¹)[z − (Xᵀ⊗I)b]`.
pub fn fit_constrained(
    design: &DesignBlocks,
    constraints: &ConstraintSpec,
    sigma: &[DMatrix<f64>],
) -> Result<ConstrainedFit> {
    let d = design.d;
    if constraints.r.len() != design.s || sigma.len() != design.s {
        return Err(Error::DimensionMismatch("constraints and covariances need one entry per season".into()));
    }
    let mut xis = Vec::with_capacity(design.s);
    let mut betas = Vec::with_capacity(design.s);
    for sd in &design.seasons {
        let (r, b) = constraints.season(sd.season);
        let dim = d * d * sd.order;
        if r.nrows() != dim {
            return Err(Error::DimensionMismatch(format!(
                "season {}: R has {} rows, β has {dim}",
                sd.season,
                r.nrows()
            )));
        }
        if r.ncols() == 0 {
            xis.push(DVector::zeros(0));
            betas.push(b.clone());
            continue;
        }
        let sigma_inv = linalg::spd_inverse(&sigma[sd.season - 1], MAX_DESIGN_CONDITION).ok_or(
            Error::SingularDesign {
                season: sd.season,
                condition: linalg::spd_condition(&sigma[sd.season - 1]),
            },
        )?;
        let gram = &sd.x * sd.x.transpose();
        let bread = r.transpose() * kron(&gram, &sigma_inv) * r;
        let condition = linalg::spd_condition(&bread);
        if condition > MAX_DESIGN_CONDITION {
            return Err(Error::SingularDesign {
                season: sd.season,
                condition,
            });
        }
        // (X ⊗ Σ⁻¹) vec(E) = vec(Σ⁻¹ E Xᵀ)
        let b_mat = linalg::unvec(b, d, d * sd.order);
        let adjusted = &sd.z - &b_mat * &sd.x;
        let score = linalg::vec_col(&(&sigma_inv * adjusted * sd.x.transpose()));
        let rhs = r.transpose() * score;
        let xi = linalg::symmetrize(&bread)
            .cholesky()
            .ok_or(Error::SingularDesign {
                season: sd.season,
                condition,
            })?
            .solve(&rhs);
        betas.push(r * &xi + b);
        xis.push(xi);
    }
    Ok(ConstrainedFit { xi: xis, beta: betas })
}
