//! Wald tests, per-coefficient t statistics and the tail functions they use.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lrv::{self, CovarianceEstimates, Method};

pub const MAX_RESTRICTION_CONDITION: f64 = 1e12;

/// Upper tail of the χ² distribution with `df` degrees of freedom.
pub fn chisq_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|c| c.sf(x)).unwrap_or(f64::NAN)
}

/// `P(Z > x)` for a standard normal `Z`.
pub fn normal_sf(x: f64) -> f64 {
    Normal::standard().sf(x)
}

/// `H0: R0 ξ(ν) = r0` for one season.
#[derive(Debug, Clone, PartialEq)]
pub struct Restriction {
    pub season: usize,
    pub r0: DMatrix<f64>,
    pub value: DVector<f64>,
}

impl Restriction {
    pub fn new(season: usize, r0: DMatrix<f64>, value: DVector<f64>) -> Result<Self> {
        if r0.nrows() != value.len() {
            return Err(Error::DimensionMismatch(format!(
                "R0 has {} rows but r0 has {} entries",
                r0.nrows(),
                value.len()
            )));
        }
        if linalg::rank(&r0, 1e-10) < r0.nrows() {
            return Err(Error::RankDeficientConstraint { season });
        }
        Ok(Self { season, r0, value })
    }

    /// Pin the listed coordinates of ξ(ν) (0-based) to the given values.
    pub fn coordinates(season: usize, dim: usize, pins: &[(usize, f64)]) -> Result<Self> {
        let mut r0 = DMatrix::zeros(pins.len(), dim);
        let mut value = DVector::zeros(pins.len());
        for (row, &(i, v)) in pins.iter().enumerate() {
            if i >= dim {
                return Err(Error::DimensionMismatch(format!("coordinate {i} outside 0..{dim}")));
            }
            r0[(row, i)] = 1.0;
            value[row] = v;
        }
        Self::new(season, r0, value)
    }

    pub fn df(&self) -> usize {
        self.r0.nrows()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldResult {
    pub season: usize,
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub method: Method,
}

impl WaldResult {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// `W = N (R0 ξ - r0)ᵀ (R0 Θ R0ᵀ)⁻¹ (R0 ξ - r0)`, referred to `χ²(s0)`.
pub fn wald(
    restriction: &Restriction,
    xi: &DVector<f64>,
    theta_xi: &DMatrix<f64>,
    n: usize,
    method: Method,
) -> Result<WaldResult> {
    let r0 = &restriction.r0;
    if r0.ncols() != xi.len() || theta_xi.shape() != (xi.len(), xi.len()) {
        return Err(Error::DimensionMismatch(format!(
            "restriction acts on {} coordinates, ξ has {}",
            r0.ncols(),
            xi.len()
        )));
    }
    let gap = r0 * xi - &restriction.value;
    let middle = linalg::symmetrize(&(r0 * theta_xi * r0.transpose()));
    let condition = linalg::spd_condition(&middle);
    if !(condition <= MAX_RESTRICTION_CONDITION) {
        return Err(Error::SingularRestriction { condition });
    }
    let chol = middle.cholesky().ok_or(Error::SingularRestriction { condition })?;
    let statistic = (n as f64 * gap.dot(&chol.solve(&gap))).max(0.0);
    let df = restriction.df();
    Ok(WaldResult {
        season: restriction.season,
        statistic,
        df,
        p_value: chisq_sf(statistic, df),
        method,
    })
}

/// One coefficient `Φ_lag(season)[row, col]` (1-based indices).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPin {
    pub season: usize,
    pub lag: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

impl CoefficientPin {
    /// Position inside `β(ν)` for dimension `d`.
    pub fn index(&self, d: usize) -> usize {
        coefficient_index(d, self.lag, self.row, self.col)
    }
}

/// 0-based position of `Φ_lag[row, col]` (1-based) in `vec B(ν)`.
pub fn coefficient_index(d: usize, lag: usize, row: usize, col: usize) -> usize {
    (lag - 1) * d * d + (col - 1) * d + (row - 1)
}

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::RestrictionParse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Parse `phi[ν](i,j)=v` terms, separated by `;`. A lag other than one is
/// written `phi2[ν](i,j)=v`; `[i,j]` is accepted in place of `(i,j)`.
pub fn parse_restrictions(input: &str) -> Result<Vec<CoefficientPin>> {
    let terms: Vec<&str> = input.split(';').map(str::trim).filter(|t| !t.is_empty()).collect();
    if terms.is_empty() {
        return Err(parse_err(input, "no restriction given"));
    }
    terms.into_iter().map(parse_term).collect()
}

fn parse_term(term: &str) -> Result<CoefficientPin> {
    let compact: String = term.chars().filter(|c| !c.is_whitespace()).collect();
    let (lhs, rhs) = compact
        .split_once('=')
        .ok_or_else(|| parse_err(term, "expected '='"))?;
    let value: f64 = rhs
        .parse()
        .map_err(|_| parse_err(term, format!("bad value '{rhs}'")))?;
    let rest = lhs
        .strip_prefix("phi")
        .ok_or_else(|| parse_err(term, "expected 'phi'"))?;
    let open = rest.find('[').ok_or_else(|| parse_err(term, "expected '[season]'"))?;
    let lag = match &rest[..open] {
        "" => 1,
        digits => digits
            .trim_start_matches('_')
            .parse::<usize>()
            .map_err(|_| parse_err(term, format!("bad lag '{digits}'")))?,
    };
    let rest = &rest[open + 1..];
    let close = rest.find(']').ok_or_else(|| parse_err(term, "unclosed '['"))?;
    let season: usize = rest[..close]
        .parse()
        .map_err(|_| parse_err(term, format!("bad season '{}'", &rest[..close])))?;
    let idx = &rest[close + 1..];
    let inner = idx
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| idx.strip_prefix('[').and_then(|r| r.strip_suffix(']')))
        .ok_or_else(|| parse_err(term, "expected '(row,col)'"))?;
    let (row, col) = inner
        .split_once(',')
        .ok_or_else(|| parse_err(term, "expected 'row,col'"))?;
    let row: usize = row.parse().map_err(|_| parse_err(term, format!("bad row '{row}'")))?;
    let col: usize = col.parse().map_err(|_| parse_err(term, format!("bad column '{col}'")))?;
    if season == 0 || lag == 0 || row == 0 || col == 0 {
        return Err(parse_err(term, "seasons, lags, rows and columns start at 1"));
    }
    Ok(CoefficientPin {
        season,
        lag,
        row,
        col,
        value,
    })
}

/// Group pins into one joint restriction per season on `β(ν)`.
pub fn restrictions_from_pins(pins: &[CoefficientPin], d: usize, orders: &[usize]) -> Result<Vec<Restriction>> {
    let seasons: std::collections::BTreeSet<usize> = pins.iter().map(|p| p.season).collect();
    seasons
        .into_iter()
        .map(|season| {
            let group: Vec<&CoefficientPin> = pins.iter().filter(|p| p.season == season).collect();
            let describe = |p: &CoefficientPin| format!("phi{}[{}]({},{})", p.lag, p.season, p.row, p.col);
            let order = *orders
                .get(season - 1)
                .ok_or_else(|| parse_err(&describe(group[0]), format!("only {} seasons", orders.len())))?;
            let mut coords = Vec::new();
            for p in group {
                if p.lag > order || p.row > d || p.col > d {
                    return Err(parse_err(&describe(p), format!("outside d={d}, p={order}")));
                }
                let i = p.index(d);
                if coords.iter().any(|&(j, _)| j == i) {
                    return Err(parse_err(&describe(p), "coefficient restricted twice"));
                }
                coords.push((i, p.value));
            }
            Restriction::coordinates(season, d * d * order, &coords)
        })
        .collect()
}

/// One row of the coefficient table: estimate, standard errors and
/// p-values for each covariance variant (`None` when not computed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub season: usize,
    pub lag: usize,
    pub row: usize,
    pub col: usize,
    pub beta: f64,
    pub se_s: Option<f64>,
    pub se_sp: Option<f64>,
    pub se_hac: Option<f64>,
    pub p_s: Option<f64>,
    pub p_sp: Option<f64>,
    pub p_hac: Option<f64>,
    pub p_wald_s: Option<f64>,
    pub p_wald_sp: Option<f64>,
    pub p_wald_hac: Option<f64>,
    /// A tiny negative variance was clamped to zero.
    pub clamped: bool,
}

/// `se = sqrt(Θ_ii / N)` and `p = 2 P(Z > |β_i| / se)` for each variant.
pub fn t_report(
    season: usize,
    d: usize,
    beta: &DVector<f64>,
    thetas: [Option<&DMatrix<f64>>; 3],
    n: usize,
) -> Result<Vec<CoefficientRow>> {
    let mut ses: [Option<DVector<f64>>; 3] = [None, None, None];
    let mut clamped = false;
    for (slot, theta) in ses.iter_mut().zip(thetas) {
        if let Some(theta) = theta {
            let (diag, flag) = lrv::clamped_diagonal(theta)?;
            clamped |= flag;
            *slot = Some(diag.map(|v| (v / n as f64).sqrt()));
        }
    }
    let pval = |b: f64, se: f64| {
        if b == 0.0 {
            1.0
        } else {
            2.0 * normal_sf(b.abs() / se)
        }
    };
    Ok((0..beta.len())
        .map(|i| {
            let se = |k: usize| ses[k].as_ref().map(|v| v[i]);
            let p = |k: usize| se(k).map(|s| pval(beta[i], s));
            CoefficientRow {
                season,
                lag: i / (d * d) + 1,
                row: i % d + 1,
                col: (i % (d * d)) / d + 1,
                beta: beta[i],
                se_s: se(0),
                se_sp: se(1),
                se_hac: se(2),
                p_s: p(0),
                p_sp: p(1),
                p_hac: p(2),
                p_wald_s: None,
                p_wald_sp: None,
                p_wald_hac: None,
                clamped,
            }
        })
        .collect())
}

/// Strong, spectral and kernel versions of Θ^ξ for one season.
pub fn theta_xi_variants(
    r: &DMatrix<f64>,
    cov: &lrv::SeasonCovariance,
) -> Result<[Option<DMatrix<f64>>; 3]> {
    let mut out: [Option<DMatrix<f64>>; 3] = [None, None, None];
    for (k, method) in Method::ALL.iter().enumerate() {
        if let Some(psi) = cov.psi(*method) {
            out[k] = Some(lrv::theta_xi(r, &cov.omega, &cov.sigma_tilde, psi)?);
        }
    }
    Ok(out)
}

/// Wald tests of one restriction per season under every available method.
pub fn wald_all(
    restrictions: &[Restriction],
    xi: &[DVector<f64>],
    constraint_r: &[DMatrix<f64>],
    cov: &CovarianceEstimates,
) -> Result<Vec<WaldResult>> {
    let mut out = Vec::new();
    for restriction in restrictions {
        let season = restriction.season;
        let sc = cov.season(season);
        let thetas = theta_xi_variants(&constraint_r[season - 1], sc).map_err(|e| match e {
            Error::RankDeficientConstraint { .. } => Error::RankDeficientConstraint { season },
            other => other,
        })?;
        for (method, theta) in Method::ALL.iter().zip(thetas) {
            if let Some(theta) = theta {
                out.push(wald(restriction, &xi[season - 1], &theta, cov.n_cycles, *method)?);
            }
        }
    }
    Ok(out)
}
