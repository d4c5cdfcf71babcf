//! End-to-end fit and test pipelines with text, CSV and JSON rendering.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimate::{self, ConstraintSpec, FitResult};
use crate::infer::{self, CoefficientRow, Restriction, WaldResult};
use crate::linalg;
use crate::lrv::{self, CovarianceEstimates, LrvOptions, Method};
use crate::mc::McReport;
use crate::model::PeriodicSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub orders: Vec<usize>,
    pub demean: bool,
    pub methods: Vec<Method>,
    pub lrv: LrvOptions,
}

impl FitOptions {
    pub fn new(orders: Vec<usize>) -> Self {
        Self {
            orders,
            demean: false,
            methods: Method::ALL.to_vec(),
            lrv: LrvOptions::default(),
        }
    }
}

/// Everything computed for one fitted series.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub fit: FitResult,
    pub covariance: CovarianceEstimates,
    pub means: Option<Vec<DVector<f64>>>,
    /// Constrained estimates under `R = I`, equal to least squares.
    pub xi: Vec<DVector<f64>>,
    pub identity: ConstraintSpec,
}

pub fn analyse(series: &PeriodicSeries, options: &FitOptions) -> Result<Analysis> {
    let (series, means) = if options.demean {
        let (c, m) = estimate::demean_seasonal(series);
        (c, Some(m))
    } else {
        (series.clone(), None)
    };
    let fit = estimate::fit_ols(&series, &options.orders)?;
    let mut methods = options.methods.clone();
    if !methods.contains(&Method::Strong) {
        methods.push(Method::Strong);
    }
    let covariance = lrv::covariance_estimates(&fit, &options.lrv, &methods)?;
    let identity = ConstraintSpec::identity(fit.d, &options.orders);
    let xi = estimate::fit_constrained(&fit.design(), &identity, &fit.sigma_tildes())?.xi;
    Ok(Analysis {
        fit,
        covariance,
        means,
        xi,
        identity,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub s: usize,
    pub d: usize,
    pub n_cycles: usize,
    pub orders: Vec<usize>,
    pub methods: Vec<Method>,
    pub kernel: String,
    pub bandwidth: f64,
    pub truncation: usize,
    /// AR order used by the spectral estimator in each season.
    pub ar_orders: Vec<Option<usize>>,
    pub means: Option<Vec<Vec<f64>>>,
    /// The Wald p-value columns test `β_i = 0` with the feasible GLS
    /// estimator under `R = I`.
    pub wald_estimator: String,
    pub coefficients: Vec<CoefficientRow>,
    /// `vec Σ̃(ν)` per season.
    pub sigma: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

pub fn fit_report(series: &PeriodicSeries, options: &FitOptions) -> Result<FitReport> {
    let a = analyse(series, options)?;
    let d = a.fit.d;
    let n = a.fit.n_cycles;
    let want = |m: Method| options.methods.contains(&m);
    let mut coefficients = Vec::new();
    let mut warnings = Vec::new();
    for f in &a.fit.seasons {
        let c = a.covariance.season(f.season);
        let pick = |m: Method| if want(m) { c.theta(m) } else { None };
        let mut rows = infer::t_report(
            f.season,
            d,
            &f.beta,
            [pick(Method::Strong), pick(Method::Sp), pick(Method::Hac)],
            n,
        )?;
        let thetas = infer::theta_xi_variants(&a.identity.r[f.season - 1], c)?;
        for (i, row) in rows.iter_mut().enumerate() {
            let dim = f.beta.len();
            let restriction = Restriction::coordinates(f.season, dim, &[(i, 0.0)])?;
            let mut p = [None; 3];
            for (k, m) in Method::ALL.iter().enumerate() {
                if let (true, Some(theta)) = (want(*m), thetas[k].as_ref()) {
                    p[k] = Some(infer::wald(&restriction, &a.xi[f.season - 1], theta, n, *m)?.p_value);
                }
            }
            row.p_wald_s = p[0];
            row.p_wald_sp = p[1];
            row.p_wald_hac = p[2];
        }
        if rows.iter().any(|r| r.clamped) {
            warnings.push(format!("season {}: tiny negative variance clamped to zero", f.season));
        }
        coefficients.extend(rows);
    }
    Ok(FitReport {
        s: a.fit.s,
        d,
        n_cycles: n,
        orders: a.fit.orders(),
        methods: options.methods.clone(),
        kernel: a.covariance.kernel.kind.name().to_string(),
        bandwidth: a.covariance.kernel.bandwidth,
        truncation: a.covariance.kernel.truncation(n),
        ar_orders: a.covariance.seasons.iter().map(|c| c.ar_order).collect(),
        means: a.means.map(|m| m.iter().map(|v| v.iter().copied().collect()).collect()),
        wald_estimator: "fgls-identity".into(),
        coefficients,
        sigma: a
            .fit
            .seasons
            .iter()
            .map(|f| linalg::vec_col(&f.sigma_tilde).iter().copied().collect())
            .collect(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldReport {
    pub n_cycles: usize,
    pub restrictions: Vec<String>,
    pub tests: Vec<WaldResult>,
}

pub fn wald_report(series: &PeriodicSeries, options: &FitOptions, restrictions: &[String]) -> Result<WaldReport> {
    let a = analyse(series, options)?;
    let mut parsed = Vec::new();
    for text in restrictions {
        let pins = infer::parse_restrictions(text)?;
        parsed.extend(infer::restrictions_from_pins(&pins, a.fit.d, &options.orders)?);
    }
    let tests = infer::wald_all(&parsed, &a.xi, &a.identity.r, &a.covariance)?
        .into_iter()
        .filter(|t| options.methods.contains(&t.method))
        .collect();
    Ok(WaldReport {
        n_cycles: a.fit.n_cycles,
        restrictions: restrictions.to_vec(),
        tests,
    })
}

pub fn method_label(m: Method) -> &'static str {
    match m {
        Method::Strong => "standard",
        Method::Sp => "modified-sp",
        Method::Hac => "modified-hac",
    }
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map(|x| format!("{x:.digits$}")).unwrap_or_else(|| "-".into())
}

fn coefficient_name(r: &CoefficientRow) -> String {
    format!("phi{}({},{})", r.lag, r.row, r.col)
}

pub fn fit_table(report: &FitReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "N = {} cycles, s = {}, d = {}, kernel = {}, b_N = {:.6} (T_N = {})",
        report.n_cycles, report.s, report.d, report.kernel, report.bandwidth, report.truncation
    );
    let _ = writeln!(
        out,
        "{:>3} {:<12} {:>9} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>9}",
        "nu", "coef", "beta", "se_S", "se_SP", "se_HAC", "p_S", "p_SP", "p_HAC", "pW_S", "pW_SP", "pW_HAC", "vecSigma"
    );
    let mut index_in_season = 0;
    let mut last_season = 0;
    for r in &report.coefficients {
        if r.season != last_season {
            last_season = r.season;
            index_in_season = 0;
        }
        let sigma = report.sigma[r.season - 1].get(index_in_season).copied();
        index_in_season += 1;
        let _ = writeln!(
            out,
            "{:>3} {:<12} {:>9.4} {:>8} {:>8} {:>8} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>9}",
            r.season,
            coefficient_name(r),
            r.beta,
            opt(r.se_s, 4),
            opt(r.se_sp, 4),
            opt(r.se_hac, 4),
            opt(r.p_s, 4),
            opt(r.p_sp, 4),
            opt(r.p_hac, 4),
            opt(r.p_wald_s, 4),
            opt(r.p_wald_sp, 4),
            opt(r.p_wald_hac, 4),
            opt(sigma, 4),
        );
    }
    for w in &report.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn fit_csv(report: &FitReport) -> String {
    let mut out = String::from("season,lag,row,col,beta,se_s,se_sp,se_hac,p_s,p_sp,p_hac,p_wald_s,p_wald_sp,p_wald_hac,vec_sigma\n");
    let mut k = 0;
    let mut last = 0;
    for r in &report.coefficients {
        if r.season != last {
            last = r.season;
            k = 0;
        }
        let sigma = report.sigma[r.season - 1].get(k).copied();
        k += 1;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.season,
            r.lag,
            r.row,
            r.col,
            r.beta,
            csv_opt(r.se_s),
            csv_opt(r.se_sp),
            csv_opt(r.se_hac),
            csv_opt(r.p_s),
            csv_opt(r.p_sp),
            csv_opt(r.p_hac),
            csv_opt(r.p_wald_s),
            csv_opt(r.p_wald_sp),
            csv_opt(r.p_wald_hac),
            csv_opt(sigma)
        );
    }
    out
}

pub fn wald_table(report: &WaldReport) -> String {
    let mut out = format!("N = {} cycles\n{:>3} {:<13} {:>10} {:>3} {:>9}\n", report.n_cycles, "nu", "test", "W", "df", "p");
    for t in &report.tests {
        let _ = writeln!(
            out,
            "{:>3} {:<13} {:>10.4} {:>3} {:>9.4}",
            t.season,
            method_label(t.method),
            t.statistic,
            t.df,
            t.p_value
        );
    }
    out
}

pub fn wald_csv(report: &WaldReport) -> String {
    let mut out = String::from("season,method,statistic,df,p_value\n");
    for t in &report.tests {
        let _ = writeln!(out, "{},{},{},{},{}", t.season, t.method.name(), t.statistic, t.df, t.p_value);
    }
    out
}

/// Rejection frequencies in percent, one line per (method, level), seasons
/// across.
pub fn mc_table(report: &McReport) -> String {
    let mut out = format!(
        "{}: N = {}, {} replications ({} failed)\n",
        report.scenario,
        report.n_cycles,
        report.reps,
        report.failure_count()
    );
    let mut seasons: Vec<usize> = report.rejections.iter().map(|r| r.season).collect();
    seasons.sort();
    seasons.dedup();
    if !seasons.is_empty() {
        let _ = write!(out, "{:<13} {:>6}", "test", "level");
        for s in &seasons {
            let _ = write!(out, " {:>6}", format!("nu={s}"));
        }
        out.push('\n');
        let mut keys: Vec<(Method, u64)> = Vec::new();
        for r in &report.rejections {
            let key = (r.method, r.level.to_bits());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        for (method, bits) in keys {
            let level = f64::from_bits(bits);
            let _ = write!(out, "{:<13} {:>5}%", method_label(method), level * 100.0);
            for s in &seasons {
                let f = report.rejection(*s, method, level).map(|r| r.frequency * 100.0);
                let _ = write!(out, " {:>6}", opt(f, 1));
            }
            out.push('\n');
        }
    }
    let _ = writeln!(
        out,
        "{:>3} {:<12} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "nu", "coef", "truth", "mean", "N*MSE", "Theta_S", "Theta_SP", "Theta_HAC"
    );
    for c in &report.coefficients {
        let _ = writeln!(
            out,
            "{:>3} {:<12} {:>8.3} {:>8.4} {:>8.3} {:>8} {:>8} {:>8}",
            c.season,
            format!("phi{}({},{})", c.lag, c.row, c.col),
            c.truth,
            c.mean,
            c.sse,
            opt(c.theta_s, 3),
            opt(c.theta_sp, 3),
            opt(c.theta_hac, 3)
        );
    }
    out
}

pub fn mc_csv(report: &McReport) -> String {
    let mut out = String::from("kind,season,method,level,lag,row,col,value,extra\n");
    for r in &report.rejections {
        let _ = writeln!(out, "rejection,{},{},{},,,,{},{}", r.season, r.method.name(), r.level, r.frequency, r.rejections);
    }
    for c in &report.coefficients {
        for (name, v) in [
            ("mean", Some(c.mean)),
            ("sse", Some(c.sse)),
            ("scaled_variance", Some(c.scaled_variance)),
            ("theta_s", c.theta_s),
            ("theta_sp", c.theta_sp),
            ("theta_hac", c.theta_hac),
        ] {
            if let Some(v) = v {
                let _ = writeln!(out, "{name},{},,,{},{},{},{v},{}", c.season, c.lag, c.row, c.col, c.truth);
            }
        }
    }
    out
}
