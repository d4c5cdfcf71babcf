//! Monte Carlo harness: replicate simulate → fit → test and aggregate
//! rejection frequencies and estimator accuracy.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{self, ConstraintSpec};
use crate::infer::{self, Restriction};
use crate::io::ModelSpec;
use crate::lrv::{self, Bandwidth, KernelKind, LrvOptions, Method};
use crate::model::{is_causal, PvarModel};
use crate::sim::{self, NoiseKind, NoiseSpec, DEFAULT_BURNIN_CYCLES};

const PRESETS: &str = include_str!("../presets/scenarios.json");

fn default_burnin() -> usize {
    DEFAULT_BURNIN_CYCLES
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_levels() -> Vec<f64> {
    vec![0.01, 0.05, 0.10]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub model: ModelSpec,
    pub noise: NoiseKind,
    pub n_cycles: usize,
    #[serde(default = "default_burnin")]
    pub burnin_cycles: usize,
    pub reps: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Null hypotheses in the `phi[ν](i,j)=v` syntax; terms for the same
    /// season inside one string form a joint restriction.
    #[serde(default)]
    pub restrictions: Vec<String>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    /// Defaults to Bartlett with `b_N = 1/21` when `N = 1000` and the
    /// Andrews rule otherwise.
    #[serde(default)]
    pub lrv: Option<LrvOptions>,
    /// Fitted orders; the true orders when absent.
    #[serde(default)]
    pub orders: Option<Vec<usize>>,
    #[serde(default)]
    pub demean: bool,
}

/// Built-in scenarios.
pub fn presets() -> Vec<Scenario> {
    serde_json::from_str(PRESETS).expect("embedded presets parse")
}

pub fn presets_json() -> &'static str {
    PRESETS
}

pub fn preset(name: &str) -> Option<Scenario> {
    presets().into_iter().find(|s| s.name.eq_ignore_ascii_case(name))
}

impl Scenario {
    pub fn lrv_options(&self) -> LrvOptions {
        self.lrv.unwrap_or(LrvOptions {
            kernel: KernelKind::Bartlett,
            bandwidth: if self.n_cycles == 1000 {
                Bandwidth::Fixed(1.0 / 21.0)
            } else {
                Bandwidth::Andrews
            },
            ar_order: Default::default(),
        })
    }

    fn prepare(&self) -> Result<Prepared> {
        if self.reps == 0 {
            return Err(Error::Config(format!("{}: reps must be at least 1", self.name)));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::Config(format!("{}: level {l} outside (0, 1)", self.name)));
        }
        let model = self.model.to_model()?;
        let (causal, rho) = is_causal(&model);
        if !causal {
            return Err(Error::NotCausal { spectral_radius: rho });
        }
        let orders = self.orders.clone().unwrap_or_else(|| model.orders());
        if orders.len() != model.s() {
            return Err(Error::Config(format!("{}: need {} fitted orders", self.name, model.s())));
        }
        let mut restrictions = Vec::new();
        for text in &self.restrictions {
            let pins = infer::parse_restrictions(text)?;
            restrictions.extend(infer::restrictions_from_pins(&pins, model.d(), &orders)?);
        }
        let mut methods = self.methods.clone();
        methods.sort();
        methods.dedup();
        Ok(Prepared {
            noise: NoiseSpec {
                kind: self.noise,
                sigma: None,
            },
            identity: ConstraintSpec::identity(model.d(), &orders),
            lrv: self.lrv_options(),
            model,
            orders,
            restrictions,
            methods,
        })
    }
}

struct Prepared {
    model: PvarModel,
    noise: NoiseSpec,
    orders: Vec<usize>,
    identity: ConstraintSpec,
    restrictions: Vec<Restriction>,
    methods: Vec<Method>,
    lrv: LrvOptions,
}

struct Outcome {
    /// `[restriction][method]` p-values.
    p_values: Vec<Vec<Option<f64>>>,
    beta: Vec<DVector<f64>>,
    /// `[season][method]` diagonal of Θ̂.
    theta: Vec<Vec<Option<DVector<f64>>>>,
}

fn replicate(p: &Prepared, sc: &Scenario, seed: u64) -> Result<Outcome> {
    let mut series = sim::simulate(&p.model, &p.noise, sc.n_cycles, sc.burnin_cycles, seed)?;
    if sc.demean {
        series = estimate::demean_seasonal(&series).0;
    }
    let fit = estimate::fit_ols(&series, &p.orders)?;
    let cov = lrv::covariance_estimates(&fit, &p.lrv, &p.methods)?;
    let design = fit.design();
    let xi = estimate::fit_constrained(&design, &p.identity, &fit.sigma_tildes())?.xi;
    let tests = infer::wald_all(&p.restrictions, &xi, &p.identity.r, &cov)?;
    let p_values = p
        .restrictions
        .iter()
        .map(|r| {
            Method::ALL
                .iter()
                .map(|m| {
                    tests
                        .iter()
                        .find(|t| t.season == r.season && t.method == *m)
                        .map(|t| t.p_value)
                })
                .collect()
        })
        .collect();
    let theta = cov
        .seasons
        .iter()
        .map(|c| Method::ALL.iter().map(|m| c.theta(*m).map(|t| t.diagonal())).collect())
        .collect();
    Ok(Outcome {
        p_values,
        beta: fit.seasons.iter().map(|f| f.beta.clone()).collect(),
        theta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub season: usize,
    pub method: Method,
    pub level: f64,
    pub rejections: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStats {
    pub season: usize,
    pub lag: usize,
    pub row: usize,
    pub col: usize,
    pub truth: f64,
    pub mean: f64,
    /// Empirical variance of `β̂` times `N`.
    pub scaled_variance: f64,
    /// Mean of `N (β̂ - β)²`.
    pub sse: f64,
    /// Mean of the estimated `Θ̂_ii` for the strong, spectral and kernel
    /// estimators.
    pub theta_s: Option<f64>,
    pub theta_sp: Option<f64>,
    pub theta_hac: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub scenario: String,
    pub n_cycles: usize,
    pub reps: usize,
    pub successes: usize,
    /// Failed replications by error kind.
    pub failures: BTreeMap<String, usize>,
    pub rejections: Vec<RejectionRate>,
    pub coefficients: Vec<CoefficientStats>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl McReport {
    pub fn failure_count(&self) -> usize {
        self.failures.values().sum()
    }

    pub fn rejection(&self, season: usize, method: Method, level: f64) -> Option<&RejectionRate> {
        self.rejections
            .iter()
            .find(|r| r.season == season && r.method == method && (r.level - level).abs() < 1e-12)
    }

    pub fn coefficient(&self, season: usize, lag: usize, row: usize, col: usize) -> Option<&CoefficientStats> {
        self.coefficients
            .iter()
            .find(|c| (c.season, c.lag, c.row, c.col) == (season, lag, row, col))
    }
}

/// Scramble a base seed so that nearby base seeds give disjoint sets of
/// replication seeds (splitmix64 finalizer).
pub fn mix_seed(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r`.
pub fn replication_seed(base_seed: u64, r: u64) -> u64 {
    mix_seed(base_seed) ^ r
}

/// Run every replication (in parallel) and aggregate in replication order.
pub fn run_scenario(sc: &Scenario) -> Result<McReport> {
    let start = Instant::now();
    let prepared = sc.prepare()?;
    let outcomes: Vec<Result<Outcome>> = (0..sc.reps as u64)
        .into_par_iter()
        .map(|r| replicate(&prepared, sc, replication_seed(sc.base_seed, r)))
        .collect();

    let mut failures = BTreeMap::new();
    let mut ok = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(o) => ok.push(o),
            Err(e) => *failures.entry(e.kind().to_string()).or_insert(0) += 1,
        }
    }
    let n_ok = ok.len();
    let denom = n_ok.max(1) as f64;

    let mut rejections = Vec::new();
    for (k, r) in prepared.restrictions.iter().enumerate() {
        for (mi, method) in Method::ALL.iter().enumerate() {
            if !prepared.methods.contains(method) {
                continue;
            }
            for &level in &sc.levels {
                let count = ok
                    .iter()
                    .filter(|o| o.p_values[k][mi].is_some_and(|p| p < level))
                    .count();
                rejections.push(RejectionRate {
                    season: r.season,
                    method: *method,
                    level,
                    rejections: count,
                    frequency: count as f64 / denom,
                });
            }
        }
    }

    let d = prepared.model.d();
    let n = sc.n_cycles as f64;
    let mut coefficients = Vec::new();
    for (v, &order) in prepared.orders.iter().enumerate() {
        let season = v + 1;
        let true_beta = prepared.model.beta(season);
        for i in 0..d * d * order {
            let truth = true_beta.get(i).copied().unwrap_or(0.0);
            let values: Vec<f64> = ok.iter().map(|o| o.beta[v][i]).collect();
            let mean = values.iter().sum::<f64>() / denom;
            let var = if n_ok > 1 {
                values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n_ok - 1) as f64
            } else {
                0.0
            };
            let sse = values.iter().map(|x| n * (x - truth).powi(2)).sum::<f64>() / denom;
            let theta_mean = |mi: usize| -> Option<f64> {
                let vals: Option<Vec<f64>> = ok.iter().map(|o| o.theta[v][mi].as_ref().map(|t| t[i])).collect();
                vals.filter(|v| !v.is_empty()).map(|v| v.iter().sum::<f64>() / v.len() as f64)
            };
            coefficients.push(CoefficientStats {
                season,
                lag: i / (d * d) + 1,
                row: i % d + 1,
                col: (i % (d * d)) / d + 1,
                truth,
                mean,
                scaled_variance: n * var,
                sse,
                theta_s: theta_mean(0),
                theta_sp: theta_mean(1),
                theta_hac: theta_mean(2),
            });
        }
    }

    Ok(McReport {
        scenario: sc.name.clone(),
        n_cycles: sc.n_cycles,
        reps: sc.reps,
        successes: n_ok,
        failures,
        rejections,
        coefficients,
        wall_time: start.elapsed(),
    })
}

/// Mean standardized squared error against the averaged variance estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SseRow {
    pub scenario: String,
    pub season: usize,
    pub lag: usize,
    pub row: usize,
    pub col: usize,
    pub empirical: f64,
    pub theta_s: Option<f64>,
    pub theta_sp: Option<f64>,
    pub theta_hac: Option<f64>,
}

pub fn sse_summary(reports: &[McReport]) -> Vec<SseRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.coefficients.iter().map(move |c| SseRow {
                scenario: r.scenario.clone(),
                season: c.season,
                lag: c.lag,
                row: c.row,
                col: c.col,
                empirical: c.sse,
                theta_s: c.theta_s,
                theta_sp: c.theta_sp,
                theta_hac: c.theta_hac,
            })
        })
        .collect()
}
