//! Algebraic and numerical properties, each returning a description of the
//! first violation found.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use pvar::estimate::{self, ConstraintSpec, FitResult};
use pvar::infer::{self, Restriction};
use pvar::lrv::{self, KernelKind, KernelSpec, Method};
use pvar::sim::{self, NoiseSpec};
use pvar::{linalg, mc, PeriodicSeries, PvarModel};

use super::*;

pub type Check = std::result::Result<(), String>;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn flatten<E: std::fmt::Display>(r: std::result::Result<(), E>) -> Check {
    r.map_err(|e| e.to_string())
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-3.0..3.0f64, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

/// Weak-noise sample from the five-season bivariate size-study model.
pub fn weak_sample(n_cycles: usize, seed: u64) -> PeriodicSeries {
    let model = mc::preset("model-II").unwrap().model.to_model().unwrap();
    sim::simulate(&model, &NoiseSpec::weak(2), n_cycles, 100, seed).unwrap()
}

fn fit(series: &PeriodicSeries) -> FitResult {
    estimate::fit_ols(series, &vec![1; series.s()]).unwrap()
}

pub fn lambda_transpose_symmetry() -> Check {
    let series = weak_sample(150, 1);
    let f = fit(&series);
    let w = lrv::scores(&f.season(2).design.x, &f.season(2).residuals);
    for h in 0..w.ncols() as i64 {
        let plus = lrv::lambda_hat(&w, h).unwrap();
        let minus = lrv::lambda_hat(&w, -h).unwrap();
        if plus.transpose() != minus {
            return Err(format!("Λ̂_{{-{h}}} differs from Λ̂_{h}ᵀ"));
        }
    }
    if lrv::lambda_hat(&w, w.ncols() as i64).is_ok() {
        return Err("lag N accepted".into());
    }
    Ok(())
}

pub fn full_lag_sum() -> Check {
    for seed in 0..4 {
        let series = weak_sample(120, 10 + seed);
        let f = fit(&series);
        for sf in &f.seasons {
            let w = lrv::scores(&sf.design.x, &sf.residuals);
            let n = w.ncols() as i64;
            let lam0 = lrv::lambda_hat(&w, 0).unwrap();
            let mut total = DMatrix::zeros(w.nrows(), w.nrows());
            for h in -(n - 1)..n {
                total += lrv::lambda_hat(&w, h).unwrap();
            }
            if total.norm() > 1e-8 * lam0.norm() {
                return Err(format!(
                    "season {}: ‖ΣΛ̂_h‖ = {:e}, ‖Λ̂₀‖ = {:e}",
                    sf.season,
                    total.norm(),
                    lam0.norm()
                ));
            }
        }
    }
    Ok(())
}

pub fn wald_transform_invariance() -> Check {
    let series = weak_sample(300, 3);
    let f = fit(&series);
    let cov = lrv::covariance_estimates(&f, &lrv::LrvOptions::default(), &Method::ALL).unwrap();
    let n = f.n_cycles;
    let strategy = (1usize..=5, matrix(2, 2), proptest::collection::vec(-0.5..0.5f64, 2));
    flatten(runner(64).run(&strategy, |(season, t, shift)| {
        prop_assume!(t.determinant().abs() > 0.05);
        let sc = cov.season(season);
        let beta = &f.season(season).beta;
        // two restrictions: Φ[2,2] = shift₀ and Φ[1,2] + Φ[2,1] = shift₁
        let mut r0 = DMatrix::zeros(2, 4);
        r0[(0, 3)] = 1.0;
        r0[(1, 1)] = 1.0;
        r0[(1, 2)] = 1.0;
        let value = DVector::from_vec(shift);
        let base = Restriction::new(season, r0.clone(), value.clone()).unwrap();
        let moved = Restriction::new(season, &t * r0, &t * value).unwrap();
        for m in Method::ALL {
            let theta = sc.theta(m).unwrap();
            let a = infer::wald(&base, beta, theta, n, m).unwrap();
            let b = infer::wald(&moved, beta, theta, n, m).unwrap();
            prop_assert!(
                (a.statistic - b.statistic).abs() <= 1e-10 * a.statistic.abs().max(1.0),
                "{:?}: {} vs {}",
                m,
                a.statistic,
                b.statistic
            );
            prop_assert!((a.p_value - b.p_value).abs() <= 1e-10);
        }
        Ok(())
    }))
}

pub fn identity_constraint_matches_ols() -> Check {
    for seed in 0..3 {
        let series = weak_sample(200, 20 + seed);
        let orders = [1, 2, 1, 1, 2];
        let f = estimate::fit_ols(&series, &orders).unwrap();
        let design = f.design();
        let identity = ConstraintSpec::identity(2, &orders);
        let gls = estimate::fit_constrained(&design, &identity, &f.sigma_tildes()).unwrap();
        for sf in &f.seasons {
            let diff = (&gls.beta[sf.season - 1] - &sf.beta).amax();
            if diff > 1e-8 {
                return Err(format!("season {}: max |β̂̂ - β̂| = {diff:e}", sf.season));
            }
        }
    }
    Ok(())
}

fn single_season_model() -> PvarModel {
    let phi1 = DMatrix::from_row_slice(2, 2, &[0.4, 0.1, -0.2, 0.3]);
    let phi2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, -0.15]);
    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 2.0]);
    PvarModel::new(1, 2, vec![vec![phi1, phi2]], vec![sigma]).unwrap()
}

pub fn single_season_reduction() -> Check {
    let model = single_season_model();
    let series = sim::simulate(&model, &NoiseSpec::weak(1), 800, 200, 5).unwrap();
    let t_len = series.n_cycles() + series.presample_len();
    let y: Vec<Vec<f64>> = (0..t_len as i64)
        .map(|k| series.value(k + 1 - series.presample_len() as i64).iter().copied().collect())
        .collect();
    let plain = plain_var(&y, 2);

    let f = estimate::fit_ols(&series, &[2]).unwrap();
    let b = 0.05;
    let opts = lrv::LrvOptions {
        kernel: KernelKind::Bartlett,
        bandwidth: lrv::Bandwidth::Fixed(b),
        ar_order: lrv::ArOrder::Fixed(1),
    };
    let cov = lrv::covariance_estimates(&f, &opts, &Method::ALL).unwrap();
    let sc = cov.season(1);

    let mut checks = Vec::new();
    checks.push(("β", rel_err(&DMatrix::from_column_slice(8, 1, f.season(1).beta.as_slice()), &DMatrix::from_column_slice(8, 1, plain.beta.as_slice()))));
    checks.push(("Ω", rel_err(&sc.omega, &plain.omega)));
    checks.push(("Σ̃", rel_err(&sc.sigma_tilde, &plain.sigma)));

    let omega_inv = plain.omega.clone().try_inverse().unwrap();
    checks.push(("Θ_S", rel_err(&sc.theta_s, &kron_naive(&omega_inv, &plain.sigma))));

    let weights: Vec<f64> = (0..=20).map(|h| (1.0 - h as f64 * b).max(0.0)).collect();
    let psi = hac_naive(&plain.scores, &weights);
    let a = kron_naive(&omega_inv, &DMatrix::identity(2, 2));
    checks.push(("Ψ̂_HAC", rel_err(sc.psi_hac.as_ref().unwrap(), &psi)));
    checks.push(("Θ̂_HAC", rel_err(sc.theta_hac.as_ref().unwrap(), &(&a * &psi * &a))));

    // VAR(1) on the scores, residual covariance over N - 1 terms
    let score_var = plain_var(&plain.scores.iter().map(|w| w.iter().copied().collect()).collect::<Vec<_>>(), 1);
    let q = 8;
    let a1 = DMatrix::from_column_slice(q, q, score_var.beta.as_slice());
    let len = score_var.residuals.len() as f64;
    let mut sigma_u = DMatrix::zeros(q, q);
    for e in &score_var.residuals {
        let e = DVector::from_column_slice(e);
        sigma_u += &e * e.transpose();
    }
    sigma_u /= len;
    let unit_inv = (DMatrix::identity(q, q) - a1).try_inverse().unwrap();
    let psi_sp = &unit_inv * sigma_u * unit_inv.transpose();
    checks.push(("Ψ̂_SP", rel_err(sc.psi_sp.as_ref().unwrap(), &psi_sp)));
    checks.push(("Θ̂_SP", rel_err(sc.theta_sp.as_ref().unwrap(), &(&a * &psi_sp * &a))));

    for (name, err) in checks {
        if !(err <= 1e-12) {
            return Err(format!("{name}: relative error {err:e}"));
        }
    }
    Ok(())
}

pub fn t_wald_identity() -> Check {
    for seed in 0..3 {
        let series = weak_sample(400, 30 + seed);
        let f = fit(&series);
        let cov = lrv::covariance_estimates(&f, &lrv::LrvOptions::default(), &Method::ALL).unwrap();
        let n = f.n_cycles;
        for sf in &f.seasons {
            let sc = cov.season(sf.season);
            let rows = infer::t_report(
                sf.season,
                2,
                &sf.beta,
                [Some(&sc.theta_s), sc.theta_sp.as_ref(), sc.theta_hac.as_ref()],
                n,
            )
            .unwrap();
            for (i, row) in rows.iter().enumerate() {
                let restriction = Restriction::coordinates(sf.season, sf.beta.len(), &[(i, 0.0)]).unwrap();
                let ps = [row.p_s, row.p_sp, row.p_hac];
                for (k, m) in Method::ALL.iter().enumerate() {
                    let w = infer::wald(&restriction, &sf.beta, sc.theta(*m).unwrap(), n, *m).unwrap();
                    let p = ps[k].unwrap();
                    if (w.p_value - p).abs() > 1e-10 {
                        return Err(format!(
                            "season {} coefficient {i} {:?}: Wald p {} vs t p {p}",
                            sf.season, m, w.p_value
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn vec_kron_identities() -> Check {
    let strategy = (1usize..4, 1usize..4, 1usize..4, 1usize..4).prop_flat_map(|(m, n, p, q)| {
        (matrix(m, n), matrix(n, p), matrix(p, q), matrix(q, m), matrix(m, q))
    });
    flatten(runner(128).run(&strategy, |(a, b, c, d, e)| {
        let close = |x: &DMatrix<f64>, y: &DMatrix<f64>| (x - y).amax() <= 1e-12 * (1.0 + y.amax());
        // vec(ABC) = (Cᵀ ⊗ A) vec(B)
        let lhs = linalg::vec_col(&(&a * &b * &c));
        let rhs = linalg::kron(&c.transpose(), &a) * vec_naive(&b);
        prop_assert!(close(&DMatrix::from_column_slice(lhs.len(), 1, lhs.as_slice()), &DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice())));
        // kron agrees with the entry-wise definition
        prop_assert_eq!(linalg::kron(&a, &d), kron_naive(&a, &d));
        // (A ⊗ E)(B ⊗ D) = AB ⊗ ED
        let mixed = linalg::kron(&a, &e) * linalg::kron(&b, &d);
        prop_assert!(close(&mixed, &linalg::kron(&(&a * &b), &(&e * &d))));
        // (A ⊗ D)ᵀ = Aᵀ ⊗ Dᵀ
        prop_assert_eq!(linalg::kron(&a, &d).transpose(), linalg::kron(&a.transpose(), &d.transpose()));
        // vec and unvec are inverse
        prop_assert_eq!(linalg::unvec(&linalg::vec_col(&b), b.nrows(), b.ncols()), b.clone());
        prop_assert_eq!(linalg::vec_col(&b), vec_naive(&b));
        Ok(())
    }))
}

pub fn zero_lag_estimators_agree() -> Check {
    let series = weak_sample(200, 7);
    let f = fit(&series);
    for sf in &f.seasons {
        let w = lrv::scores(&sf.design.x, &sf.residuals);
        let lam0 = lrv::lambda_hat(&w, 0).unwrap();
        let sp = lrv::psi_spectral(&w, 0).unwrap();
        // a bandwidth above the kernel support gives T_N = 0
        let spec = KernelSpec::new(KernelKind::Bartlett, 2.0);
        if spec.truncation(w.ncols()) != 0 {
            return Err("truncation lag is not zero".into());
        }
        let hac = lrv::psi_hac(&w, &spec);
        if sp != lam0 || hac != lam0 {
            return Err(format!("season {}: zero-lag estimators differ from Λ̂₀", sf.season));
        }
    }
    Ok(())
}

pub fn tail_functions() -> Check {
    for &x in &[0.01, 0.5, 1.0, 2.706, 3.841, 6.635, 9.488, 15.0, 25.0, 40.0] {
        for df in 1..=8 {
            let oracle = chisq_sf_quadrature(x, df);
            let ours = infer::chisq_sf(x, df);
            if (ours - oracle).abs() > 1e-8 {
                return Err(format!("χ²({df}) tail at {x}: {ours} vs {oracle}"));
            }
        }
    }
    for i in -60..=60 {
        let x = i as f64 / 10.0;
        let oracle = normal_sf_quadrature(x);
        let ours = infer::normal_sf(x);
        if (ours - oracle).abs() > 1e-8 {
            return Err(format!("normal tail at {x}: {ours} vs {oracle}"));
        }
    }
    Ok(())
}

/// The suite that must hold exactly as stated.
pub fn all() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("lambda transpose symmetry", lambda_transpose_symmetry),
        ("full-lag-sum identity", full_lag_sum),
        ("Wald invariance under restriction transforms", wald_transform_invariance),
        ("identity constraint equals OLS", identity_constraint_matches_ols),
        ("single-season reduction", single_season_reduction),
        ("t-squared Wald identity", t_wald_identity),
        ("vec/kron identities", vec_kron_identities),
        ("zero-lag estimators equal lambda_0", zero_lag_estimators_agree),
        ("chi-square and normal tails", tail_functions),
    ]
}
