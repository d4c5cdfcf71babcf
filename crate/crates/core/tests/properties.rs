mod common;

use common::props;

#[test]
fn lambda_transpose_symmetry() {
    props::lambda_transpose_symmetry().unwrap();
}

#[test]
fn full_lag_sum_vanishes_for_ols_scores() {
    props::full_lag_sum().unwrap();
}

#[test]
fn wald_is_invariant_under_restriction_transforms() {
    props::wald_transform_invariance().unwrap();
}

#[test]
fn identity_constraint_reproduces_ols() {
    props::identity_constraint_matches_ols().unwrap();
}

#[test]
fn single_season_matches_plain_var() {
    props::single_season_reduction().unwrap();
}

#[test]
fn t_and_wald_p_values_agree() {
    props::t_wald_identity().unwrap();
}

#[test]
fn vec_and_kron_identities() {
    props::vec_kron_identities().unwrap();
}

#[test]
fn zero_lag_estimators_equal_lambda_0() {
    props::zero_lag_estimators_agree().unwrap();
}

#[test]
fn tail_functions_match_quadrature() {
    props::tail_functions().unwrap();
}

mod extra {
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    use pvar::estimate;
    use pvar::infer::{self, Restriction};
    use pvar::lrv::{self, KernelKind, KernelSpec, LrvOptions, Method};
    use pvar::{linalg, PeriodicSeries};

    use super::common::{kron_naive, props::weak_sample};

    fn spd(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
        proptest::collection::vec(-1.0..1.0f64, n * n).prop_map(move |v| {
            let a = DMatrix::from_vec(n, n, v);
            &a * a.transpose() + DMatrix::identity(n, n) * 0.5
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

        #[test]
        fn strong_psi_in_the_sandwich_gives_theta_strong(omega in spd(2), sigma in spd(2)) {
            let psi = linalg::kron(&omega, &sigma);
            let a = lrv::theta_sandwich(&omega, &psi).unwrap();
            let b = lrv::theta_strong(&omega, &sigma).unwrap();
            prop_assert!((&a - &b).amax() <= 1e-12 * b.amax().max(1.0) * 10.0);
        }

        #[test]
        fn identity_restriction_reduces_theta_xi(omega in spd(2), sigma in spd(2), psi in spd(4)) {
            let r = DMatrix::identity(4, 4);
            let xi = lrv::theta_xi(&r, &omega, &sigma, &psi).unwrap();
            let sandwich = lrv::theta_sandwich(&omega, &psi).unwrap();
            prop_assert!((&xi - &sandwich).amax() <= 1e-9 * sandwich.amax());
            let strong = lrv::theta_xi(&r, &omega, &sigma, &linalg::kron(&omega, &sigma)).unwrap();
            let expected = lrv::theta_strong(&omega, &sigma).unwrap();
            prop_assert!((&strong - &expected).amax() <= 1e-9 * expected.amax());
        }

        #[test]
        fn single_direction_theta_xi_matches_dense_assembly(
            omega in spd(2),
            sigma in spd(2),
            psi in spd(4),
            i in 0usize..4,
        ) {
            let mut r = DMatrix::zeros(4, 1);
            r[(i, 0)] = 1.0;
            let got = lrv::theta_xi(&r, &omega, &sigma, &psi).unwrap()[(0, 0)];
            let sigma_inv = sigma.clone().try_inverse().unwrap();
            let bread = kron_naive(&omega, &sigma_inv)[(i, i)];
            let side = kron_naive(&DMatrix::identity(2, 2), &sigma_inv);
            let meat = (&side * &psi * &side)[(i, i)];
            let want = meat / (bread * bread);
            prop_assert!((got - want).abs() <= 1e-10 * want.abs());
        }
    }

    #[test]
    fn bartlett_long_run_variance_is_positive_semidefinite() {
        let series = weak_sample(150, 41);
        let fit = estimate::fit_ols(&series, &[1; 5]).unwrap();
        for sf in &fit.seasons {
            let w = lrv::scores(&sf.design.x, &sf.residuals);
            for b in [0.02, 0.1, 0.5] {
                let psi = lrv::psi_hac(&w, &KernelSpec::new(KernelKind::Bartlett, b));
                let min = psi.symmetric_eigenvalues().min();
                assert!(min >= -1e-12 * psi.norm(), "season {} b={b}: λ_min = {min}", sf.season);
            }
        }
    }

    #[test]
    fn residuals_are_orthogonal_to_regressors() {
        let series = weak_sample(120, 42);
        let fit = estimate::fit_ols(&series, &[1, 2, 1, 3, 1]).unwrap();
        for sf in &fit.seasons {
            let cross = &sf.residuals * sf.design.x.transpose();
            let scale = sf.residuals.norm() * sf.design.x.norm();
            assert!(cross.amax() <= 1e-12 * scale, "season {}", sf.season);
            let fitted = &sf.coefficients * &sf.design.x + &sf.residuals;
            assert!((fitted - &sf.design.z).amax() <= 1e-12 * sf.design.z.amax());
        }
    }

    #[test]
    fn wald_statistics_survive_channel_rescaling() {
        let series = weak_sample(300, 43);
        let scale = DVector::from_vec(vec![3.0, 0.2]);
        let scaled: PeriodicSeries = series.map_values(|_, _, y| y.component_mul(&scale));
        let opts = LrvOptions::default();
        let orders = [1; 5];
        let a = estimate::fit_ols(&series, &orders).unwrap();
        let b = estimate::fit_ols(&scaled, &orders).unwrap();
        let ca = lrv::covariance_estimates(&a, &opts, &Method::ALL).unwrap();
        let cb = lrv::covariance_estimates(&b, &opts, &Method::ALL).unwrap();
        for v in 1..=5 {
            assert_eq!(ca.season(v).ar_order, cb.season(v).ar_order);
            let restriction = Restriction::coordinates(v, 4, &[(3, 0.0)]).unwrap();
            for m in Method::ALL {
                let wa = infer::wald(&restriction, &a.season(v).beta, ca.season(v).theta(m).unwrap(), a.n_cycles, m).unwrap();
                let wb = infer::wald(&restriction, &b.season(v).beta, cb.season(v).theta(m).unwrap(), b.n_cycles, m).unwrap();
                assert!(
                    (wa.statistic - wb.statistic).abs() <= 1e-8 * wa.statistic.max(1.0),
                    "season {v} {m:?}: {} vs {}",
                    wa.statistic,
                    wb.statistic
                );
            }
        }
    }
}
