//! Closed-form Ω, Ψ, Θ_S and Θ for the bivariate diagonal PVAR(1) with two
//! seasons driven by product noise of order `m`.
//!
//! Some of these closed forms are not exact
//! (see the README); use a long simulation when exact moments are needed.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lrv;
use crate::model::PvarModel;

/// Diagonal coefficients and variances, indexed `[season - 1][channel - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagExampleParams {
    pub phi: [[f64; 2]; 2],
    pub sigma: [[f64; 2]; 2],
    pub m: usize,
}

impl DiagExampleParams {
    /// `Φ(1) = diag(0.3, -0.6)`, `Φ(2) = diag(-0.7, 0.15)`,
    /// `Σ(1) = diag(1.5, 2.5)`, `Σ(2) = diag(1, 0.5)`.
    pub fn worked_example(m: usize) -> Self {
        Self {
            phi: [[0.3, -0.6], [-0.7, 0.15]],
            sigma: [[1.5, 2.5], [1.0, 0.5]],
            m,
        }
    }

    /// The same process as a [`PvarModel`].
    pub fn model(&self) -> Result<PvarModel> {
        let diag = |v: [f64; 2]| DMatrix::from_diagonal(&DVector::from_row_slice(&v));
        PvarModel::new(
            2,
            2,
            vec![vec![diag(self.phi[0])], vec![diag(self.phi[1])]],
            vec![diag(self.sigma[0]), diag(self.sigma[1])],
        )
    }

    fn check(&self) -> Result<()> {
        for c in 0..2 {
            let product = (self.phi[0][c] * self.phi[1][c]).abs();
            if product >= 1.0 {
                return Err(Error::NotCausal {
                    spectral_radius: product,
                });
            }
            if self.phi[1][c] == 0.0 {
                return Err(Error::InvalidModel(format!(
                    "channel {}: the season-2 coefficient must be nonzero",
                    c + 1
                )));
            }
            if self.sigma[0][c] <= 0.0 || self.sigma[1][c] <= 0.0 {
                return Err(Error::InvalidModel("variances must be positive".into()));
            }
        }
        Ok(())
    }

    /// `φ_cc²(1) φ_cc²(2)`.
    fn rho(&self, c: usize) -> f64 {
        (self.phi[0][c] * self.phi[1][c]).powi(2)
    }
}

/// Season matrices as a pair `(season 1, season 2)`.
pub type SeasonPair = (DMatrix<f64>, DMatrix<f64>);

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_row_slice(v))
}

pub fn omega_closed(p: &DiagExampleParams) -> Result<SeasonPair> {
    p.check()?;
    let mut o1 = [0.0; 2];
    let mut o2 = [0.0; 2];
    for c in 0..2 {
        let (a1, a2) = (p.phi[0][c].powi(2), p.phi[1][c].powi(2));
        let (s1, s2) = (p.sigma[0][c], p.sigma[1][c]);
        let q = 1.0 - p.rho(c);
        o1[c] = (a2 * s1 * q + s2) / q;
        o2[c] = (a2 * s1 * q + s2 * a1 * a2) / (a2 * q);
    }
    Ok((diag(&o1), diag(&o2)))
}

/// `Ω⁻¹(ν) ⊗ Σ(ν)`.
pub fn theta_s_closed(p: &DiagExampleParams) -> Result<SeasonPair> {
    let (o1, o2) = omega_closed(p)?;
    let t = |o: &DMatrix<f64>, v: usize| {
        let s = p.sigma[v];
        diag(&[s[0] / o[(0, 0)], s[1] / o[(0, 0)], s[0] / o[(1, 1)], s[1] / o[(1, 1)]])
    };
    Ok((t(&o1, 0), t(&o2, 1)))
}

pub fn psi_closed(p: &DiagExampleParams) -> Result<SeasonPair> {
    if p.m == 0 {
        return Err(Error::UnsupportedM);
    }
    p.check()?;
    let m = p.m as i32;
    let s = &p.sigma;
    let three = |e: i32| 3f64.powi(e);
    // the 3-power families, one per channel
    let own1 = |c: usize| {
        let rho = p.rho(c);
        let k = (m - 1).div_euclid(2);
        let sum: f64 = (0..=k).map(|i| three(m - 2 * i) * rho.powi(i)).sum();
        three(m - 1) * p.phi[1][c].powi(2) * s[0][c].powi(2)
            + s[0][c] * s[1][c] * (sum + rho.powi(k + 1) / (1.0 - rho))
    };
    let own2 = |c: usize| {
        let rho = p.rho(c);
        let k = m.div_euclid(2);
        let sum: f64 = (1..=k).map(|i| three(m - 2 * i + 1) * rho.powi(i)).sum();
        three(m) * s[0][c].powi(2)
            + s[1][c].powi(2) / p.phi[1][c].powi(2) * (sum + rho.powi(k + 1) / (1.0 - rho))
    };
    let (r1, r2) = (p.rho(0), p.rho(1));
    let psi1 = [
        own1(0),
        p.phi[1][0].powi(2) * s[0][0] * s[0][1] + s[0][1] * s[1][0] / (1.0 - r1),
        p.phi[1][1].powi(2) * s[0][0] * s[0][1] + s[0][0] * s[1][1] / (1.0 - r2),
        own1(1),
    ];
    let psi2 = [
        own2(0),
        s[0][0] * s[0][1] + s[1][1] * s[1][0] * p.phi[0][0].powi(2) / (1.0 - r1),
        s[0][0] * s[0][1] + s[1][0] * s[1][1] * p.phi[0][1].powi(2) / (1.0 - r2),
        own2(1),
    ];
    Ok((diag(&psi1), diag(&psi2)))
}

/// `(Ω⁻¹ ⊗ I) Ψ (Ω⁻¹ ⊗ I)` from the closed forms.
pub fn theta_closed(p: &DiagExampleParams) -> Result<SeasonPair> {
    let (o1, o2) = omega_closed(p)?;
    let (p1, p2) = psi_closed(p)?;
    Ok((lrv::theta_sandwich(&o1, &p1)?, lrv::theta_sandwich(&o2, &p2)?))
}

/// Every closed-form table for one `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTables {
    pub m: usize,
    pub omega: [Vec<f64>; 2],
    pub psi: [Vec<f64>; 2],
    pub theta_s: [Vec<f64>; 2],
    pub theta: [Vec<f64>; 2],
}

pub fn analytic_tables(p: &DiagExampleParams) -> Result<AnalyticTables> {
    let d = |m: &DMatrix<f64>| m.diagonal().iter().copied().collect::<Vec<_>>();
    let pair = |(a, b): SeasonPair| [d(&a), d(&b)];
    Ok(AnalyticTables {
        m: p.m,
        omega: pair(omega_closed(p)?),
        psi: pair(psi_closed(p)?),
        theta_s: pair(theta_s_closed(p)?),
        theta: pair(theta_closed(p)?),
    })
}
