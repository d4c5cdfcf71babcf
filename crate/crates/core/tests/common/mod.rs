//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Composite 8-point Gauss-Legendre rule on `[a, b]` with `panels` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * h;
        let mid = lo + h / 2.0;
        let half = h / 2.0;
        for i in 0..4 {
            total += W[i] * (f(mid - half * X[i]) + f(mid + half * X[i]));
        }
    }
    total * h / 2.0
}

/// `Γ(k / 2)` for a positive integer `k`.
fn gamma_half(k: usize) -> f64 {
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        // Γ(n + 1/2) = (2n)! √π / (4ⁿ n!)
        let n = (k - 1) / 2;
        let mut g = std::f64::consts::PI.sqrt();
        for i in 0..n {
            g *= i as f64 + 0.5;
        }
        g
    }
}

/// Upper χ² tail by quadrature. With `t = u²` the integrand
/// `2 u^{k-1} e^{-u²/2}` is smooth, so the rule is uniform over `[√x, √x + 40]`.
pub fn chisq_sf_quadrature(x: f64, df: usize) -> f64 {
    let k = df as f64;
    let norm = 2f64.powf(k / 2.0) * gamma_half(df);
    let integrand = |u: f64| 2.0 * u.powf(k - 1.0) * (-u * u / 2.0).exp() / norm;
    gauss_legendre(integrand, x.sqrt(), x.sqrt() + 40.0, 4000)
}

/// Upper normal tail by quadrature of the density over `[x, x + 40]`.
pub fn normal_sf_quadrature(x: f64) -> f64 {
    let density = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    gauss_legendre(density, x, x + 40.0, 4000)
}

/// Entry-wise `vec` of a column-major matrix, written out by hand.
pub fn vec_naive(m: &DMatrix<f64>) -> DVector<f64> {
    let mut out = Vec::with_capacity(m.len());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out.push(m[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

pub fn kron_naive(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (p, q) = b.shape();
    DMatrix::from_fn(a.nrows() * p, a.ncols() * q, |r, c| a[(r / p, c / q)] * b[(r % p, c % q)])
}

/// A non-periodic VAR(p) fitted by least squares with explicit loops, plus
/// the strong and kernel sandwich covariances.
pub struct PlainVar {
    pub beta: DVector<f64>,
    pub residuals: Vec<Vec<f64>>,
    pub omega: DMatrix<f64>,
    pub scores: Vec<DVector<f64>>,
    pub sigma: DMatrix<f64>,
}

/// `y[t]` for `t = 0..T`; the first `p` values are the pre-sample.
pub fn plain_var(y: &[Vec<f64>], p: usize) -> PlainVar {
    let d = y[0].len();
    let n = y.len() - p;
    let k = d * p;
    let regressor = |t: usize| -> Vec<f64> {
        let mut x = Vec::with_capacity(k);
        for lag in 1..=p {
            x.extend_from_slice(&y[t - lag]);
        }
        x
    };
    let mut xx = DMatrix::zeros(k, k);
    let mut xy = DMatrix::zeros(k, d);
    for t in p..y.len() {
        let x = regressor(t);
        for a in 0..k {
            for b in 0..k {
                xx[(a, b)] += x[a] * x[b];
            }
            for i in 0..d {
                xy[(a, i)] += x[a] * y[t][i];
            }
        }
    }
    // coefficient matrix B (d x k) solves B (XXᵀ) = Y Xᵀ
    let bt = xx.clone().lu().solve(&xy).expect("regular design");
    let b = bt.transpose();
    let mut residuals = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n);
    let mut sigma = DMatrix::zeros(d, d);
    for t in p..y.len() {
        let x = regressor(t);
        let e: Vec<f64> = (0..d)
            .map(|i| y[t][i] - (0..k).map(|a| b[(i, a)] * x[a]).sum::<f64>())
            .collect();
        for i in 0..d {
            for j in 0..d {
                sigma[(i, j)] += e[i] * e[j];
            }
        }
        let mut w = Vec::with_capacity(k * d);
        for a in 0..k {
            for i in 0..d {
                w.push(x[a] * e[i]);
            }
        }
        scores.push(DVector::from_vec(w));
        residuals.push(e);
    }
    PlainVar {
        beta: vec_naive(&b),
        residuals,
        omega: xx / n as f64,
        scores,
        sigma: sigma / (n - k) as f64,
    }
}

/// `Σ_{|h| ≤ T} f(h) Λ̂_h` with `Λ̂_h = (1/N) Σ_{n ≥ h} w_n w_{n-h}ᵀ`, by loops.
pub fn hac_naive(w: &[DVector<f64>], weights: &[f64]) -> DMatrix<f64> {
    let n = w.len();
    let q = w[0].len();
    let mut psi = DMatrix::zeros(q, q);
    for (h, &f) in weights.iter().enumerate() {
        let mut lam = DMatrix::zeros(q, q);
        for t in h..n {
            lam += &w[t] * w[t - h].transpose();
        }
        lam /= n as f64;
        if h == 0 {
            psi += lam * f;
        } else {
            psi += (&lam + lam.transpose()) * f;
        }
    }
    psi
}

pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub mod props;
