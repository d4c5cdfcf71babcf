// Standard, spectral and kernel estimates of the asymptotic covariance on
// weak-noise data, with the AR order picked by AIC and several kernels.

use pvar::estimate::fit_ols;
use pvar::lrv::{covariance_estimates, Bandwidth, KernelKind, LrvOptions, Method};
use pvar::mc;
use pvar::sim::{simulate, NoiseSpec};

fn diag(m: &nalgebra::DMatrix<f64>) -> String {
    m.diagonal().iter().map(|x| format!("{x:7.3}")).collect::<Vec<_>>().join(" ")
}

pub fn run_example() -> pvar::Result<()> {
    let model = mc::preset("model-II").expect("preset").model.to_model()?;
    let series = simulate(&model, &NoiseSpec::weak(2), 2000, 500, 11)?;
    let fit = fit_ols(&series, &model.orders())?;
    for kernel in [KernelKind::Bartlett, KernelKind::Parzen, KernelKind::QuadraticSpectral] {
        let options = LrvOptions {
            kernel,
            bandwidth: Bandwidth::Fixed(1.0 / 21.0),
            ..LrvOptions::default()
        };
        let cov = covariance_estimates(&fit, &options, &Method::ALL)?;
        let c = cov.season(1);
        println!("kernel {} (T_N = {})", kernel.name(), cov.kernel.truncation(cov.n_cycles));
        println!("  Theta_S   {}", diag(&c.theta_s));
        println!("  Theta_SP  {}  (AR order {})", diag(c.theta_sp.as_ref().unwrap()), c.ar_order.unwrap());
        println!("  Theta_HAC {}", diag(c.theta_hac.as_ref().unwrap()));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
