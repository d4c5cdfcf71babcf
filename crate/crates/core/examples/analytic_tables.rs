// Closed-form Ω, Θ_S and Θ for the two-season diagonal example, next to
// the same quantities estimated from one long simulated path.

use pvar::analytic::{analytic_tables, DiagExampleParams};
use pvar::lrv::{self, LrvOptions, Method};
use pvar::sim::{self, NoiseSpec};

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:7.3}")).collect::<Vec<_>>().join(" ")
}

pub fn run_example() -> pvar::Result<()> {
    for m in [1, 2] {
        let params = DiagExampleParams::worked_example(m);
        let t = analytic_tables(&params)?;
        println!("m = {m}");
        for v in 0..2 {
            println!("  Theta_S({}) {}", v + 1, fmt(&t.theta_s[v]));
            println!("  Theta({})   {}", v + 1, fmt(&t.theta[v]));
        }

        let model = params.model()?;
        let series = sim::simulate(&model, &NoiseSpec::weak(m), 20_000, 200, 42)?;
        let fit = pvar::estimate::fit_ols(&series, &[1, 1])?;
        let cov = lrv::covariance_estimates(&fit, &LrvOptions::default(), &[Method::Hac])?;
        for c in &cov.seasons {
            let d: Vec<f64> = c.theta_hac.as_ref().unwrap().diagonal().iter().copied().collect();
            println!("  HAC estimate of Theta({}) {}", c.season, fmt(&d));
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
