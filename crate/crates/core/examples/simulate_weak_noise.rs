// Product noise is uncorrelated but not independent: its levels show no
// autocorrelation while its squares do.

use pvar::sim::{gen_noise, NoiseSpec};

fn autocorr(x: &[f64], lag: usize) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let cov: f64 = (lag..n).map(|t| (x[t] - mean) * (x[t - lag] - mean)).sum();
    cov / var
}

pub fn run_example() -> pvar::Result<()> {
    let (s, d, cycles) = (1, 1, 200_000);
    for (label, spec) in [("strong", NoiseSpec::strong()), ("weak m=2", NoiseSpec::weak(2))] {
        let eps = gen_noise(&spec, s, d, cycles, 7)?;
        let level: Vec<f64> = eps.row(0).iter().copied().collect();
        let square: Vec<f64> = level.iter().map(|v| v * v).collect();
        println!("{label}");
        for lag in 1..=3 {
            println!(
                "  lag {lag}: corr(e) = {:7.4}  corr(e^2) = {:7.4}",
                autocorr(&level, lag),
                autocorr(&square, lag)
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
