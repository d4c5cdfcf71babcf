// Least-squares fit of a simulated periodic VAR(1).

use nalgebra::DMatrix;
use pvar::estimate::fit_ols;
use pvar::io::read_model_file;
use pvar::sim::{simulate, NoiseSpec};

fn rows(m: &DMatrix<f64>) -> String {
    m.row_iter()
        .map(|r| r.iter().map(|x| format!("{x:7.3}")).collect::<String>())
        .collect::<Vec<_>>()
        .join(" |")
}

pub fn run_example() -> pvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/models/two_season.toml");
    let model = read_model_file(path.as_ref())?;
    let series = simulate(&model, &NoiseSpec::strong(), 5000, 100, 1)?;
    let fit = fit_ols(&series, &model.orders())?;
    for f in &fit.seasons {
        println!("season {}", f.season);
        println!("  Phi_hat     {}", rows(&f.coefficients));
        println!("  Phi         {}", rows(&model.coefficient_block(f.season)));
        println!("  Sigma_tilde {}", rows(&f.sigma_tilde));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
