// Feasible GLS with the off-diagonal coefficients pinned to zero.

use pvar::estimate::{build_design, fit_constrained, fit_ols_design, ConstraintSpec};
use pvar::infer::coefficient_index;
use pvar::io::read_model_file;
use pvar::sim::{simulate, NoiseSpec};

fn row(v: &nalgebra::DVector<f64>) -> String {
    v.iter().map(|x| format!("{x:8.4}")).collect()
}

pub fn run_example() -> pvar::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/models/two_season.toml");
    let model = read_model_file(path.as_ref())?;
    let series = simulate(&model, &NoiseSpec::weak(1), 2000, 100, 3)?;
    let design = build_design(&series, &[1, 1])?;
    let ols = fit_ols_design(&design)?;

    let off_diagonal = vec![coefficient_index(2, 1, 2, 1), coefficient_index(2, 1, 1, 2)];
    let constraints = ConstraintSpec::zeros(2, &[1, 1], &[off_diagonal.clone(), off_diagonal])?;
    let gls = fit_constrained(&design, &constraints, &ols.sigma_tildes())?;
    for v in 0..2 {
        println!("season {}", v + 1);
        println!("  unconstrained beta {}", row(&ols.seasons[v].beta));
        println!("  constrained beta   {}", row(&gls.beta[v]));
        println!("  free parameters    {}", row(&gls.xi[v]));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
