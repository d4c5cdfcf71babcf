// Lifted representation, causality check and moving-average weights.

use pvar::mc;
use pvar::model::{build_lifted_var, is_causal, ma_coefficients};

pub fn run_example() -> pvar::Result<()> {
    let model = mc::preset("model-I").expect("preset").model.to_model()?;
    let lifted = build_lifted_var(&model);
    println!("lifted dimension {} with {} lag(s)", lifted.phi0_star.nrows(), lifted.p_star);

    let (causal, rho) = is_causal(&model);
    println!("spectral radius of the reduced companion: {rho:.4} (causal: {causal})");
    // the product of the season coefficients drives channel one
    let product: f64 = [-1.43, 0.46, 1.23, 0.30, 0.90].iter().product();
    println!("product of phi11 over the cycle: {:.4}", product.abs());

    for (i, c) in ma_coefficients(&model, 1, 6)?.iter().enumerate() {
        println!("C_{i}(1)[1,1] = {:8.4}", c[(0, 0)]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
