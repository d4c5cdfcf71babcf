// Write a simulated series to CSV, read it back and print the coefficient
// table with standard errors and p-values for each covariance estimator.

use pvar::io::{read_csv, write_csv, PresamplePolicy};
use pvar::mc;
use pvar::report::{fit_report, fit_table, FitOptions};
use pvar::sim::{simulate, NoiseSpec};

pub fn run_example() -> pvar::Result<()> {
    let model = mc::preset("dgp-weak").expect("preset").model.to_model()?;
    let series = simulate(&model, &NoiseSpec::weak(2), 1412, 500, 2022)?;

    let dir = std::env::temp_dir().join(format!("pvar-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("returns.csv");
    write_csv(&series, std::fs::File::create(&path)?)?;

    let loaded = read_csv(&path, 5, PresamplePolicy::None)?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    let mut options = FitOptions::new(vec![1; 5]);
    options.demean = true;
    let report = fit_report(&loaded.series, &options)?;
    print!("{}", fit_table(&report));
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
