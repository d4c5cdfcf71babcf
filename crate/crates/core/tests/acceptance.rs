//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use pvar::analytic::AnalyticTables;
use pvar::lrv::Method;
use pvar::mc::{self, McReport};

struct Outcome {
    pass: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.pass = false;
            self.details.push(detail);
        }
    }

    fn note(&mut self, detail: String) {
        self.details.push(detail);
    }
}

fn cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pvar").chain(args.iter().copied());
    let code = pvar::cli::run_with(argv, &mut out, &mut err);
    (code, out, err)
}

fn fmt(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3}")).collect();
    format!("({})", parts.join(", "))
}

fn compare_abs(o: &mut Outcome, label: &str, got: &[f64], want: &[f64], tol: f64) {
    let ok = got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol);
    o.check(ok, format!("{label}: got {} want {} ± {tol}", fmt(got), fmt(want)));
}

fn compare_rel(o: &mut Outcome, label: &str, got: &[f64], want: &[f64], tol: f64) {
    let ok = got.len() == want.len() && got.iter().zip(want).all(|(g, w)| ((g - w) / w).abs() <= tol);
    o.check(ok, format!("{label}: got {} want {} within {:.0}%", fmt(got), fmt(want), tol * 100.0));
}

const THETA_S: [[f64; 4]; 2] = [[0.84, 1.40, 2.68, 4.46], [0.69, 0.34, 0.38, 0.19]];
const THETA_M1: [[f64; 4]; 2] = [[1.79, 1.40, 2.68, 12.42], [3.23, 1.79, 0.56, 2.71]];
const THETA_M2: [[f64; 4]; 2] = [[2.48, 1.40, 2.68, 13.32], [9.72, 1.79, 0.56, 8.13]];

fn analytic_json(m: usize) -> Result<AnalyticTables, String> {
    let (code, out, err) = cli(&["analytic", "--m", &m.to_string(), "--format", "json"]);
    if code != 0 {
        return Err(String::from_utf8_lossy(&err).into_owned());
    }
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    for (m, theta) in [(1, THETA_M1), (2, THETA_M2)] {
        match analytic_json(m) {
            Ok(t) => {
                for v in 0..2 {
                    compare_abs(&mut o, &format!("m={m} Θ_S({})", v + 1), &t.theta_s[v], &THETA_S[v], 0.01);
                    compare_abs(&mut o, &format!("m={m} Θ({})", v + 1), &t.theta[v], &theta[v], 0.01);
                }
            }
            Err(e) => o.check(false, format!("analytic --m {m} failed: {e}")),
        }
    }
    o
}

/// Diagonal of the replication-averaged Θ̂ for one season, in vec order.
fn averaged_diagonal(rep: &McReport, season: usize, pick: fn(&mc::CoefficientStats) -> Option<f64>) -> Vec<f64> {
    (0..4)
        .map(|i| {
            let c = rep.coefficient(season, 1, i % 2 + 1, i / 2 + 1).expect("coefficient row");
            pick(c).unwrap_or(f64::NAN)
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let sc = mc::preset("example-m2").unwrap();
    o.check(sc.n_cycles == 4000 && sc.reps == 200, "example-m2 preset is not N=4000, 200 reps".into());
    let rep = match mc::run_scenario(&sc) {
        Ok(r) => r,
        Err(e) => {
            o.check(false, format!("run failed: {e}"));
            return o;
        }
    };
    o.check(rep.failure_count() == 0, format!("failed replications: {:?}", rep.failures));
    for v in 1..=2 {
        let sp = averaged_diagonal(&rep, v, |c| c.theta_sp);
        let hac = averaged_diagonal(&rep, v, |c| c.theta_hac);
        let s = averaged_diagonal(&rep, v, |c| c.theta_s);
        let mse: Vec<f64> = averaged_diagonal(&rep, v, |c| Some(c.sse));
        compare_rel(&mut o, &format!("avg Θ̂^SP({v})"), &sp, &THETA_M2[v - 1], 0.15);
        compare_rel(&mut o, &format!("avg Θ̂^HAC({v})"), &hac, &THETA_M2[v - 1], 0.15);
        compare_rel(&mut o, &format!("avg Θ̂_S({v})"), &s, &THETA_S[v - 1], 0.10);
        o.note(format!("empirical N·MSE({v}) = {}", fmt(&mse)));
    }
    o
}

const LEVELS: [f64; 3] = [0.01, 0.05, 0.10];
const BANDS: [(f64, f64); 3] = [(0.003, 0.019), (0.033, 0.069), (0.076, 0.125)];

fn run_preset(o: &mut Outcome, name: &str) -> Option<McReport> {
    let sc = mc::preset(name).unwrap();
    match mc::run_scenario(&sc) {
        Ok(r) => {
            o.check(r.failure_count() == 0, format!("{name}: failed replications {:?}", r.failures));
            Some(r)
        }
        Err(e) => {
            o.check(false, format!("{name}: {e}"));
            None
        }
    }
}

fn frequencies(rep: &McReport, method: Method, level: f64) -> Vec<f64> {
    (1..=5)
        .map(|v| rep.rejection(v, method, level).map_or(f64::NAN, |r| r.frequency))
        .collect()
}

fn pct(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{:.1}", 100.0 * x)).collect();
    parts.join("/")
}

fn size_bands(o: &mut Outcome, rep: &McReport) {
    for method in [Method::Sp, Method::Hac] {
        for (level, (lo, hi)) in LEVELS.iter().zip(BANDS) {
            let f = frequencies(rep, method, *level);
            let inside = f.iter().filter(|x| **x >= lo && **x <= hi).count();
            let line = format!(
                "{} {:?} α={level}: {}% ({inside}/5 in [{:.1}, {:.1}]%)",
                rep.scenario,
                method,
                pct(&f),
                lo * 100.0,
                hi * 100.0
            );
            if inside >= 4 {
                o.note(line);
            } else {
                o.check(false, line);
            }
        }
    }
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    if let Some(rep) = run_preset(&mut o, "model-I") {
        size_bands(&mut o, &rep);
    }
    if let Some(rep) = run_preset(&mut o, "model-II") {
        let standard = frequencies(&rep, Method::Strong, 0.05);
        o.check(
            standard.iter().all(|f| *f >= 0.30),
            format!("model-II standard α=0.05: {}% (need ≥ 30% everywhere)", pct(&standard)),
        );
        o.note(format!("model-II standard α=0.05: {}%", pct(&standard)));
        size_bands(&mut o, &rep);
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    if let Some(rep) = run_preset(&mut o, "model-III") {
        o.check(rep.n_cycles == 4000 && rep.reps == 1000, "model-III preset is not N=4000, 1000 reps".into());
        for method in Method::ALL {
            let f = frequencies(&rep, method, 0.05);
            let ok = f.iter().enumerate().all(|(i, x)| if i == 1 { *x >= 0.99 } else { *x >= 0.60 });
            let line = format!("{:?} power α=0.05: {}%", method, pct(&f));
            if ok {
                o.note(line);
            } else {
                o.check(false, line);
            }
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    for (name, check) in common::props::all() {
        if let Err(e) = check() {
            o.check(false, format!("{name}: {e}"));
        }
    }
    o
}

fn scratch_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pvar-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch directory");
    dir
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let dir = scratch_dir();
    let model = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples/models/two_season.toml");
    let model = model.to_str().unwrap().to_owned();
    let data = dir.join("weak.csv");
    let data = data.to_str().unwrap().to_owned();

    let (code, _, err) = cli(&["simulate", "--model", &model, "--cycles", "600", "--noise", "weak:2", "--seed", "11", "--out", &data]);
    o.check(code == 0, format!("simulate --out failed: {}", String::from_utf8_lossy(&err)));

    let commands: Vec<Vec<&str>> = vec![
        vec!["simulate", "--model", &model, "--cycles", "300", "--noise", "weak:1", "--seed", "5"],
        vec!["fit", "--data", &data, "--s", "2", "--format", "json"],
        vec!["fit", "--data", &data, "--s", "2", "--demean", "--kernel", "parzen", "--bandwidth", "nw", "--format", "csv"],
        vec!["wald", "--data", &data, "--s", "2", "--restrict", "phi[1](2,2)=0; phi[2](1,2)=0", "--format", "json"],
        vec!["wald", "--data", &data, "--s", "2", "--restrict", "phi[2](1,1)=0", "--ar-order", "2", "--format", "csv"],
        vec!["mc", "--scenario", "example-m1", "--reps", "12", "--cycles", "300", "--seed", "77", "--format", "json"],
        vec!["mc", "--scenario", "model-II", "--reps", "8", "--cycles", "200", "--format", "csv"],
        vec!["mc", "--dump-scenarios"],
        vec!["analytic", "--m", "2", "--format", "json"],
    ];
    for args in commands {
        let (c1, a, _) = cli(&args);
        let (c2, b, _) = cli(&args);
        let label = args.join(" ");
        o.check(c1 == 0 && c2 == 0, format!("`{label}` exit codes {c1}, {c2}"));
        o.check(!a.is_empty() && a == b, format!("`{label}` output differs between runs"));
    }
    let _ = std::fs::remove_dir_all(&dir);
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 6] = [
        ("1 analytic tables", criterion_1, Some(Duration::from_secs(1))),
        ("2 oracle vs estimator", criterion_2, Some(Duration::from_secs(300))),
        ("3 empirical size", criterion_3, Some(Duration::from_secs(900))),
        ("4 empirical power", criterion_4, None),
        ("5 property suite", criterion_5, Some(Duration::from_secs(30))),
        ("6 determinism", criterion_6, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let Some(limit) = budget {
            outcome.check(elapsed <= limit, format!("runtime {elapsed:.2?} exceeds {limit:?}"));
        }
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {name} ({elapsed:.2?})");
        for d in &outcome.details {
            println!("     {d}");
        }
        if !outcome.pass {
            failed += 1;
        }
    }
    println!("{} of 6 criteria passed", 6 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
