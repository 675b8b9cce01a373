use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use christoffel::gram::GramSystem;
use christoffel::kernel::KernelSpec;
use christoffel::measure::WeightedSample;

fn christoffel(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_christoffel"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn estimate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "estimate",
        "--measure",
        "iid:sinusoidal:150:11",
        "--lambda-sweep",
        "1e-4:1e-2:3",
        "--queries",
        "grid:-1.5:1.5:31",
    ];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(christoffel(&args, &a).status.success());
    assert!(christoffel(&args, &b).status.success());
    for name in ["estimates.csv", "run.json"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_eq!(
        header(&a.join("estimates.csv")),
        "z1,lambda,christoffel,leverage,p_hat,label"
    );
    assert_eq!(rows(&a.join("estimates.csv")).len(), 31 * 3);
    let run: serde_json::Value = serde_json::from_slice(&fs::read(a.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["seed"], 11);
    assert_eq!(run["systems"].as_array().unwrap().len(), 3);
    assert!(run["config"].get("out").is_none());
}

#[test]
fn one_query_one_lambda_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let q = dir.path().join("q.csv");
    fs::write(&q, "x1\n0.25\n").unwrap();
    let out = dir.path().join("o");
    let query = format!("csv:{}", q.display());
    let status = christoffel(
        &["estimate", "--measure", "riemann:sinusoidal:100", "--lambda", "1e-3", "--queries", &query],
        &out,
    );
    assert!(status.status.success());
    let r = rows(&out.join("estimates.csv"));
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0].parse::<f64>().unwrap(), 0.25);
    assert_eq!(r[0][5], "inside");
}

#[test]
fn at_support_rows_match_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("pts.csv");
    fs::write(&data, "x1,x2,weight\n0,0,0.2\n0.5,0.1,0.3\n-0.3,0.4,0.5\n").unwrap();
    let out = dir.path().join("o");
    let measure = format!("csv:{}", data.display());
    let args = ["estimate", "--nu", "1.5", "--length", "0.7", "--measure", &measure, "--lambda", "1e-2"];
    assert!(christoffel(&args, &out).status.success());

    let sample = WeightedSample::load_csv(&data).unwrap();
    let sys = GramSystem::assemble(&KernelSpec::matern(1.5, 0.7, 2).unwrap(), &sample, 1e-2).unwrap();
    let r = rows(&out.join("estimates.csv"));
    assert_eq!(r.len(), 3);
    for (i, row) in r.iter().enumerate() {
        let c: f64 = row[3].parse().unwrap();
        let expect = sys.christoffel_at_support(i).unwrap();
        assert!((c - expect).abs() <= 1e-12 * expect, "row {i}: {c} vs {expect}");
        let leverage: f64 = row[4].parse().unwrap();
        assert!((leverage * c - 1.0).abs() < 1e-14);
    }
}

#[test]
fn failures_exit_nonzero_and_leave_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let bad_lambda = christoffel(
        &["estimate", "--measure", "riemann:sinusoidal:50", "--lambda", "1e-30"],
        &out,
    );
    assert_eq!(bad_lambda.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_lambda.stderr).contains("error"));
    assert!(!out.join("estimates.csv").exists());
    assert!(!out.join("run.json").exists());

    let missing = christoffel(&["estimate", "--measure", "csv:/no/such/file.csv", "--lambda", "1e-3"], &out);
    assert_eq!(missing.status.code(), Some(1));

    let usage = christoffel(&["estimate", "--measure", "riemann:triangle:50", "--lambda", "1e-3"], &out);
    assert_eq!(usage.status.code(), Some(2));

    let both = christoffel(
        &["estimate", "--measure", "riemann:sinusoidal:50", "--lambda", "1e-3", "--lambda-sweep", "1e-3:1e-2:2"],
        &out,
    );
    assert_eq!(both.status.code(), Some(2));
    assert!(fs::read_dir(&out).map(|d| d.count() == 0).unwrap_or(true));
}

#[test]
fn overfit_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert!(christoffel(&["overfit"], &out).status.success());
    assert_eq!(header(&out.join("overfit.csv")), "z,christoffel,eta_nearest");
    assert_eq!(rows(&out.join("overfit.csv")).len(), 15 + 14 * 20);
    let run: serde_json::Value = serde_json::from_slice(&fs::read(out.join("run.json")).unwrap()).unwrap();
    assert!(run["summary"]["between_over_min_eta"].as_f64().unwrap() < 0.1);
    assert!(run["summary"]["support_excess_over_lambda_floor"].as_f64().unwrap() < 1.0 + 1e-6);
}

#[test]
fn spectral_laplace_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert!(christoffel(&["spectral", "--lambda-sweep", "1e-8:10:12"], &out).status.success());
    let r = rows(&out.join("spectral.csv"));
    assert_eq!(r.len(), 12);
    for row in &r {
        let lambda: f64 = row[0].parse().unwrap();
        let d: f64 = row[1].parse().unwrap();
        assert!((d - (lambda * (lambda + 2.0)).sqrt()).abs() / d <= 1e-6, "λ = {lambda}");
        assert!(d * 1.0 / lambda >= 1.0);
    }
}

#[test]
fn spectral_gaussian_leaves_asymptotics_blank() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let status = christoffel(
        &["spectral", "--kernel", "gaussian", "--length", "0.5", "--lambda-sweep", "1e-6:1e-2:3"],
        &out,
    );
    assert!(status.status.success());
    for row in rows(&out.join("spectral.csv")) {
        assert_eq!(row[2], "");
        assert_eq!(row[3], "");
    }
}

#[test]
fn gaussian_compare_shares_the_query_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let args = ["gaussian-compare", "--n", "200", "--queries", "21", "--tail-sweep", "1e-2:1e-4:3"];
    assert!(christoffel(&args, &out).status.success());
    let r = rows(&out.join("gaussian_compare.csv"));
    let zs = |k: &str| -> Vec<String> { r.iter().filter(|row| row[0] == k).map(|row| row[1].clone()).collect() };
    assert_eq!(zs("gaussian").len(), 21);
    assert_eq!(zs("gaussian"), zs("matern"));
    assert_eq!(rows(&out.join("tail_mass.csv")).len(), 6);
}

#[test]
fn fig2_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let args = ["fig2", "--nu", "0.5,1", "--n", "300", "--queries", "11", "--lambda-sweep", "1e-4:1e-2:3"];
    assert!(christoffel(&args, &out).status.success());
    assert_eq!(rows(&out.join("fig2_left.csv")).len(), 2 * 11);
    assert_eq!(rows(&out.join("fig2_right.csv")).len(), 2 * 3 * 5);
    assert_eq!(header(&out.join("fig2_right.csv")), "nu,z,p_true,lambda,christoffel,rate");
}

#[test]
fn optimizer_curves_hit_one_at_the_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let args = ["optimizer-curves", "--measure", "riemann:sinusoidal:100", "--z", "-0.5,1.2", "--points", "7"];
    assert!(christoffel(&args, &out).status.success());
    assert_eq!(rows(&out.join("curves.csv")).len(), 14);
}
