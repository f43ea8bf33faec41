use std::path::Path;
use std::process::{Command, Output};

fn fdscb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdscb"))
        .args(args)
        .current_dir(dir)
        .env_remove("FDSCB_THREADS")
        .output()
        .expect("binary runs")
}

fn simulate(dir: &Path, model: &str, n: &str, t: &str) {
    let out = fdscb(&["simulate", "--model", model, "--n", n, "--t", t, "--seed", "1", "--out", "s.csv"], dir);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_writes_a_sample() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "A", "10", "175");
    let sample = fdscb::fdata::read_sample_csv(dir.path().join("s.csv")).unwrap();
    assert_eq!((sample.n(), sample.t()), (10, 175));
}

#[test]
fn band_csv_has_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "A", "40", "30");
    let out = fdscb(
        &["band", "--in", "s.csv", "--stat", "cohens_d", "--method", "mult", "--alpha", "0.05", "--b", "1000", "--seed", "2", "--out", "band.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("band.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,center,lower,upper,q,method"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 30);
    for r in rows {
        let v: Vec<f64> = r[..5].iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[1] && v[1] <= v[3]);
        assert_eq!(r[5], "mult");
    }
}

#[test]
fn quantile_and_gauss_test_print_csv() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), "B", "50", "25");
    let out = fdscb(&["quantile", "--in", "s.csv", "--stat", "mean", "--method", "gkf"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("method,alpha,q\ngkf,0.05,"));

    let out = fdscb(
        &["gauss-test", "--in", "s.csv", "--stat", "skewness_z", "--se-mode", "gaussian_exact", "--b", "200"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("statistic,method,se_mode,alpha,max_stat,threshold,reject\nskewness_z,mult,gaussian_exact,"));
}

const SMALL_CONFIG: &str = "\
# small smoke experiment
model = A
statistic = cohens_d
methods = mult, gkf
sample_sizes = 20, 40
grid_size = 15
reps = 100
bootstrap = 100
seed = 7
";

#[test]
fn coverage_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.cfg"), SMALL_CONFIG).unwrap();
    for threads in ["1", "8"] {
        let out_name = format!("cov{threads}.csv");
        let out = fdscb(&["coverage", "--config", "exp.cfg", "--threads", threads, "--out", &out_name], dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("cov{threads}.csv.timing.csv")).exists());
    }
    let a = std::fs::read(dir.path().join("cov1.csv")).unwrap();
    let b = std::fs::read(dir.path().join("cov8.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(fdscb::harness::CoverageReport::CSV_HEADER));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn verify_bessel_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdscb(&["verify", "--oracle", "bessel"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn usage_and_config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fdscb(&["simulate", "--model", "Z", "--n", "5", "--out", "x.csv"], dir.path()).status.code(), Some(1));
    assert_eq!(fdscb(&["verify", "--oracle", "nope"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.cfg"), "model = A\nstatistic = cohens_d\nmethods = mult\nreps = 5\n").unwrap();
    assert_eq!(fdscb(&["coverage", "--config", "bad.cfg"], dir.path()).status.code(), Some(1));
    assert_eq!(fdscb(&["coverage", "--config", "missing.cfg"], dir.path()).status.code(), Some(1));
    assert_eq!(fdscb(&["--version"], dir.path()).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("flat.csv"), "0,0.5,1\n1,1,1\n1,1,1\n1,1,1\n").unwrap();
    let out = fdscb(&["band", "--in", "flat.csv", "--stat", "cohens_d", "--out", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = fdscb(&["band", "--in", "absent.csv", "--stat", "mean", "--out", "b.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
