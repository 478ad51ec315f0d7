use std::path::Path;
use std::process::{Command, Output};

fn subcount(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subcount"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

const SMALL: &str = "\
dataset = synthetic
n = 3000
domain_size = 300
mean_set_size = 5
category = 1-30
methods = CRIAD, RR, NVP-PM
epsilons = 0.5, 1.0
trials = 2
seed = 3
";

#[test]
fn run_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    let o = subcount(&["run", "--config", "small.cfg", "--out", "rec.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_to_string(dir.path().join("rec.csv")).unwrap();
    let mut lines = records.lines();
    assert_eq!(lines.next(), Some("method,epsilon,trial,estimate,truth,relative_error"));
    assert_eq!(lines.count(), 3 * 2 * 2);
    let summary = std::fs::read_to_string(dir.path().join("rec_summary.csv")).unwrap();
    assert!(summary.starts_with("method,epsilon,mre,std\n"));
    assert_eq!(summary.lines().count(), 1 + 3 * 2);
    // the summary is echoed on stdout
    assert_eq!(String::from_utf8(o.stdout).unwrap(), summary);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("small.cfg"), SMALL).unwrap();
    let a = subcount(&["run", "--config", "small.cfg", "--seed", "3"], dir.path());
    let b = subcount(&["run", "--config", "small.cfg"], dir.path());
    let c = subcount(&["run", "--config", "small.cfg", "--seed", "4"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_then_run_on_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = subcount(
        &["gen", "--n", "500", "--domain-size", "50", "--seed", "9", "--out", "tx.txt"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("tx.txt")).unwrap();
    assert_eq!(text.lines().count(), 500);
    std::fs::write(
        dir.path().join("file.cfg"),
        "dataset = tx.txt\ncategory = 1-10\nmethods = RR\nepsilons = 1\ntrials = 1\n",
    )
    .unwrap();
    let o = subcount(&["run", "--config", "file.cfg"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = subcount(&["run", "--config", "nope.cfg"], dir.path());
    assert_eq!(code(&missing), 2);

    std::fs::write(dir.path().join("bad.cfg"), "category = 1-10\ncolour = blue\n").unwrap();
    let bad = subcount(&["run", "--config", "bad.cfg"], dir.path());
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("colour"));

    std::fs::write(dir.path().join("eps.cfg"), "category = 1-10\nepsilons = 0\n").unwrap();
    assert_eq!(code(&subcount(&["run", "--config", "eps.cfg"], dir.path())), 2);

    let threads = subcount(&["--threads", "0", "audit"], dir.path());
    assert_eq!(code(&threads), 2);
}

#[test]
fn select_params_restricted_search() {
    let dir = tempfile::tempdir().unwrap();
    let o = subcount(
        &["select-params", "--d", "400", "--epsilon", "1", "--s", "1", "--g", "1"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,s,g,count,implied_epsilon,objective"));
    assert!(lines.next().unwrap().starts_with("148,1,1,1,"));
}

#[test]
fn audit_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = subcount(&["audit", "--out", "audit.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = std::fs::read_to_string(dir.path().join("audit.csv")).unwrap();
    assert!(text.starts_with("protocol,params,d,claimed_epsilon,max_log_ratio,verdict\n"));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn audit_single_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let o = subcount(
        &["audit", "--protocol", "criad", "--d", "8", "--m", "2", "--s", "2"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    // ln(C(8,2)/C(2,2)) = ln 28
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let ratio: f64 = row[4].parse().unwrap();
    assert!((ratio - 28f64.ln()).abs() < 1e-9, "{text}");
    assert_eq!(row[5], "pass");
}
