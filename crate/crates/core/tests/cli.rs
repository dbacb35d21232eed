use std::path::Path;
use std::process::{Command, Output};

fn dcsp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcsp"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn dcsp")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn result_line(transcript: &str) -> &str {
    transcript.lines().find(|l| l.starts_with("result ")).expect("result line")
}

#[test]
fn fig1_writes_csv_and_dat() {
    let dir = tempfile::tempdir().unwrap();
    let out = dcsp(&["fig1", "--trials", "4", "--M", "26,30", "--out", "small.csv"], dir.path());
    let printed = stdout(&out);
    let written = std::fs::read_to_string(dir.path().join("small.csv")).unwrap();
    assert_eq!(printed, written);
    let rows: Vec<&str> = written.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3, "{written}");
    assert!(rows[0].starts_with("M,"));
    assert!(dir.path().join("small.dat").exists());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# small run\ntrials = 2\nM = 40\nseed = 5\n").unwrap();
    let out = dcsp(&["fig1", "--config", "run.cfg", "--M", "44"], dir.path());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("44,2,"), "{}", rows[0]);
}

#[test]
fn trial_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["trial", "--seed", "4", "--M", "30"];
    let a = stdout(&dcsp(&args, dir.path()));
    let b = stdout(&dcsp(&args, dir.path()));
    assert_eq!(a, b);
    assert!(a.contains("G_1 = {1,3,4}"));
    assert!(result_line(&a).contains("success true"));
}

#[test]
fn trial_full_neighborhood_matches_ssp() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2", "3", "4"] {
        let ssp = stdout(&dcsp(&["trial", "--algorithm", "ssp", "--seed", seed, "--M", "26"], dir.path()));
        let dcsp_full = stdout(&dcsp(&["trial", "--g", "6", "--seed", seed, "--M", "26"], dir.path()));
        let support = |t: &str| result_line(t).split(" success").next().unwrap().to_string();
        assert_eq!(support(&ssp), support(&dcsp_full), "seed {seed}");
    }
}

#[test]
fn trial_reports_exact_accounting() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&dcsp(&["trial", "--seed", "9", "--L", "8", "--g", "4"], dir.path()));
    let line = text.lines().find(|l| l.starts_with("messages ")).unwrap();
    let fields: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(fields[1], fields[3], "{line}");
    let total: u64 = fields[5].parse().unwrap();
    let accounted: u64 = fields[1].parse().unwrap();
    assert_eq!(total, accounted + 8 * 7);
}

#[test]
fn cost_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&dcsp(&["cost", "--T", "3"], dir.path()));
    let value = |name: &str| -> u64 {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    assert_eq!(value("SSP"), 25_890);
    assert_eq!(value("DCSP"), 11_610);
    assert_eq!(value("JSP&JOMP"), 300);
    assert_eq!(value("SOMP"), 60_000);
}

#[test]
fn bad_configuration_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["fig1", "--K", "0", "--trials", "1"][..],
        &["fig2", "--L", "1", "--trials", "1"],
        &["trial", "--algorithm", "omp"],
        &["trial", "--K", "300"],
        &["fig1", "--config", "missing.cfg"],
    ] {
        let out = dcsp(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
