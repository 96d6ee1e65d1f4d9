use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hndaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hndaf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn uneven_multi_grouping_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"framework": "MULTI", "n_nfs": 10}"#);
    let o = hndaf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_nfs"), "{}", stderr(&o));
}

#[test]
fn out_of_range_alpha_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"alpha": 1.5}"#);
    let o = hndaf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha"));
}

#[test]
fn unknown_field_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"n_nf": 3}"#);
    let o = hndaf(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("n_nf"));
}

#[test]
fn short_horizon_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "short.json", r#"{"N_T": 30, "horizon_s": 1}"#);
    let o = hndaf(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("provision_time_s=inf"));
}

#[test]
fn run_writes_log_and_row() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("events.log");
    let out = dir.path().join("row.csv");
    let o = hndaf(&[
        "run",
        "--seed",
        "4",
        "--log",
        log.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let lines = fs::read_to_string(&log).unwrap();
    assert!(lines.lines().all(|l| l.split('|').count() == 7));
    let csv = fs::read_to_string(&out).unwrap();
    let mut rows = csv.lines();
    assert!(rows.next().unwrap().starts_with("framework,n_nfs,N_T,"));
    assert!(rows.next().unwrap().starts_with("HNDAF,9,30,"));
    assert!(rows.next().is_none());
}

#[test]
fn n_t_sweep_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = hndaf(&[
        "sweep",
        "--axis",
        "N_T",
        "--values",
        "3,6",
        "--reps",
        "2",
        "--jobs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let count = |f: &str| fs::read_to_string(out.join(f)).unwrap().lines().count() - 1;
    assert_eq!(count("results.csv"), 3 * 2 * 2);
    assert_eq!(count("means.csv"), 3 * 2);
    assert_eq!(count("leaves.csv"), 2 * 2 * 9);
}

#[test]
fn sweep_is_independent_of_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str| {
        let out = dir.path().join(format!("j{jobs}"));
        let o = hndaf(&[
            "sweep", "--axis", "alpha", "--values", "0.2,0.8", "--reps", "3", "--jobs", jobs, "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        fs::read(out.join("results.csv")).unwrap()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn predict_csv_columns() {
    let o = hndaf(&["predict", "--n", "300", "--seeds", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("feature_set,seed,mse,mae,rmse"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn usecase_prints_seven_steps() {
    let o = hndaf(&["usecase"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for n in 1..=7 {
        assert!(text.contains(&format!("step {n} t=")));
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    paths.sort();
    assert!(paths.len() >= 5);
    let mut args = vec!["validate"];
    args.extend(paths.iter().map(String::as_str));
    let o = hndaf(&args);
    assert!(o.status.success(), "{}", stderr(&o));
}
