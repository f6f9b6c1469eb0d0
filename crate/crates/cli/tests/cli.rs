use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn kcausal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcausal")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = kcausal(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn rows(path: PathBuf) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulated_dose_data_estimates_on_fifty_points() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["simulate", "--design", "dose", "--n", "100", "--seed", "3", "--out", "dose.csv"]);
    let data = rows(dir.join("dose.csv"));
    assert_eq!(data.len(), 101);
    assert_eq!(data[0][..3], ["y", "d", "x1"]);
    assert_eq!(data[0].last().unwrap(), "x100");

    ok(dir, &["estimate", "--data", "dose.csv", "--estimand", "ate", "--grid", "0,1,50", "--out", "ate.csv"]);
    let est = rows(dir.join("ate.csv"));
    assert_eq!(est[0], ["d", "estimate"]);
    assert_eq!(est.len(), 51);
    for r in &est[1..] {
        assert!(r[1].parse::<f64>().unwrap().is_finite());
    }
    let side = json(dir.join("ate.json"));
    assert_eq!(side["points"], 50);
    assert!(side["penalties"]["lambda"].as_f64().unwrap() > 0.0);
    assert_eq!(side["kernels"]["x"]["lengthscales"].as_array().unwrap().len(), 100);
    assert_eq!(side["grid"][0]["count"], 50);
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    for name in ["a", "b"] {
        let data = format!("{name}.csv");
        ok(dir, &["simulate", "--design", "hte", "--n", "120", "--seed", "9", "--out", &data]);
        let out = format!("{name}-est.csv");
        ok(
            dir,
            &[
                "estimate",
                "--data",
                &data,
                "--estimand",
                "cate",
                "--kernel",
                "d=exact",
                "--grid",
                "0,1,2",
                "--grid",
                "-0.45,0.45,7",
                "--penalty",
                "gcv",
                "--out",
                &out,
            ],
        );
    }
    for (a, b) in [("a.csv", "b.csv"), ("a-est.csv", "b-est.csv")] {
        assert_eq!(fs::read(dir.join(a)).unwrap(), fs::read(dir.join(b)).unwrap(), "{a}");
    }
    assert_eq!(rows(dir.join("a-est.csv")).len(), 15);
}

#[test]
fn distribution_shift_requires_alternative_covariates() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["simulate", "--design", "dose", "--n", "40", "--out", "dose.csv"]);
    let out =
        kcausal(dir, &["estimate", "--data", "dose.csv", "--estimand", "ds", "--grid", "0,1,5", "--out", "ds.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alt-covariates"));
    assert!(!dir.join("ds.csv").exists());

    // Alternative population: the first five covariate rows of the sample.
    let data = rows(dir.join("dose.csv"));
    let alt: Vec<String> = data[..6].iter().map(|r| r[2..].join(",")).collect();
    fs::write(dir.join("alt.csv"), alt.join("\n") + "\n").unwrap();
    ok(
        dir,
        &[
            "estimate",
            "--data",
            "dose.csv",
            "--estimand",
            "ds",
            "--alt-covariates",
            "alt.csv",
            "--grid",
            "0,1,5",
            "--out",
            "ds.csv",
        ],
    );
    assert_eq!(rows(dir.join("ds.csv")).len(), 6);
}

#[test]
fn malformed_inputs_exit_with_configuration_status() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("bad.csv"), "y,d,x1\n1,2,3\n4,oops,6\n").unwrap();
    fs::write(dir.join("gap.csv"), "y,d,x1,x3\n1,2,3,4\n").unwrap();
    fs::write(dir.join("short.csv"), "y,d,x1\n1,2,3\n4,5\n").unwrap();
    let run = |file: &str| {
        kcausal(dir, &["estimate", "--data", file, "--estimand", "ate", "--grid", "0,1,3", "--out", "o.csv"])
    };

    let out = run("bad.csv");
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3") && msg.contains("`d`"), "{msg}");

    let out = run("gap.csv");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`x2`"));

    let out = run("short.csv");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    assert_eq!(run("missing.csv").status.code(), Some(2));
    let out =
        kcausal(dir, &["estimate", "--data", "bad.csv", "--estimand", "ate", "--grid", "0,1,0", "--out", "o.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_io_status() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let out = kcausal(dir, &["simulate", "--design", "dose", "--n", "5", "--out", "no/such/dir/d.csv"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn herd_writes_m_rows_deterministically() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["simulate", "--design", "hte", "--n", "150", "--seed", "4", "--out", "hte.csv"]);
    let args = |out: &'static str| {
        vec![
            "herd",
            "--data",
            "hte.csv",
            "--estimand",
            "ate",
            "--kernel",
            "d=exact",
            "--at",
            "1",
            "--m",
            "25",
            "--out",
            out,
        ]
    };
    ok(dir, &args("h1.csv"));
    ok(dir, &args("h2.csv"));
    let h = rows(dir.join("h1.csv"));
    assert_eq!(h[0], ["index", "y"]);
    assert_eq!(h.len(), 26);
    assert_eq!(fs::read(dir.join("h1.csv")).unwrap(), fs::read(dir.join("h2.csv")).unwrap());
    let side = json(dir.join("h1.json"));
    assert_eq!(side["candidates"]["count"], 512);
    assert!(side["penalties"]["lambda3"].as_f64().unwrap() > 0.0);
    assert!(side["penalties"].get("lambda").is_none());

    let out = kcausal(
        dir,
        &["herd", "--data", "hte.csv", "--estimand", "inc_ate", "--at", "1", "--m", "3", "--out", "x.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn herding_a_single_observation_returns_its_outcome() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    // Two identical rows: the embedding is a bump at y = 0.7.
    fs::write(dir.join("one.csv"), "y,d,x1\n0.7,0.2,1\n0.7,0.2,1\n").unwrap();
    ok(
        dir,
        &[
            "herd",
            "--data",
            "one.csv",
            "--estimand",
            "ate",
            "--at",
            "0.2",
            "--m",
            "1",
            "--grid",
            "0,1.4,141",
            "--penalty",
            "fixed:0.01",
            "--out",
            "h.csv",
        ],
    );
    let y: f64 = rows(dir.join("h.csv"))[1][1].parse().unwrap();
    assert!((y - 0.7).abs() < 1e-12, "{y}");
}

#[test]
fn study_writes_records_and_summary() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["study", "--design", "dose", "--n", "30,50", "--replications", "2", "--seed", "5", "--out", "study.csv"]);
    let r = rows(dir.join("study.csv"));
    assert_eq!(r[0], ["design", "n", "replication", "mse"]);
    assert_eq!(r.len(), 5);
    assert_eq!(r[1][..3], ["dose", "30", "0"]);
    assert_eq!(r[4][..3], ["dose", "50", "1"]);
    let side = json(dir.join("study.json"));
    assert_eq!(side["summaries"].as_array().unwrap().len(), 2);
    assert_eq!(side["summaries"][0]["completed"], 2);
    assert_eq!(side["failures"].as_array().unwrap().len(), 0);

    let out = kcausal(dir, &["study", "--design", "hte", "--n", "0", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tune_reports_every_stage_penalty() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    ok(dir, &["simulate", "--design", "hte", "--n", "80", "--out", "hte.csv"]);
    ok(
        dir,
        &[
            "tune",
            "--data",
            "hte.csv",
            "--estimand",
            "cate",
            "--kernel",
            "d=exact",
            "--penalty",
            "lambda=fixed:0.05",
            "--penalty",
            "lambda2=theoretical:inf,2",
            "--distribution",
            "--out",
            "tune.json",
        ],
    );
    let t = json(dir.join("tune.json"));
    assert_eq!(t["penalties"]["lambda"], 0.05);
    assert_eq!(t["penalties"]["lambda2"].as_f64().unwrap(), 80f64.powf(-0.5));
    assert!(t["penalties"]["lambda3"].as_f64().unwrap() > 0.0);
    assert_eq!(t["policies"]["lambda1"], "loocv");
    assert_eq!(t["kernels"]["d"]["family"], "exact_match");

    let out = kcausal(
        dir,
        &["tune", "--data", "hte.csv", "--estimand", "ate", "--penalty", "lambda=gcv", "--penalty", "lambda=loocv"],
    );
    assert_eq!(out.status.code(), Some(2));
}
