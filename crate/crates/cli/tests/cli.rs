use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pitos::quasirandom::PairSequence;

fn pitos(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pitos"))
        .args(args)
        .env_remove("PITOS_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = pitos(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text.trim()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn pairs_csv_matches_library() {
    let text = ok(&["pairs", "--n", "25"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,i,j");
    assert_eq!(lines.len() - 1, 830);
    let expected = PairSequence::generate(25).unwrap();
    for (k, (line, &(i, j))) in lines[1..].iter().zip(expected.pairs()).enumerate() {
        assert_eq!(*line, format!("{},{i},{j}", k + 1));
    }
}

#[test]
fn happy_path_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.txt");
    let values: String = (0..200).map(|k| format!("{}\n", (k as f64 + 0.5) / 200.0)).collect();
    fs::write(&data, values).unwrap();
    let v = json(&ok(&["test", "--input", path(&data)]));
    assert_eq!(v["test"], "PITOS");
    assert_eq!(v["n"], 200);
    assert_eq!(v["m"], pitos::quasirandom::pair_count(200));
    let p = v["p_value"].as_f64().unwrap();
    let p_star = v["p_star"].as_f64().unwrap();
    assert!(p_star >= p && p_star <= 1.0);

    let v = json(&ok(&[
        "test",
        "--input",
        path(&data),
        "--method",
        "ks",
        "--null-b",
        "999",
    ]));
    assert_eq!(v["test"], "KS");
    assert_eq!(v["null_b"], 999);
}

#[test]
fn malformed_line_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0.1\n0.2\n0.3\n# note\n0.5\n0.6\nabc\n0.8\n").unwrap();
    let out = pitos(&["test", "--input", path(&bad)]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 7"), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
}

#[test]
fn validation_errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("out.txt");
    fs::write(&data, "0.5\n1.5\n").unwrap();
    assert!(!pitos(&["test", "--input", path(&data)]).status.success());
    assert!(!pitos(&["test", "--input", "/nonexistent/file"]).status.success());
    assert!(!pitos(&["pairs", "--n", "0"]).status.success());
    assert!(!pitos(&["pairs", "--n", "5", "--bogus"]).status.success());
    assert!(!pitos(&["sample", "--dist", "cauchy", "--n", "5"]).status.success());
    let csv = dir.path().join("p.csv");
    assert!(
        !pitos(&["power", "--dist", "uniform", "--alpha", "1.5", "--out", path(&csv)])
            .status
            .success()
    );
}

#[test]
fn help_lists_flags() {
    let text = ok(&["test", "--help"]);
    for flag in [
        "--input",
        "--method",
        "--null-cdf",
        "--emit-detail",
        "--null-b",
        "--seed",
        "--threads",
        "--cache-dir",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
    let text = ok(&["study", "--help"]);
    for flag in ["--scenario", "--dists", "--reps", "--n", "--out", "--full-scale"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn sample_then_test_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("s.txt");
    let mut rejections = 0;
    for seed in 0..200 {
        let seed = seed.to_string();
        ok(&[
            "sample",
            "--dist",
            "uniform",
            "--n",
            "100",
            "--seed",
            &seed,
            "--out",
            path(&data),
        ]);
        let v = json(&ok(&["test", "--input", path(&data)]));
        if v["p_star"].as_f64().unwrap() <= 0.05 {
            rejections += 1;
        }
    }
    // Binomial(200, 0.05) exceeds 20 with probability below 0.002.
    assert!(rejections <= 20, "{rejections} rejections");
}

#[test]
fn discrete_data_through_randomized_pit() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    ok(&[
        "sample",
        "--dist",
        "discrete-uniform-99",
        "--n",
        "500",
        "--seed",
        "4",
        "--out",
        path(&data),
    ]);
    let raw = json(&ok(&["test", "--input", path(&data)]));
    let pit = json(&ok(&[
        "test",
        "--input",
        path(&data),
        "--null-cdf",
        "discrete-uniform-99",
    ]));
    assert!(raw["p_star"].as_f64().unwrap() < 1e-3);
    assert!(pit["p_star"].as_f64().unwrap() > 1e-3);
}

#[test]
fn detail_rows_match_m() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    let detail = dir.path().join("detail.csv");
    ok(&["sample", "--dist", "beta(2,2)", "--n", "40", "--out", path(&data)]);
    let v = json(&ok(&["test", "--input", path(&data), "--emit-detail", path(&detail)]));
    let text = fs::read_to_string(&detail).unwrap();
    assert_eq!(text.lines().next(), Some("k,i,j,u,p"));
    assert_eq!(text.lines().count() - 1, v["m"].as_u64().unwrap() as usize);
    assert!(!pitos(&[
        "test",
        "--input",
        path(&data),
        "--method",
        "ad",
        "--emit-detail",
        path(&detail)
    ])
    .status
    .success());
}

#[test]
fn scenarios_and_sidecars() {
    let text = ok(&["scenarios", "--name", "outliers", "--count", "4", "--seed", "9"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,scenario,distribution,pi,b,attempts");
    assert_eq!(lines.len(), 5);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("power.csv");
    ok(&[
        "power",
        "--dist",
        "beta(2,2)",
        "--tests",
        "pitos,ks,lrt",
        "--n",
        "20,30",
        "--reps",
        "40",
        "--null-b",
        "199",
        "--out",
        path(&csv),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(
        text.starts_with("distribution,test,n,alpha,replicates,rejections,rejection_rate,mc_std_err,failures,seed\n")
    );
    assert_eq!(text.lines().count(), 1 + 6);
    let side = json(&fs::read_to_string(dir.path().join("power.json")).unwrap());
    assert_eq!(side["command"], "power");
    assert_eq!(side["config"]["replicates"], 40);
    assert_eq!(side["config"]["seed"], 1);

    let csv = dir.path().join("cal.csv");
    ok(&[
        "calibrate",
        "--test",
        "pitos",
        "--n",
        "20",
        "--reps",
        "50",
        "--grid",
        "0.05,0.5",
        "--out",
        path(&csv),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("test,n,threshold,cdf,cdf_uncorrected"));
    assert_eq!(text.lines().count(), 3);

    let csv = dir.path().join("study.csv");
    let per = dir.path().join("per.csv");
    ok(&[
        "study",
        "--scenario",
        "random-gap",
        "--dists",
        "3",
        "--reps",
        "20",
        "--n",
        "30",
        "--null-b",
        "199",
        "--out",
        path(&csv),
        "--per-dist",
        path(&per),
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(
        "scenario,test,n,alpha,distributions,replicates,average_power,average_rank,rank_1,rank_2,rank_3,rank_4,rank_5\n"
    ));
    assert_eq!(fs::read_to_string(&per).unwrap().lines().count(), 1 + 15);
    assert!(dir.path().join("study.json").exists());
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let csv = dir.path().join(format!("p{threads}.csv"));
        ok(&[
            "--threads",
            threads,
            "power",
            "--dist",
            "gap(0.5,0.05)",
            "--n",
            "50",
            "--reps",
            "60",
            "--null-b",
            "299",
            "--out",
            path(&csv),
        ]);
        outputs.push((
            fs::read(&csv).unwrap(),
            fs::read(dir.path().join(format!("p{threads}.json"))).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    fs::write(&data, "0.1\n0.4\n0.7\n0.9\n").unwrap();
    let cache = dir.path().join("cache");
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_pitos"))
            .args(["test", "--input", path(&data), "--method", "cvm", "--null-b", "500"])
            .env("PITOS_CACHE_DIR", &cache)
            .output()
            .unwrap()
    };
    let first = run();
    assert!(first.status.success());
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
    let second = run();
    assert_eq!(first.stdout, second.stdout);
}
