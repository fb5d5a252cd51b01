use std::path::Path;
use std::process::{Command, Output};

use l1mf::io::{read_mask, read_matrix, write_matrix};
use l1mf::report::read_report;
use l1mf_core::{rel_frob_error, synth, FactorPair};

fn l1mf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1mf")).args(args).output().expect("spawn l1mf")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn synth_e1_writes_three_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("d");
    let out = l1mf(&["synth", "--preset", "e1", "--seed", "7", "--out", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut names: Vec<_> = std::fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["X_corrupt.csv", "X_true.csv", "instance.json"]);
    let (x, w) = read_matrix(out_dir.join("X_corrupt.csv")).unwrap();
    assert_eq!(x.shape(), (30, 30));
    assert!(w.is_all_ones());

    let echo: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("instance.json")).unwrap()).unwrap();
    assert_eq!(echo["outlier_positions"].as_array().unwrap().len(), 90);
    assert_eq!(echo["seed"], 7);

    // Same seed, same files.
    let again = dir.path().join("again");
    assert_eq!(code(&l1mf(&["synth", "--preset", "E1", "--seed", "7", "--out", p(&again)])), 0);
    for f in ["X_true.csv", "X_corrupt.csv", "instance.json"] {
        assert_eq!(std::fs::read(out_dir.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn synth_e7_writes_mask() {
    let dir = tempfile::tempdir().unwrap();
    let out = l1mf(&["synth", "--preset", "e7", "--scale", "1", "--seed", "1", "--out", p(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let w = read_mask(dir.path().join("mask.csv")).unwrap();
    assert_eq!(w.shape(), (20, 30));
    assert_eq!(w.as_slice().iter().filter(|&&b| b == 0).count(), 30);
    let (_, nan_mask) = read_matrix(dir.path().join("X_corrupt.csv")).unwrap();
    assert_eq!(nan_mask.as_slice(), w.as_slice());
}

#[test]
fn synth_usage_errors() {
    assert_eq!(code(&l1mf(&["synth", "--preset", "e1"])), 2);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&l1mf(&["synth", "--preset", "e5", "--out", p(dir.path())])), 2);
    std::fs::write(dir.path().join("keep"), "x").unwrap();
    let out = l1mf(&["synth", "--preset", "e1", "--out", p(dir.path())]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--force"));
    assert_eq!(code(&l1mf(&["synth", "--preset", "e1", "--out", p(dir.path()), "--force"])), 0);
}

#[test]
fn factorize_exact_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let (x, _) = synth::gen_lowrank(15, 12, 1, 4).unwrap();
    let input = dir.path().join("x.csv");
    write_matrix(&x, None, &input).unwrap();
    let (u, v, t) = (dir.path().join("u.csv"), dir.path().join("v.csv"), dir.path().join("t.csv"));
    let out = l1mf(&[
        "factorize",
        "--input",
        p(&input),
        "--rank",
        "1",
        "--seed",
        "2",
        "--out-u",
        p(&u),
        "--out-v",
        p(&v),
        "--trace",
        p(&t),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("final_objective=") && summary.contains("sweeps=") && summary.contains("wall_time="));

    let trace = std::fs::read_to_string(&t).unwrap();
    let values: Vec<f64> = trace.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(!values.is_empty());
    assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");

    let f = FactorPair::new(read_matrix(&u).unwrap().0, read_matrix(&v).unwrap().0).unwrap();
    assert!(rel_frob_error(&x, &f).unwrap() < 1e-6);
}

#[test]
fn factorize_l2_is_worse_on_e1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&l1mf(&["synth", "--preset", "e1", "--seed", "11", "--out", p(dir.path())])), 0);
    let (x_true, _) = read_matrix(dir.path().join("X_true.csv")).unwrap();
    let input = dir.path().join("X_corrupt.csv");
    let mut errors = Vec::new();
    for algo in ["l1", "l2"] {
        let (u, v) = (dir.path().join(format!("u_{algo}.csv")), dir.path().join(format!("v_{algo}.csv")));
        let out = l1mf(&[
            "factorize",
            "--input",
            p(&input),
            "--rank",
            "3",
            "--algo",
            algo,
            "--seed",
            "11",
            "--out-u",
            p(&u),
            "--out-v",
            p(&v),
        ]);
        assert!(matches!(code(&out), 0 | 3), "{}", stderr(&out));
        let f = FactorPair::new(read_matrix(&u).unwrap().0, read_matrix(&v).unwrap().0).unwrap();
        errors.push(rel_frob_error(&x_true, &f).unwrap());
    }
    assert!(errors[1] > 10.0 * errors[0], "{errors:?}");
}

#[test]
fn factorize_validation_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (x, _) = synth::gen_lowrank(6, 5, 2, 1).unwrap();
    let input = dir.path().join("x.csv");
    write_matrix(&x, None, &input).unwrap();
    let bad_mask = dir.path().join("w.csv");
    std::fs::write(&bad_mask, "1,1\n1,1\n").unwrap();
    let (u, v) = (dir.path().join("u.csv"), dir.path().join("v.csv"));

    let out = l1mf(&[
        "factorize",
        "--input",
        p(&input),
        "--mask",
        p(&bad_mask),
        "--rank",
        "1",
        "--out-u",
        p(&u),
        "--out-v",
        p(&v),
    ]);
    assert_eq!(code(&out), 2);
    let msg = stderr(&out);
    assert!(msg.contains("6x5") && msg.contains("2x2"), "{msg}");

    let out = l1mf(&["factorize", "--input", p(&input), "--rank", "6", "--out-u", p(&u), "--out-v", p(&v)]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out =
        l1mf(&["factorize", "--input", p(&input), "--rank", "1", "--algo", "l3", "--out-u", p(&u), "--out-v", p(&v)]);
    assert_eq!(code(&out), 2);

    let missing = dir.path().join("nope.csv");
    let out = l1mf(&["factorize", "--input", p(&missing), "--rank", "1", "--out-u", p(&u), "--out-v", p(&v)]);
    assert_eq!(code(&out), 4);

    // One sweep with an unreachable tolerance: not converged, factors still written.
    let out = l1mf(&[
        "factorize",
        "--input",
        p(&input),
        "--rank",
        "2",
        "--tol",
        "1e-300",
        "--max-sweeps",
        "1",
        "--out-u",
        p(&u),
        "--out-v",
        p(&v),
        "--verbose",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("sweep 1"));
    assert_eq!(read_matrix(&u).unwrap().0.shape(), (6, 2));
    assert_eq!(read_matrix(&v).unwrap().0.shape(), (5, 2));
}

#[test]
fn bench_single_trial_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let out =
        l1mf(&["bench", "--preset", "e7", "--trials", "1", "--seed", "3", "--algos", "l1,l2", "--report", p(&report)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8(out.stdout).unwrap().contains("median"));
    let r = read_report(&report).unwrap();
    assert_eq!(r.trials, 1);
    for a in &r.algorithms {
        let rec = &a.records[0];
        let s = a.aggregates.rel_error;
        assert_eq!([s.mean, s.median, s.min, s.max], [rec.rel_error; 4]);
        assert_eq!(a.aggregates.masked_rel_error.unwrap().mean, rec.masked_rel_error.unwrap());
        assert_eq!(rec.seed, 3);
    }

    let csv = dir.path().join("r.csv");
    assert_eq!(code(&l1mf(&["bench", "--preset", "e1", "--trials", "2", "--report", p(&csv)])), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("algo,trial,seed,rel_error"));
    assert_eq!(text.lines().count(), 3);

    assert_eq!(code(&l1mf(&["bench", "--preset", "e1", "--trials", "0", "--report", p(&report)])), 2);
    assert_eq!(
        code(&l1mf(&["bench", "--preset", "e1", "--trials", "1", "--algos", "l1,svd", "--report", p(&report)])),
        2
    );
    let out = Command::new(env!("CARGO_BIN_EXE_l1mf"))
        .args(["bench", "--preset", "e1", "--trials", "1", "--report", p(&report)])
        .env("L1MF_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn oracle_check_is_deterministic() {
    let args = ["oracle-check", "--trials", "3000", "--dim-max", "20", "--seed", "3"];
    let a = l1mf(&args);
    let b = l1mf(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains("failures=0"));
    assert_eq!(code(&l1mf(&["oracle-check", "--trials", "0"])), 2);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&l1mf(&["--help"])), 0);
    assert_eq!(code(&l1mf(&["bogus"])), 2);
}
