use std::path::Path;
use std::process::{Command, Output};

use hboa::harness::{parse_report_csv, summarize};

fn hboa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hboa"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hboa(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    hboa(dir, args).status.code().unwrap()
}

fn read(dir: &Path, f: &str) -> String {
    std::fs::read_to_string(dir.join(f)).unwrap()
}

#[test]
fn gen_writes_one_file_per_instance() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen", "mvc", "--n", "40", "--c", "2", "--count", "50", "--seed", "1", "--out", "dir/"]);
    let files = std::fs::read_dir(d.path().join("dir")).unwrap().count();
    assert_eq!(files, 50);
    let first = read(d.path(), "dir/mvc40_000.graph");
    assert!(first.starts_with("graph 40 80\n"));
}

#[test]
fn gen_covers_every_family() {
    let d = tempfile::tempdir().unwrap();
    ok(d.path(), &["gen", "sg", "--n", "27", "--count", "2", "--out", "s"]);
    ok(d.path(), &["gen", "maxsat", "--n", "30", "--p", "0.2", "--count", "2", "--out", "m"]);
    assert!(read(d.path(), "s/sg27_001.sg3").starts_with("sg3 3\n"));
    assert!(read(d.path(), "m/maxsat30_000.cnf").contains("p cnf 30 "));
    assert_eq!(code(d.path(), &["gen", "sg", "--n", "20", "--out", "x"]), 2);
}

#[test]
fn biased_runs_repeat_exactly() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "mvc", "--n", "60", "--count", "3", "--seed", "4", "--out", "i"]);
    ok(p, &["bisect", "--instance", "i/mvc60_000.graph", "--seed", "1", "--models", "m.txt"]);
    ok(p, &["harvest", "--models", "m.txt", "--instances", "i/mvc60_000.graph", "--out", "b.txt"]);
    let args = |t: &'static str| {
        vec!["run", "--instance", "i/mvc60_001.graph", "--bias", "b.txt", "--kappa", "9", "--seed", "7", "--population", "48", "--trace", t]
    };
    ok(p, &args("t1"));
    ok(p, &args("t2"));
    assert_eq!(read(p, "t1"), read(p, "t2"));
    assert!(read(p, "t1").starts_with("hboa-trace v1\n"));
    assert!(read(p, "b.txt").starts_with("hboa-bias v1\nmode per-target\nn 60\n"));
}

#[test]
fn xval_reports_one_row_per_instance_and_kappa() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["xval", "--problem", "mvc", "--n", "30", "--count", "10", "--kappa", "1,5", "--folds", "10", "--seed", "2", "--out", "r.csv"]);
    let text = read(p, "r.csv");
    let rows = parse_report_csv(Path::new("r.csv"), &text).unwrap();
    assert_eq!(rows.len(), 20);
    for k in [1.0, 5.0] {
        let ids: std::collections::BTreeSet<_> =
            rows.iter().filter(|r| r.kappa == k).map(|r| r.instance_id.clone()).collect();
        assert_eq!(ids.len(), 10);
    }
    assert!(rows.iter().all(|r| r.speedup_evals > 0.0 && r.fold.is_some()));
}

#[test]
fn spec_xval_example_runs_with_defaults() {
    let d = tempfile::tempdir().unwrap();
    let out = ok(d.path(), &["xval", "--problem", "mvc", "--kappa", "5", "--folds", "10", "--count", "10"]);
    assert!(out.contains("kappa=5"));
    assert_eq!(read(d.path(), "report.csv").lines().count(), 11);
}

#[test]
fn report_matches_recomputation() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["xval", "--n", "30", "--count", "10", "--kappa", "3", "--seed", "5", "--out", "r.csv"]);
    ok(p, &["report", "--input", "r.csv", "--out", "s.csv"]);
    let rows = parse_report_csv(Path::new("r.csv"), &read(p, "r.csv")).unwrap();
    let s = summarize(rows.iter());
    let line = read(p, "s.csv").lines().nth(1).unwrap().to_string();
    let f: Vec<&str> = line.split(',').collect();
    assert_eq!(f[0], "3");
    assert_eq!(f[1], "10");
    assert_eq!(f[2].parse::<f64>().unwrap(), s.median_speedup_evals);
    assert_eq!(f[3].parse::<f64>().unwrap(), s.mean_speedup_evals);
    assert_eq!(f[4].parse::<f64>().unwrap(), s.improved_fraction);
}

#[test]
fn config_file_mirrors_flags() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(p.join("c.cfg"), "# experiment\nseed = 5\nn=30\ncount=10\nkappa=3\n").unwrap();
    ok(p, &["--config", "c.cfg", "xval", "--out", "a.csv"]);
    ok(p, &["xval", "--n", "30", "--count", "10", "--kappa", "3", "--seed", "5", "--out", "b.csv"]);
    assert_eq!(read(p, "a.csv"), read(p, "b.csv"));
    // explicit flags win over the file
    ok(p, &["--config", "c.cfg", "xval", "--seed", "6", "--out", "c.csv"]);
    assert_ne!(read(p, "a.csv"), read(p, "c.csv"));
}

#[test]
fn exit_codes() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(p, &["run", "--no-such-flag"]), 2);
    assert_eq!(code(p, &["frobnicate"]), 2);
    std::fs::write(p.join("bad.cfg"), "unknown_key=1\n").unwrap();
    assert_eq!(code(p, &["--config", "bad.cfg", "xval"]), 2);
    ok(p, &["gen", "sg", "--n", "64", "--out", "sg"]);
    assert_eq!(code(p, &["run", "--instance", "sg/sg64_000.sg3", "--optimum", "oracle"]), 4);
    ok(p, &["gen", "mvc", "--n", "20", "--out", "m"]);
    assert_eq!(code(p, &["run", "--instance", "m/mvc20_000.graph", "--population", "1"]), 3);
    assert_eq!(code(p, &["xval", "--n", "20", "--count", "4", "--folds", "10"]), 3);
    assert_eq!(
        code(p, &["transfer", "--source-n", "20", "--target-n", "24", "--count", "4", "--mode", "per-target"]),
        3
    );
    std::fs::write(p.join("broken.graph"), "graph 3 2\n0 1\n").unwrap();
    let out = hboa(p, &["run", "--instance", "broken.graph"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.graph:2:"));
}

#[test]
fn transfer_of_equal_sizes_is_well_formed() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["transfer", "--source-n", "30", "--target-n", "30", "--count", "6", "--kappa", "5", "--out", "t.csv"]);
    let rows = parse_report_csv(Path::new("t.csv"), &read(p, "t.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.fold.is_none() && r.n == 30));
}
