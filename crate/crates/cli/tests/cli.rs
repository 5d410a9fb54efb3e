use std::path::Path;
use std::process::{Command, Output};

fn cpsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpsim"))
        .args(args)
        .env("CPSIM_OUT_DIR", out)
        .env_remove("RUST_LOG")
        .output()
        .expect("spawn cpsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn calibrate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = cpsim(dir.path(), &["calibrate", "--trials", "1000", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("calibration.csv")).unwrap();
    assert!(csv.contains("experiment,mechanism,sigma_sq,metric,node,t,value,method,seed"));
    assert!(csv.contains("# spec_sha256 = "));
    assert!(csv.contains("noise_floor_eps0.5"));
    assert!(dir.path().join("calibration.dat").exists());
    assert!(stdout(&o).contains("trials = 1000"));
}

#[test]
fn unobserved_honest_node_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = cpsim(dir.path(), &["topology", "--trials", "100", "--set", "corrupted=5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("honest node 4"), "{}", stderr(&o));
}

#[test]
fn table1_prints_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let o = cpsim(dir.path(), &["table1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["Output utility", "Individual privacy", "Lower bound on privacy", "k_i", "n-1 = 9 of 10"] {
        assert!(text.contains(needle), "missing {needle}:\n{text}");
    }
    let csv = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().starts_with("dp,"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["tradeoff", "--trials", "300", "--sigma-sq", "0.1,10", "--seed", "5"];
    assert_eq!(cpsim(a.path(), &args).status.code(), Some(0));
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(cpsim(b.path(), &seq).status.code(), Some(0));
    for f in ["tradeoff.csv", "tradeoff.dat"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn flags_override_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("conv.spec");
    std::fs::write(&spec, "experiment = convergence\ntrials = 7\niterations = 30\nsigma_sq = 0, 1\n").unwrap();
    let o = cpsim(dir.path(), &["convergence", "--spec", spec.to_str().unwrap(), "--trials", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("trials = 3"));
    assert!(text.contains("iterations = 30"));
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.contains("# trials = 3"));
}

#[test]
fn spec_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.spec");
    std::fs::write(&spec, "trials = 10\nbogus = 1\n").unwrap();
    let o = cpsim(dir.path(), &["tradeoff", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));

    let o = cpsim(dir.path(), &["tradeoff", "--spec", dir.path().join("missing.spec").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = cpsim(dir.path(), &["convergence", "--set", "solver=linear", "--set", "mechanisms=dosp"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PDMM"));

    let spec = dir.path().join("other.spec");
    std::fs::write(&spec, "experiment = topology\n").unwrap();
    let o = cpsim(dir.path(), &["tradeoff", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cpsim(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(cpsim(dir.path(), &["tradeoff", "--trials", "many"]).status.code(), Some(1));
    assert_eq!(cpsim(dir.path(), &["tradeoff", "--set", "novalue"]).status.code(), Some(1));
    let file = dir.path().join("plain");
    std::fs::write(&file, "").unwrap();
    let o = cpsim(&file, &["calibrate", "--trials", "1000"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert_eq!(cpsim(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn check_graph_reports_and_rejects() {
    let dir = tempfile::tempdir().unwrap();
    let o = cpsim(dir.path(), &["check-graph", "--bundled", "G'", "--corrupted", "5,8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("honest component of node 1: 1,2,3,4 (4 nodes)"));

    let file = dir.path().join("split.edges");
    std::fs::write(&file, "4 2\n0 1\n2 3\n").unwrap();
    let o = cpsim(dir.path(), &["check-graph", "--graph-file", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("not connected"));

    let out = dir.path().join("g.edges");
    let o = cpsim(dir.path(), &["check-graph", "--n", "12", "--graph-seed", "3", "--write", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(out).unwrap().starts_with("12 "));
}
