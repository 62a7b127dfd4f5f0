use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CPU_WRITE: &str = include_str!("../../core/specs/cpu_write.flow");

fn flowscope(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowscope"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cpu_write.flow"), CPU_WRITE).unwrap();
    let o = flowscope(&["validate", "cpu_write.flow"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("ok (1 flows"));

    let o = flowscope(&["validate", "prototype"], dir.path());
    assert_eq!(o.status.code(), Some(0));

    let cyclic = "system loop\ncomponent A B\nlink L A -> B\n\nflow f\n  place a initial\n  place b\n  place c end\n  \
                  transition t1 pre {a} post {b} event A:B:x on L\n  transition t2 pre {b} post {a} event A:B:y on L\n";
    fs::write(dir.path().join("loop.flow"), cyclic).unwrap();
    let o = flowscope(&["validate", "loop.flow"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("cyclic structure"), "{}", stdout(&o));

    fs::write(dir.path().join("bad.flow"), "system x\nbogus line\n").unwrap();
    let o = flowscope(&["validate", "bad.flow"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("bad.flow:2"), "{}", stderr(&o));

    let o = flowscope(&["validate", "missing.flow"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cannot read missing.flow"));
}

#[test]
fn paths_lists_every_execution() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cpu_write.flow"), CPU_WRITE).unwrap();
    let o = flowscope(&["paths", "cpu_write.flow", "cpu_write"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);

    let o = flowscope(
        &["paths", "cpu_write.flow", "cpu_write", "--json"],
        dir.path(),
    );
    let paths: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(paths.as_array().unwrap().len(), 3);

    let o = flowscope(&["paths", "cpu_write.flow", "nope"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = flowscope(
        &[
            "select",
            "prototype",
            "--metric",
            "fic",
            "--out",
            "fic.json",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(
        stderr(&o).contains("FIC: 12 events on 7 links"),
        "{}",
        stderr(&o)
    );
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fic.json")).unwrap()).unwrap();
    assert_eq!(doc["method"], "FIC");
    assert_eq!(doc["selection"]["links"].as_array().unwrap().len(), 7);

    let o = flowscope(
        &[
            "simulate",
            "prototype",
            "--selection",
            "fic.json",
            "--seed",
            "1",
            "--out-dir",
            "sim",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("FIC") && out.contains("interleavings:"),
        "{out}"
    );
    for f in [
        "ground_truth.csv",
        "observed.csv",
        "summary.json",
        "coverage.json",
    ] {
        assert!(dir.path().join("sim").join(f).exists(), "{f}");
    }
    let gt = fs::read_to_string(dir.path().join("sim/ground_truth.csv")).unwrap();
    assert!(gt.starts_with("cycle,link,src,dest,cmd,flow,initiator,seq,transition\n"));

    let o = flowscope(
        &["select", "prototype", "--metric", "fc", "--k", "0"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = flowscope(
        &[
            "select",
            "prototype",
            "--metric",
            "cec",
            "--scope",
            "Nobody",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_flags_undistinguishable_paths() {
    let dir = tempfile::tempdir().unwrap();
    let twins = "system twins\ncomponent A B\nlink L A -> B\nlink M B -> A\n\nflow f\n  place a initial\n  place b\n  \
                 place c end\n  transition t1 pre {a} post {b} event A:B:x on L\n  \
                 transition t2 pre {a} post {b} event A:B:x on L\n  transition t3 pre {b} post {c} event B:A:y on M\n\n\
                 initiator A flows {f}\n";
    fs::write(dir.path().join("twins.flow"), twins).unwrap();
    let o = flowscope(&["select", "twins.flow", "--metric", "cec"], dir.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("identical labels"));
}

#[test]
fn run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let plan = r#"{"methods": ["NONE", "FIC"], "capacities": [8], "seeds": [0, 1],
                   "workload": {"instances_per_initiator": 20}, "out_dir": "out"}"#;
    fs::write(dir.path().join("plan.json"), plan).unwrap();
    let o = flowscope(&["run", "plan.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    let first = fs::read(out.join("fic_8_1.json")).unwrap();
    assert!(out.join("none_8_0.json").exists());
    assert!(out.join("aggregate.csv").exists());
    let table = fs::read_to_string(out.join("aggregate.txt")).unwrap();
    assert_eq!(stdout(&o), table);

    let o = flowscope(&["run", "plan.json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(out.join("fic_8_1.json")).unwrap(), first);

    let o = flowscope(&["compare", "plan.json", "--k", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("fc4_8_0.json").exists());
    let compare = stdout(&o);
    for m in ["NONE", "FIC", "CEC", "FC(4)"] {
        assert!(compare.contains(m), "{compare}");
    }
}

#[test]
fn bad_plans_fail() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.json"), r#"{"scope": []}"#).unwrap();
    let o = flowscope(&["run", "empty.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error:"));

    fs::write(dir.path().join("typo.json"), r#"{"capacity": [8]}"#).unwrap();
    let o = flowscope(&["run", "typo.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
