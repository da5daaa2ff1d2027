use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const THREE_NODE: &str = r#"{"flags":{"duplex":"HD","interference":"NI","susm":"MAX"},
 "vertices":[{"id":0,"role":"macro","rf_chains":2},{"id":1,"role":"relay","rf_chains":2},{"id":2,"role":"relay","rf_chains":2}],
 "links":[{"tail":0,"head":1,"stream_capacities":[8,8]},{"tail":0,"head":2,"stream_capacities":[2,2]},{"tail":1,"head":2,"stream_capacities":[3,3]}]}"#;

fn mmsched(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmsched"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for p in [&a, &b] {
        let o = mmsched(&["generate", "--grid", "3", "--seed", "9", "--flags", "FD-PI-REAL", "-o", s(p)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("n.json");
    let o = mmsched(&["generate", "--beamwidth", "0", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    let o = mmsched(&["solve", "missing.json", "--algo", "opt-fd"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_eval_and_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "three.json", THREE_NODE);
    let sched = dir.path().join("hd.json");
    let o = mmsched(&["solve", s(&net), "--algo", "opt-hd-uniform", "--exact", "-o", s(&sched)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = stdout(&o);
    assert!(csv.starts_with("algo,theta,network_tput,runtime_ms,iterations,kappa,slots,bound"));
    assert!(csv.lines().nth(1).unwrap().starts_with("opt-hd-uniform,3.428571"));

    let o = mmsched(&["eval", s(&net), s(&sched)]);
    assert!(stdout(&o).contains("theta=3.428571"), "{}", stdout(&o));
    let o = mmsched(&["validate", s(&net), s(&sched)]);
    assert_eq!(o.status.code(), Some(0));

    let fd = mmsched(&["solve", s(&net), "--algo", "opt-fd"]);
    assert_eq!(fd.status.code(), Some(3));
    let o = mmsched(&["validate", s(&net), s(&sched), "--flags", "FD-NI-MAX"]);
    assert_eq!(o.status.code(), Some(0));

    let text = fs::read_to_string(&sched).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    doc["slots"][0]["arcs"] = serde_json::json!([[0, 0], [0, 1], [2, 0]]);
    let bad = write(dir.path(), "bad.json", &doc.to_string());
    let o = mmsched(&["validate", s(&net), s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!stdout(&o).trim().is_empty());
}

#[test]
fn full_duplex_optimum_is_five() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "fd.json", &THREE_NODE.replace("\"HD\"", "\"FD\""));
    let o = mmsched(&["solve", s(&net), "--algo", "opt-fd", "--exact"]);
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("opt-fd,5"), "{}", stdout(&o));
    let o = mmsched(&["oracle", s(&net)]);
    assert!(stdout(&o).contains("theta=5"), "{}", stdout(&o));
}

#[test]
fn ec_rejects_interference_models() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("pi.json");
    let o = mmsched(&["generate", "--grid", "3", "--flags", "FD-PI-MAX", "-o", s(&net)]);
    assert!(o.status.success());
    let o = mmsched(&["solve", s(&net), "--algo", "ec"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn compare_emits_one_row_per_seed_and_algorithm() {
    let o = mmsched(&["compare", "--grid", "3", "--seeds", "10"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "seed,algo,theta,network_tput,theta_over_oracle,runtime_ms");
    assert_eq!(lines.count(), 30);
}
