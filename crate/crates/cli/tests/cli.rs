use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dicesmith::dice::DiceSet;
use dicesmith::partition::{digraph_of, saccamano, to_dice, PartitionScheme};
use dicesmith::tournament::{preset, Tournament};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dicesmith")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn json(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn synth_then_verify_round_trip() {
    let dir = TempDir::new().unwrap();
    let (t, d, r) = (path(&dir, "t.json"), path(&dir, "d.json"), path(&dir, "r.json"));
    fs::write(&t, r#"{"n":3,"edges":[[1,2],[2,3],[3,1]]}"#).unwrap();
    let o = run(&["synth", "--tournament", &t, "--out", &d, "--report", &r]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dice = DiceSet::from_json(&fs::read_to_string(&d).unwrap()).unwrap();
    assert!(dice.is_proper());
    assert_eq!(fs::read_to_string(&d).unwrap(), format!("{}\n", dice.to_json()));
    let report = json(&r);
    assert_eq!(report["sides"], dice.sides());
    assert_eq!(report["verify"]["matches"], true);
    assert!(report["proper_margin"].as_str().unwrap().contains('/'));
    assert!(report["achieved_eps"].as_str().unwrap().contains('e'));

    let v = path(&dir, "v.json");
    let o = run(&["verify", "--dice", &d, "--tournament", &t, "--out", &v]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&v), report["verify"]);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let mut seen = Vec::new();
    for k in 0..2 {
        let (d, r) = (path(&dir, &format!("d{k}.json")), path(&dir, &format!("r{k}.json")));
        assert_eq!(code(&run(&["synth", "--preset", "cycle3", "--out", &d, "--report", &r])), 0);
        let p = run(&["partition", "--preset", "cycle3", "--block-size", "25", "--seed", "7"]);
        assert_eq!(code(&p), 0);
        seen.push((fs::read(&d).unwrap(), fs::read(&r).unwrap(), p.stdout));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn synth_rps5_preset() {
    let dir = TempDir::new().unwrap();
    let d = path(&dir, "d.json");
    let o = run(&["synth", "--preset", "rps5", "--out", &d]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["verify"]["matches"], true);
    assert!(report["quantized_sides"].as_u64().unwrap() <= 4096);
    let o = run(&["verify", "--dice", &d, "--preset", "rps5"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn synth_to_requested_sides() {
    let dir = TempDir::new().unwrap();
    let d = path(&dir, "d.json");
    let o = run(&["synth", "--preset", "cycle3", "--out", &d, "--sides", "30000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dice = DiceSet::from_json(&fs::read_to_string(&d).unwrap()).unwrap();
    assert_eq!(dice.sides(), 30000);
    assert!(dice.is_proper());
    let o = run(&["synth", "--preset", "cycle3", "--out", &d, "--sides", "10"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let (bad, d) = (path(&dir, "bad.json"), path(&dir, "d.json"));
    fs::write(&bad, "{not json").unwrap();
    let o = run(&["synth", "--tournament", &bad, "--out", &d]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(code(&run(&["verify", "--dice", &bad])), 2);
    assert_eq!(code(&run(&["synth", "--preset", "nope", "--out", &d])), 2);
    assert_eq!(code(&run(&["synth", "--preset", "cycle3", "--out", &d, "--eps", "0"])), 2);
    assert_eq!(code(&run(&["verify", "--dice", &path(&dir, "missing.json")])), 2);
    assert_eq!(code(&run(&["synth", "--out", &d])), 2);
    // An incomplete orientation is not a tournament.
    fs::write(&bad, r#"{"n":3,"edges":[[1,2]]}"#).unwrap();
    assert_eq!(code(&run(&["synth", "--tournament", &bad, "--out", &d])), 2);
}

#[test]
fn construction_failures_exit_3() {
    let dir = TempDir::new().unwrap();
    let d = path(&dir, "d.json");
    assert_eq!(code(&run(&["synth", "--preset", "rps5", "--out", &d, "--max-n", "32"])), 3);
    assert_eq!(code(&run(&["universal", "--iterations", "4"])), 3);
    let o = run(&["partition", "--preset", "cycle3", "--block-size", "1", "--max-attempts", "5"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn verify_classic_cycle() {
    let dir = TempDir::new().unwrap();
    let d = path(&dir, "d.json");
    fs::write(&d, r#"{"sides":3,"dice":[[3,5,7],[2,4,9],[1,6,8]]}"#).unwrap();
    let o = run(&["verify", "--dice", &d, "--preset", "cycle3"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    for pair in report["pairs"].as_array().unwrap() {
        let m = pair["margin"].as_str().unwrap();
        assert!(m == "1/18" || m == "-1/18", "{m}");
    }
    assert_eq!(report["min_margin"], "1/18");
    assert_eq!(report["proper"], serde_json::json!([false, false, false]));
    assert_eq!(code(&run(&["verify", "--dice", &d])), 0);
    let o = run(&["verify", "--dice", &d, "--preset", "rps5"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_partition_dice() {
    let dir = TempDir::new().unwrap();
    let d = path(&dir, "d.json");
    fs::write(&d, to_dice(&saccamano()).unwrap().to_json()).unwrap();
    let t = path(&dir, "t.json");
    fs::write(&t, digraph_of(&saccamano()).into_tournament().unwrap().to_json()).unwrap();
    let o = run(&["verify", "--dice", &d, "--tournament", &t]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["min_margin"], "1/36");
    assert!(report["pairs"].as_array().unwrap().iter().all(|p| p["margin"].as_str().unwrap().ends_with("/36")));
    assert_eq!(report["proper"], serde_json::json!(vec![true; 5]));
}

#[test]
fn verify_reports_ties() {
    let dir = TempDir::new().unwrap();
    let d = path(&dir, "d.json");
    fs::write(&d, r#"{"sides":6,"dice":[[1,2,3,4,5,6],[1,2,3,4,5,6]]}"#).unwrap();
    let o = run(&["verify", "--dice", &d, "--preset", "cycle3"]);
    assert_eq!(code(&o), 1);
    let t = path(&dir, "t.json");
    fs::write(&t, r#"{"n":2,"edges":[[1,2]]}"#).unwrap();
    let o = run(&["verify", "--dice", &d, "--tournament", &t]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["unoriented"], serde_json::json!([[1, 2]]));
    assert_eq!(report["pairs"][0]["unoriented"], true);
    assert_eq!(code(&run(&["verify", "--dice", &d])), 1);
}

#[test]
fn partition_cycle3() {
    let dir = TempDir::new().unwrap();
    let p = path(&dir, "p.json");
    let o = run(&["partition", "--preset", "cycle3", "--block-size", "25", "--seed", "7", "--out", &p]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let scheme = PartitionScheme::from_json(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(scheme.block_size(), 25);
    assert_eq!(digraph_of(&scheme), preset("cycle3").unwrap());
    assert_eq!(fs::read_to_string(&p).unwrap(), format!("{}\n", scheme.to_json()));
}

#[test]
fn universal_prefix() {
    let dir = TempDir::new().unwrap();
    let u = path(&dir, "u.json");
    assert_eq!(code(&run(&["universal", "--iterations", "2", "--out", &u])), 0);
    let t = Tournament::from_json(&fs::read_to_string(&u).unwrap()).unwrap();
    assert_eq!(t.n(), 11);
    assert!(t.check_simple_extension_property(&[1, 2, 3]).unwrap().is_some());
    let o = run(&["universal", "--iterations", "1", "--preset", "cycle3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(Tournament::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap().n(), 11);
}

#[test]
fn presets() {
    let o = run(&["preset"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "cycle3\nrps5\n");
    let o = run(&["preset", "rps5"]);
    let t = Tournament::from_json(&String::from_utf8(o.stdout).unwrap()).unwrap();
    assert_eq!(t, preset("rps5").unwrap());
    assert_eq!(code(&run(&["preset", "nope"])), 2);
}
