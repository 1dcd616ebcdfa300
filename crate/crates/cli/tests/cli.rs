use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn map(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../maps").join(name)
}

fn outfn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_outfn")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = outfn(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (v, out.status.code().unwrap())
}

fn path(name: &str) -> String {
    map(name).to_string_lossy().into_owned()
}

#[test]
fn reports_share_the_top_level_schema() {
    let golden = path("golden.map");
    let (v, code) = json(&["strata", &golden]);
    assert_eq!(code, 0);
    for key in ["command", "input_digest", "result", "witnesses", "caps"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "strata");
    let digest = hex::encode(Sha256::digest(std::fs::read(map("golden.map")).unwrap()));
    assert_eq!(v["input_digest"], digest);
}

#[test]
fn fold_lists_steps_with_edge_tables() {
    let (v, code) = json(&["fold", &path("golden.map")]);
    assert_eq!(code, 0);
    let steps = v["result"]["steps"].as_array().unwrap();
    assert!(!steps.is_empty());
    assert!(steps[0]["before"].is_array() && steps[0]["after"].is_array());
    assert_eq!(v["result"]["homotopy_equivalence"], true);
    assert_eq!(v["witnesses"]["recomposes"], true);
}

#[test]
fn strata_of_the_reducible_map() {
    let (v, _) = json(&["strata", &path("reducible.map")]);
    let kinds: Vec<&str> = v["result"].as_array().unwrap().iter().map(|r| r["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["neg-fixed", "eg"]);
}

#[test]
fn golden_is_not_rotationless_but_its_square_is_a_ct() {
    let (v, code) = json(&["ct-verify", &path("golden.map")]);
    assert_eq!(v["result"]["is_ct"], false);
    assert_eq!(v["result"]["least_ct_power"], 2);
    assert_eq!(v["caps"]["kmax"], 4);
    assert!(code == 0 || code == 2);
}

#[test]
fn nielsen_caps_are_recorded() {
    let (v, code) = json(&["nielsen", &path("golden.map"), "--len", "6", "--period", "2"]);
    assert_eq!(v["caps"]["length"], 6);
    assert_eq!(v["caps"]["period"], 2);
    let paths = v["result"]["paths"].as_array().unwrap();
    assert!(paths.iter().any(|p| p["path"] == "a b a^-1 b^-1" && p["period"] == 2));
    let complete = v["result"]["complete"].as_bool().unwrap();
    assert_eq!(code, if complete { 0 } else { 2 });
}

#[test]
fn zsystem_of_the_reducible_map_holds_the_fixed_loop() {
    let (v, code) = json(&["zsystem", &path("reducible.map"), "--stratum", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["system"]["z"], serde_json::json!(["c"]));
    assert_eq!(v["result"]["z_invariant"], true);
}

#[test]
fn zsystem_rejects_a_non_eg_stratum() {
    let out = outfn(&["zsystem", &path("reducible.map"), "--stratum", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn attract_separates_the_fixed_loop() {
    let (v, code) = json(&["attract", &path("reducible.map"), "--class", "c", "--class", "a b"]);
    assert_eq!(code, 0);
    let verdicts = v["result"]["verdicts"].as_array().unwrap();
    assert_eq!(verdicts[0]["attraction"]["verdict"], "not-attracted");
    assert_eq!(verdicts[1]["attraction"]["verdict"], "attracted");
}

#[test]
fn attract_samples_follow_the_seed() {
    let golden = path("golden.map");
    let (a, _) = json(&["attract", &golden, "--samples", "5", "--seed", "7"]);
    let (b, _) = json(&["attract", &golden, "--samples", "5", "--seed", "7"]);
    let (c, _) = json(&["attract", &golden, "--samples", "5", "--seed", "8"]);
    assert_eq!(a["result"], b["result"]);
    assert_ne!(a["result"], c["result"]);
    assert_eq!(a["caps"]["seed"], 7);
}

#[test]
fn certify_distinguishes_golden_from_reducible() {
    let (v, code) = json(&["certify", &path("golden.map")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verdict"], "certified");
    let (v, code) = json(&["certify", &path("reducible.map")]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["verdict"], "not-certified");
}

#[test]
fn singular_rays_are_nested() {
    let (v, code) = json(&["singular", &path("golden.map"), "--depth", "3"]);
    assert_eq!(code, 0);
    let rays = v["result"]["rays"].as_array().unwrap();
    assert!(!rays.is_empty());
    assert!(rays.iter().all(|r| r["nested"] == true));
}

#[test]
fn pingpong_finds_hits_on_the_twisted_pair() {
    let (v, code) = json(&["pingpong", &path("golden.map"), &path("golden_twisted.map"), "--mmax", "2"]);
    assert_eq!(code, 0);
    let cells = v["result"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 4);
    assert!(cells.iter().all(|c| c["class_ok"] == true));
    assert!(!v["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn pingpong_with_empty_grid() {
    let golden = path("golden.map");
    let (v, code) = json(&["pingpong", &golden, &golden, "--mmax", "0"]);
    assert_eq!(code, 0);
    assert!(v["result"]["cells"].as_array().unwrap().is_empty());
}

#[test]
fn pingpong_explicit_beta() {
    let golden = path("golden.map");
    let (v, _) = json(&["pingpong", &golden, &golden, "--mmax", "1", "--beta-from", "explicit:a b^-1"]);
    assert!(v["result"]["cells"][0]["hit"].is_null());
    let out = outfn(&["pingpong", &golden, &golden, "--beta-from", "nowhere"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(outfn(&["fold", &path("broken.map")]).status.code(), Some(1));
    assert_eq!(outfn(&["fold", "/nonexistent.map"]).status.code(), Some(1));
    assert_eq!(outfn(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(outfn(&["--help"]).status.code(), Some(0));
}
