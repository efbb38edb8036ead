use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use braidstab::stability::{scenario_a, scenario_b};
use braidstab_cli::scenario::Scenario;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    repo().join("scenarios").join(name)
}

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_braidstab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("BRAIDSTAB_THREADS")
        .output()
        .expect("binary runs");
    let text = format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    (o.status.code().expect("exit code"), text)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn entropy_of_sigma1_sigma2_inverse() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("entropy-word.toml");
    let (code, text) = run(&["entropy", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{text}");
    let rate = json(&dir.path().join("entropy.json"))["rate"].as_f64().unwrap();
    assert!((rate - 0.9624).abs() < 0.01, "{rate}");
    let csv = std::fs::read_to_string(dir.path().join("entropy.csv")).unwrap();
    assert!(csv.starts_with("loop,k,length\nx1x2,0,2\n"), "{csv}");
}

#[test]
fn symbolic_check_m4_passes() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("symbolic-m4.toml");
    let (code, text) = run(&["symbolic-check", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("all pass"));
    let csv = std::fs::read_to_string(dir.path().join("symbolic.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn default_symbolic_and_corpus_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run(&["symbolic-check"], dir.path());
    assert_eq!(code, 0, "{text}");
    let (code, text) = run(&["gf2-corpus", "--seed", "7"], dir.path());
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("pass 1000/1000"), "{text}");
    assert_eq!(json(&dir.path().join("manifest.json"))["seed"], 7);
}

#[test]
fn schema_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("malformed.json");
    let (code, text) = run(&["entropy", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("entropy.iterations"), "{text}");

    let bad = dir.path().join("typo.toml");
    std::fs::write(&bad, "[hamiltonian]\npreset = \"rotation\"\nc = 1.0\n[orbits]\nseeds = { kind = \"disk\", n = 4 }\nstpe = 0.01\n").unwrap();
    let (code, text) = run(&["orbits", "--scenario", bad.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("stpe"), "{text}");

    let (code, text) = run(&["stability", "--scenario", scenario("pendulum-orbits.toml").to_str().unwrap()], dir.path());
    assert_eq!(code, 2);
    assert!(text.contains("perturbation"), "{text}");

    let (code, _) = run(&["orbits"], dir.path());
    assert_eq!(code, 2);
    let (code, _) = run(&["frobnicate"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn empty_orbit_set_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("empty.toml");
    std::fs::write(&s, "[hamiltonian]\npreset = \"rotation\"\nc = 1.0\n[orbits]\nseeds = { kind = \"points\", points = [] }\n").unwrap();
    let out = dir.path().join("out");
    let (code, text) = run(&["orbits", "--scenario", s.to_str().unwrap()], &out);
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(out.join("orbits.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("index,x,y,period,stability"));
}

#[test]
fn pendulum_orbits_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("pendulum-orbits.toml");
    let (code, text) = run(&["orbits", "--scenario", s.to_str().unwrap(), "--format", "csv"], dir.path());
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("orbits.csv")).unwrap();
    let labels: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(labels, ["hyperbolic", "elliptic"]);
    assert!(dir.path().join("trajectory_1.csv").exists());
    assert!(!dir.path().join("orbits.json").exists());
    let manifest = json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["files"].as_object().unwrap().len(), 3);
}

#[test]
fn braid_of_the_period_three_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("braid-period3.toml");
    let (code, text) = run(&["braid", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{text}");
    let b = json(&dir.path().join("braid.json"));
    assert_eq!(b["strands"], 3);
    assert_eq!(b["sweep"].as_array().unwrap().len(), 16);
    assert_eq!(b["sweep_all_conjugate"], true);
}

#[test]
fn rotation_stability_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("stability-rotation.toml");
    let (code, text) = run(&["stability", "--scenario", s.to_str().unwrap()], dir.path());
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("stability.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(csv.lines().skip(1).all(|l| l.contains(",yes,")), "{csv}");
}

#[test]
fn repo_scenarios_match_the_library_presets() {
    let a = Scenario::load(&scenario("stability-rotation.toml")).unwrap().stability().unwrap();
    assert_eq!(a, scenario_a());
    let b = Scenario::load(&scenario("stability-period3.toml")).unwrap().stability().unwrap();
    assert_eq!(b, scenario_b());
}

#[test]
fn artifacts_do_not_depend_on_thread_count() {
    let cases: [(&str, Option<&str>); 5] = [
        ("orbits", Some("pendulum-orbits.toml")),
        ("braid", Some("braid-period3.toml")),
        ("stability", Some("stability-rotation.toml")),
        ("gf2-corpus", Some("gf2-corpus.toml")),
        ("symbolic-check", Some("symbolic-m4.toml")),
    ];
    for (cmd, file) in cases {
        let dir = tempfile::tempdir().unwrap();
        let mut outs = Vec::new();
        for threads in ["1", "3"] {
            let out = dir.path().join(threads);
            let mut args = vec![cmd, "--threads", threads];
            let path = file.map(scenario);
            if let Some(p) = &path {
                args.extend(["--scenario", p.to_str().unwrap()]);
            }
            let (code, text) = run(&args, &out);
            assert_eq!(code, 0, "{cmd}: {text}");
            outs.push(artifacts(&out));
        }
        assert!(!outs[0].is_empty());
        assert_eq!(outs[0], outs[1], "{cmd}");
    }
}
