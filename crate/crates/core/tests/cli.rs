use std::io::Write;
use std::process::{Command, Output, Stdio};

use majorana::io::{constellation_from_json, state_from_json, state_to_json};
use majorana::state::fidelity;
use majorana::*;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_majorana"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn temp_file(name: &str, contents: &str) -> std::path::PathBuf {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn state_file(name: &str, s: &SpinState) -> String {
    temp_file(name, &state_to_json(s))
        .to_string_lossy()
        .into_owned()
}

#[test]
fn stars_of_noon() {
    let f = state_file("noon1.json", &noon_state(SpinLabel::new(2)).unwrap());
    let o = run(&["stars", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["infinity_count"], 0);
    let mut re: Vec<f64> = v["roots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[0].as_f64().unwrap())
        .collect();
    re.sort_by(f64::total_cmp);
    assert!((re[0] + 1.0).abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
    for r in v["roots"].as_array().unwrap() {
        assert!(r[1].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn stars_of_south_pole_state() {
    let f = state_file(
        "south.json",
        &SpinState::basis(SpinLabel::new(4), 0).unwrap(),
    );
    let v: Value = serde_json::from_str(&stdout(&run(&["stars", &f]))).unwrap();
    assert_eq!(v["roots"].as_array().unwrap().len(), 0);
    assert_eq!(v["infinity_count"], 4);
}

#[test]
fn angles_flag() {
    let f = state_file(
        "north.json",
        &SpinState::basis(SpinLabel::new(2), 2).unwrap(),
    );
    let v: Value = serde_json::from_str(&stdout(&run(&["stars", "--angles", &f]))).unwrap();
    assert_eq!(v["stars"], serde_json::json!([[0, 0], [0, 0]]));
}

#[test]
fn malformed_input_exits_2() {
    let f = temp_file("truncated.json", "{\"twoS\": 2, \"amplitudes\": [[1,0],");
    assert_eq!(run(&["stars", f.to_str().unwrap()]).status.code(), Some(2));
    let c = temp_file(
        "short.json",
        "{\"twoS\": 3, \"roots\": [[1,0]], \"infinity_count\": 1}",
    );
    assert_eq!(run(&["state", c.to_str().unwrap()]).status.code(), Some(2));
    let s = state_file("q.json", &noon_state(SpinLabel::new(2)).unwrap());
    assert_eq!(run(&["qgrid", "--ntheta", "1", &s]).status.code(), Some(2));
    assert_eq!(
        run(&["kings", "--twoS", "2", "--M", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["multipoles", "--upto", "9", &s]).status.code(),
        Some(2)
    );
}

#[test]
fn missing_file_exits_4() {
    let o = run(&["stars", "/nonexistent/psi.json"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(!o.stderr.is_empty());
}

#[test]
fn stars_then_state_is_identity() {
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
    for two_s in [1, 3, 6, 9] {
        let s = random_state(SpinLabel::new(two_s), &mut rng);
        let stars = run_stdin(&["stars", "-"], &state_to_json(&s));
        assert_eq!(stars.status.code(), Some(0));
        let back = run_stdin(&["state", "-"], &stdout(&stars));
        assert_eq!(back.status.code(), Some(0));
        let r = state_from_json(&stdout(&back)).unwrap();
        assert!(fidelity(&s, &r).unwrap() > 1.0 - 1e-10);
    }
}

#[test]
fn tetrahedron_round_trip() {
    let theta = (-1.0f64 / 3.0).acos();
    let stars = format!(
        "{{\"stars\": [[0,0],[{theta},0],[{theta},{}],[{theta},{}]]}}",
        2.0 * std::f64::consts::PI / 3.0,
        4.0 * std::f64::consts::PI / 3.0
    );
    let f = temp_file("tetra.json", &stars);
    let state = run(&["state", f.to_str().unwrap()]);
    assert_eq!(state.status.code(), Some(0));
    let s = state_from_json(&stdout(&state)).unwrap();
    assert_eq!(s.amplitudes().len(), 5);
    let again =
        constellation_from_json(&stdout(&run_stdin(&["stars", "-"], &stdout(&state)))).unwrap();
    let input = constellation_from_json(&stars).unwrap();
    assert!(again.distance(&input) < 1e-9);
}

#[test]
fn qgrid_csv() {
    let s = state_file(
        "coh.json",
        &coherent_state(SpinLabel::new(4), C64::new(0.0, 0.0).into()),
    );
    let o = run(&["qgrid", "--ntheta", "10", "--nphi", "7", &s]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,phi,Q"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 70);
    let max = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!(max > 0.9 && max <= 1.0);
}

#[test]
fn multipoles_of_m_zero() {
    let s = state_file("m0.json", &SpinState::basis(SpinLabel::new(2), 1).unwrap());
    let v: Value = serde_json::from_str(&stdout(&run(&["multipoles", &s]))).unwrap();
    assert!(v["w"][1].as_f64().unwrap().abs() < 1e-15);
    assert!((v["A"][1].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    let cut: Value =
        serde_json::from_str(&stdout(&run(&["multipoles", "--upto", "1", &s]))).unwrap();
    assert_eq!(cut["rho"].as_array().unwrap().len(), 4);
}

#[test]
fn kings_tetrahedron_and_pair() {
    let o = run(&[
        "kings",
        "--twoS",
        "4",
        "--M",
        "2",
        "--restarts",
        "16",
        "--seed",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["objective"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["M"], 2);
    assert!(v["unpolarized_order"].as_u64().unwrap() >= 2);

    // spin 1: two antipodal stars, the |1,0> constellation
    let o = run(&["kings", "--twoS", "2", "--M", "1", "--restarts", "4"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = constellation_from_json(&v["constellation"].to_string()).unwrap();
    let p = c.points();
    assert!((p[0].chordal_distance(&p[1]) - 2.0).abs() < 1e-6);

    // spin 1/2 has one star and cannot be unpolarized
    let o = run(&["kings", "--twoS", "1", "--M", "1", "--restarts", "4"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["objective"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["unpolarized_order"], 0);
}

#[test]
fn kings_is_reproducible() {
    let args = [
        "kings",
        "--twoS",
        "3",
        "--M",
        "1",
        "--restarts",
        "6",
        "--seed",
        "42",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn evolve_noon_becomes_orthogonal() {
    let l = SpinLabel::new(4);
    let s = noon_state(l).unwrap();
    let f = state_file("noon2.json", &s);
    let h = temp_file("sz.json", "{\"builtin\": \"Sz\", \"coupling\": 1}");
    let t = std::f64::consts::PI / 4.0;
    let o = run(&[
        "evolve",
        &f,
        h.to_str().unwrap(),
        "--t",
        &t.to_string(),
        "--samples",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!((last["t"].as_f64().unwrap() - t).abs() < 1e-15);
    // lines hold conjugated roots
    let roots: Vec<C64> = last["roots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| C64::new(r[0].as_f64().unwrap(), -r[1].as_f64().unwrap()))
        .collect();
    let end = state_from_constellation(&Constellation::new(l, roots, 0).unwrap());
    assert!(overlap(&s, &end).unwrap().norm() <= 1e-8);
}

#[test]
fn evolve_zero_time_and_output_file() {
    let l = SpinLabel::new(2);
    let s = noon_state(l).unwrap();
    let f = state_file("noon3.json", &s);
    let h = temp_file("sx.json", "{\"builtin\": \"Sx\"}");
    let out = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"))
        .join("cli")
        .join("traj.jsonl");
    let o = run(&[
        "evolve",
        &f,
        h.to_str().unwrap(),
        "--t",
        "0",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: Value = serde_json::from_str(text.trim()).unwrap();
    assert_eq!(v["t"], 0.0);
    assert_eq!(v["fallback"], false);
    let bad = temp_file("bad_h.json", "{\"twoS\": 3, \"builtin\": \"Sz\"}");
    assert_eq!(
        run(&["evolve", &f, bad.to_str().unwrap(), "--t", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_matches_library_serialization() {
    let s = coherent_state(SpinLabel::new(3), C64::new(0.4, 0.9).into());
    let f = state_file("coh3.json", &s);
    let c = constellation_from_state(&s, &StellarOptions::default()).unwrap();
    assert_eq!(
        stdout(&run(&["stars", &f])),
        majorana::io::constellation_to_json(&c, false) + "\n"
    );
    let spec = majorana::multipoles::multipoles(&s);
    assert_eq!(
        stdout(&run(&["multipoles", &f])),
        majorana::io::spectrum_to_json(&spec) + "\n"
    );
}
