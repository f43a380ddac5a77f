use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rydberg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydberg"))
        .args(args)
        .arg("--cache")
        .arg(dir.join("cache.txt"))
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("RYDBERG_CACHE")
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
fn state_row_and_units() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(dir.path(), &["state", "Rb:80S1/2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/state.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.contains("energy_GHz") && header.contains("n_star"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("Rb:80S1/2:1/2,"), "{row}");
    assert!(dir.path().join("out/manifest.json").exists());
    assert!(stdout(&o).contains("wrote"));
}

#[test]
fn bad_state_names_the_token() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(dir.path(), &["state", "Rb:80X"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains('X'), "{}", stderr(&o));
    let o = rydberg(dir.path(), &["state", "Rb:80S3/2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn json_output_parses() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(dir.path(), &["--json", "regimes", "--c6-hz-um6", "4e12", "--omega-hz", "1e6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.to_string().contains("12.59"), "{v}");
}

#[test]
fn partial_argument_group_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(dir.path(), &["regimes", "--c6-hz-um6", "4e12"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seeded_runs_are_byte_identical_and_replay() {
    let dir = TempDir::new().unwrap();
    let args = ["--seed", "7", "dynamics", "--bundled", "blockade2"];
    let o = rydberg(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let first: Vec<Vec<u8>> =
        ["dynamics.csv", "shots.csv"].iter().map(|f| fs::read(dir.path().join("out").join(f)).unwrap()).collect();
    let header = String::from_utf8_lossy(&first[0]).lines().next().unwrap().to_string();
    assert!(header.starts_with("time_s,P_dd,"), "{header}");

    let again = TempDir::new().unwrap();
    assert!(rydberg(again.path(), &args).status.success());
    for (f, bytes) in ["dynamics.csv", "shots.csv"].iter().zip(&first) {
        assert_eq!(&fs::read(again.path().join("out").join(f)).unwrap(), bytes);
    }

    let manifest = dir.path().join("out/manifest.json");
    let replay = TempDir::new().unwrap();
    let o = rydberg(replay.path(), &["replay", manifest.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("replay matched"));
    assert_eq!(fs::read(replay.path().join("out/shots.csv")).unwrap(), first[1]);
}

#[test]
fn scenario_schema_error_exits_2() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"model": "ising", "positions_um": [[0,0,0]]}"#).unwrap();
    let o = rydberg(dir.path(), &["dynamics", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("schema_version"), "{}", stderr(&o));
}

#[test]
fn missing_file_exits_4() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(dir.path(), &["dynamics", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn scan_headers_carry_units() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(
        dir.path(),
        &["scan", "Rb:62D3/2:3/2", "--r-min", "10", "--r-max", "20", "--points", "5", "--window-ghz", "5", "--delta-n", "1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/scan.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert!(header.starts_with("R_um,theta_rad,E_Vcm,eigenvalue_Hz"), "{header}");
}

#[test]
fn off_axis_scan_needs_all_m() {
    let dir = TempDir::new().unwrap();
    let o = rydberg(dir.path(), &["scan", "Rb:62D3/2", "--theta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}
