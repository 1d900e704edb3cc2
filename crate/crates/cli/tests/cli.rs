use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fibersync(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fibersync")).args(args).output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path
}

fn run_in(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (i32, Vec<PathBuf>) {
    let cfg = write_config(dir, config);
    let out = dir.join("out");
    let mut args = vec![command, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = fibersync(&args);
    let files = String::from_utf8(o.stdout).unwrap().lines().map(PathBuf::from).collect();
    (o.status.code().unwrap(), files)
}

fn find(files: &[PathBuf], ext: &str) -> PathBuf {
    files.iter().find(|f| f.extension().unwrap() == ext).cloned().unwrap()
}

fn json(files: &[PathBuf]) -> Value {
    serde_json::from_str(&fs::read_to_string(find(files, "json")).unwrap()).unwrap()
}

#[test]
fn sync_writes_traces_and_spread() {
    let dir = tempfile::tempdir().unwrap();
    let (code, files) = run_in(dir.path(), "sync", r#"{"system": "flagship", "sync": {"pairs": 50}}"#, &[]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(find(&files, "csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 22);
    assert_eq!((header[1], header[20], header[21]), ("x0", "x19", "spread"));
    assert_eq!(csv.lines().count(), 202);
    let j = json(&files);
    assert!(j["result"]["final_spread"].as_f64().unwrap() < 1e-3);
    assert_eq!(j["config"]["system"], "flagship");
    let name = files[0].file_name().unwrap().to_str().unwrap();
    assert!(name.starts_with("sync-1-"), "{name}");
}

#[test]
fn mixing_on_shear_is_refuted_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"system": "shear(3,2)", "mixing": {"k": 8, "particles_per_box": 50, "n_max": 30}}"#;
    let (code, files) = run_in(dir.path(), "mixing", cfg, &[]);
    assert_eq!(code, 2);
    let j = json(&files);
    assert_eq!(j["result"]["report"]["verdict"], false);
    assert!(j["result"]["report"]["witness"]["source"]["ix"].is_u64());
    assert!(j["result"]["semantics"].as_str().unwrap().contains("refutation"));
    let csv = fs::read_to_string(find(&files, "csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 64 * 64);
}

#[test]
fn graph_on_rotation_is_all_low_confidence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"system": "rotation(3)", "graph": {"samples": 50, "depth": 20, "cloud": 200}}"#;
    let (code, files) = run_in(dir.path(), "graph", cfg, &[]);
    assert_eq!(code, 0);
    let j = json(&files);
    assert_eq!(j["result"]["summary"]["low_confidence_fraction"], 1.0);
    assert_eq!(j["result"]["summary"]["confident"], 0);
}

#[test]
fn attractor_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, files) = run_in(dir.path(), "attractor", r#"{"attractor": {"iterations": 1, "resolution": 16}}"#, &[]);
    assert_eq!(code, 0);
    let pgm = fs::read_to_string(find(&files, "pgm")).unwrap();
    assert!(pgm.starts_with("P2\n16 16\n1\n"));
    let set = pgm.lines().skip(3).flat_map(|l| l.split(' ')).filter(|&p| p == "0").count();
    assert_eq!(set, 1);
    assert_eq!(json(&files)["result"]["occupied_pixels"], 1);

    let dir = tempfile::tempdir().unwrap();
    let (_, files) = run_in(dir.path(), "attractor", r#"{"system": "shear(3,2)"}"#, &[]);
    assert!(json(&files)["result"]["occupancy_fraction_128"].as_f64().unwrap() < 0.5);
}

#[test]
fn contractive_and_ifs() {
    let dir = tempfile::tempdir().unwrap();
    let (code, files) = run_in(dir.path(), "contractive", r#"{"system": "flagship"}"#, &[]);
    assert_eq!(code, 0);
    let j = json(&files);
    assert_eq!(j["result"]["verified"], true);
    assert_eq!(j["result"]["outcome"]["k"], 1);

    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_in(dir.path(), "contractive", r#"{"system": "rotation(3)"}"#, &[]);
    assert_eq!(code, 2);

    let dir = tempfile::tempdir().unwrap();
    let (code, files) = run_in(dir.path(), "ifs", "{}", &[]);
    assert_eq!(code, 0);
    assert_eq!(json(&files)["result"]["dense"], true);
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_in(dir.path(), "ifs", r#"{"ifs": {"alphabet": [0]}}"#, &[]);
    assert_eq!(code, 2);
}

#[test]
fn sweep_and_lyapunov() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"lyapunov": {"starts": 3, "iterations": 2000}, "sweep": {"command": "lyapunov", "steps": 4}}"#;
    let (code, files) = run_in(dir.path(), "sweep", cfg, &[]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(find(&files, "csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.lines().nth(1).unwrap().starts_with("0,mean_exponent,0"));

    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run_in(dir.path(), "sweep", r#"{"system": "rotation(3)"}"#, &[]);
    assert_eq!(code, 1);

    let dir = tempfile::tempdir().unwrap();
    let (code, files) = run_in(dir.path(), "lyapunov", r#"{"lyapunov": {"starts": 4, "iterations": 5000}}"#, &[]);
    assert_eq!(code, 0);
    assert!(json(&files)["result"]["mean"].as_f64().unwrap() < 0.0);
}

#[test]
fn bad_configs_exit_one_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"mixing": {"k": 3}}"#);
    let o = fibersync(&["mixing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mixing.k"));

    let cfg = write_config(dir.path(), r#"{"pullback": {"sampels": 3}}"#);
    let o = fibersync(&["pullback", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sampels"));
}

#[test]
fn catalog_lists_every_system() {
    let o = fibersync(&["catalog"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["flagship", "shear(i,j)", "rotation(d)", "northsouth(a,d)", "stepifs(d)"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn outputs_do_not_depend_on_threads_or_location() {
    let cfg = r#"{"system": "flagship", "seed": 42, "graph": {"samples": 50, "depth": 20, "cloud": 200},
                  "mixing": {"k": 4, "particles_per_box": 30, "n_max": 20}}"#;
    for command in ["graph", "mixing", "sync"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let (_, fa) = run_in(a.path(), command, cfg, &["--threads", "1"]);
        let (_, fb) = run_in(b.path(), command, cfg, &["--threads", "4"]);
        for ext in ["csv", "json"] {
            assert_eq!(
                fs::read(find(&fa, ext)).unwrap(),
                fs::read(find(&fb, ext)).unwrap(),
                "{command} {ext}"
            );
        }
    }
}
