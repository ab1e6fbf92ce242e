use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpath")).args(args).output().expect("binary runs")
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.cfg"))
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn stderr_record(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.lines().last().unwrap_or_default()).expect("JSON error record")
}

const ZERO_PULSE: &str = r#"
name = "idle"
elements = [{ from = "10", to = "11" }, { from = "00", to = "00" }]

[system]
builder = "two_qubit"
omega1 = 1.0
omega2 = 2.5
j = 0.5

[pulse]
source = "zeros"
dt = 0.05
steps = 20

[[encoding]]
mode = "NH"
n_max = 3

[verify]
max_order = 3
refine = false
"#;

#[test]
fn xgate_run_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = qpath(&["run", shipped("xgate").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = fs::read_to_string(dir.path().join("nh10_0_1.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "gamma,class,magnitude,phase_deg");
    assert!(rows[1].ends_with("[0→1]^NH,1.570796,-90"), "{}", rows[1]);
    assert!(rows.last().unwrap().starts_with(",Sum,1.000000,"));
    for name in ["summary.json", "run.json", "pulse.csv", "populations_0.csv", "populations_0.svg", "h10_0_0.svg"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    assert!(summary["checks"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_label_fails_with_a_record() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(shipped("xgate")).unwrap().replace(r#"to = "1""#, r#"to = "2""#);
    let cfg = write_config(dir.path(), &text);
    let out = qpath(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let record = stderr_record(&out);
    assert_eq!(record["status"], "error");
    assert_eq!(record["kind"], "config");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn malformed_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "name = 3\n");
    let out = qpath(&["verify", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_record(&out)["kind"], "config");
}

#[test]
fn zero_pulse_verify_gives_zero_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO_PULSE);
    let out_dir = dir.path().join("v");
    let out = qpath(&["verify", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--threads", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv_rows(&out_dir.join("oracle.csv"));
    let header = reader.remove(0);
    assert_eq!(header, ["pathway", "oracle_re", "oracle_im", "decoded_re", "decoded_im", "gap"]);
    assert!(!reader.is_empty());
    for row in reader {
        for value in &row[1..] {
            let v: f64 = value.parse().unwrap();
            assert!(v.abs() < 1e-12, "{row:?}");
        }
    }
    assert!(!out_dir.join("oracle_refined.csv").exists());
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn zero_pulse_run_puts_everything_in_the_trivial_class() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ZERO_PULSE);
    let out_dir = dir.path().join("r");
    let out = qpath(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--floor", "1e-12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let diagonal = csv_rows(&out_dir.join("nh3_00_00.csv"));
    assert_eq!(diagonal.len(), 3, "{diagonal:?}");
    assert_eq!(diagonal[1][1], "[00]^NH");
    let off = csv_rows(&out_dir.join("nh3_10_11.csv"));
    assert_eq!(off.len(), 2, "{off:?}");
    assert_eq!(off[1][3], "—");
}

#[test]
fn identical_configs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
name = "small"
elements = [{ from = "0", to = "1" }, { from = "1", to = "1" }]
populations = ["0"]

[system]
builder = "custom"
dim = 2
h0 = [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [-0.5, 0.0]]
controls = [[[0.0, 0.0], [0.5, 0.0], [0.5, 0.0], [0.0, 0.0]]]

[pulse]
source = "optimize"
target = "X"
t_final = 3.0
steps = 60
seed = 4
max_iters = 50

[[encoding]]
mode = "NH"
n_max = 5

[[encoding]]
mode = "H"
n_max = 5
"#;
    let cfg = write_config(dir.path(), text);
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = qpath(&["run", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let mut files: Vec<_> = fs::read_dir(&out_dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.into_iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap())).collect::<Vec<_>>()
    };
    let first = run("a");
    let second = run("b");
    assert!(first.len() >= 10);
    assert_eq!(first, second);
    assert!(first.iter().any(|(name, _)| name == "fidelity.svg"));
}
