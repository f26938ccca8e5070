//! End-to-end CLI runs against generated fixture files: exit codes, output files,
//! determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ktn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ktn"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn write_seven_well(dir: &Path) -> PathBuf {
    let path = dir.join("seven_well.txt");
    let net = ktn::fixtures::seven_well();
    ktn::io::write_native(net.as_data(), &path).unwrap();
    path
}

fn write_chain(dir: &Path) -> PathBuf {
    let path = dir.join("chain.txt");
    let net = ktn::fixtures::three_chain();
    ktn::io::write_native(net.as_data(), &path).unwrap();
    path
}

#[test]
fn validate_seven_well_passes() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_seven_well(dir.path());
    let out = ktn(
        &[
            "validate",
            "--input",
            input.to_str().unwrap(),
            "--temperature",
            "0.2,1.0",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("detailed balance at T=0.2: ok"));
}

#[test]
fn validate_reports_difference_tie() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tie.txt");
    std::fs::write(&path, "M 1 0.0\nM 2 1.0\nM 3 2.0\nE 1 2 3.0\nE 2 3 4.0\n").unwrap();
    let out = ktn(&["validate", "--input", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("differences FAIL"), "{text}");
    assert!(text.contains("offending pair"), "{text}");
}

#[test]
fn validate_reports_disconnected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("disc.txt");
    std::fs::write(&path, "M 1 0.0\nM 2 1.0\nM 3 2.0\nE 1 2 3.0\n").unwrap();
    let out = ktn(&["validate", "--input", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("disconnected"), "{}", stdout(&out));
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ktn(&["validate", "--input", "nope.txt"], dir.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn spectrum_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_seven_well(dir.path());
    let out = ktn(
        &[
            "spectrum",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "run",
            "--vk",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let delta = std::fs::read_to_string(dir.path().join("run/delta.csv")).unwrap();
    assert_eq!(delta.lines().count(), 7);
    assert!(delta.contains("1,2,6.1,5.1,5,6"));
    let sinks = std::fs::read_to_string(dir.path().join("run/sinks.csv")).unwrap();
    assert_eq!(sinks, "index,state\n0,1\n1,2\n2,7\n3,5\n4,6\n5,3\n6,4\n");
    let vk = std::fs::read_to_string(dir.path().join("run/vk.csv")).unwrap();
    assert!(vk.lines().last().unwrap().starts_with("7,"));
    assert!(dir.path().join("run/sets.txt").exists());
    assert!(dir.path().join("run/cycle_sizes.csv").exists());
}

#[test]
fn spectrum_threshold_truncates() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_chain(dir.path());
    let out = ktn(
        &[
            "spectrum",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "run",
            "--threshold",
            "2.2",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let delta = std::fs::read_to_string(dir.path().join("run/delta.csv")).unwrap();
    assert_eq!(delta.lines().count(), 2); // header + one record
    assert!(delta.contains("1,3,4.5,2.5,1,1"));
}

#[test]
fn spectrum_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_seven_well(dir.path());
    for sub in ["a", "b"] {
        let out = ktn(
            &[
                "spectrum",
                "--input",
                input.to_str().unwrap(),
                "--out",
                sub,
                "--vk",
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
    }
    for name in [
        "delta.csv",
        "sinks.csv",
        "sets.txt",
        "vk.csv",
        "cycle_sizes.csv",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn tie_break_banner_appears() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tie.txt");
    std::fs::write(&path, "M 1 0.0\nM 2 1.0\nM 3 2.0\nE 1 2 3.0\nE 2 3 4.0\n").unwrap();
    let strict = ktn(
        &[
            "spectrum",
            "--input",
            path.to_str().unwrap(),
            "--out",
            "strict",
        ],
        dir.path(),
    );
    assert_eq!(code(&strict), 1);
    let out = ktn(
        &[
            "spectrum",
            "--input",
            path.to_str().unwrap(),
            "--out",
            "run",
            "--tie-break",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let delta = std::fs::read_to_string(dir.path().join("run/delta.csv")).unwrap();
    assert!(
        delta.starts_with("# warning: symbolic tie-break"),
        "{delta}"
    );
}

#[test]
fn dgraph_leaf_order_by_sink() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_seven_well(dir.path());
    let out = ktn(
        &[
            "dgraph",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "dg",
            "--order",
            "sink",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("leaf order: 1 2 7 5 6 3 4"),
        "{}",
        stdout(&out)
    );
    assert!(dir.path().join("dg/dendrogram.json").exists());
    assert!(dir.path().join("dg/dendrogram.dot").exists());
}

#[test]
fn truncate_chain() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_chain(dir.path());
    let out = ktn(
        &[
            "truncate",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "t",
            "--cap",
            "4.0",
            "--anchor",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(
        stdout(&out).contains("2 states, 1 edges"),
        "{}",
        stdout(&out)
    );
    let reread = ktn::io::read_native(&dir.path().join("t/truncated.txt")).unwrap();
    assert_eq!(reread.data.n(), 2);
}

#[test]
fn lump_seven_well() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_seven_well(dir.path());
    let out = ktn(
        &[
            "lump",
            "--input",
            input.to_str().unwrap(),
            "--out",
            "l",
            "--cap",
            "100.0",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("1 sets"), "{}", stdout(&out));
    let csv = std::fs::read_to_string(dir.path().join("l/lumped.csv")).unwrap();
    assert!(csv.contains("1,2,6.1,5.1,5,6"));
}

#[test]
fn oracle_seven_well_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_seven_well(dir.path());
    let out = ktn(
        &[
            "oracle",
            "--input",
            input.to_str().unwrap(),
            "--temperature",
            "0.2,0.1,0.05",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.matches("[PASS]").count(), 8, "{text}");
    assert!(!text.contains("[FAIL]"), "{text}");
}

#[test]
fn oracle_refuses_large_networks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.txt");
    let mut text = String::new();
    for i in 1..=11 {
        text.push_str(&format!("M {i} {}\n", i as f64 * 0.11));
    }
    for i in 1..=10 {
        text.push_str(&format!("E {i} {} {}\n", i + 1, 2.0 + 0.13 * i as f64));
    }
    std::fs::write(&path, text).unwrap();
    let out = ktn(&["oracle", "--input", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&out), 3, "{}", stdout(&out));
}

#[test]
fn pathsample_input_works() {
    let dir = tempfile::tempdir().unwrap();
    let min = dir.path().join("min.data");
    let ts = dir.path().join("ts.data");
    std::fs::write(&min, "0.0 1.0 1 1 1 1\n1.0 1.0 1 1 1 1\n2.0 1.0 1 1 1 1\n").unwrap();
    std::fs::write(&ts, "3.0 1.0 1 1 2\n4.5 1.0 1 2 3\n").unwrap();
    let out = ktn(
        &[
            "spectrum",
            "--pathsample",
            min.to_str().unwrap(),
            ts.to_str().unwrap(),
            "--out",
            "ps",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let delta = std::fs::read_to_string(dir.path().join("ps/delta.csv")).unwrap();
    assert!(delta.contains("1,3,4.5,2.5,1,1"), "{delta}");
}
