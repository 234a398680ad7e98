use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sortnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sortnet"))
        .args(args)
        .env_remove("SORTNET_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn answer(o: &Output) -> String {
    stdout(o)
        .lines()
        .rev()
        .find(|l| l.starts_with("ANSWER"))
        .unwrap_or_default()
        .to_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn reduced_oracle(dir: &Path, n: usize) -> PathBuf {
    let raw = dir.join(format!("raw{n}.orc"));
    let reduced = dir.join(format!("reduced{n}.orc"));
    let o = sortnet(&["produce", "-n", &n.to_string(), "-o", path_str(&raw)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = sortnet(&["preprocess", path_str(&raw), "-o", path_str(&reduced)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    reduced
}

#[test]
fn produce_reports_and_exits_by_answer() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.orc");
    let o = sortnet(&[
        "produce",
        "-n",
        "4",
        "--max-size",
        "6",
        "-o",
        path_str(&raw),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(answer(&o), "ANSWER yes n=4 k=5");
    let text = fs::read_to_string(&raw).unwrap();
    assert!(text.starts_with("ORACLE v1 n=4 kind=raw\nLEVEL k=1 count="));

    let o = sortnet(&["produce", "-n", "3", "--max-size", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(answer(&o), "ANSWER no n=3 k=2");

    let o = sortnet(&["produce", "-n", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(answer(&o), "ANSWER yes n=1 k=0");

    let o = sortnet(&["produce", "-n", "17", "--max-size", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("17"));
}

#[test]
fn check_accepts_its_own_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = reduced_oracle(dir.path(), 5);
    assert!(fs::read_to_string(&reduced)
        .unwrap()
        .starts_with("ORACLE v1 n=5 kind=reduced\n"));
    let o = sortnet(&["check", "-n", "5", "--oracle", path_str(&reduced)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(answer(&o), "ANSWER yes n=5 k=9");

    let o = sortnet(&["check", "-n", "4", "--oracle", path_str(&reduced)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("5 channels"));
}

#[test]
fn truncated_oracle_gives_maybe() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = reduced_oracle(dir.path(), 5);
    let text = fs::read_to_string(&reduced).unwrap();
    let cut = text.find("LEVEL k=4 ").unwrap();
    let truncated = dir.path().join("truncated.orc");
    fs::write(&truncated, &text[..cut]).unwrap();
    let o = sortnet(&[
        "check",
        "-n",
        "5",
        "--max-size",
        "9",
        "--oracle",
        path_str(&truncated),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(answer(&o), "ANSWER maybe");
}

#[test]
fn tampered_oracle_fails_strict_and_survives_lenient() {
    let dir = tempfile::tempdir().unwrap();
    let reduced = reduced_oracle(dir.path(), 4);
    let text = fs::read_to_string(&reduced).unwrap();
    // n=4, level 1: every triple is "0 ; c ; perm"; the identity never works
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let idx = lines.iter().position(|l| l.starts_with("0 ; ")).unwrap();
    let fields: Vec<&str> = lines[idx].split(" ; ").collect();
    lines[idx] = format!("{} ; {} ; 0 1 2 3", fields[0], fields[1]);
    let tampered = dir.path().join("tampered.orc");
    fs::write(&tampered, lines.join("\n") + "\n").unwrap();

    let o = sortnet(&[
        "check",
        "-n",
        "4",
        "--oracle",
        path_str(&tampered),
        "--strict",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("obligation 1"), "{}", stderr(&o));
    assert!(stderr(&o).contains("k=1"));

    let o = sortnet(&[
        "check",
        "-n",
        "4",
        "--oracle",
        path_str(&tampered),
        "--lenient",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(answer(&o), "ANSWER yes n=4 k=5");
    assert!(stdout(&o).contains("rejected: obligation 1"));
}

#[test]
fn malformed_files_are_rejected_with_a_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.orc");
    let out = dir.path().join("out.orc");
    fs::write(
        &bad,
        "ORACLE v1 n=3 kind=raw\nLEVEL k=1 count=1\n0 ; 1 ; 0 0 2\n",
    )
    .unwrap();
    let o = sortnet(&["preprocess", path_str(&bad), "-o", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!out.exists());

    fs::write(
        &bad,
        "ORACLE v1 n=3 kind=raw\nLEVEL k=1 count=2\n0 ; 1 ; 0 2 1\n",
    )
    .unwrap();
    let o = sortnet(&["check", "-n", "3", "--oracle", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));

    let o = sortnet(&[
        "check",
        "-n",
        "3",
        "--oracle",
        path_str(&dir.path().join("missing.orc")),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_oracle_preprocesses_to_empty() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.orc");
    let out = dir.path().join("out.orc");
    fs::write(&empty, "").unwrap();
    let o = sortnet(&[
        "preprocess",
        "--oracle",
        path_str(&empty),
        "-o",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap(), "");

    // no level for the first step
    let o = sortnet(&["check", "-n", "2", "--oracle", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(answer(&o), "ANSWER maybe");
}

#[test]
fn json_report_is_well_formed() {
    let o = sortnet(&["solve", "-n", "5", "--report", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let report: Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
    assert_eq!(report["n"], 5);
    assert_eq!(report["known_optimum"], 9);
    assert_eq!(report["answer"], "ANSWER yes n=5 k=9");
    let levels = report["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 9);
    for (i, l) in levels.iter().enumerate() {
        assert_eq!(l["k"], i + 1);
        assert!(l["kept"].as_u64() <= l["generated"].as_u64());
    }
    let phases: Vec<&str> = report["phases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    assert_eq!(phases, ["produce", "preprocess", "check"]);
    assert_eq!(answer(&o), "ANSWER yes n=5 k=9");
}

#[test]
fn thread_count_does_not_change_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.orc");
    let b = dir.path().join("b.orc");
    let o = sortnet(&["--threads", "1", "produce", "-n", "6", "-o", path_str(&a)]);
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_sortnet"))
        .args(["produce", "-n", "6", "-o", path_str(&b)])
        .env("SORTNET_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}
