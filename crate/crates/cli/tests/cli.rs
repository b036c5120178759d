use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn conc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const COIN: &str = r#"{"atoms":[[0,"1/2"],[1,"1/2"]]}"#;

#[test]
fn tse_prints_value_and_signs() {
    let o = conc(&["extremal", "tse", "--alphas", "3/5,3/5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("tse = 13/25"), "{out}");
    assert!(out.contains("signs = [-1, 1]") || out.contains("signs = [1, -1]"), "{out}");

    let o = conc(&["--format", "json", "extremal", "tse", "--alphas", "3/5,3/5"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tse"], "13/25");
    assert_eq!(v["tsebal"], "13/25");
    assert_eq!(v["alphas"], serde_json::json!(["3/5", "3/5"]));
    let signs: Vec<i64> = serde_json::from_value(v["signs"].clone()).unwrap();
    assert_eq!(signs.iter().sum::<i64>(), 0);
}

#[test]
fn conv_of_two_coins() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", COIN);
    let b = write(&dir, "b.json", COIN);
    let o = conc(&["dist", "conv", s(&a), s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "{0:1/4, 1:1/2, 2:1/4}");
}

#[test]
fn emitted_json_round_trips() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", COIN);
    let out = dir.path().join("c.json");
    let o = conc(&["--format", "json", "--out", s(&out), "dist", "conv", s(&a), s(&a), s(&a)]);
    assert_eq!(o.status.code(), Some(0));
    let first = fs::read_to_string(&out).unwrap();
    assert_eq!(first, stdout(&o));
    let again = dir.path().join("d.json");
    let o = conc(&["--format", "json", "--out", s(&again), "dist", "conv", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read_to_string(&again).unwrap(), first);
}

#[test]
fn text_format_input_is_accepted() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.txt", "# coin\n0: 1/2\n1: 1/2\n");
    let o = conc(&["dist", "stats", s(&a)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("variance = 1/4"));
}

#[test]
fn few_dropped_check_exits_zero() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", r#"{"alphas":["1/2","1/2","1/2"],"k":0,"K":2,"delta":"1/2"}"#);
    let o = conc(&["check", "few_dropped", "--instance", s(&inst)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["holds"], "pass");
}

#[test]
fn malformed_file_reports_line_and_column() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"atoms\":[[0,\"1/2\"],\n[1,1/2]]}");
    let o = conc(&["dist", "stats", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2, column"), "{}", stderr(&o));

    let bad = write(&dir, "bad.txt", "0: 1/2\n1: half\n");
    let o = conc(&["dist", "stats", s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(conc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(conc(&["extremal", "tse", "--alphas", "3/5,x"]).status.code(), Some(2));
    assert_eq!(conc(&["extremal", "tse", "--alphas", "0"]).status.code(), Some(2));
    assert_eq!(conc(&["--tol", "0", "extremal", "nu", "--alpha", "1/2"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "inst.json", "{}");
    assert_eq!(conc(&["check", "no_such_lemma", "--instance", s(&inst)]).status.code(), Some(2));
}

#[test]
fn failed_domination_exits_one() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.json", COIN);
    let b = write(&dir, "b.json", r#"{"atoms":[[0,"1/4"],[1,"1/2"],[2,"1/4"]]}"#);
    assert_eq!(conc(&["dominate", s(&b), s(&a)]).status.code(), Some(0));
    assert_eq!(conc(&["dominate", s(&a), s(&b)]).status.code(), Some(1));
}

#[test]
fn report_counts_and_fails() {
    let dir = TempDir::new().unwrap();
    let r = write(
        &dir,
        "r.jsonl",
        "{\"name\":\"few_dropped\",\"holds\":\"pass\"}\n{\"name\":\"peakedness1\",\"holds\":\"not-applicable\"}\n",
    );
    let o = conc(&["report", s(&r)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("few_dropped: pass 1 fail 0"));
    let f = write(&dir, "f.jsonl", "{\"name\":\"few_dropped\",\"holds\":\"fail\"}\n");
    assert_eq!(conc(&["report", s(&r), s(&f)]).status.code(), Some(1));
}

#[test]
fn scan_writes_records_and_summary() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("scan.jsonl");
    let o = conc(&["--out", s(&out), "scan-conjecture", "--denominator", "2", "--window", "0..1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("violations = 0"));
    assert!(stdout(&o).contains("seed = 0"));
    let body = fs::read_to_string(&out).unwrap();
    let last: serde_json::Value = serde_json::from_str(body.lines().last().unwrap()).unwrap();
    assert_eq!(last["violations"], 0);
    assert_eq!(body.lines().count() as u64, last["instances"].as_u64().unwrap() + 1);
}

#[test]
fn seeded_output_is_byte_identical() {
    let args = ["--seed", "11", "--format", "json", "gauss", "tail", "--cov", "1", "--t", "32", "--samples", "20000"];
    let a = conc(&args);
    let b = conc(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 11);
}

#[test]
fn tv_csv_has_one_row_per_power() {
    let dir = TempDir::new().unwrap();
    let sq = write(&dir, "sq.json", r#"{"dim":2,"atoms":[[[0,0],"1/4"],[[1,0],"1/4"],[[0,1],"1/4"],[[1,1],"1/4"]]}"#);
    let o = conc(&["--format", "csv", "gauss", "tv", s(&sq), "--ms", "2,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "m,tv,tv_err,L,chi,s_tilde");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,"));
}

#[test]
fn lattice_basis_and_gap_commands() {
    let dir = TempDir::new().unwrap();
    let v = write(&dir, "v.json", "[[0,0],[2,0],[0,4],[2,4]]");
    let o = conc(&["--format", "json", "lattice-basis", s(&v)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["columns"], serde_json::json!([[2, 0], [0, 4]]));

    let a = write(&dir, "a.json", r#"{"rank":1,"dims":[1],"generators":[2]}"#);
    let b = write(&dir, "b.json", r#"{"rank":1,"dims":[1],"generators":[3]}"#);
    let o = conc(&["--format", "json", "gap", "sumset", s(&a), s(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["rank"], 2);
    let o = conc(&["gap", "fit", "--values", "-4,-2,0,2,4", "--eps", "0"]);
    assert!(stdout(&o).contains("\"2/1\""), "{}", stdout(&o));
}
