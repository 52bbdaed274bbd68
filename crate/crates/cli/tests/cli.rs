//! End-to-end runs of the `ceti` binary on the shipped fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn ceti(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ceti")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bias_repair_emits_a_validated_patch() {
    let o = ceti(&["repair", path(&fixture("bias.mini")), path(&fixture("bias.tests"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["status"], "repaired");
    assert_eq!(v["patch"]["site"], 2);
    assert_eq!(v["patch"]["original"], "bias = down;");
    assert_eq!(v["rProgs"], v["candidates"].as_array().unwrap().len());
}

#[test]
fn outputs_are_byte_stable() {
    let runs = [
        vec!["repair", "--no-timing"],
        vec!["s2r"],
    ];
    for args in runs {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.push(path(&fixture(if args[0] == "s2r" { "bias_templ.mini" } else { "bias.mini" })).into());
        full.push(path(&fixture("bias.tests")).into());
        let a: Vec<&str> = full.iter().map(String::as_str).collect();
        assert_eq!(ceti(&a).stdout, ceti(&a).stdout, "{args:?}");
    }
    let dir = tempfile::tempdir().unwrap();
    let reach = dir.path().join("reach.mini");
    fs::write(&reach, "int x; int y; def main() { if (x > y + 3) { reach; } return 0; }").unwrap();
    let doms = dir.path().join("reach.domains");
    fs::write(&doms, "x: -5..5\ny: {0,2}\n").unwrap();
    let a = ["r2s", path(&reach), path(&doms)];
    assert_eq!(ceti(&a).stdout, ceti(&a).stdout);
    let (f3, d3) = (fixture("linear_pair.mini"), fixture("linear_pair.domains"));
    let s = ["solve", "--no-timing", path(&f3), path(&d3)];
    assert_eq!(ceti(&s).stdout, ceti(&s).stdout);
}

#[test]
fn s2r_builds_the_guarded_reach_program() {
    let o = ceti(&["s2r", path(&fixture("bias_templ.mini")), path(&fixture("bias.tests"))]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for k in 0..5 {
        assert!(text.contains(&format!("int c{k};")), "{text}");
    }
    assert!(text.contains("def is_upward__P(in, up, down)"));
    assert!(text.contains("bias = c0 + c1 * bias + c2 * in + c3 * up + c4 * down;"));
    assert_eq!(text.matches("is_upward__P(").count(), 7, "definition plus one call per test");
    assert!(text.contains("{ reach; }"));
    assert!(text.trim_end().ends_with("return 0;\n}"));
}

#[test]
fn s2r_sidecars_feed_the_solver() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.mini");
    let o = ceti(&["s2r", path(&fixture("bias_templ.mini")), path(&fixture("bias.tests")), "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rename = fs::read_to_string(dir.path().join("p.mini.rename")).unwrap();
    assert!(rename.lines().any(|l| l == "c0=c0"), "{rename}");
    assert!(rename.lines().any(|l| l == "fn:is_upward=is_upward__P"), "{rename}");
    let domains = dir.path().join("p.mini.domains");
    assert!(fs::read_to_string(&domains).unwrap().starts_with("c0: -100000..100000"));

    let o = ceti(&["solve", path(&out), path(&domains)]);
    let v = json(&o);
    assert_eq!(v["status"], "witness");
    let w = &v["witness"];
    let holes = w.as_object().unwrap().iter().map(|(k, x)| format!("{k}={x}")).collect::<Vec<_>>().join(",");
    // the witness, read back as hole values, passes every test of the template
    for line in fs::read_to_string(fixture("bias.tests")).unwrap().lines().filter(|l| l.contains("->") && !l.starts_with('#')) {
        let (args, expected) = line.split_once("->").unwrap();
        let o = ceti(&["run", path(&fixture("bias_templ.mini")), "--holes", &holes, "--args", args.trim()]);
        assert_eq!(stdout(&o).trim(), format!("RETURNED {}", expected.trim()), "{line}");
    }
}

#[test]
fn r2s_writes_a_singleton_suite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.mini");
    let o = ceti(&["r2s", path(&fixture("linear_pair.mini")), path(&fixture("linear_pair.domains")), "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(dir.path().join("q.mini.tests")).unwrap(), "-> 1\n");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("raise;") && text.contains("catch"), "{text}");
    let rename = fs::read_to_string(dir.path().join("q.mini.rename")).unwrap();
    assert_eq!(rename.lines().filter(|l| !l.starts_with("fn:")).count(), 2);
}

#[test]
fn linear_pair_runs_and_solves() {
    let o = ceti(&["run", path(&fixture("linear_pair.mini")), "--globals", "x=-20,y=-40"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "REACHED");
    let o = ceti(&["run", path(&fixture("linear_pair.mini")), "--globals", "x=1,y=2"]);
    assert_ne!(stdout(&o).trim(), "REACHED");

    let v = json(&ceti(&["solve", path(&fixture("linear_pair.mini")), path(&fixture("linear_pair.domains"))]));
    assert_eq!(v["status"], "witness");
    let (x, y) = (v["witness"]["x"].as_i64().unwrap(), v["witness"]["y"].as_i64().unwrap());
    assert!(2 * x == y && x > y + 10);
}

#[test]
fn faultloc_ranks_the_faulty_assignment_first() {
    let o = ceti(&["faultloc", path(&fixture("bias.mini")), path(&fixture("bias.tests"))]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rank\tstmt_id\tscore\tsource_line"));
    assert_eq!(lines.next(), Some("1\t2\t0.8000\tbias = down;"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn exit_codes() {
    assert_eq!(ceti(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(ceti(&["repair"]).status.code(), Some(1));
    assert_eq!(ceti(&["--help"]).status.code(), Some(0));
    assert_eq!(ceti(&["parse", "/no/such/file.mini"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mini");
    fs::write(&bad, "def f( { return 1; }").unwrap();
    let o = ceti(&["parse", path(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error"));

    // one returned constant cannot satisfy both tests
    let p = dir.path().join("p.mini");
    fs::write(&p, "def f(a) { return 0; }").unwrap();
    let t = dir.path().join("p.tests");
    fs::write(&t, "1 -> 0\n2 -> 5\n").unwrap();
    let o = ceti(&["repair", path(&p), path(&t)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&o)["status"], "no-repair-found");

    fs::write(&t, "1 -> 0\n").unwrap();
    let o = ceti(&["repair", path(&p), path(&t)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to repair"));
}

#[test]
fn empty_corpus_bench() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("manifest.json"), "[]").unwrap();
    let o = ceti(&["bench", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().last(), Some("# repaired 0/0"));
    let o = ceti(&["bench", "--json", path(dir.path())]);
    let v = json(&o);
    assert_eq!(v["repaired"], 0);
    assert_eq!(v["total"], 0);
}

#[test]
fn bench_runs_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("bias.mini"), dir.path().join("bias.mini")).unwrap();
    fs::copy(fixture("bias.tests"), dir.path().join("bias.tests")).unwrap();
    let manifest = r#"[{"id": "bias", "program": "bias.mini", "suite": "bias.tests",
        "defectClass": "incorrect-const", "expectedRepairable": true}]"#;
    fs::write(dir.path().join("manifest.json"), manifest).unwrap();
    let o = ceti(&["bench", "--no-timing", path(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().starts_with("bias\tincorrect-const\ttrue\ttrue\t1\t0\t"), "{text}");
    assert_eq!(text.lines().last(), Some("# repaired 1/1"));
}

#[test]
fn equivalence_check_finds_no_mismatch() {
    let o = ceti(&["equiv", "--seed", "7", "--count", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("s2r_mismatches\t0") && text.contains("r2s_mismatches\t0"), "{text}");
}
