use std::path::PathBuf;
use std::process::{Command, Output};

use tanaka::graded::{Gnla, GnlaDoc};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn data(name: &str) -> String {
    root().join("data").join(name).to_string_lossy().into_owned()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn tanaka(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tanaka")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn check_exit_codes() {
    let ok = tanaka(&["check", &data("heisenberg1.json")]);
    assert_eq!(ok.status.code(), Some(0), "{}", stderr(&ok));
    assert!(stdout(&ok).contains("fundamental: yes"));

    let bad = tanaka(&["check", &fixture("bad_grading.json")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("grading: [x,p] has a component along x"));

    let nf = tanaka(&["check", &fixture("not_fundamental.json")]);
    assert_eq!(nf.status.code(), Some(1));
    assert!(stdout(&nf).contains("fundamental: no"));

    let malformed = tanaka(&["check", &fixture("malformed_rational.json")]);
    assert_eq!(malformed.status.code(), Some(2));
    assert!(stderr(&malformed).contains("1/0"));

    assert_eq!(tanaka(&["check", "/nonexistent/algebra.json"]).status.code(), Some(2));
}

#[test]
fn check_json_report() {
    let o = tanaka(&["check", &fixture("bad_grading.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"].as_array().unwrap().len(), 1);
}

#[test]
fn prolong_tables() {
    let w = data("contact_w_n2.json");
    let o = tanaka(&["prolong", &data("heisenberg1.json"), "--reduce", &format!("1:custom:{w}"), "--max-degree", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("(1, 2 | 4, 2, 1, 0)  total 10"));

    let o = tanaka(&["prolong", &data("abelian3.json"), "--g0", "co"]);
    assert!(stdout(&o).contains("(3 | 4, 3, 0)  total 10"));

    let o = tanaka(&["prolong", &data("heisenberg1.json"), "--g0", "der0", "--max-degree", "3"]);
    let s = stdout(&o);
    assert!(s.contains("(1, 2 | 4, 6, 9, 12)") && s.contains("truncated"));

    let o = tanaka(&["prolong", &data("heisenberg1.json"), "--g0", &data("lagrangian_n2.json")]);
    assert!(stdout(&o).contains("(1, 2 | 2, 2, 1, 0)  total 8"));

    let o = tanaka(&["prolong", &data("heisenberg1.json"), "--g0", "so"]);
    assert!(stdout(&o).contains("total 4"));
}

#[test]
fn prolong_errors() {
    let h = data("heisenberg1.json");
    assert_eq!(tanaka(&["prolong", &h, "--reduce", "x:orthogonal"]).status.code(), Some(2));
    assert_eq!(tanaka(&["prolong", &h, "--reduce", "0:bogus"]).status.code(), Some(2));
    let form = format!("0:orthogonal:{}", fixture("degenerate_form.json"));
    let o = tanaka(&["prolong", &h, "--reduce", &form]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let w = data("contact_w_n2.json");
    let o = tanaka(&["prolong", &h, "--reduce", &format!("0:custom:{w}")]);
    assert_eq!(o.status.code(), Some(1));
    let o = tanaka(&["prolong", &h, "--reduce", "1:trace-free", "--reduce", "1:trace-free"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn prolong_json_is_deterministic() {
    let args = ["prolong", &data("cartan235.fields.json"), "--format", "json"];
    let bad = tanaka(&args);
    assert_eq!(bad.status.code(), Some(2));
    let h = data("heisenberg1.json");
    let args = ["prolong", &h, "--g0", "so", "--format", "json", "--dump"];
    let a = tanaka(&args);
    let b = tanaka(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["dims"]["total"], 4);
    assert!(v["components"].is_array());
    let base: GnlaDoc = serde_json::from_value(v["base"].clone()).unwrap();
    assert_eq!(Gnla::from_doc(&base).unwrap(), Gnla::heisenberg(1));
}

#[test]
fn flag_reports() {
    let m = data("martinet.fields.json");
    let o = tanaka(&["flag", &m, "--point", "0,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("generic growth [2, 3]"));
    assert!(s.contains("growth [2, 2, 3], irregular"));

    let o = tanaka(&["flag", &m, "--point", "1,0,0", "--gnla", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["points"][0]["regular"], true);
    let doc: GnlaDoc = serde_json::from_value(v["points"][0]["gnla"].clone()).unwrap();
    let g = Gnla::from_doc(&doc).unwrap();
    assert_eq!(g.dims(), vec![1, 2]);
    assert!(g.validate().is_empty() && g.is_fundamental());

    let o = tanaka(&["flag", &m, "--point", "0,0,0", "--gnla"]);
    assert_eq!(o.status.code(), Some(1));

    let o = tanaka(&["flag", &data("cartan235.fields.json"), "--point", "0", "--gnla", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let doc: GnlaDoc = serde_json::from_value(v["points"][0]["gnla"].clone()).unwrap();
    assert_eq!(Gnla::from_doc(&doc).unwrap().dims(), vec![2, 1, 2]);

    assert_eq!(tanaka(&["flag", &m, "--point", "1,2"]).status.code(), Some(2));
}

#[test]
fn symmetry_scenarios() {
    let o = tanaka(&["symmetry", &data("heisenberg_basic.scenario.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("bound: holds"));
    assert!(s.contains("[s_i, g_-1] in s_(i-1): holds"));

    let o = tanaka(&["symmetry", &data("negative/heisenberg_zdx.scenario.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("not a symmetry"));
    assert!(stderr(&o).contains("residual"));

    let o = tanaka(&["symmetry", &data("heisenberg_empty.scenario.json"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["total_s"], 0);

    let o = tanaka(&["symmetry", &data("negative/heisenberg_missing_dx.scenario.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("with e1"));
}

#[test]
fn exports_round_trip() {
    let o = tanaka(&["export", "heisenberg", "2"]);
    assert_eq!(Gnla::from_json(&stdout(&o)).unwrap(), Gnla::heisenberg(2));
    let o = tanaka(&["export", "sl3-scenario"]);
    assert_eq!(stdout(&o), std::fs::read_to_string(data("sl3.scenario.json")).unwrap());
    assert_eq!(tanaka(&["export", "contact-w", "1"]).status.code(), Some(2));
}

#[test]
fn thread_variable() {
    let run = |v: &str| {
        Command::new(env!("CARGO_BIN_EXE_tanaka"))
            .env("TANAKA_THREADS", v)
            .args(["prolong", &data("abelian3.json"), "--g0", "co"])
            .output()
            .unwrap()
    };
    assert_eq!(run("2").status.code(), Some(0));
    assert_eq!(run("zero").status.code(), Some(2));
}
