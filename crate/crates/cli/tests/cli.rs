use std::path::PathBuf;
use std::process::{Command, Output};

use impasm_cli::{LoadOptions, Workspace};
use proptest::prelude::*;

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("samples").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impasm")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn singletons_generate_over_the_one_point_algebra() {
    let ws = sample("pca1.ws");
    let o = run(&["-w", ws.to_str().unwrap(), "generator", "-M", "singletons", "--bound", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: pass"));
}

#[test]
fn identity_term_is_top_in_b2() {
    let ws = sample("b2.ws");
    let o = run(&["-w", ws.to_str().unwrap(), "interp", "-t", "lam z . z"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("= 1 over B2"), "{}", stdout(&o));
}

#[test]
fn top_only_is_dense_in_the_chain_with_separator_h() {
    let ws = sample("chain.ws");
    let w = ws.to_str().unwrap();
    let o = run(&["-w", w, "density", "-M", "top-only"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("valuation h: {1}, 1: {1}"), "{}", stdout(&o));
    let o = run(&["-w", w, "density", "-M", "top-only", "--strategy", "canonical"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict: undecided"));
    assert!(stderr(&o).contains("warning:"));
    let o = run(&["-w", w, "density", "-M", "top-only", "--with", "h: 1; 1: 1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn sample_suites_pass() {
    let ws = sample("chain.ws");
    let w = ws.to_str().unwrap();
    for cmd in [&["check"][..], &["exlex"], &["kcheck"], &["limits"], &["image", "-f", "f"], &["tracked", "-f", "h"]] {
        let mut args = vec!["-w", w];
        args.extend_from_slice(cmd);
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{cmd:?}: {}", stdout(&o));
    }
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let ws = sample("chain.ws");
    let (a, b) = (tmp("report-a.json"), tmp("report-b.json"));
    for p in [&a, &b] {
        let o = run(&["-w", ws.to_str().unwrap(), "--json", p.to_str().unwrap(), "report"]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    }
    let (ja, jb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ja, jb);
    let v: serde_json::Value = serde_json::from_slice(&ja).unwrap();
    for key in ["command", "verdict", "bound", "witnesses", "violations"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn bad_input_exits_with_two_and_a_location() {
    let text = std::fs::read_to_string(sample("b2.ws")).unwrap().replace("a = 1, b = 1", "a = 1, b = 7");
    let p = tmp("bad.ws");
    std::fs::write(&p, text).unwrap();
    let o = run(&["-w", p.to_str().unwrap(), "check"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.ws:9:"), "{}", stderr(&o));
}

#[test]
fn invalid_objects_load_without_validation_and_fail_check() {
    let text = std::fs::read_to_string(sample("b2.ws")).unwrap().replace("exist: c = 1", "exist: c = 0");
    let p = tmp("invalid.ws");
    std::fs::write(&p, text).unwrap();
    let w = p.to_str().unwrap();
    assert_eq!(run(&["-w", w, "check"]).status.code(), Some(2));
    let o = run(&["-w", w, "--no-validate", "check"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("assembly Y"), "{}", stdout(&o));
    let o = run(&["-w", w, "--no-validate", "tracked", "-f", "f"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("best witness 0"), "{}", stdout(&o));
}

#[test]
fn several_files_share_one_namespace() {
    let (a, b) = (sample("pca1.ws"), sample("b2.ws"));
    let o = run(&["-w", a.to_str().unwrap(), "-w", b.to_str().unwrap(), "--algebra", "PCA1", "interp", "-t", "pair"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&["-w", a.to_str().unwrap(), "-w", b.to_str().unwrap(), "interp", "-t", "pair"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn samples_round_trip_through_the_canonical_form() {
    for name in ["b2.ws", "chain.ws", "pca1.ws"] {
        let text = std::fs::read_to_string(sample(name)).unwrap();
        let ws = Workspace::parse(name, &text, LoadOptions::default()).unwrap();
        let emitted = ws.emit();
        let again = Workspace::parse("emitted", &emitted, LoadOptions::default()).unwrap();
        assert_eq!(ws, again, "{name}");
        assert_eq!(emitted, again.emit(), "{name}");
    }
}

proptest! {
    #[test]
    fn generated_assemblies_round_trip(values in prop::collection::vec(1usize..3, 1..5)) {
        let names = ["0", "h", "1"];
        let carrier: Vec<String> = (0..values.len()).map(|i| format!("x{i}")).collect();
        let exist: Vec<String> = carrier.iter().zip(&values).map(|(c, &v)| format!("{c} = {}", names[v])).collect();
        let text = format!(
            "[algebra H]\nelements: 0 h 1\norder: 0 <= h <= 1\nimp: heyting\nseparator: members h 1\n\n\
             [assembly A over H]\ncarrier: {}\nexist: {}\n\n[implicative-set E over H]\ncarrier: p\neq: (p, p) = {}\n",
            carrier.join(" "),
            exist.join(", "),
            names[values[0]],
        );
        let ws = Workspace::parse("gen", &text, LoadOptions::default()).unwrap();
        let again = Workspace::parse("emitted", &ws.emit(), LoadOptions::default()).unwrap();
        prop_assert_eq!(ws, again);
    }
}
