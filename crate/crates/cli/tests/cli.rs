// SPDX-License-Identifier: Apache-2.0

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_reveal");

fn reveal(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(BIN).current_dir(dir).args(args).output().unwrap();
    if out.status.code() == Some(3) {
        eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn generate_obfuscate_verify() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(code(&reveal(d, &["gen", "--label", "SP_WT_BK_8", "--out", "a.aig", "--log", "log.json"])), 0);
    assert_eq!(code(&reveal(d, &["gen", "--label", "SP_AR_RC_8", "--out", "b.aag", "--ascii"])), 0);
    assert!(fs::read_to_string(d.join("b.aag")).unwrap().starts_with("aag "));
    let log: Value = serde_json::from_str(&fs::read_to_string(d.join("log.json")).unwrap()).unwrap();
    assert!(log.is_object());

    assert_eq!(code(&reveal(d, &["obfuscate", "--in", "a.aig", "--out", "o.aig", "--seed", "5"])), 0);
    let v = reveal(d, &["verify", "--a", "o.aig", "--b", "b.aag"]);
    assert_eq!(code(&v), 0);
    assert_eq!(stdout_json(&v)["verdict"]["verdict"], "equivalent");

    assert_eq!(code(&reveal(d, &["bug", "--in", "a.aig", "--out", "bug.aig", "--witness", "w.json"])), 0);
    let v = reveal(d, &["verify", "--a", "bug.aig", "--b", "b.aag", "--engines", "cdcl_miter"]);
    assert_eq!(code(&v), 1);
    assert_eq!(stdout_json(&v)["verdict"]["verdict"], "not_equivalent");
}

#[test]
fn cones_blocks_features() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    reveal(d, &["gen", "--label", "SP_DT_KS_8", "--out", "m.aig"]);
    assert_eq!(code(&reveal(d, &["cones", "--in", "m.aig", "--out-dir", "c"])), 0);
    let side: Value = serde_json::from_str(&fs::read_to_string(d.join("c/cones.json")).unwrap()).unwrap();
    assert_eq!(side["width"], 8);
    assert_eq!(side["msb"]["cut_depth"], 11);
    assert_eq!(side["lsb"]["root_outputs"].as_array().unwrap().len(), 4);

    assert_eq!(code(&reveal(d, &["blocks", "--in", "c/msb.aig", "--out", "ann.json"])), 0);
    let args = ["features", "--cone", "c/msb.aig", "--annotation", "ann.json", "--circuit", "m.aig", "--out", "f.json"];
    assert_eq!(code(&reveal(d, &args)), 0);
    let f: Value = serde_json::from_str(&fs::read_to_string(d.join("f.json")).unwrap()).unwrap();
    assert_eq!(f["columns"].as_array().unwrap().len(), 11);
    assert_eq!(f["nodes"][0].as_array().unwrap().len(), 11);
    assert_eq!(f["graph"]["f_fan"], f["graph"]["input_count"]);
}

#[test]
fn builtin_solver_serves_as_external_engine() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    fs::write(d.join("sat.cnf"), "p cnf 2 2\n1 2 0\n-1 0\n").unwrap();
    let s = reveal(d, &["solve", "sat.cnf"]);
    assert_eq!(code(&s), 10);
    assert!(String::from_utf8_lossy(&s.stdout).contains("s SATISFIABLE"));
    fs::write(d.join("unsat.cnf"), "p cnf 1 2\n1 0\n-1 0\n").unwrap();
    assert_eq!(code(&reveal(d, &["solve", "unsat.cnf"])), 20);

    fs::write(d.join("reveal.conf"), format!("external_solver = {BIN} solve\nbudget_secs = 60\n")).unwrap();
    reveal(d, &["gen", "--label", "SP_WT_SK_6", "--out", "a.aig"]);
    reveal(d, &["gen", "--label", "SP_AR_CL_6", "--out", "b.aig"]);
    let v = reveal(d, &["--config", "reveal.conf", "verify", "--a", "a.aig", "--b", "b.aig", "--engines", "external_dimacs"]);
    assert_eq!(code(&v), 0);
    assert_eq!(stdout_json(&v)["engine"], "external_dimacs");
}

#[test]
fn train_and_run_pipeline() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    let lib = ["library", "--widths", "6", "--archs", "SP_WT_BK,SP_WT_KS,SP_AR_RC,SP_DT_CL", "--out-dir", "lib"];
    assert_eq!(code(&reveal(d, &lib)), 0);
    for kind in ["ppa", "fsa"] {
        let out = format!("{kind}.model");
        let args = ["train", "--kind", kind, "--widths", "6", "--epochs", "2", "--hidden", "8", "--out", &out];
        let r = reveal(d, &args);
        assert_eq!(code(&r), 0);
        assert!(stdout_json(&r)["train_top1"].is_number());
    }
    fs::write(d.join("reveal.conf"), "library = lib\nppa_model = ppa.model\nfsa_model = fsa.model\n").unwrap();
    reveal(d, &["gen", "--label", "SP_WT_KS_6", "--out", "x.aig"]);
    reveal(d, &["obfuscate", "--in", "x.aig", "--out", "y.aig", "--passes", "resyn3like"]);

    let inf = reveal(d, &["--config", "reveal.conf", "infer", "--in", "y.aig"]);
    assert_eq!(code(&inf), 0);
    assert_eq!(stdout_json(&inf)["ppa_ranking"].as_array().unwrap().len(), 5);

    let p = reveal(d, &["--config", "reveal.conf", "pipeline", "--in", "y.aig", "--widen", "--report", "r.json"]);
    assert_eq!(code(&p), 0, "{}", String::from_utf8_lossy(&p.stderr));
    let r: Value = serde_json::from_str(&fs::read_to_string(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["width"], 6);
    assert!(!r["templates_tried"].as_array().unwrap().is_empty());

    reveal(d, &["bug", "--in", "y.aig", "--out", "z.aig"]);
    assert_eq!(code(&reveal(d, &["--config", "reveal.conf", "pipeline", "--in", "z.aig"])), 1);
}

#[test]
fn errors_exit_with_three() {
    let t = tempfile::tempdir().unwrap();
    let d = t.path();
    assert_eq!(code(&reveal(d, &["gen", "--label", "SP_WT_JCA_8", "--out", "a.aig"])), 3);
    assert_eq!(code(&reveal(d, &["verify", "--a", "missing.aig", "--b", "missing.aig"])), 3);
    fs::write(d.join("bad.conf"), "colour = red\n").unwrap();
    assert_eq!(code(&reveal(d, &["--config", "bad.conf", "solve", "x.cnf"])), 3);
    reveal(d, &["gen", "--label", "SP_WT_BK_8", "--out", "a.aig"]);
    assert_eq!(code(&reveal(d, &["infer", "--in", "a.aig"])), 3);
}
