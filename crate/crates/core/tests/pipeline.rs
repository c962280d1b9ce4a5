// SPDX-License-Identifier: Apache-2.0

use reveal::cec::{Engine, PortfolioConfig, Verdict};
use reveal::gnn::{param_names, ModelKind, ModelWeights};
use reveal::mulgen::{build_template_library, generate_multiplier, Architecture, FsaKind, PpaKind};
use reveal::obfuscate::{eval, inject_bug, optimize, RewriteConfig};
use reveal::pipeline::{run_pipeline, PipelineConfig, PipelineError};

/// A model that always ranks `class` first: zero weights, one large bias.
fn stub(kind: ModelKind, class: usize) -> ModelWeights {
    let mut w = ModelWeights::new(kind, 4, 0);
    for p in w.params.iter_mut() {
        p.fill(0.0);
    }
    let names = param_names(kind);
    let bias = |h: &str| names.iter().position(|n| n == &format!("{h}.b")).unwrap();
    match kind {
        ModelKind::Ppa => w.params[bias("ppa")][[0, class]] = 10.0,
        ModelKind::Fsa => {
            let f = FsaKind::ALL[class];
            w.params[bias("topo")][[0, f.topology().index()]] = 10.0;
            let head = if f.topology().index() == 0 { "nt" } else { "tree" };
            w.params[bias(head)][[0, f.subtype_index()]] = 10.0;
        }
    }
    w
}

fn library(dir: &std::path::Path) -> reveal::mulgen::LibraryIndex {
    let archs: Vec<Architecture> = ["SP_WT_BK", "SP_WT_KS", "SP_AR_RC", "SP_DT_BK"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    build_template_library(&[8], &archs, dir, 1, 3).unwrap()
}

fn circuit() -> reveal::aig::Aig {
    let t = generate_multiplier(&"SP_WT_BK_8".parse().unwrap()).unwrap().0;
    optimize(&t, &RewriteConfig::dc2like(5)).unwrap()
}

#[test]
fn closed_loop_with_correct_labels() {
    let dir = tempfile::tempdir().unwrap();
    let lib = library(dir.path());
    let ppa = stub(ModelKind::Ppa, PpaKind::Wallace.index());
    let fsa = stub(ModelKind::Fsa, FsaKind::BrentKung.index());
    let r = run_pipeline(&circuit(), "wt_bk.aig", &lib, &ppa, &fsa, &PipelineConfig::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Equivalent);
    assert_eq!(r.exit_code(), 0);
    assert_eq!(r.templates_tried[0].label, "SP_WT_BK_8");
    assert!(r.templates_tried.iter().any(|t| t.verdict == Verdict::Equivalent));
    let p = r.phases;
    let sum = p.cone_extraction_secs + p.feature_extraction_secs + p.inference_secs + p.equivalence_checking_secs;
    assert!(sum <= r.total_secs);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("\"verdict\":\"equivalent\""));
    assert!(r.summary().contains("EQUIVALENT"));
}

#[test]
fn misranked_templates_still_decide() {
    let dir = tempfile::tempdir().unwrap();
    let lib = library(dir.path());
    let ppa = stub(ModelKind::Ppa, PpaKind::Dadda.index());
    let fsa = stub(ModelKind::Fsa, FsaKind::BrentKung.index());
    let cfg = PipelineConfig {
        top_k: 1,
        ..PipelineConfig::default()
    };
    let r = run_pipeline(&circuit(), "x", &lib, &ppa, &fsa, &cfg).unwrap();
    assert_eq!(r.templates_tried.len(), 1);
    assert_eq!(r.templates_tried[0].label, "SP_DT_BK_8");
    assert_eq!(r.verdict, Verdict::Equivalent);
}

#[test]
fn buggy_circuit_is_rejected_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let lib = library(dir.path());
    let ppa = stub(ModelKind::Ppa, PpaKind::Wallace.index());
    let fsa = stub(ModelKind::Fsa, FsaKind::BrentKung.index());
    let (bug, _) = inject_bug(&circuit(), 17).unwrap();
    let r = run_pipeline(&bug, "bug", &lib, &ppa, &fsa, &PipelineConfig::default()).unwrap();
    assert_eq!(r.exit_code(), 1);
    let Verdict::NotEquivalent { witness } = &r.verdict else {
        panic!("expected a counterexample, got {:?}", r.verdict)
    };
    let good = generate_multiplier(&"SP_WT_BK_8".parse().unwrap()).unwrap().0;
    assert_ne!(eval(&bug, witness), eval(&good, witness));
}

#[test]
fn missing_width_and_wrong_models() {
    let dir = tempfile::tempdir().unwrap();
    let lib = library(dir.path());
    let ppa = stub(ModelKind::Ppa, 0);
    let fsa = stub(ModelKind::Fsa, 0);
    let t6 = generate_multiplier(&"SP_WT_BK_6".parse().unwrap()).unwrap().0;
    let cfg = PipelineConfig::default();
    assert!(matches!(
        run_pipeline(&t6, "w6", &lib, &ppa, &fsa, &cfg),
        Err(PipelineError::NoTemplate { width: 6 })
    ));
    assert!(matches!(
        run_pipeline(&circuit(), "swap", &lib, &fsa, &ppa, &cfg),
        Err(PipelineError::ModelKind { .. })
    ));
}

#[test]
fn widening_reaches_lower_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let lib = library(dir.path());
    let ppa = stub(ModelKind::Ppa, PpaKind::Wallace.index());
    let fsa = stub(ModelKind::Fsa, FsaKind::KoggeStone.index());
    // A solver that never answers keeps every round inconclusive.
    let cfg = PipelineConfig {
        top_k: 1,
        widen_to: Some(90),
        portfolio: PortfolioConfig {
            engines: vec![Engine::ExternalDimacs],
            external_command: Some(vec!["false".into()]),
            seed: 0,
        },
        budget_secs: Some(10.0),
    };
    let r = run_pipeline(&circuit(), "x", &lib, &ppa, &fsa, &cfg).unwrap();
    assert_eq!(r.exit_code(), 2);
    assert_eq!(r.templates_tried[0].label, "SP_WT_KS_8");
    assert_eq!(r.templates_tried.len(), 4);
    assert!(r.templates_tried.iter().skip(1).all(|t| t.rank > 1));
}
