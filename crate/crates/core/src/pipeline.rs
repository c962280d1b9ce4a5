// SPDX-License-Identifier: Apache-2.0

//! End-to-end flow: cones, features, classification, template lookup and
//! concurrent equivalence checking against the best-ranked templates.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::Aig;
use crate::cec::{portfolio_verify, Budget, CecError, PortfolioConfig, Verdict};
use crate::cones::{default_cone, detect_ppg, operand_width, ConeError, ConeKind, PpgVerdict};
use crate::gnn::{predict, GnnError, GraphSample, ModelKind, ModelWeights};
use crate::mulgen::{lookup_templates, Architecture, ArchitectureLabel, FsaKind, GenError, LibraryIndex, PpaKind};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no template of width {width} in the library")]
    NoTemplate { width: usize },
    #[error("expected a {expected} model, got a {found} model")]
    ModelKind { expected: ModelKind, found: ModelKind },
    #[error("{inputs} inputs and {outputs} outputs do not describe an N x N multiplier")]
    NotAMultiplier { inputs: usize, outputs: usize },
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error(transparent)]
    Gnn(#[from] GnnError),
    #[error(transparent)]
    Library(#[from] GenError),
    #[error(transparent)]
    Cec(#[from] CecError),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Templates verified concurrently.
    pub top_k: usize,
    /// When the first `top_k` stay inconclusive, also try ranks up to
    /// this one.
    pub widen_to: Option<usize>,
    pub portfolio: PortfolioConfig,
    /// Wall-clock limit of each verification round.
    pub budget_secs: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            top_k: 3,
            widen_to: None,
            portfolio: PortfolioConfig::default(),
            budget_secs: Some(60.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateAttempt {
    pub label: String,
    /// From 1.
    pub rank: usize,
    /// Product of the accumulator and final-adder probabilities.
    pub score: f64,
    pub verdict: Verdict,
    pub engine: String,
    pub elapsed_secs: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub cone_extraction_secs: f64,
    pub feature_extraction_secs: f64,
    pub inference_secs: f64,
    pub equivalence_checking_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub input: String,
    pub width: usize,
    pub ppg: PpgVerdict,
    pub ppa_ranking: Vec<(PpaKind, f64)>,
    /// `[P(non-tree), P(tree)]`.
    pub topology: Option<[f64; 2]>,
    pub fsa_top3: Vec<(FsaKind, f64)>,
    pub templates_tried: Vec<TemplateAttempt>,
    pub verdict: Verdict,
    pub phases: PhaseTimings,
    pub total_secs: f64,
    pub warnings: Vec<String>,
}

impl PipelineReport {
    /// 0 equivalent, 1 not equivalent, 2 unknown.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Equivalent => 0,
            Verdict::NotEquivalent { .. } => 1,
            Verdict::Unknown { .. } => 2,
        }
    }

    /// A few human-readable lines.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "{} (width {}): {:?} partial products, accumulator {}, final adder {}\n",
            self.input,
            self.width,
            self.ppg.kind,
            self.ppa_ranking.first().map_or("-".into(), |r| format!("{} ({:.2})", r.0, r.1)),
            self.fsa_top3
                .iter()
                .map(|r| format!("{} ({:.2})", r.0, r.1))
                .collect::<Vec<_>>()
                .join(", "),
        );
        for t in &self.templates_tried {
            let v = match &t.verdict {
                Verdict::Equivalent => "equivalent".to_string(),
                Verdict::NotEquivalent { .. } => "NOT equivalent".to_string(),
                Verdict::Unknown { reason } => format!("unknown ({reason})"),
            };
            s.push_str(&format!("  #{} {}: {} by {} in {:.3}s\n", t.rank, t.label, v, t.engine, t.elapsed_secs));
        }
        let verdict = match self.exit_code() {
            0 => "EQUIVALENT",
            1 => "NOT EQUIVALENT",
            _ => "UNKNOWN",
        };
        s.push_str(&format!("verdict: {verdict} after {:.3}s", self.total_secs));
        s
    }
}

fn expect_kind(w: &ModelWeights, kind: ModelKind) -> Result<(), PipelineError> {
    if w.kind == kind {
        Ok(())
    } else {
        Err(PipelineError::ModelKind {
            expected: kind,
            found: w.kind,
        })
    }
}

/// Verifies `aig` against every template at once; the first conclusive
/// verdict cancels the rest.
fn verify_round(
    aig: &Aig,
    templates: &[(usize, f64, ArchitectureLabel, Aig)],
    cfg: &PipelineConfig,
) -> Vec<TemplateAttempt> {
    let cancel = Arc::new(AtomicBool::new(false));
    let budget = Budget {
        conflicts: None,
        deadline: cfg.budget_secs.map(|s| Instant::now() + Duration::from_secs_f64(s)),
        cancel: Some(cancel.clone()),
    };
    let (tx, rx) = mpsc::channel();
    let mut attempts: Vec<Option<TemplateAttempt>> = vec![None; templates.len()];
    std::thread::scope(|s| {
        for (i, (rank, score, label, t)) in templates.iter().enumerate() {
            let tx = tx.clone();
            let budget = &budget;
            s.spawn(move || {
                let start = Instant::now();
                let (verdict, engine) = match portfolio_verify(aig, t, &cfg.portfolio, budget) {
                    Ok(r) => (r.verdict, r.engine.to_string()),
                    Err(e) => (Verdict::Unknown { reason: e.to_string() }, "-".to_string()),
                };
                let _ = tx.send((
                    i,
                    TemplateAttempt {
                        label: label.to_string(),
                        rank: *rank,
                        score: *score,
                        verdict,
                        engine,
                        elapsed_secs: start.elapsed().as_secs_f64(),
                    },
                ));
            });
        }
        drop(tx);
        for (i, a) in rx {
            if a.verdict.is_conclusive() {
                cancel.store(true, Ordering::Relaxed);
            }
            attempts[i] = Some(a);
        }
    });
    attempts.into_iter().map(|a| a.expect("every worker reports")).collect()
}

/// Runs the whole flow on an optimized multiplier.
///
/// Templates are ranked by `P(accumulator) * P(final adder)` under the
/// detected partial-product kind. All templates compute the same product,
/// so the first conclusive verdict against any of them decides.
pub fn run_pipeline(
    aig: &Aig,
    input: &str,
    library: &LibraryIndex,
    ppa_model: &ModelWeights,
    fsa_model: &ModelWeights,
    cfg: &PipelineConfig,
) -> Result<PipelineReport, PipelineError> {
    let start = Instant::now();
    expect_kind(ppa_model, ModelKind::Ppa)?;
    expect_kind(fsa_model, ModelKind::Fsa)?;
    let width = operand_width(aig);
    if aig.num_inputs() != 2 * width || aig.num_outputs() != 2 * width {
        return Err(PipelineError::NotAMultiplier {
            inputs: aig.num_inputs(),
            outputs: aig.num_outputs(),
        });
    }
    if !library.widths().contains(&width) {
        return Err(PipelineError::NoTemplate { width });
    }
    let mut phases = PhaseTimings::default();

    let t = Instant::now();
    let ppg = detect_ppg(aig)?;
    let lsb = default_cone(aig, ConeKind::LsbCone)?;
    let msb = default_cone(aig, ConeKind::MsbCone)?;
    phases.cone_extraction_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let ppa_sample = GraphSample::from_cone(&lsb, aig, ModelKind::Ppa)?;
    let fsa_sample = GraphSample::from_cone(&msb, aig, ModelKind::Fsa)?;
    phases.feature_extraction_secs = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let ppa = predict(ppa_model, &ppa_sample)?;
    let fsa = predict(fsa_model, &fsa_sample)?;
    phases.inference_secs = t.elapsed().as_secs_f64();

    let mut ranked: Vec<(Architecture, f64)> = ppa
        .ppa_ranking
        .iter()
        .flat_map(|&(p, sp)| fsa.fsa_ranking.iter().map(move |&(f, sf)| (Architecture::new(ppg.kind, p, f), sp * sf)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));

    let t = Instant::now();
    let mut warnings = Vec::new();
    let mut tried = Vec::new();
    let mut rounds = vec![0..cfg.top_k.max(1)];
    if let Some(w) = cfg.widen_to.filter(|&w| w > cfg.top_k) {
        rounds.push(cfg.top_k..w);
    }
    for (round, range) in rounds.into_iter().enumerate() {
        let range = range.start.min(ranked.len())..range.end.min(ranked.len());
        if range.is_empty() {
            break;
        }
        if round > 0 {
            log::info!("top {} templates inconclusive; widening to rank {}", range.start, range.end);
        }
        let archs: Vec<Architecture> = ranked[range.clone()].iter().map(|r| r.0).collect();
        let lookup = match lookup_templates(library, width, &archs) {
            Ok(l) => l,
            Err(GenError::NoTemplate { .. }) if round > 0 => {
                warnings.push(format!("no templates for ranks {}..{}", range.start + 1, range.end));
                break;
            }
            Err(GenError::NoTemplate { width }) => return Err(PipelineError::NoTemplate { width }),
            Err(e) => return Err(e.into()),
        };
        warnings.extend(lookup.warnings);
        let templates: Vec<(usize, f64, ArchitectureLabel, Aig)> = lookup
            .templates
            .into_iter()
            .map(|(label, t)| {
                let i = range.start + archs.iter().position(|a| *a == label.arch).expect("looked up");
                (i + 1, ranked[i].1, label, t)
            })
            .collect();
        tried.extend(verify_round(aig, &templates, cfg));
        if tried.iter().any(|a: &TemplateAttempt| a.verdict.is_conclusive()) {
            break;
        }
    }
    phases.equivalence_checking_secs = t.elapsed().as_secs_f64();

    let verdict = tried
        .iter()
        .find(|a| a.verdict == Verdict::Equivalent)
        .or_else(|| tried.iter().find(|a| a.verdict.is_conclusive()))
        .map(|a| a.verdict.clone())
        .unwrap_or_else(|| Verdict::Unknown {
            reason: format!("no conclusive verdict from {} templates", tried.len()),
        });
    Ok(PipelineReport {
        input: input.to_string(),
        width,
        ppg,
        ppa_ranking: ppa.ppa_ranking,
        topology: fsa.topo,
        fsa_top3: fsa.fsa_ranking.into_iter().take(3).collect(),
        templates_tried: tried,
        verdict,
        phases,
        total_secs: start.elapsed().as_secs_f64(),
        warnings,
    })
}
