// SPDX-License-Identifier: Apache-2.0

//! Combinational equivalence checking: miters, CNF, a CDCL solver, SAT
//! sweeping, exhaustive simulation, an external DIMACS solver and a
//! concurrent portfolio of these engines.

mod cnf;
mod external;
mod sat;
mod sweep;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{simulate, Aig, AigBuilder, Lit};

pub use cnf::{format_solver_output, node_lit, parse_solver_output, solve_cnf, solve_cnf_with_priority, tseitin, tseitin_with, Cnf, CnfResult, DimacsError};
pub use external::run_external_solver;
pub use sat::{Budget, SatLit, SolveResult, Solver, SolverStats};
pub use sweep::SweepStats;

/// Largest input count `brute_force_equiv` accepts.
pub const BRUTE_FORCE_MAX_INPUTS: usize = 24;

#[derive(Debug, Error)]
pub enum CecError {
    #[error("arity mismatch: {a_inputs}/{a_outputs} vs {b_inputs}/{b_outputs} inputs/outputs")]
    Arity {
        a_inputs: usize,
        a_outputs: usize,
        b_inputs: usize,
        b_outputs: usize,
    },
    #[error("{0} inputs exceed the exhaustive-simulation limit of {BRUTE_FORCE_MAX_INPUTS}")]
    TooManyInputs(usize),
    #[error("no applicable engine")]
    NoEngine,
    #[error("unknown engine `{0}`")]
    UnknownEngine(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    CdclMiter,
    SatSweep,
    BruteForce,
    ExternalDimacs,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::CdclMiter, Engine::SatSweep, Engine::BruteForce, Engine::ExternalDimacs];

    pub fn name(self) -> &'static str {
        match self {
            Engine::CdclMiter => "cdcl_miter",
            Engine::SatSweep => "sat_sweep",
            Engine::BruteForce => "brute_force",
            Engine::ExternalDimacs => "external_dimacs",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = CecError;
    fn from_str(s: &str) -> Result<Engine, CecError> {
        Engine::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| CecError::UnknownEngine(s.to_owned()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equivalent,
    NotEquivalent { witness: Vec<bool> },
    Unknown { reason: String },
}

impl Verdict {
    pub fn is_conclusive(&self) -> bool {
        !matches!(self, Verdict::Unknown { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CecResult {
    pub verdict: Verdict,
    pub engine: Engine,
    pub elapsed_secs: f64,
}

/// Two circuits over shared inputs; the single output is the OR of the
/// XORs of corresponding outputs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Miter {
    pub aig: Aig,
    pub num_pairs: usize,
}

fn check_arity(a: &Aig, b: &Aig) -> Result<(), CecError> {
    if a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() {
        return Err(CecError::Arity {
            a_inputs: a.num_inputs(),
            a_outputs: a.num_outputs(),
            b_inputs: b.num_inputs(),
            b_outputs: b.num_outputs(),
        });
    }
    Ok(())
}

fn copy_into(b: &mut AigBuilder, aig: &Aig) -> Vec<Lit> {
    let mut map: Vec<Lit> = (0..aig.first_and()).map(|n| Lit::new(n, false)).collect();
    for node in aig.and_ids() {
        let [x, y] = aig.fanins(node);
        let l = b.and(map[x.node()].xor_if(x.is_complemented()), map[y.node()].xor_if(y.is_complemented()));
        map.push(l);
    }
    aig.outputs().iter().map(|o| map[o.node()].xor_if(o.is_complemented())).collect()
}

/// Inputs are matched by position, outputs pairwise LSB first.
pub fn build_miter(a: &Aig, b: &Aig) -> Result<Miter, CecError> {
    check_arity(a, b)?;
    let mut bld = AigBuilder::new(a.num_inputs());
    let oa = copy_into(&mut bld, a);
    let ob = copy_into(&mut bld, b);
    let mut layer: Vec<Lit> = oa.iter().zip(&ob).map(|(&x, &y)| bld.xor(x, y)).collect();
    while layer.len() > 1 {
        layer = layer.chunks(2).map(|p| if p.len() == 2 { bld.or(p[0], p[1]) } else { p[0] }).collect();
    }
    bld.add_output(layer.first().copied().unwrap_or(Lit::FALSE));
    Ok(Miter {
        aig: crate::aig::cleanup(&bld.build()),
        num_pairs: a.num_outputs(),
    })
}

/// Whether `a` and `b` produce different outputs on `pattern`.
pub fn witness_replays(a: &Aig, b: &Aig, pattern: &[bool]) -> bool {
    if pattern.len() != a.num_inputs() || pattern.len() != b.num_inputs() {
        return false;
    }
    let words: Vec<Vec<u64>> = pattern.iter().map(|&x| vec![x as u64]).collect();
    let (Ok(x), Ok(y)) = (simulate(a, &words), simulate(b, &words)) else {
        return false;
    };
    x.iter().zip(&y).any(|(p, q)| (p[0] ^ q[0]) & 1 == 1)
}

fn finish(a: &Aig, b: &Aig, verdict: Verdict, engine: Engine, start: Instant) -> CecResult {
    let verdict = match verdict {
        Verdict::NotEquivalent { witness } if !witness_replays(a, b, &witness) => Verdict::Unknown {
            reason: format!("{engine} produced a counterexample that does not replay"),
        },
        v => v,
    };
    CecResult {
        verdict,
        engine,
        elapsed_secs: start.elapsed().as_secs_f64(),
    }
}

fn pattern_word(i: usize, word: usize) -> u64 {
    const MASKS: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    if i < 6 {
        MASKS[i]
    } else if (word >> (i - 6)) & 1 == 1 {
        u64::MAX
    } else {
        0
    }
}

/// Exhaustive simulation over all `2^inputs` assignments.
pub fn brute_force_equiv(a: &Aig, b: &Aig) -> Result<CecResult, CecError> {
    brute_force_with(a, b, &Budget::unlimited())
}

fn brute_force_with(a: &Aig, b: &Aig, budget: &Budget) -> Result<CecResult, CecError> {
    check_arity(a, b)?;
    let n = a.num_inputs();
    if n > BRUTE_FORCE_MAX_INPUTS {
        return Err(CecError::TooManyInputs(n));
    }
    let start = Instant::now();
    let total_words = if n > 6 { 1usize << (n - 6) } else { 1 };
    let valid = if n >= 6 { u64::MAX } else { (1u64 << (1 << n)) - 1 };
    const CHUNK: usize = 256;
    let mut w0 = 0;
    while w0 < total_words {
        if let Some(why) = budget.expired() {
            return Ok(finish(a, b, Verdict::Unknown { reason: why.to_owned() }, Engine::BruteForce, start));
        }
        let words = CHUNK.min(total_words - w0);
        let inputs: Vec<Vec<u64>> = (0..n).map(|i| (w0..w0 + words).map(|w| pattern_word(i, w)).collect()).collect();
        let x = simulate(a, &inputs).expect("arity checked");
        let y = simulate(b, &inputs).expect("arity checked");
        for w in 0..words {
            let d = x.iter().zip(&y).fold(0u64, |acc, (p, q)| acc | (p[w] ^ q[w])) & valid;
            if d != 0 {
                let bit = d.trailing_zeros() as usize;
                let witness = (0..n).map(|i| (pattern_word(i, w0 + w) >> bit) & 1 == 1).collect();
                return Ok(finish(a, b, Verdict::NotEquivalent { witness }, Engine::BruteForce, start));
            }
        }
        w0 += words;
    }
    Ok(finish(a, b, Verdict::Equivalent, Engine::BruteForce, start))
}

fn witness_from_model(model: &[bool], num_inputs: usize) -> Vec<bool> {
    // Input i is node i + 1, variable i + 2, index i + 1.
    (0..num_inputs).map(|i| model[i + 1]).collect()
}

/// Tseitin encoding of the whole miter, solved once, branching on the
/// primary inputs first.
pub fn cdcl_miter_equiv(a: &Aig, b: &Aig, budget: &Budget) -> Result<CecResult, CecError> {
    let start = Instant::now();
    let miter = build_miter(a, b)?;
    let inputs: Vec<u32> = (2..2 + a.num_inputs() as u32).collect();
    let verdict = match solve_cnf_with_priority(&tseitin(&miter.aig), &inputs, budget) {
        CnfResult::Unsat => Verdict::Equivalent,
        CnfResult::Sat(m) => Verdict::NotEquivalent {
            witness: witness_from_model(&m, a.num_inputs()),
        },
        CnfResult::Unknown(reason) => Verdict::Unknown { reason },
    };
    Ok(finish(a, b, verdict, Engine::CdclMiter, start))
}

pub fn sat_sweep_equiv(a: &Aig, b: &Aig, budget: &Budget, seed: u64) -> Result<CecResult, CecError> {
    Ok(sat_sweep_with_stats(a, b, budget, seed)?.0)
}

pub fn sat_sweep_with_stats(a: &Aig, b: &Aig, budget: &Budget, seed: u64) -> Result<(CecResult, SweepStats), CecError> {
    let start = Instant::now();
    let miter = build_miter(a, b)?;
    let (outcome, stats) = sweep::sweep(&miter.aig, budget, seed);
    let verdict = match outcome {
        sweep::SweepOutcome::Equivalent => Verdict::Equivalent,
        sweep::SweepOutcome::Differ(witness) => Verdict::NotEquivalent { witness },
        sweep::SweepOutcome::Unknown(r) => Verdict::Unknown { reason: r.to_owned() },
    };
    Ok((finish(a, b, verdict, Engine::SatSweep, start), stats))
}

/// Exports the miter CNF and runs `command` (program and arguments; the
/// CNF path is appended).
pub fn external_equiv(a: &Aig, b: &Aig, command: &[String], budget: &Budget) -> Result<CecResult, CecError> {
    let start = Instant::now();
    let miter = build_miter(a, b)?;
    let cnf = tseitin(&miter.aig);
    let verdict = match run_external_solver(&cnf, command, budget) {
        CnfResult::Unsat => Verdict::Equivalent,
        CnfResult::Sat(m) => Verdict::NotEquivalent {
            witness: witness_from_model(&m, a.num_inputs()),
        },
        CnfResult::Unknown(reason) => Verdict::Unknown { reason },
    };
    Ok(finish(a, b, verdict, Engine::ExternalDimacs, start))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PortfolioConfig {
    pub engines: Vec<Engine>,
    /// Program and leading arguments of the external solver.
    pub external_command: Option<Vec<String>>,
    pub seed: u64,
}

impl Default for PortfolioConfig {
    fn default() -> PortfolioConfig {
        PortfolioConfig {
            engines: vec![Engine::SatSweep, Engine::CdclMiter, Engine::BruteForce],
            external_command: None,
            seed: 0,
        }
    }
}

fn run_engine(a: &Aig, b: &Aig, engine: Engine, config: &PortfolioConfig, budget: &Budget) -> Result<CecResult, CecError> {
    match engine {
        Engine::CdclMiter => cdcl_miter_equiv(a, b, budget),
        Engine::SatSweep => sat_sweep_equiv(a, b, budget, config.seed),
        Engine::BruteForce => brute_force_with(a, b, budget),
        Engine::ExternalDimacs => external_equiv(a, b, config.external_command.as_deref().unwrap_or_default(), budget),
    }
}

/// Runs the applicable engines concurrently; the first conclusive verdict
/// wins and cancels the others.
pub fn portfolio_verify(a: &Aig, b: &Aig, config: &PortfolioConfig, budget: &Budget) -> Result<CecResult, CecError> {
    check_arity(a, b)?;
    let start = Instant::now();
    let mut engines: Vec<Engine> = Vec::new();
    for &e in &config.engines {
        let applicable = match e {
            Engine::BruteForce => a.num_inputs() <= BRUTE_FORCE_MAX_INPUTS,
            Engine::ExternalDimacs => config.external_command.as_ref().is_some_and(|c| !c.is_empty()),
            _ => true,
        };
        if applicable && !engines.contains(&e) {
            engines.push(e);
        }
    }
    if engines.is_empty() {
        return Err(CecError::NoEngine);
    }
    let cancel = Arc::new(AtomicBool::new(false));
    let inner = Budget {
        conflicts: budget.conflicts,
        deadline: budget.deadline,
        cancel: Some(cancel.clone()),
    };
    let (tx, rx) = mpsc::channel::<Result<CecResult, CecError>>();
    let mut winner: Option<CecResult> = None;
    let mut reasons: Vec<String> = Vec::new();
    std::thread::scope(|s| {
        for &e in &engines {
            let tx = tx.clone();
            let inner = &inner;
            s.spawn(move || {
                let _ = tx.send(run_engine(a, b, e, config, inner));
            });
        }
        drop(tx);
        let mut pending = engines.len();
        while pending > 0 {
            match rx.recv_timeout(Duration::from_millis(20)) {
                Ok(r) => {
                    pending -= 1;
                    match r {
                        Ok(r) if r.verdict.is_conclusive() && winner.is_none() => {
                            cancel.store(true, Ordering::Relaxed);
                            winner = Some(r);
                        }
                        Ok(CecResult {
                            verdict: Verdict::Unknown { reason },
                            engine,
                            ..
                        }) => reasons.push(format!("{engine}: {reason}")),
                        Ok(_) => {}
                        Err(e) => reasons.push(e.to_string()),
                    }
                }
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    if budget.expired().is_some() {
                        cancel.store(true, Ordering::Relaxed);
                    }
                }
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
        }
    });
    Ok(match winner {
        Some(mut r) => {
            r.elapsed_secs = start.elapsed().as_secs_f64();
            r
        }
        None => CecResult {
            verdict: Verdict::Unknown {
                reason: reasons.join("; "),
            },
            engine: engines[0],
            elapsed_secs: start.elapsed().as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::strash;
    use crate::mulgen::generate_multiplier;
    use crate::obfuscate::{inject_bug, optimize, RewriteConfig};

    fn template(label: &str) -> Aig {
        generate_multiplier(&label.parse().unwrap()).unwrap().0
    }

    #[test]
    fn self_miter_is_constant() {
        let a = template("SP_WT_BK_4");
        let m = build_miter(&a, &a).unwrap();
        assert_eq!(m.aig.outputs(), &[Lit::FALSE]);
        assert_eq!(m.aig.num_ands(), 0);
        let r = cdcl_miter_equiv(&a, &a, &Budget::unlimited()).unwrap();
        assert_eq!(r.verdict, Verdict::Equivalent);
    }

    #[test]
    fn double_negation() {
        let mut b = AigBuilder::new(1);
        b.add_output(b.input(0));
        let x = b.build();
        let y = Aig::from_parts(1, vec![], vec![!!Lit::new(1, false)]).unwrap();
        assert_eq!(sat_sweep_equiv(&x, &y, &Budget::unlimited(), 0).unwrap().verdict, Verdict::Equivalent);
    }

    #[test]
    fn arity_errors() {
        let a = template("SP_AR_RC_4");
        let b = template("SP_AR_RC_5");
        assert!(matches!(build_miter(&a, &b), Err(CecError::Arity { .. })));
        let c = template("SP_AR_RC_13");
        assert!(matches!(brute_force_equiv(&c, &c), Err(CecError::TooManyInputs(26))));
    }

    #[test]
    fn engines_agree_on_small_pairs() {
        let a = template("SP_AR_RC_4");
        let b = template("SP_WT_KS_4");
        let (bug, w) = inject_bug(&a, 3).unwrap();
        for (x, y, eq) in [(&a, &b, true), (&a, &bug, false), (&b, &bug, false)] {
            let rs = [
                brute_force_equiv(x, y).unwrap(),
                cdcl_miter_equiv(x, y, &Budget::unlimited()).unwrap(),
                sat_sweep_equiv(x, y, &Budget::unlimited(), 1).unwrap(),
            ];
            for r in rs {
                assert_eq!(r.verdict == Verdict::Equivalent, eq, "{}", r.engine);
                if let Verdict::NotEquivalent { witness } = &r.verdict {
                    assert!(witness_replays(x, y, witness));
                }
            }
        }
        assert!(witness_replays(&a, &bug, &w));
    }

    #[test]
    fn sweep_on_strash_needs_no_sat() {
        let a = template("BP_DT_HC_8");
        let (r, stats) = sat_sweep_with_stats(&a, &strash(&a), &Budget::unlimited(), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Equivalent);
        assert_eq!(stats.sat_calls, 0);
    }

    #[test]
    fn sweep_proves_optimized_and_refutes_bugs() {
        let a = template("SP_WT_BK_8");
        let o = optimize(&a, &RewriteConfig::dc2like(5)).unwrap();
        assert_eq!(sat_sweep_equiv(&a, &o, &Budget::unlimited(), 0).unwrap().verdict, Verdict::Equivalent);
        let (bug, _) = inject_bug(&o, 1).unwrap();
        let r = sat_sweep_equiv(&a, &bug, &Budget::unlimited(), 0).unwrap();
        assert!(matches!(r.verdict, Verdict::NotEquivalent { .. }));
    }

    #[test]
    fn portfolio_semantics() {
        let a = template("SP_DT_LF_6");
        let b = template("BP_WT_RC_6");
        let r = portfolio_verify(&a, &b, &PortfolioConfig::default(), &Budget::unlimited()).unwrap();
        assert_eq!(r.verdict, Verdict::Equivalent);
        let cfg = PortfolioConfig {
            engines: vec![Engine::CdclMiter, Engine::SatSweep],
            ..PortfolioConfig::default()
        };
        let big_a = template("SP_AR_RC_10");
        let big_b = template("SP_WT_KS_10");
        let r = portfolio_verify(&big_a, &big_b, &cfg, &Budget::conflicts(1)).unwrap();
        assert!(r.verdict == Verdict::Equivalent || matches!(r.verdict, Verdict::Unknown { .. }));
        let only_bf = PortfolioConfig {
            engines: vec![Engine::BruteForce],
            ..PortfolioConfig::default()
        };
        let wide = template("SP_AR_RC_13");
        assert!(matches!(portfolio_verify(&wide, &wide, &only_bf, &Budget::unlimited()), Err(CecError::NoEngine)));
    }
}
