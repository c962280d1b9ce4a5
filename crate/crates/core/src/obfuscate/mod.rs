// SPDX-License-Identifier: Apache-2.0

//! Function-preserving restructuring in the spirit of synthesis scripts, and
//! bug injection by fanin rewiring.

mod rewrite;
mod synth;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{random_words, simulate, strash, Aig, AndGate};

use rewrite::Rules;
use synth::Synthesizer;

/// Random words compared by the guard: 157 * 64 >= 10^4 vectors.
const GUARD_WORDS: usize = 157;
const BUG_ATTEMPTS: usize = 1000;
/// 4096 vectors per rewiring attempt.
const BUG_WORDS: usize = 64;
const REWIRED: usize = 3;

#[derive(Debug, Error)]
pub enum ObfuscateError {
    #[error("optimized circuit differs from its input on a random vector; discarded")]
    GuardFailed,
    #[error("need at least {REWIRED} and-gates, found {0}")]
    TooSmall(usize),
    #[error("no observable mismatch after {0} rewiring attempts")]
    NoMismatch(usize),
    #[error("rounds must be at least 1")]
    ZeroRounds,
    #[error("unknown pass or preset `{0}`")]
    UnknownPass(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pass {
    Strash,
    ConstProp,
    DoubleNegElim,
    /// `zero_gain` also takes replacements that keep the gate count.
    CutRewrite { k: u8, zero_gain: bool },
    Balance,
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pass::Strash => f.write_str("strash"),
            Pass::ConstProp => f.write_str("constprop"),
            Pass::DoubleNegElim => f.write_str("dne"),
            Pass::CutRewrite { zero_gain: false, .. } => f.write_str("rewrite"),
            Pass::CutRewrite { zero_gain: true, .. } => f.write_str("rewrite-z"),
            Pass::Balance => f.write_str("balance"),
        }
    }
}

impl FromStr for Pass {
    type Err = ObfuscateError;
    fn from_str(s: &str) -> Result<Pass, ObfuscateError> {
        Ok(match s {
            "strash" => Pass::Strash,
            "constprop" => Pass::ConstProp,
            "dne" => Pass::DoubleNegElim,
            "rewrite" => Pass::CutRewrite { k: 4, zero_gain: false },
            "rewrite-z" => Pass::CutRewrite { k: 4, zero_gain: true },
            "balance" => Pass::Balance,
            _ => return Err(ObfuscateError::UnknownPass(s.to_owned())),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteConfig {
    pub passes: Vec<Pass>,
    pub rounds: u32,
    pub seed: u64,
}

impl RewriteConfig {
    /// Balance and rewrite alternation loosely following `dc2`.
    pub fn dc2like(seed: u64) -> RewriteConfig {
        use Pass::*;
        RewriteConfig {
            passes: vec![
                Strash,
                ConstProp,
                DoubleNegElim,
                Balance,
                CutRewrite { k: 4, zero_gain: false },
                Balance,
                CutRewrite { k: 4, zero_gain: true },
                Balance,
            ],
            rounds: 1,
            seed,
        }
    }

    /// Loosely following `resyn3`: more zero-gain rewriting.
    pub fn resyn3like(seed: u64) -> RewriteConfig {
        use Pass::*;
        RewriteConfig {
            passes: vec![
                Strash,
                Balance,
                CutRewrite { k: 4, zero_gain: false },
                CutRewrite { k: 4, zero_gain: true },
                Balance,
                CutRewrite { k: 4, zero_gain: true },
                Balance,
            ],
            rounds: 1,
            seed,
        }
    }

    /// A preset name or a comma-separated pass list.
    pub fn parse(spec: &str, seed: u64) -> Result<RewriteConfig, ObfuscateError> {
        match spec {
            "dc2like" => Ok(RewriteConfig::dc2like(seed)),
            "resyn3like" => Ok(RewriteConfig::resyn3like(seed)),
            _ => Ok(RewriteConfig {
                passes: spec.split(',').map(|p| p.trim().parse()).collect::<Result<_, _>>()?,
                rounds: 1,
                seed,
            }),
        }
    }

    pub fn with_rounds(mut self, rounds: u32) -> RewriteConfig {
        self.rounds = rounds;
        self
    }
}

/// Applies the passes `rounds` times and checks the result against the
/// input on 10^4 random vectors.
pub fn optimize(aig: &Aig, config: &RewriteConfig) -> Result<Aig, ObfuscateError> {
    if config.rounds == 0 {
        return Err(ObfuscateError::ZeroRounds);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut synth = Synthesizer::default();
    let mut cur = strash(aig);
    for _ in 0..config.rounds {
        for pass in &config.passes {
            let next = match *pass {
                Pass::Strash => strash(&cur),
                Pass::ConstProp => rewrite::simplify(
                    &cur,
                    Rules {
                        containment: true,
                        complements: false,
                    },
                ),
                Pass::DoubleNegElim => rewrite::simplify(
                    &cur,
                    Rules {
                        containment: false,
                        complements: true,
                    },
                ),
                Pass::CutRewrite { zero_gain, .. } => {
                    let r = rewrite::cut_rewrite(&cur, &mut synth, zero_gain, &mut rng);
                    if r.num_ands() > cur.num_ands() {
                        cur.clone()
                    } else {
                        r
                    }
                }
                Pass::Balance => rewrite::balance(&cur, &mut rng),
            };
            log::debug!("{pass}: {} -> {} ands", cur.num_ands(), next.num_ands());
            cur = next;
        }
    }
    let mut guard_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9E37_79B9_7F4A_7C15);
    let words = random_words(&mut guard_rng, aig.num_inputs(), GUARD_WORDS);
    if simulate(aig, &words).ok() != simulate(&cur, &words).ok() {
        return Err(ObfuscateError::GuardFailed);
    }
    Ok(cur)
}

/// Redirects one fanin of each of three distinct gates to a random earlier
/// node, resampling until random simulation sees an output change. Returns
/// the buggy circuit and one mismatching input assignment.
pub fn inject_bug(aig: &Aig, seed: u64) -> Result<(Aig, Vec<bool>), ObfuscateError> {
    if aig.num_ands() < REWIRED {
        return Err(ObfuscateError::TooSmall(aig.num_ands()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = aig.first_and();
    for _ in 0..BUG_ATTEMPTS {
        let mut ands: Vec<AndGate> = aig.ands().to_vec();
        let mut picked: Vec<usize> = Vec::with_capacity(REWIRED);
        while picked.len() < REWIRED {
            let n = rng.gen_range(first..aig.num_nodes());
            if !picked.contains(&n) {
                picked.push(n);
            }
        }
        for &n in &picked {
            let g = &mut ands[n - first];
            let slot = rng.gen_range(0..2);
            let old = if slot == 0 { g.fanin0 } else { g.fanin1 };
            let mut target = rng.gen_range(1..n);
            if target == old.node() {
                target = if target > 1 { target - 1 } else { (target + 1) % n };
            }
            let new = crate::aig::Lit::new(target, old.is_complemented());
            if slot == 0 {
                g.fanin0 = new;
            } else {
                g.fanin1 = new;
            }
        }
        let buggy = Aig::from_parts(aig.num_inputs(), ands, aig.outputs().to_vec())
            .expect("rewired fanins precede their gates")
            .with_symbols(aig.symbols().to_vec(), aig.comment().map(str::to_owned));
        let words = random_words(&mut rng, aig.num_inputs(), BUG_WORDS);
        let a = simulate(aig, &words).expect("input arity");
        let b = simulate(&buggy, &words).expect("input arity");
        let diff = (0..BUG_WORDS).find_map(|w| {
            let d = a.iter().zip(&b).fold(0u64, |acc, (x, y)| acc | (x[w] ^ y[w]));
            (d != 0).then(|| (w, d.trailing_zeros()))
        });
        if let Some((w, bit)) = diff {
            let witness = words.iter().map(|v| (v[w] >> bit) & 1 == 1).collect();
            return Ok((buggy, witness));
        }
    }
    Err(ObfuscateError::NoMismatch(BUG_ATTEMPTS))
}

/// Outputs of `aig` on one input assignment.
pub fn eval(aig: &Aig, pattern: &[bool]) -> Vec<bool> {
    let words: Vec<Vec<u64>> = pattern.iter().map(|&b| vec![b as u64]).collect();
    simulate(aig, &words)
        .expect("pattern length equals input count")
        .iter()
        .map(|w| w[0] & 1 == 1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;
    use crate::mulgen::{exhaustive_multiplier_check, generate_multiplier, ArchitectureLabel};

    #[test]
    fn trivial_folds() {
        let mut b = AigBuilder::new(2);
        let x = b.input(0);
        let y = b.input(1);
        let g = b.and(x, y);
        let h = b.and(g, x);
        b.add_output(h);
        let aig = b.build();
        let out = optimize(&aig, &RewriteConfig::parse("strash,constprop", 1).unwrap()).unwrap();
        assert_eq!(out.num_ands(), 1);
        let mut b = AigBuilder::new(2);
        let n = b.and(!b.input(0), b.input(1));
        let h = b.and(b.input(0), n);
        b.add_output(h);
        let out = optimize(&b.build(), &RewriteConfig::parse("constprop", 1).unwrap()).unwrap();
        assert_eq!(out.num_ands(), 0);
        assert_eq!(out.outputs()[0], crate::aig::Lit::FALSE);
    }

    #[test]
    fn resolution_rule() {
        let mut b = AigBuilder::new(2);
        let (x, y) = (b.input(0), b.input(1));
        let p = b.and(x, y);
        let q = b.and(x, !y);
        let r = b.and(!p, !q);
        b.add_output(r);
        let out = optimize(&b.build(), &RewriteConfig::parse("dne", 1).unwrap()).unwrap();
        assert_eq!(out.num_ands(), 0);
        assert_eq!(out.outputs()[0], !x);
    }

    #[test]
    fn presets_preserve_small_multipliers() {
        for label in ["SP_WT_BK_6", "BP_DT_KS_6", "SP_AR_RC_5", "BP_4to2_LF_6"] {
            let l: ArchitectureLabel = label.parse().unwrap();
            let (aig, _) = generate_multiplier(&l).unwrap();
            for (i, cfg) in [RewriteConfig::dc2like(3), RewriteConfig::resyn3like(4).with_rounds(2)].iter().enumerate() {
                let out = optimize(&aig, cfg).unwrap();
                assert!(exhaustive_multiplier_check(&out, l.width).is_ok(), "{label} preset {i}");
                assert!(out.num_ands() <= aig.num_ands());
            }
        }
    }

    #[test]
    fn deterministic() {
        let (aig, _) = generate_multiplier(&"SP_DT_SK_6".parse().unwrap()).unwrap();
        let a = optimize(&aig, &RewriteConfig::dc2like(9)).unwrap();
        let b = optimize(&aig, &RewriteConfig::dc2like(9)).unwrap();
        assert_eq!(a, b);
        let (x, wx) = inject_bug(&aig, 5).unwrap();
        let (y, wy) = inject_bug(&aig, 5).unwrap();
        assert_eq!((x, wx), (y, wy));
    }

    #[test]
    fn bug_witness_replays() {
        let (aig, _) = generate_multiplier(&"SP_WT_BK_8".parse().unwrap()).unwrap();
        for seed in 0..10 {
            let (buggy, w) = inject_bug(&aig, seed).unwrap();
            assert_ne!(eval(&aig, &w), eval(&buggy, &w));
            let changed = aig.ands().iter().zip(buggy.ands()).filter(|(a, b)| a != b).count();
            assert_eq!(changed, REWIRED);
        }
        let mut b = AigBuilder::new(2);
        let g = b.and(b.input(0), b.input(1));
        b.add_output(g);
        assert!(matches!(inject_bug(&b.build(), 0), Err(ObfuscateError::TooSmall(1))));
    }
}
