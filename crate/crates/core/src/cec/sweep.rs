// SPDX-License-Identifier: Apache-2.0

//! Simulation-guided SAT sweeping: the miter is rebuilt node by node while
//! candidate equivalences are proven incrementally and merged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::aig::{Aig, AigBuilder, Lit};

use super::sat::{Budget, SatLit, SolveResult, Solver};

/// Random simulation words before sweeping starts.
const SIM_WORDS: usize = 16;
/// Conflict limit of one candidate-pair query.
const PAIR_CONFLICTS: u64 = 100;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepStats {
    pub sat_calls: usize,
    pub merges: usize,
    pub counterexamples: usize,
    pub undecided: usize,
}

pub(crate) enum SweepOutcome {
    Equivalent,
    /// Input assignment driving the miter root to true.
    Differ(Vec<bool>),
    Unknown(&'static str),
}

struct Sweeper {
    b: AigBuilder,
    solver: Solver,
    sigs: Vec<Vec<u64>>,
    table: FxHashMap<Vec<u64>, u32>,
    cex_bits: usize,
    stats: SweepStats,
}

fn slit(l: Lit) -> SatLit {
    SatLit::new(l.node() as u32, l.is_complemented())
}

/// Signature with bit 0 cleared by complementing, and whether it was.
fn normalize(sig: &[u64]) -> (Vec<u64>, bool) {
    if sig[0] & 1 == 1 {
        (sig.iter().map(|w| !w).collect(), true)
    } else {
        (sig.to_vec(), false)
    }
}

impl Sweeper {
    fn new(num_inputs: usize, rng: &mut ChaCha8Rng) -> Sweeper {
        let mut s = Sweeper {
            b: AigBuilder::new(num_inputs),
            solver: Solver::new(),
            sigs: Vec::new(),
            table: FxHashMap::default(),
            cex_bits: 0,
            stats: SweepStats::default(),
        };
        s.solver.add_clause(&[SatLit::new(0, true)]);
        s.sigs.push(vec![0; SIM_WORDS]);
        for _ in 0..num_inputs {
            s.sigs.push((0..SIM_WORDS).map(|_| rng.gen()).collect());
        }
        for n in 0..s.sigs.len() {
            s.insert_if_new(n);
        }
        s
    }

    fn lit_sig(&self, l: Lit, w: usize) -> u64 {
        let x = self.sigs[l.node()][w];
        if l.is_complemented() {
            !x
        } else {
            x
        }
    }

    fn insert_if_new(&mut self, n: usize) {
        let (key, _) = normalize(&self.sigs[n]);
        self.table.entry(key).or_insert(n as u32);
    }

    /// Clauses and signatures of gates the builder created since the last
    /// call.
    fn register_new_gates(&mut self) {
        while self.sigs.len() < self.b.num_nodes() {
            let n = self.sigs.len();
            let g = self.b.gate(n);
            let words = self.sigs[0].len();
            let sig: Vec<u64> = (0..words).map(|w| self.lit_sig(g.fanin0, w) & self.lit_sig(g.fanin1, w)).collect();
            self.sigs.push(sig);
            let o = SatLit::new(n as u32, false);
            let (a, c) = (slit(g.fanin0), slit(g.fanin1));
            self.solver.add_clause(&[!o, a]);
            self.solver.add_clause(&[!o, c]);
            self.solver.add_clause(&[o, !a, !c]);
        }
    }

    /// Adds a counterexample as one more simulation bit of every node and
    /// re-partitions the candidates.
    fn refine(&mut self, pattern: &[bool]) {
        self.stats.counterexamples += 1;
        let bit = self.cex_bits % 64;
        if bit == 0 {
            for s in self.sigs.iter_mut() {
                s.push(0);
            }
        }
        self.cex_bits += 1;
        let w = self.sigs[0].len() - 1;
        for (i, &p) in pattern.iter().enumerate() {
            self.sigs[1 + i][w] |= (p as u64) << bit;
        }
        for n in 1 + pattern.len()..self.sigs.len() {
            let g = self.b.gate(n);
            let v = self.lit_sig(g.fanin0, w) & self.lit_sig(g.fanin1, w) & (1 << bit);
            self.sigs[n][w] |= v;
        }
        self.table.clear();
        for n in 0..self.sigs.len() {
            self.insert_if_new(n);
        }
    }

    fn pattern(&self, num_inputs: usize) -> Vec<bool> {
        (1..=num_inputs as u32).map(|v| self.solver.model_value(v)).collect()
    }

    /// Proves `x == y` with two queries, refining on counterexamples.
    fn prove(&mut self, x: Lit, y: Lit, num_inputs: usize, budget: &Budget) -> Result<Option<bool>, &'static str> {
        let pair_budget = Budget {
            conflicts: Some(PAIR_CONFLICTS),
            ..budget.clone()
        };
        for (p, q) in [(x, !y), (!x, y)] {
            self.stats.sat_calls += 1;
            match self.solver.solve(&[slit(p), slit(q)], &pair_budget) {
                SolveResult::Unsat => {}
                SolveResult::Sat => {
                    let pat = self.pattern(num_inputs);
                    self.refine(&pat);
                    return Ok(Some(false));
                }
                SolveResult::Unknown(why) => {
                    if let Some(w) = budget.expired() {
                        return Err(w);
                    }
                    let _ = why;
                    return Ok(None);
                }
            }
        }
        Ok(Some(true))
    }
}

/// Sweeps a single-output miter.
pub(crate) fn sweep(miter: &Aig, budget: &Budget, seed: u64) -> (SweepOutcome, SweepStats) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ni = miter.num_inputs();
    let mut s = Sweeper::new(ni, &mut rng);
    let mut map: Vec<Lit> = (0..miter.first_and()).map(|n| Lit::new(n, false)).collect();
    map.resize(miter.num_nodes(), Lit::FALSE);
    for node in miter.and_ids() {
        if node % 64 == 0 {
            if let Some(w) = budget.expired() {
                return (SweepOutcome::Unknown(w), s.stats);
            }
        }
        let [a, c] = miter.fanins(node);
        let before = s.b.num_nodes();
        let lit = s.b.and(map[a.node()].xor_if(a.is_complemented()), map[c.node()].xor_if(c.is_complemented()));
        map[node] = lit;
        if s.b.num_nodes() == before {
            continue;
        }
        s.register_new_gates();
        let x = lit.node();
        loop {
            let (key, ph) = normalize(&s.sigs[x]);
            let r = *s.table.entry(key).or_insert(x as u32) as usize;
            if r == x {
                break;
            }
            let (_, rph) = normalize(&s.sigs[r]);
            let target = Lit::new(r, ph != rph);
            match s.prove(Lit::new(x, false), target, ni, budget) {
                Ok(Some(true)) => {
                    s.stats.merges += 1;
                    s.solver.add_clause(&[SatLit::new(x as u32, true), slit(target)]);
                    s.solver.add_clause(&[SatLit::new(x as u32, false), !slit(target)]);
                    map[node] = target;
                    break;
                }
                Ok(Some(false)) => continue,
                Ok(None) => {
                    s.stats.undecided += 1;
                    break;
                }
                Err(w) => return (SweepOutcome::Unknown(w), s.stats),
            }
        }
    }
    let o = miter.outputs()[0];
    let root = map[o.node()].xor_if(o.is_complemented());
    if root == Lit::FALSE {
        return (SweepOutcome::Equivalent, s.stats);
    }
    s.stats.sat_calls += 1;
    let outcome = match s.solver.solve(&[slit(root)], budget) {
        SolveResult::Unsat => SweepOutcome::Equivalent,
        SolveResult::Sat => SweepOutcome::Differ(s.pattern(ni)),
        SolveResult::Unknown(w) => SweepOutcome::Unknown(w),
    };
    (outcome, s.stats)
}
