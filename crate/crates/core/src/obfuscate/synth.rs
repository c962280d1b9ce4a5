// SPDX-License-Identifier: Apache-2.0

//! Small implementations of four-input functions, one per NPN class.

use rustc_hash::FxHashMap;

use crate::aig::{cleanup, Aig, AigBuilder, Lit};
use crate::blocks::{npn_canonical, NpnTransform, TruthTable};

const FULL: u16 = 0xFFFF;
const VARS: [u16; 4] = [0xAAAA, 0xCCCC, 0xF0F0, 0xFF00];

fn cofactors(tt: u16, v: usize) -> (u16, u16) {
    let m = VARS[v];
    let s = 1 << v;
    let hi = tt & m;
    let lo = tt & !m;
    (lo | (lo << s), hi | (hi >> s))
}

/// Table of `tt` (over `n` inputs) as a function of four inputs.
pub(crate) fn pad4(tt: TruthTable) -> u16 {
    let n = tt.n as usize;
    let mask = (1usize << n) - 1;
    (0..16).fold(0u16, |acc, i| acc | (((tt.bits >> (i & mask)) & 1) as u16) << i)
}

/// Copies `prog` (single-output) into `b` over `inputs`.
pub(crate) fn instantiate(b: &mut AigBuilder, prog: &Aig, inputs: &[Lit]) -> Lit {
    let mut map: Vec<Lit> = Vec::with_capacity(prog.num_nodes());
    map.push(Lit::FALSE);
    map.extend_from_slice(&inputs[..prog.num_inputs()]);
    for node in prog.and_ids() {
        let [x, y] = prog.fanins(node);
        let l = b.and(map[x.node()].xor_if(x.is_complemented()), map[y.node()].xor_if(y.is_complemented()));
        map.push(l);
    }
    let o = prog.outputs()[0];
    map[o.node()].xor_if(o.is_complemented())
}

/// Gates `instantiate` would add. Existing gates on nodes marked in `dying`
/// count as new since they are about to be freed.
pub(crate) fn count_new(b: &AigBuilder, prog: &Aig, inputs: &[Lit], dying: &dyn Fn(usize) -> bool) -> usize {
    let mut map: Vec<Option<Lit>> = Vec::with_capacity(prog.num_nodes());
    map.push(Some(Lit::FALSE));
    map.extend(inputs[..prog.num_inputs()].iter().map(|&l| Some(l)));
    let mut added = 0;
    for node in prog.and_ids() {
        let [x, y] = prog.fanins(node);
        let fx = map[x.node()].map(|l| l.xor_if(x.is_complemented()));
        let fy = map[y.node()].map(|l| l.xor_if(y.is_complemented()));
        let hit = match (fx, fy) {
            (Some(p), Some(q)) => b.lookup_and(p, q).filter(|l| l.is_const() || !dying(l.node())),
            _ => None,
        };
        if hit.is_none() {
            added += 1;
        }
        map.push(hit);
    }
    added
}

/// Implementations found by recursive decomposition, keyed by table.
#[derive(Default)]
pub(crate) struct Synthesizer {
    memo: FxHashMap<u16, Aig>,
    variants: FxHashMap<u16, Vec<Aig>>,
    npn: FxHashMap<u16, (u16, NpnTransform)>,
}

impl Synthesizer {
    /// Canonical table and the transform reaching it.
    pub fn canonical(&mut self, tt: u16) -> (u16, NpnTransform) {
        *self.npn.entry(tt).or_insert_with(|| {
            let (c, t) = npn_canonical(TruthTable::new(4, tt as u64)).expect("four inputs");
            (c.bits as u16, t)
        })
    }

    /// Distinct implementations of the class of `tt`, cheapest first.
    pub fn variants_for(&mut self, tt: u16) -> (&[Aig], NpnTransform) {
        let (c, t) = self.canonical(tt);
        if !self.variants.contains_key(&c) {
            let mut all = self.candidates(c);
            all.sort_by_key(Aig::num_ands);
            let mut uniq: Vec<Aig> = Vec::new();
            for a in all {
                if !uniq.contains(&a) {
                    uniq.push(a);
                }
            }
            self.variants.insert(c, uniq);
        }
        (&self.variants[&c], t)
    }

    /// Cheapest decomposition over all split variables.
    pub fn best(&mut self, tt: u16) -> &Aig {
        if !self.memo.contains_key(&tt) {
            let prog = self.search(tt);
            self.memo.insert(tt, prog);
        }
        &self.memo[&tt]
    }

    fn search(&mut self, tt: u16) -> Aig {
        self.candidates(tt)
            .into_iter()
            .min_by_key(Aig::num_ands)
            .expect("a non-trivial function depends on some input")
    }

    /// One decomposition per split variable (a single entry for constants
    /// and literals).
    fn candidates(&mut self, tt: u16) -> Vec<Aig> {
        let mut b = AigBuilder::new(4);
        if tt == 0 || tt == FULL {
            b.add_output(if tt == 0 { Lit::FALSE } else { Lit::TRUE });
            return vec![b.build()];
        }
        for (v, &m) in VARS.iter().enumerate() {
            if tt == m || tt == !m {
                b.add_output(Lit::new(1 + v, tt != m));
                return vec![b.build()];
            }
        }
        let mut found = Vec::new();
        for v in 0..4 {
            let (f0, f1) = cofactors(tt, v);
            if f0 == f1 {
                continue;
            }
            let p0 = self.best(f0).clone();
            let p1 = self.best(f1).clone();
            let mut b = AigBuilder::new(4);
            let ins: Vec<Lit> = (0..4).map(|i| b.input(i)).collect();
            let x = ins[v];
            let out = if f0 == 0 {
                let g = instantiate(&mut b, &p1, &ins);
                b.and(x, g)
            } else if f1 == 0 {
                let g = instantiate(&mut b, &p0, &ins);
                b.and(!x, g)
            } else if f0 == FULL {
                let g = instantiate(&mut b, &p1, &ins);
                b.or(!x, g)
            } else if f1 == FULL {
                let g = instantiate(&mut b, &p0, &ins);
                b.or(x, g)
            } else if f1 == !f0 {
                let g = instantiate(&mut b, &p0, &ins);
                b.xor(x, g)
            } else {
                let g0 = instantiate(&mut b, &p0, &ins);
                let g1 = instantiate(&mut b, &p1, &ins);
                if f0 & !f1 == 0 {
                    let t = b.and(x, g1);
                    b.or(g0, t)
                } else if f1 & !f0 == 0 {
                    let t = b.and(!x, g0);
                    b.or(g1, t)
                } else {
                    b.mux(x, g1, g0)
                }
            };
            b.add_output(out);
            found.push(cleanup(&b.build()));
        }
        found
    }
}

/// Program inputs for leaves `leaves` under transform `t`.
pub(crate) fn program_inputs(leaves: &[Lit; 4], t: &NpnTransform) -> [Lit; 4] {
    let mut out = [Lit::FALSE; 4];
    for (j, o) in out.iter_mut().enumerate() {
        *o = leaves[t.perm[j] as usize].xor_if((t.input_neg >> j) & 1 == 1);
    }
    out
}
