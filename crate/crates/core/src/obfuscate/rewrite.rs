// SPDX-License-Identifier: Apache-2.0

//! Local passes: DAG-aware cut rewriting, and-tree balancing and two-level
//! simplification rules.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;

use crate::aig::{cleanup, fanout_counts, Aig, AigBuilder, Lit};
use crate::blocks::enumerate_all_cuts;

use super::synth::{count_new, instantiate, pad4, program_inputs, Synthesizer};

const CUTS_PER_NODE: usize = 8;

fn finish(b: AigBuilder, aig: &Aig, map: &[Lit]) -> Aig {
    let mut b = b;
    for o in aig.outputs() {
        b.add_output(map[o.node()].xor_if(o.is_complemented()));
    }
    cleanup(&b.build()).with_symbols(aig.symbols().to_vec(), aig.comment().map(str::to_owned))
}

fn input_map(aig: &Aig) -> Vec<Lit> {
    let mut map: Vec<Lit> = (0..aig.first_and()).map(|n| Lit::new(n, false)).collect();
    map.resize(aig.num_nodes(), Lit::FALSE);
    map
}

fn mapped_leaves(leaves: &[u32], map: &[Lit]) -> [Lit; 4] {
    let mut out = [Lit::FALSE; 4];
    for (k, &l) in leaves.iter().enumerate() {
        out[k] = map[l as usize];
    }
    out
}

/// Nodes freed if `root` were removed, stopping at `leaves`.
fn mffc(aig: &Aig, root: usize, leaves: &[u32], refs: &mut [u32]) -> Vec<usize> {
    let mut out = vec![root];
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        for f in aig.fanins(n) {
            let m = f.node();
            if !aig.is_and(m) || leaves.contains(&(m as u32)) {
                continue;
            }
            refs[m] -= 1;
            if refs[m] == 0 {
                out.push(m);
                stack.push(m);
            }
        }
    }
    for &n in &out {
        for f in aig.fanins(n) {
            let m = f.node();
            if aig.is_and(m) && !leaves.contains(&(m as u32)) {
                refs[m] += 1;
            }
        }
    }
    out
}

/// Replaces each node by a class implementation over one of its four-input
/// cuts when that frees more gates than it adds. With `zero_gain`, equal
/// trades are taken with probability one half.
pub(crate) fn cut_rewrite(aig: &Aig, synth: &mut Synthesizer, zero_gain: bool, rng: &mut ChaCha8Rng) -> Aig {
    let cuts = enumerate_all_cuts(aig, 4, CUTS_PER_NODE);
    let mut refs = fanout_counts(aig);
    let mut b = AigBuilder::new(aig.num_inputs());
    let mut map = input_map(aig);
    for node in aig.and_ids() {
        let [x, y] = aig.fanins(node);
        let fx = map[x.node()].xor_if(x.is_complemented());
        let fy = map[y.node()].xor_if(y.is_complemented());
        // (gain, cut, variant); ties between equal gains are broken at random.
        let mut best: Option<(isize, usize, usize)> = None;
        let mut ties = 0u32;
        for (ci, cut) in cuts[node].iter().enumerate().skip(1) {
            if cut.leaves.len() < 2 {
                continue;
            }
            let freed = mffc(aig, node, &cut.leaves, &mut refs);
            if freed.len() < 2 && !zero_gain {
                continue;
            }
            let dying: FxHashSet<usize> = freed
                .iter()
                .filter(|&&n| n != node)
                .map(|&n| map[n].node())
                .filter(|&n| n != 0)
                .collect();
            let leaves = mapped_leaves(&cut.leaves, &map);
            let (variants, t) = synth.variants_for(pad4(cut.function));
            let inputs = program_inputs(&leaves, &t);
            for (vi, prog) in variants.iter().enumerate() {
                let added = count_new(&b, prog, &inputs, &|n| dying.contains(&n));
                let gain = freed.len() as isize - added as isize;
                match best {
                    Some((g, _, _)) if gain < g => {}
                    Some((g, _, _)) if gain == g => {
                        ties += 1;
                        if rng.gen_range(0..=ties) == 0 {
                            best = Some((gain, ci, vi));
                        }
                    }
                    _ => {
                        ties = 0;
                        best = Some((gain, ci, vi));
                    }
                }
            }
        }
        let take = match best {
            Some((g, _, _)) if g > 0 => true,
            Some((0, _, _)) if zero_gain => rng.gen_bool(0.5),
            _ => false,
        };
        map[node] = match best {
            Some((_, ci, vi)) if take => {
                let cut = &cuts[node][ci];
                let leaves = mapped_leaves(&cut.leaves, &map);
                let (variants, t) = synth.variants_for(pad4(cut.function));
                let prog = variants[vi].clone();
                instantiate(&mut b, &prog, &program_inputs(&leaves, &t)).xor_if(t.output_neg)
            }
            _ => b.and(fx, fy),
        };
    }
    finish(b, aig, &map)
}

/// Rebuilds every multi-input and-tree (gates with a single uncomplemented
/// use) as a tree of minimum depth; equal levels are paired in random order.
pub(crate) fn balance(aig: &Aig, rng: &mut ChaCha8Rng) -> Aig {
    let refs = fanout_counts(aig);
    let mut absorbed = vec![false; aig.num_nodes()];
    let mut complemented_use = vec![false; aig.num_nodes()];
    for node in aig.and_ids() {
        for f in aig.fanins(node) {
            complemented_use[f.node()] |= f.is_complemented();
        }
    }
    for o in aig.outputs() {
        complemented_use[o.node()] = true;
    }
    for node in aig.and_ids() {
        for f in aig.fanins(node) {
            let m = f.node();
            if aig.is_and(m) && !f.is_complemented() && refs[m] == 1 && !complemented_use[m] {
                absorbed[m] = true;
            }
        }
    }
    let mut b = AigBuilder::new(aig.num_inputs());
    let mut map = input_map(aig);
    let mut lv: Vec<u32> = vec![0; b.num_nodes()];
    for node in aig.and_ids() {
        if absorbed[node] {
            continue;
        }
        let mut leaves: Vec<Lit> = Vec::new();
        let mut stack = vec![node];
        while let Some(n) = stack.pop() {
            for f in aig.fanins(n) {
                if !f.is_complemented() && absorbed[f.node()] {
                    stack.push(f.node());
                } else {
                    leaves.push(map[f.node()].xor_if(f.is_complemented()));
                }
            }
        }
        leaves.sort_unstable();
        leaves.dedup();
        if leaves.windows(2).any(|w| w[0] == !w[1]) || leaves.contains(&Lit::FALSE) {
            map[node] = Lit::FALSE;
            continue;
        }
        leaves.retain(|&l| l != Lit::TRUE);
        let mut heap: BinaryHeap<Reverse<(u32, u32, Lit)>> =
            leaves.into_iter().map(|l| Reverse((lv[l.node()], rng.gen(), l))).collect();
        while heap.len() > 1 {
            let Reverse((la, _, a)) = heap.pop().expect("two entries");
            let Reverse((lb, _, c)) = heap.pop().expect("two entries");
            let g = b.and(a, c);
            if g.node() >= lv.len() {
                lv.resize(g.node() + 1, 0);
                lv[g.node()] = la.max(lb) + 1;
            }
            heap.push(Reverse((lv[g.node()], rng.gen(), g)));
        }
        map[node] = heap.pop().map_or(Lit::TRUE, |Reverse((_, _, l))| l);
    }
    finish(b, aig, &map)
}

/// Which two-level rules `simplify` applies.
#[derive(Clone, Copy)]
pub(crate) struct Rules {
    /// `a & (a & b) = a & b`, `a & (!a & b) = 0`.
    pub containment: bool,
    /// `a & !(!a & b) = a`, `a & !(a & b) = a & !b`,
    /// `!(a & b) & !(a & !b) = !a`.
    pub complements: bool,
}

fn fanins_of(b: &AigBuilder, l: Lit) -> Option<[Lit; 2]> {
    (b.is_and(l.node())).then(|| {
        let g = b.gate(l.node());
        [g.fanin0, g.fanin1]
    })
}

fn simple_and(b: &mut AigBuilder, x: Lit, y: Lit, rules: Rules) -> Lit {
    for (a, o) in [(x, y), (y, x)] {
        let Some([p, q]) = fanins_of(b, o) else { continue };
        if rules.containment && !o.is_complemented() {
            if p == a || q == a {
                return o;
            }
            if p == !a || q == !a {
                return Lit::FALSE;
            }
        }
        if rules.complements && o.is_complemented() {
            if p == !a || q == !a {
                return a;
            }
            if p == a {
                return b.and(a, !q);
            }
            if q == a {
                return b.and(a, !p);
            }
        }
    }
    if rules.complements && x.is_complemented() && y.is_complemented() {
        if let (Some([p, q]), Some([r, s])) = (fanins_of(b, x), fanins_of(b, y)) {
            for (u, v, w, z) in [(p, q, r, s), (p, q, s, r), (q, p, r, s), (q, p, s, r)] {
                if u == w && v == !z {
                    return !u;
                }
            }
        }
    }
    b.and(x, y)
}

pub(crate) fn simplify(aig: &Aig, rules: Rules) -> Aig {
    let mut b = AigBuilder::new(aig.num_inputs());
    let mut map = input_map(aig);
    for node in aig.and_ids() {
        let [x, y] = aig.fanins(node);
        map[node] = simple_and(
            &mut b,
            map[x.node()].xor_if(x.is_complemented()),
            map[y.node()].xor_if(y.is_complemented()),
            rules,
        );
    }
    finish(b, aig, &map)
}
