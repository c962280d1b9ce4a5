// SPDX-License-Identifier: Apache-2.0

//! Bottom-up k-feasible cut enumeration with cut functions.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::aig::Aig;

use super::{BlocksError, TruthTable};

pub type Leaves = SmallVec<[u32; 6]>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub root: usize,
    /// Ascending node ids.
    pub leaves: Leaves,
    pub function: TruthTable,
}

impl Cut {
    pub fn is_trivial(&self) -> bool {
        self.leaves.len() == 1 && self.leaves[0] as usize == self.root
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        self.leaves.iter().map(|&l| l as usize).collect()
    }
}

/// Re-expresses `tt` over `from` as a function over the superset `to`.
fn stretch(tt: u64, from: &[u32], to: &[u32]) -> u64 {
    if from == to {
        return tt;
    }
    let pos: SmallVec<[usize; 6]> = from
        .iter()
        .map(|l| to.iter().position(|t| t == l).expect("superset"))
        .collect();
    let mut out = 0u64;
    for i in 0..1usize << to.len() {
        let mut j = 0;
        for (k, &p) in pos.iter().enumerate() {
            j |= ((i >> p) & 1) << k;
        }
        out |= ((tt >> j) & 1) << i;
    }
    out
}

fn union(a: &[u32], b: &[u32], k: usize) -> Option<Leaves> {
    let mut out = Leaves::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let v = if j == b.len() || (i < a.len() && a[i] < b[j]) {
            i += 1;
            a[i - 1]
        } else if i == a.len() || b[j] < a[i] {
            j += 1;
            b[j - 1]
        } else {
            i += 1;
            j += 1;
            a[i - 1]
        };
        if out.len() == k {
            return None;
        }
        out.push(v);
    }
    Some(out)
}

fn is_subset(small: &[u32], big: &[u32]) -> bool {
    small.len() <= big.len() && small.iter().all(|x| big.binary_search(x).is_ok())
}

/// Cuts of every node. Each set starts with the trivial cut; the rest are
/// irredundant among themselves and ordered by (size, leaves). When more
/// than `cap` survive, the smallest are kept.
pub fn enumerate_all_cuts(aig: &Aig, k: usize, cap: usize) -> Vec<Vec<Cut>> {
    assert!((1..=6).contains(&k), "cut size must be in 1..=6");
    let cap = cap.max(1);
    let mut sets: Vec<Vec<Cut>> = Vec::with_capacity(aig.num_nodes());
    sets.push(vec![Cut {
        root: 0,
        leaves: Leaves::new(),
        function: TruthTable::new(0, 0),
    }]);
    for i in aig.input_ids() {
        sets.push(vec![trivial(i)]);
    }
    for node in aig.and_ids() {
        let [a, b] = aig.fanins(node);
        let mut merged: FxHashMap<Leaves, u64> = FxHashMap::default();
        for ca in &sets[a.node()] {
            for cb in &sets[b.node()] {
                let Some(leaves) = union(&ca.leaves, &cb.leaves, k) else {
                    continue;
                };
                if merged.contains_key(&leaves) {
                    continue;
                }
                let mask = TruthTable::mask(leaves.len());
                let fa = stretch(ca.function.bits, &ca.leaves, &leaves) ^ if a.is_complemented() { mask } else { 0 };
                let fb = stretch(cb.function.bits, &cb.leaves, &leaves) ^ if b.is_complemented() { mask } else { 0 };
                merged.insert(leaves, fa & fb & mask);
            }
        }
        let mut list: Vec<(Leaves, u64)> = merged.into_iter().collect();
        list.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0)));
        let mut kept: Vec<Cut> = vec![trivial(node)];
        for (leaves, bits) in list {
            if kept.len() == cap {
                break;
            }
            if kept[1..].iter().any(|c| is_subset(&c.leaves, &leaves)) {
                continue;
            }
            kept.push(Cut {
                root: node,
                function: TruthTable::new(leaves.len(), bits),
                leaves,
            });
        }
        sets.push(kept);
    }
    sets
}

fn trivial(node: usize) -> Cut {
    let mut leaves = Leaves::new();
    leaves.push(node as u32);
    Cut {
        root: node,
        leaves,
        function: TruthTable::var(0, 1),
    }
}

pub fn enumerate_cuts(aig: &Aig, node: usize, k: usize, cap: usize) -> Result<Vec<Cut>, BlocksError> {
    if node >= aig.num_nodes() {
        return Err(BlocksError::UnknownNode(node));
    }
    let mut all = enumerate_all_cuts(aig, k, cap);
    Ok(std::mem::take(&mut all[node]))
}

/// Truth table of `root` over `leaves` (sorted ascending) by simulating the
/// cut interior on `2^n` patterns.
pub fn cut_function(aig: &Aig, root: usize, leaves: &[usize]) -> Result<TruthTable, BlocksError> {
    let n = leaves.len();
    if n > 6 {
        return Err(BlocksError::TooManyInputs(n));
    }
    if root >= aig.num_nodes() {
        return Err(BlocksError::UnknownNode(root));
    }
    let mut sorted = leaves.to_vec();
    sorted.sort_unstable();
    let mut val: FxHashMap<usize, u64> = FxHashMap::default();
    for (i, &l) in sorted.iter().enumerate() {
        val.insert(l, TruthTable::var(i, n).bits);
    }
    val.entry(0).or_insert(0);
    let not_a_cut = || BlocksError::NotACut {
        root,
        leaves: sorted.clone(),
    };
    let mut stack = vec![root];
    while let Some(&v) = stack.last() {
        if val.contains_key(&v) {
            stack.pop();
            continue;
        }
        if !aig.is_and(v) {
            return Err(not_a_cut());
        }
        let [a, b] = aig.fanins(v);
        let (na, nb) = (a.node(), b.node());
        match (val.get(&na), val.get(&nb)) {
            (Some(&x), Some(&y)) => {
                let x = if a.is_complemented() { !x } else { x };
                let y = if b.is_complemented() { !y } else { y };
                val.insert(v, x & y);
                stack.pop();
            }
            (xa, xb) => {
                if xa.is_none() {
                    stack.push(na);
                }
                if xb.is_none() {
                    stack.push(nb);
                }
            }
        }
    }
    Ok(TruthTable::new(n, val[&root]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;

    fn xor3() -> (Aig, usize) {
        let mut b = AigBuilder::new(3);
        let (x, y, z) = (b.input(0), b.input(1), b.input(2));
        let t = b.xor(x, y);
        let s = b.xor(t, z);
        b.add_output(s);
        let aig = b.build();
        let root = aig.outputs()[0].node();
        (aig, root)
    }

    #[test]
    fn pi_and_single_gate() {
        let mut b = AigBuilder::new(2);
        let g = b.and(b.input(0), b.input(1));
        b.add_output(g);
        let aig = b.build();
        let pi = enumerate_cuts(&aig, 1, 3, 16).unwrap();
        assert_eq!(pi.len(), 1);
        assert_eq!(pi[0].leaf_ids(), vec![1]);
        let c = enumerate_cuts(&aig, 3, 2, 16).unwrap();
        let sets: Vec<Vec<usize>> = c.iter().map(Cut::leaf_ids).collect();
        assert_eq!(sets, vec![vec![3], vec![1, 2]]);
        assert_eq!(c[1].function.bits, 0x8);
        assert_eq!(cut_function(&aig, 3, &[1, 2]).unwrap().bits, 0x8);
    }

    #[test]
    fn xor3_chain_has_the_input_cut() {
        let (aig, root) = xor3();
        assert_eq!(aig.num_ands(), 6);
        let cuts = enumerate_cuts(&aig, root, 3, 16).unwrap();
        let c = cuts.iter().find(|c| c.leaf_ids() == vec![1, 2, 3]).expect("input cut");
        assert_eq!(c.function.bits & 0xFF, 0x96 & 0xFF);
        assert_eq!(cut_function(&aig, root, &[1, 2, 3]).unwrap().bits, 0x96);
    }

    #[test]
    fn invalid_cut_is_reported() {
        let (aig, root) = xor3();
        assert!(matches!(
            cut_function(&aig, root, &[1, 2]),
            Err(BlocksError::NotACut { .. })
        ));
    }

    #[test]
    fn stretch_reorders_bits() {
        // f = leaf 5 over {5}, viewed over {2, 5}: projection onto input 1.
        assert_eq!(stretch(0b10, &[5], &[2, 5]), 0b1100);
    }
}
