// SPDX-License-Identifier: Apache-2.0

//! Half/full adder recovery.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::aig::Aig;

use super::cuts::{cut_function, enumerate_all_cuts, Leaves};
use super::{classify_cut, CutClass, TruthTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnnotateConfig {
    pub k: usize,
    pub cap: usize,
}

impl Default for AnnotateConfig {
    fn default() -> AnnotateConfig {
        AnnotateConfig { k: 3, cap: 16 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTags {
    pub is_ha_member: bool,
    pub is_fa_member: bool,
    pub is_remaining_xor: bool,
    pub is_and: bool,
    pub is_xor_root: bool,
    pub is_maj_root: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    Ha,
    Fa,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveredPair {
    pub sum_root: usize,
    pub carry_root: usize,
    pub shared_inputs: Vec<usize>,
    pub kind: PairKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockAnnotation {
    /// Indexed by node id.
    pub tags: Vec<NodeTags>,
    pub pairs: Vec<RecoveredPair>,
    /// Sum roots that had more than one valid carry partner.
    pub ambiguous: usize,
}

impl BlockAnnotation {
    pub fn count(&self, kind: PairKind) -> usize {
        self.pairs.iter().filter(|p| p.kind == kind).count()
    }

    pub fn fa_count(&self) -> usize {
        self.count(PairKind::Fa)
    }

    pub fn ha_count(&self) -> usize {
        self.count(PairKind::Ha)
    }
}

struct Candidate {
    root: usize,
    leaves: Leaves,
}

pub fn annotate_blocks(aig: &Aig) -> BlockAnnotation {
    annotate_blocks_with(aig, AnnotateConfig::default())
}

pub fn annotate_blocks_with(aig: &Aig, config: AnnotateConfig) -> BlockAnnotation {
    let n = aig.num_nodes();
    let cuts = enumerate_all_cuts(aig, config.k.max(3), config.cap);
    let mut xor2 = Vec::new();
    let mut xor3 = Vec::new();
    let mut carries: BTreeMap<Leaves, Vec<usize>> = BTreeMap::new();
    let mut is_xor = vec![false; n];
    let mut is_xor3 = vec![false; n];
    let mut is_maj3 = vec![false; n];
    for node in aig.and_ids() {
        for c in &cuts[node] {
            if c.is_trivial() || !(2..=3).contains(&c.leaves.len()) {
                continue;
            }
            let cand = || Candidate {
                root: node,
                leaves: c.leaves.clone(),
            };
            match classify_cut(c.function) {
                CutClass::Xor2 => {
                    is_xor[node] = true;
                    xor2.push(cand());
                }
                CutClass::Xor3 => {
                    is_xor[node] = true;
                    is_xor3[node] = true;
                    xor3.push(cand());
                }
                CutClass::Maj3 => {
                    is_maj3[node] = true;
                    carries.entry(c.leaves.clone()).or_default().push(node);
                }
                CutClass::And2Carry => carries.entry(c.leaves.clone()).or_default().push(node),
                CutClass::None => {}
            }
        }
    }

    let mut fanouts: Vec<Vec<u32>> = vec![Vec::new(); n];
    for node in aig.and_ids() {
        for f in aig.fanins(node) {
            fanouts[f.node()].push(node as u32);
        }
    }
    let mut is_po = vec![false; n];
    for o in aig.outputs() {
        is_po[o.node()] = true;
    }

    let mut tags = vec![NodeTags::default(); n];
    let mut used_carry = vec![false; n];
    let mut pairs = Vec::new();
    let mut ambiguous = 0;

    for (kind, list) in [(PairKind::Fa, &xor3), (PairKind::Ha, &xor2)] {
        let mut list: Vec<&Candidate> = list.iter().collect();
        list.sort_by_key(|c| (c.root, c.leaves.clone()));
        for cand in list {
            let s = cand.root;
            if tags[s].is_fa_member || tags[s].is_ha_member {
                continue;
            }
            let sum_interior = interior(aig, s, &cand.leaves);
            let Some(partners) = carries.get(&cand.leaves) else {
                continue;
            };
            let mut valid: Vec<usize> = partners
                .iter()
                .copied()
                .filter(|&c| c != s && !used_carry[c])
                .filter(|&c| !tags[c].is_fa_member && !tags[c].is_ha_member)
                .filter(|&c| !dead_end(c, &sum_interior, &fanouts, &is_po))
                .filter(|&c| validate(aig, s, c, &cand.leaves, kind))
                .collect();
            if valid.is_empty() {
                continue;
            }
            valid.sort_unstable();
            valid.dedup();
            if valid.len() > 1 {
                ambiguous += 1;
            }
            let c = valid[0];
            let carry_interior = interior(aig, c, &cand.leaves);
            if kind == PairKind::Ha
                && sum_interior.iter().chain(&carry_interior).any(|&v| tags[v].is_fa_member)
            {
                continue;
            }
            used_carry[c] = true;
            for &v in sum_interior.iter().chain(&carry_interior) {
                match kind {
                    PairKind::Fa => tags[v].is_fa_member = true,
                    PairKind::Ha => {
                        if !tags[v].is_fa_member {
                            tags[v].is_ha_member = true;
                        }
                    }
                }
            }
            tags[s].is_xor_root = true;
            tags[c].is_maj_root = true;
            pairs.push(RecoveredPair {
                sum_root: s,
                carry_root: c,
                shared_inputs: cand.leaves.iter().map(|&l| l as usize).collect(),
                kind,
            });
        }
    }

    for v in 0..n {
        let t = &mut tags[v];
        if t.is_fa_member {
            t.is_ha_member = false;
        }
        t.is_xor_root |= is_xor3[v];
        t.is_maj_root |= is_maj3[v];
        t.is_remaining_xor = !t.is_fa_member && !t.is_ha_member && is_xor[v];
        t.is_and = !t.is_fa_member && !t.is_ha_member && !t.is_remaining_xor;
    }
    BlockAnnotation {
        tags,
        pairs,
        ambiguous,
    }
}

/// Nodes strictly above `leaves` in the cone of `root`, root included.
fn interior(aig: &Aig, root: usize, leaves: &[u32]) -> Vec<usize> {
    let mut seen = vec![root];
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        if !aig.is_and(v) {
            continue;
        }
        for f in aig.fanins(v) {
            let u = f.node();
            if leaves.contains(&(u as u32)) || seen.contains(&u) {
                continue;
            }
            seen.push(u);
            stack.push(u);
        }
    }
    seen.sort_unstable();
    seen
}

/// A carry candidate that is only an internal node of the sum's cone is not
/// a carry.
fn dead_end(c: usize, sum_interior: &[usize], fanouts: &[Vec<u32>], is_po: &[bool]) -> bool {
    sum_interior.binary_search(&c).is_ok()
        && !is_po[c]
        && fanouts[c]
            .iter()
            .all(|&f| sum_interior.binary_search(&(f as usize)).is_ok())
}

/// Re-simulates the pair and checks it against the adder specification up
/// to input and output complements.
fn validate(aig: &Aig, s: usize, c: usize, leaves: &[u32], kind: PairKind) -> bool {
    let ids: Vec<usize> = leaves.iter().map(|&l| l as usize).collect();
    let (Ok(ts), Ok(tc)) = (cut_function(aig, s, &ids), cut_function(aig, c, &ids)) else {
        return false;
    };
    let n = ids.len();
    for neg in 0..1u64 << n {
        let mut sum_spec = 0u64;
        let mut carry_spec = 0u64;
        for i in 0..1u64 << n {
            let ones = (i ^ neg).count_ones();
            let carry = match kind {
                PairKind::Fa => ones >= 2,
                PairKind::Ha => ones == 2,
            };
            sum_spec |= ((ones & 1) as u64) << i;
            carry_spec |= (carry as u64) << i;
        }
        let mask = TruthTable::mask(n);
        let sum_ok = ts.bits == sum_spec || ts.bits == !sum_spec & mask;
        let carry_ok = tc.bits == carry_spec || tc.bits == !carry_spec & mask;
        if sum_ok && carry_ok {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;

    fn full_adder() -> Aig {
        let mut b = AigBuilder::new(3);
        let (x, y, z) = (b.input(0), b.input(1), b.input(2));
        let t = b.xor(x, y);
        let s = b.xor(t, z);
        let g = b.and(x, y);
        let tz = b.and(t, z);
        let c = b.or(g, tz);
        b.add_output(s);
        b.add_output(c);
        b.build()
    }

    #[test]
    fn one_full_adder() {
        let aig = full_adder();
        let ann = annotate_blocks(&aig);
        assert_eq!(ann.fa_count(), 1);
        assert_eq!(ann.ha_count(), 0);
        for v in aig.and_ids() {
            assert!(ann.tags[v].is_fa_member, "node {v}");
        }
        let s = aig.outputs()[0].node();
        let c = aig.outputs()[1].node();
        assert!(ann.tags[s].is_xor_root);
        assert!(ann.tags[c].is_maj_root);
        assert_eq!(ann.pairs[0].shared_inputs, vec![1, 2, 3]);
        for i in 0..3 {
            assert!(ann.tags[1 + i].is_and);
        }
    }

    #[test]
    fn half_adder_and_lonely_xor() {
        let mut b = AigBuilder::new(4);
        let (w, x, y, z) = (b.input(0), b.input(1), b.input(2), b.input(3));
        let s = b.xor(w, x);
        let c = b.and(w, x);
        let lonely = b.xor(y, z);
        b.add_output(s);
        b.add_output(c);
        b.add_output(lonely);
        let aig = b.build();
        let ann = annotate_blocks(&aig);
        assert_eq!(ann.ha_count(), 1);
        assert_eq!(ann.fa_count(), 0);
        assert!(ann.tags[lonely.node()].is_remaining_xor);
        assert!(ann.tags[s.node()].is_ha_member && ann.tags[c.node()].is_ha_member);
        for t in &ann.tags {
            let k = t.is_ha_member as u8 + t.is_fa_member as u8 + t.is_remaining_xor as u8 + t.is_and as u8;
            assert_eq!(k, 1);
        }
    }
}
