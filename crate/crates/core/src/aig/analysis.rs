// SPDX-License-Identifier: Apache-2.0

//! Structural queries: levels, supports, fanouts, dead-node removal and
//! structural hashing.

use std::collections::BTreeSet;

use smallvec::SmallVec;

use super::{Aig, AigBuilder, AigError, AndGate, Lit};

/// Logic level of every node. Inputs and the constant are level 0.
pub fn levels(aig: &Aig) -> Vec<u32> {
    let mut lv = vec![0u32; aig.num_nodes()];
    for node in aig.and_ids() {
        let [a, b] = aig.fanins(node);
        lv[node] = 1 + lv[a.node()].max(lv[b.node()]);
    }
    lv
}

pub fn logic_level(aig: &Aig, node: usize) -> Result<u32, AigError> {
    aig.check_node(node)?;
    Ok(levels(aig)[node])
}

/// Maximum logic level over the primary outputs.
pub fn max_output_level(aig: &Aig) -> u32 {
    let lv = levels(aig);
    aig.outputs().iter().map(|o| lv[o.node()]).max().unwrap_or(0)
}

/// Primary inputs (as node ids) with a directed path to `node`.
pub fn support(aig: &Aig, node: usize) -> Result<BTreeSet<usize>, AigError> {
    aig.check_node(node)?;
    let mut seen = vec![false; aig.num_nodes()];
    let mut stack = vec![node];
    let mut out = BTreeSet::new();
    while let Some(n) = stack.pop() {
        if std::mem::replace(&mut seen[n], true) {
            continue;
        }
        if aig.is_input(n) {
            out.insert(n);
        } else if aig.is_and(n) {
            let [a, b] = aig.fanins(n);
            stack.push(a.node());
            stack.push(b.node());
        }
    }
    Ok(out)
}

pub fn support_size(aig: &Aig, node: usize) -> Result<usize, AigError> {
    support(aig, node).map(|s| s.len())
}

/// Supports of all nodes, tracked exactly up to `cap` inputs.
///
/// Computed bottom-up in one pass; nodes whose support exceeds the cap are
/// marked as overflowing.
#[derive(Clone, Debug)]
pub struct CappedSupport {
    cap: usize,
    sets: Vec<Option<SmallVec<[u32; 4]>>>,
}

impl CappedSupport {
    pub fn compute(aig: &Aig, cap: usize) -> CappedSupport {
        let mut sets: Vec<Option<SmallVec<[u32; 4]>>> = Vec::with_capacity(aig.num_nodes());
        sets.push(Some(SmallVec::new()));
        for i in aig.input_ids() {
            let mut s = SmallVec::new();
            if cap >= 1 {
                s.push(i as u32);
                sets.push(Some(s));
            } else {
                sets.push(None);
            }
        }
        for node in aig.and_ids() {
            let [a, b] = aig.fanins(node);
            let merged = match (&sets[a.node()], &sets[b.node()]) {
                (Some(x), Some(y)) => merge_capped(x, y, cap),
                _ => None,
            };
            sets.push(merged);
        }
        CappedSupport { cap, sets }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// The support, or `None` when it exceeds the cap.
    pub fn get(&self, node: usize) -> Option<&[u32]> {
        self.sets[node].as_deref()
    }

    pub fn size(&self, node: usize) -> Option<usize> {
        self.sets[node].as_ref().map(|s| s.len())
    }
}

fn merge_capped(x: &[u32], y: &[u32], cap: usize) -> Option<SmallVec<[u32; 4]>> {
    let mut out = SmallVec::new();
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let v = if j == y.len() || (i < x.len() && x[i] < y[j]) {
            i += 1;
            x[i - 1]
        } else if i == x.len() || y[j] < x[i] {
            j += 1;
            y[j - 1]
        } else {
            i += 1;
            j += 1;
            x[i - 1]
        };
        if out.len() == cap {
            return None;
        }
        out.push(v);
    }
    Some(out)
}

/// Number of gate fanins plus output references per node.
pub fn fanout_counts(aig: &Aig) -> Vec<u32> {
    let mut fo = vec![0u32; aig.num_nodes()];
    for g in aig.ands() {
        fo[g.fanin0.node()] += 1;
        fo[g.fanin1.node()] += 1;
    }
    for o in aig.outputs() {
        fo[o.node()] += 1;
    }
    fo
}

/// Nodes in the transitive fanin of the outputs.
pub(crate) fn reachable_from_outputs(aig: &Aig) -> Vec<bool> {
    let mut live = vec![false; aig.num_nodes()];
    for o in aig.outputs() {
        live[o.node()] = true;
    }
    for node in aig.and_ids().rev() {
        if live[node] {
            let [a, b] = aig.fanins(node);
            live[a.node()] = true;
            live[b.node()] = true;
        }
    }
    live
}

/// Removes and-gates that do not reach an output. Inputs are kept.
pub fn cleanup(aig: &Aig) -> Aig {
    cleanup_with_map(aig).0
}

/// [`cleanup`] plus the old-node to new-literal map (dead nodes map to
/// constant false).
pub fn cleanup_with_map(aig: &Aig) -> (Aig, Vec<Lit>) {
    let live = reachable_from_outputs(aig);
    let mut map: Vec<Lit> = (0..aig.first_and()).map(|n| Lit::new(n, false)).collect();
    map.resize(aig.num_nodes(), Lit::FALSE);
    let mut ands = Vec::new();
    for node in aig.and_ids() {
        if !live[node] {
            continue;
        }
        let [a, b] = aig.fanins(node);
        map[node] = Lit::new(aig.first_and() + ands.len(), false);
        ands.push(AndGate {
            fanin0: map[a.node()].xor_if(a.is_complemented()),
            fanin1: map[b.node()].xor_if(b.is_complemented()),
        });
    }
    let outputs = aig
        .outputs()
        .iter()
        .map(|o| map[o.node()].xor_if(o.is_complemented()))
        .collect();
    let out = Aig {
        num_inputs: aig.num_inputs(),
        ands,
        outputs,
        symbols: aig.symbols.clone(),
        comment: aig.comment.clone(),
    };
    (out, map)
}

/// Rebuilds the AIG through the hashing builder and drops dead gates.
pub fn strash(aig: &Aig) -> Aig {
    let live = reachable_from_outputs(aig);
    let mut b = AigBuilder::new(aig.num_inputs());
    let mut map: Vec<Lit> = (0..aig.first_and()).map(|n| Lit::new(n, false)).collect();
    map.resize(aig.num_nodes(), Lit::FALSE);
    for node in aig.and_ids() {
        if live[node] {
            let [x, y] = aig.fanins(node);
            map[node] = b.and(
                map[x.node()].xor_if(x.is_complemented()),
                map[y.node()].xor_if(y.is_complemented()),
            );
        }
    }
    for o in aig.outputs() {
        b.add_output(map[o.node()].xor_if(o.is_complemented()));
    }
    let mut out = cleanup(&b.build());
    out.symbols = aig.symbols.clone();
    out.comment = aig.comment.clone();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn balanced_and8() -> Aig {
        let mut b = AigBuilder::new(8);
        let mut layer: Vec<Lit> = (0..8).map(|i| b.input(i)).collect();
        while layer.len() > 1 {
            layer = layer.chunks(2).map(|p| b.and(p[0], p[1])).collect();
        }
        b.add_output(layer[0]);
        b.build()
    }

    #[test]
    fn levels_of_small_graphs() {
        let aig = balanced_and8();
        assert_eq!(logic_level(&aig, 1).unwrap(), 0);
        assert_eq!(logic_level(&aig, aig.first_and()).unwrap(), 1);
        assert_eq!(logic_level(&aig, aig.outputs()[0].node()).unwrap(), 3);
        assert_eq!(max_output_level(&aig), 3);
        assert!(logic_level(&aig, 1000).is_err());
    }

    #[test]
    fn support_of_pi_and_gate() {
        let aig = balanced_and8();
        assert_eq!(support(&aig, 3).unwrap(), BTreeSet::from([3]));
        let first = aig.first_and();
        assert_eq!(support(&aig, first).unwrap(), BTreeSet::from([1, 2]));
        assert_eq!(support_size(&aig, aig.outputs()[0].node()).unwrap(), 8);
        let capped = CappedSupport::compute(&aig, 2);
        assert_eq!(capped.get(first), Some(&[1u32, 2][..]));
        assert_eq!(capped.get(aig.outputs()[0].node()), None);
    }

    #[test]
    fn strash_merges_duplicates() {
        // Two structurally identical gates built without hashing.
        let ands = vec![
            AndGate { fanin0: Lit::new(1, false), fanin1: Lit::new(2, false) },
            AndGate { fanin0: Lit::new(2, false), fanin1: Lit::new(1, false) },
            AndGate { fanin0: Lit::new(3, false), fanin1: Lit::new(4, true) },
        ];
        let aig = Aig::from_parts(2, ands, vec![Lit::new(5, false), Lit::new(4, false)]).unwrap();
        let s = strash(&aig);
        // n3 & !n3 folds to false, the duplicate disappears.
        assert_eq!(s.num_ands(), 1);
        assert_eq!(s.outputs()[0], Lit::FALSE);
        assert_eq!(strash(&s).num_ands(), s.num_ands());
    }

    #[test]
    fn cleanup_drops_dead_gates() {
        let mut b = AigBuilder::new(3);
        let g = b.and(b.input(0), b.input(1));
        let _dead = b.and(b.input(1), b.input(2));
        b.add_output(g);
        let aig = cleanup(&b.build());
        assert_eq!(aig.num_ands(), 1);
        assert_eq!(aig.num_inputs(), 3);
    }
}
