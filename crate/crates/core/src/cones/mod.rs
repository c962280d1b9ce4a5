// SPDX-License-Identifier: Apache-2.0

//! Critical cone extraction and analytic partial-product generator
//! detection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{levels, Aig, AndGate, CappedSupport, Lit};
use crate::mulgen::PpgKind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConeError {
    #[error("requested {requested} outputs but the circuit has {available}")]
    TooFewOutputs { requested: usize, available: usize },
    #[error("cut depth must be at least 1")]
    ZeroDepth,
    #[error("no and-gate has a support of exactly two inputs; cannot decide the PPG")]
    EmptySlice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    LsbCone,
    MsbCone,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    pub kind: ConeKind,
    pub sub_aig: Aig,
    /// Original node ids that became the cone's inputs, in input order.
    pub boundary_inputs: Vec<usize>,
    /// Original output indices, in cone output order.
    pub root_outputs: Vec<usize>,
    pub cut_depth_used: Option<u32>,
    /// Original node id of every cone node.
    pub node_map: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpgVerdict {
    pub kind: PpgKind,
    pub radix_estimate: Option<u32>,
    /// Logic levels in the support-2 slice, the input level included.
    pub slice_levels: u32,
}

/// `K = 5 + 2 * floor(log2 N)`.
pub fn k_cut_depth(width: usize) -> u32 {
    assert!(width >= 1, "width must be positive");
    5 + 2 * width.ilog2()
}

/// Number of most significant outputs the MSB cone starts from.
pub const MSB_OUTPUTS: usize = 8;

/// Operand width of a multiplier with two equal-width operands.
pub fn operand_width(aig: &Aig) -> usize {
    (aig.num_inputs() / 2).max(1)
}

/// The cone of `kind` a multiplier is classified by: the LSB cone of
/// [`default_lsb_outputs`] outputs, or the MSB cone of [`MSB_OUTPUTS`]
/// outputs cut at [`k_cut_depth`].
pub fn default_cone(aig: &Aig, kind: ConeKind) -> Result<Cone, ConeError> {
    let width = operand_width(aig);
    match kind {
        ConeKind::LsbCone => extract_lsb_cone(aig, default_lsb_outputs(width).min(aig.num_outputs())),
        ConeKind::MsbCone => extract_msb_cone(aig, MSB_OUTPUTS.min(aig.num_outputs()), k_cut_depth(width)),
    }
}

/// Output count for the LSB cone: 8, or `width / 2` below width 16.
pub fn default_lsb_outputs(width: usize) -> usize {
    if width < 16 {
        (width / 2).max(1)
    } else {
        8
    }
}

/// Builds the cone over `included` gates with `boundary` as inputs.
fn build_cone(
    aig: &Aig,
    kind: ConeKind,
    included: &[bool],
    boundary: Vec<usize>,
    root_outputs: Vec<usize>,
    depth: Option<u32>,
) -> Cone {
    let mut map: Vec<Lit> = vec![Lit::FALSE; aig.num_nodes()];
    let mut node_map = vec![0usize];
    for (i, &b) in boundary.iter().enumerate() {
        map[b] = Lit::new(1 + i, false);
        node_map.push(b);
    }
    let first = 1 + boundary.len();
    let mut ands = Vec::new();
    for node in aig.and_ids() {
        if !included[node] {
            continue;
        }
        let [a, b] = aig.fanins(node);
        map[node] = Lit::new(first + ands.len(), false);
        node_map.push(node);
        ands.push(AndGate {
            fanin0: map[a.node()].xor_if(a.is_complemented()),
            fanin1: map[b.node()].xor_if(b.is_complemented()),
        });
    }
    let outputs = root_outputs
        .iter()
        .map(|&o| {
            let l = aig.outputs()[o];
            map[l.node()].xor_if(l.is_complemented())
        })
        .collect();
    let sub_aig = Aig::from_parts(boundary.len(), ands, outputs).expect("cone preserves topological order");
    Cone {
        kind,
        sub_aig,
        boundary_inputs: boundary,
        root_outputs,
        cut_depth_used: depth,
        node_map,
    }
}

/// Transitive fan-in of outputs `0..c`, down to the primary inputs.
pub fn extract_lsb_cone(aig: &Aig, c: usize) -> Result<Cone, ConeError> {
    if c > aig.num_outputs() {
        return Err(ConeError::TooFewOutputs {
            requested: c,
            available: aig.num_outputs(),
        });
    }
    let mut seen = vec![false; aig.num_nodes()];
    for o in &aig.outputs()[..c] {
        seen[o.node()] = true;
    }
    for node in aig.and_ids().rev() {
        if seen[node] {
            for f in aig.fanins(node) {
                seen[f.node()] = true;
            }
        }
    }
    let boundary: Vec<usize> = aig.input_ids().filter(|&i| seen[i]).collect();
    let included: Vec<bool> = (0..aig.num_nodes()).map(|n| seen[n] && aig.is_and(n)).collect();
    Ok(build_cone(aig, ConeKind::LsbCone, &included, boundary, (0..c).collect(), None))
}

/// K-level cut of the fan-in of the `l` most significant outputs.
///
/// A gate is kept when its level is less than `k` below the level of some
/// root reaching it through kept gates; the fanins where the traversal stops
/// become the cone inputs.
pub fn extract_msb_cone(aig: &Aig, l: usize, k: u32) -> Result<Cone, ConeError> {
    let m = aig.num_outputs();
    if l > m {
        return Err(ConeError::TooFewOutputs {
            requested: l,
            available: m,
        });
    }
    if k == 0 {
        return Err(ConeError::ZeroDepth);
    }
    let lv = levels(aig);
    let roots: Vec<usize> = (m - l..m).collect();
    let mut included = vec![false; aig.num_nodes()];
    // Lowest root level through which each gate was reached so far; a gate
    // is expanded again only when reached from a lower root.
    let mut best = vec![u32::MAX; aig.num_nodes()];
    let mut order: Vec<(u32, usize)> = roots.iter().map(|&o| (lv[aig.outputs()[o].node()], o)).collect();
    order.sort_unstable();
    for (root_level, o) in order {
        let mut stack = vec![aig.outputs()[o].node()];
        while let Some(n) = stack.pop() {
            if !aig.is_and(n) || root_level - lv[n] >= k || best[n] <= root_level {
                continue;
            }
            best[n] = root_level;
            included[n] = true;
            for f in aig.fanins(n) {
                stack.push(f.node());
            }
        }
    }
    let mut is_boundary = vec![false; aig.num_nodes()];
    for n in aig.and_ids() {
        if included[n] {
            for f in aig.fanins(n) {
                if !included[f.node()] && f.node() != 0 {
                    is_boundary[f.node()] = true;
                }
            }
        }
    }
    for &o in &roots {
        let r = aig.outputs()[o].node();
        if !included[r] && r != 0 {
            is_boundary[r] = true;
        }
    }
    let boundary: Vec<usize> = (0..aig.num_nodes()).filter(|&n| is_boundary[n]).collect();
    Ok(build_cone(aig, ConeKind::MsbCone, &included, boundary, roots, Some(k)))
}

/// Booth detection on the slice of gates whose support is exactly two
/// primary inputs.
pub fn detect_ppg(aig: &Aig) -> Result<PpgVerdict, ConeError> {
    let supp = CappedSupport::compute(aig, 2);
    let lv = levels(aig);
    let slice: Vec<usize> = aig.and_ids().filter(|&n| supp.size(n) == Some(2)).collect();
    let Some(max_level) = slice.iter().map(|&n| lv[n]).max() else {
        return Err(ConeError::EmptySlice);
    };
    let slice_levels = max_level + 1;
    if slice_levels <= 2 {
        return Ok(PpgVerdict {
            kind: PpgKind::Simple,
            radix_estimate: None,
            slice_levels,
        });
    }
    // Inputs combined by multi-level slice logic belong to one recoding
    // window, which also reads one more overlapping bit.
    let mut parent: Vec<usize> = (0..aig.num_nodes()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let mut touched = Vec::new();
    for &n in &slice {
        if lv[n] >= 2 {
            let s = supp.get(n).expect("support of size 2");
            let (a, b) = (find(&mut parent, s[0] as usize), find(&mut parent, s[1] as usize));
            parent[a] = b;
            touched.push(s[0] as usize);
            touched.push(s[1] as usize);
        }
    }
    let mut sizes = std::collections::HashMap::new();
    touched.sort_unstable();
    touched.dedup();
    for &t in &touched {
        *sizes.entry(find(&mut parent, t)).or_insert(0u32) += 1;
    }
    let examined = sizes.values().copied().max().unwrap_or(1) + 1;
    let radix_estimate = (examined == 3).then_some(4);
    Ok(PpgVerdict {
        kind: PpgKind::Booth,
        radix_estimate,
        slice_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{simulate_nodes, AigBuilder};
    use crate::mulgen::{generate_multiplier, ArchitectureLabel, FsaKind, PpaKind};

    fn template(ppg: PpgKind, ppa: PpaKind, fsa: FsaKind, n: usize) -> Aig {
        generate_multiplier(&ArchitectureLabel::new(ppg, ppa, fsa, n)).unwrap().0
    }

    #[test]
    fn k_formula() {
        assert_eq!(k_cut_depth(32), 15);
        assert_eq!(k_cut_depth(64), 17);
        assert_eq!(k_cut_depth(256), 21);
        assert_eq!(k_cut_depth(128), 19);
    }

    #[test]
    fn lsb_cone_of_one_output() {
        let aig = template(PpgKind::Simple, PpaKind::Array, FsaKind::RippleCarry, 4);
        let cone = extract_lsb_cone(&aig, 1).unwrap();
        assert_eq!(cone.sub_aig.num_ands(), 1);
        assert_eq!(cone.boundary_inputs, vec![1, 5]);
        assert!(extract_lsb_cone(&aig, 9).is_err());
    }

    #[test]
    fn lsb_cone_reaches_low_operand_bits() {
        let aig = template(PpgKind::Simple, PpaKind::Wallace, FsaKind::KoggeStone, 32);
        let cone = extract_lsb_cone(&aig, 8).unwrap();
        let expect: Vec<usize> = (1..=8).chain(33..=40).collect();
        assert_eq!(cone.boundary_inputs, expect);
    }

    #[test]
    fn msb_cone_depth_extremes() {
        let aig = template(PpgKind::Simple, PpaKind::Dadda, FsaKind::BrentKung, 6);
        let full = extract_msb_cone(&aig, 4, 1000).unwrap();
        assert!(full.boundary_inputs.iter().all(|&b| aig.is_input(b)));
        let one = extract_msb_cone(&aig, 4, 1).unwrap();
        let roots: Vec<usize> = aig.outputs()[8..].iter().map(|o| o.node()).filter(|&n| aig.is_and(n)).collect();
        assert_eq!(one.sub_aig.num_ands(), {
            let mut r = roots.clone();
            r.sort_unstable();
            r.dedup();
            r.len()
        });
        assert!(extract_msb_cone(&aig, 4, 0).is_err());
    }

    #[test]
    fn cones_reproduce_root_values() {
        let aig = template(PpgKind::Booth, PpaKind::Compressor4to2, FsaKind::HanCarlson, 12);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let inputs = crate::aig::random_words(&mut rng, aig.num_inputs(), 16);
        let vals = simulate_nodes(&aig, &inputs).unwrap();
        for cone in [extract_lsb_cone(&aig, 6).unwrap(), extract_msb_cone(&aig, 8, k_cut_depth(12)).unwrap()] {
            let cin: Vec<Vec<u64>> = cone.boundary_inputs.iter().map(|&b| vals.node(b).to_vec()).collect();
            let out = crate::aig::simulate(&cone.sub_aig, &cin).unwrap();
            for (k, &o) in cone.root_outputs.iter().enumerate() {
                assert_eq!(out[k], vals.lit(aig.outputs()[o]));
            }
        }
    }

    #[test]
    fn ppg_rule() {
        for fsa in [FsaKind::RippleCarry, FsaKind::Sklansky] {
            let s = detect_ppg(&template(PpgKind::Simple, PpaKind::Array, fsa, 8)).unwrap();
            assert_eq!(s.kind, PpgKind::Simple);
            assert_eq!(s.slice_levels, 2);
            let b = detect_ppg(&template(PpgKind::Booth, PpaKind::Wallace, fsa, 8)).unwrap();
            assert_eq!(b.kind, PpgKind::Booth);
            assert_eq!(b.radix_estimate, Some(4));
        }
    }

    #[test]
    fn two_level_slice_is_simple() {
        // A two-input xor spans levels 1 and 2 of gates: 3 levels with the
        // inputs, so a plain and over a third input stays at 2 levels.
        let mut b = AigBuilder::new(2);
        let g = b.and(b.input(0), !b.input(1));
        b.add_output(g);
        let v = detect_ppg(&b.build()).unwrap();
        assert_eq!((v.kind, v.slice_levels), (PpgKind::Simple, 2));
        let mut b = AigBuilder::new(2);
        let x = b.xor(b.input(0), b.input(1));
        b.add_output(x);
        assert_eq!(detect_ppg(&b.build()).unwrap().kind, PpgKind::Booth);
        let mut b = AigBuilder::new(1);
        b.add_output(b.input(0));
        assert_eq!(detect_ppg(&b.build()), Err(ConeError::EmptySlice));
    }
}
