// SPDX-License-Identifier: Apache-2.0

//! Exhaustive NPN canonicalization for up to four inputs.

use serde::{Deserialize, Serialize};

use super::{BlocksError, TruthTable};

/// Input `j` of the transformed function reads input `perm[j]` of the
/// original, complemented when bit `j` of `input_neg` is set; the result is
/// complemented when `output_neg` holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NpnTransform {
    pub perm: [u8; 4],
    pub input_neg: u8,
    pub output_neg: bool,
}

impl NpnTransform {
    pub fn identity() -> NpnTransform {
        NpnTransform {
            perm: [0, 1, 2, 3],
            input_neg: 0,
            output_neg: false,
        }
    }
}

/// `g(x) = output_neg ^ f(y)` with `y[perm[j]] = x[j] ^ neg[j]`.
pub fn apply_npn(tt: TruthTable, t: &NpnTransform) -> TruthTable {
    let n = tt.n as usize;
    let mut out = 0u64;
    for i in 0..1usize << n {
        let mut y = 0usize;
        for j in 0..n {
            let b = ((i >> j) & 1) ^ ((t.input_neg as usize >> j) & 1);
            y |= b << t.perm[j];
        }
        if ((tt.bits >> y) & 1 == 1) != t.output_neg {
            out |= 1 << i;
        }
    }
    TruthTable::new(n, out)
}

fn permutations(n: usize) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    let mut p = [0u8, 1, 2, 3];
    fn rec(k: usize, n: usize, p: &mut [u8; 4], out: &mut Vec<[u8; 4]>) {
        if k == n {
            out.push(*p);
            return;
        }
        for i in k..n {
            p.swap(k, i);
            rec(k + 1, n, p, out);
            p.swap(k, i);
        }
    }
    rec(0, n, &mut p, &mut out);
    out.sort();
    out
}

/// Minimum table over all `2^n * n! * 2` transforms, and a transform
/// reaching it (the first in a fixed enumeration order).
pub fn npn_canonical(tt: TruthTable) -> Result<(TruthTable, NpnTransform), BlocksError> {
    let n = tt.n as usize;
    if n > 4 {
        return Err(BlocksError::NpnUnsupported(n));
    }
    let mut best: Option<(TruthTable, NpnTransform)> = None;
    for perm in permutations(n) {
        for input_neg in 0..(1u8 << n) {
            for output_neg in [false, true] {
                let t = NpnTransform {
                    perm,
                    input_neg,
                    output_neg,
                };
                let g = apply_npn(tt, &t);
                if best.as_ref().is_none_or(|(b, _)| g.bits < b.bits) {
                    best = Some((g, t));
                }
            }
        }
    }
    Ok(best.expect("at least the identity"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_classes() {
        let c = |n, b| npn_canonical(TruthTable::new(n, b)).unwrap().0;
        assert_eq!(c(3, 0x96), c(3, 0x69));
        assert_eq!(c(2, 0x8), c(2, 0xE));
        assert_ne!(c(3, 0x96), c(3, 0xE8));
        assert_eq!(c(2, 0x8).bits, 0x1);
        assert!(npn_canonical(TruthTable::new(5, 0)).is_err());
    }

    #[test]
    fn transform_reaches_canonical() {
        for bits in 0..256u64 {
            let tt = TruthTable::new(3, bits);
            let (canon, t) = npn_canonical(tt).unwrap();
            assert_eq!(apply_npn(tt, &t), canon);
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(0).len(), 1);
    }
}
