// SPDX-License-Identifier: Apache-2.0

//! Word-level block recovery: k-feasible cuts, NPN matching against XOR and
//! majority primitives, and half/full adder pairing.

mod annotate;
mod cuts;
mod npn;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use annotate::{
    annotate_blocks, annotate_blocks_with, AnnotateConfig, BlockAnnotation, NodeTags, PairKind,
    RecoveredPair,
};
pub use cuts::{cut_function, enumerate_all_cuts, enumerate_cuts, Cut};
pub use npn::{apply_npn, npn_canonical, NpnTransform};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlocksError {
    #[error("leaves {leaves:?} do not form a cut of node {root}")]
    NotACut { root: usize, leaves: Vec<usize> },
    #[error("truth tables support at most 6 inputs, got {0}")]
    TooManyInputs(usize),
    #[error("exhaustive NPN canonicalization supports at most 4 inputs, got {0}")]
    NpnUnsupported(usize),
    #[error("unknown node {0}")]
    UnknownNode(usize),
}

/// Function of a cut root over at most 6 leaves. Bit `i` is the value on the
/// assignment where leaf `j` takes bit `j` of `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruthTable {
    pub n: u8,
    pub bits: u64,
}

impl TruthTable {
    pub fn new(n: usize, bits: u64) -> TruthTable {
        assert!(n <= 6, "truth tables support at most 6 inputs");
        TruthTable {
            n: n as u8,
            bits: bits & Self::mask(n),
        }
    }

    #[inline]
    pub fn mask(n: usize) -> u64 {
        if n >= 6 {
            !0
        } else {
            (1u64 << (1 << n)) - 1
        }
    }

    /// Projection onto input `i`.
    pub fn var(i: usize, n: usize) -> TruthTable {
        const VARS: [u64; 6] = [
            0xAAAA_AAAA_AAAA_AAAA,
            0xCCCC_CCCC_CCCC_CCCC,
            0xF0F0_F0F0_F0F0_F0F0,
            0xFF00_FF00_FF00_FF00,
            0xFFFF_0000_FFFF_0000,
            0xFFFF_FFFF_0000_0000,
        ];
        TruthTable::new(n, VARS[i])
    }

    pub fn bit(&self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    pub fn not(self) -> TruthTable {
        TruthTable::new(self.n as usize, !self.bits)
    }

    /// Whether the function depends on input `i`.
    pub fn depends_on(&self, i: usize) -> bool {
        let v = TruthTable::var(i, self.n as usize).bits;
        let shift = 1 << i;
        ((self.bits & v) >> shift) != (self.bits & !v & Self::mask(self.n as usize))
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tt{}:{:#x}", self.n, self.bits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutClass {
    Xor2,
    Xor3,
    /// Two-input majority, i.e. the AND class.
    And2Carry,
    Maj3,
    None,
}

fn canon_bits(n: usize, bits: u64) -> u64 {
    npn_canonical(TruthTable::new(n, bits))
        .expect("n <= 3")
        .0
        .bits
}

/// Matches a 2- or 3-input function against the primitive database.
pub fn classify_cut(tt: TruthTable) -> CutClass {
    use std::sync::OnceLock;
    static DB: OnceLock<[u64; 4]> = OnceLock::new();
    let db = DB.get_or_init(|| [canon_bits(2, 0x6), canon_bits(2, 0x8), canon_bits(3, 0x96), canon_bits(3, 0xE8)]);
    let n = tt.n as usize;
    if !(2..=3).contains(&n) {
        return CutClass::None;
    }
    let c = canon_bits(n, tt.bits);
    match (n, c) {
        (2, c) if c == db[0] => CutClass::Xor2,
        (2, c) if c == db[1] => CutClass::And2Carry,
        (3, c) if c == db[2] => CutClass::Xor3,
        (3, c) if c == db[3] => CutClass::Maj3,
        _ => CutClass::None,
    }
}
