// SPDX-License-Identifier: Apache-2.0

//! Integer-multiplication oracles for generated templates.

use num_bigint::BigUint;
use rand::Rng;

use crate::aig::{simulate, Aig, AigError};

/// An input pair on which a circuit does not multiply.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplierMismatch {
    pub a: BigUint,
    pub b: BigUint,
    pub expected: BigUint,
    pub got: BigUint,
}

fn bits_value(bits: impl Iterator<Item = bool>) -> BigUint {
    let bytes: Vec<u8> = {
        let v: Vec<bool> = bits.collect();
        v.chunks(8)
            .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b as u8) << i))
            .collect()
    };
    BigUint::from_bytes_le(&bytes)
}

/// Checks `patterns` packed assignments (bit `p` of every input word).
fn check_words(
    aig: &Aig,
    width: usize,
    inputs: &[Vec<u64>],
    patterns: usize,
) -> Result<(), MultiplierMismatch> {
    let out = simulate(aig, inputs).expect("input arity checked by caller");
    let bit = |w: &Vec<u64>, p: usize| (w[p / 64] >> (p % 64)) & 1 == 1;
    if width <= 64 {
        for p in 0..patterns {
            let a: u128 = (0..width).map(|i| (bit(&inputs[i], p) as u128) << i).sum();
            let b: u128 = (0..width).map(|i| (bit(&inputs[width + i], p) as u128) << i).sum();
            let got: u128 = (0..2 * width).map(|k| (bit(&out[k], p) as u128) << k).sum();
            let full = a * b;
            let expected = if width == 64 { full } else { full & ((1u128 << (2 * width)) - 1) };
            if got != expected {
                return Err(MultiplierMismatch {
                    a: a.into(),
                    b: b.into(),
                    expected: expected.into(),
                    got: got.into(),
                });
            }
        }
        return Ok(());
    }
    for p in 0..patterns {
        let a = bits_value((0..width).map(|i| bit(&inputs[i], p)));
        let b = bits_value((0..width).map(|i| bit(&inputs[width + i], p)));
        let got = bits_value((0..2 * width).map(|k| bit(&out[k], p)));
        let expected = &a * &b;
        if got != expected {
            return Err(MultiplierMismatch { a, b, expected, got });
        }
    }
    Ok(())
}

fn check_arity(aig: &Aig, width: usize) -> Result<(), AigError> {
    if aig.num_inputs() != 2 * width || aig.num_outputs() != 2 * width {
        return Err(AigError::InputCount {
            expected: 2 * width,
            got: aig.num_inputs(),
        });
    }
    Ok(())
}

/// All `2^(2N)` operand pairs, `N <= 12`.
///
/// Panics if the circuit does not have `2N` inputs and outputs.
pub fn exhaustive_multiplier_check(aig: &Aig, width: usize) -> Result<(), MultiplierMismatch> {
    check_arity(aig, width).expect("multiplier arity");
    assert!(width <= 12, "exhaustive check limited to width 12");
    let total = 1usize << (2 * width);
    const CHUNK: usize = 64 * 64;
    for base in (0..total).step_by(CHUNK) {
        let count = CHUNK.min(total - base);
        let words = count.div_ceil(64);
        let inputs: Vec<Vec<u64>> = (0..2 * width)
            .map(|i| {
                let mut w = vec![0u64; words];
                for p in 0..count {
                    w[p / 64] |= ((((base + p) >> i) & 1) as u64) << (p % 64);
                }
                w
            })
            .collect();
        check_words(aig, width, &inputs, count)?;
    }
    Ok(())
}

/// At least `vectors` uniformly random operand pairs.
///
/// Panics if the circuit does not have `2N` inputs and outputs.
pub fn random_multiplier_check<R: Rng + ?Sized>(
    aig: &Aig,
    width: usize,
    vectors: usize,
    rng: &mut R,
) -> Result<(), MultiplierMismatch> {
    check_arity(aig, width).expect("multiplier arity");
    let mut left = vectors;
    while left > 0 {
        let words = left.div_ceil(64).min(256);
        let inputs = crate::aig::random_words(rng, 2 * width, words);
        check_words(aig, width, &inputs, words * 64)?;
        left = left.saturating_sub(words * 64);
    }
    Ok(())
}
