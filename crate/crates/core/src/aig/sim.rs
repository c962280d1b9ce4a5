// SPDX-License-Identifier: Apache-2.0

//! Bit-parallel simulation, 64 patterns per word.

use rand::Rng;

use super::{Aig, AigError, Lit};

/// One vector of words per primary input.
pub type SimWords = Vec<Vec<u64>>;

/// Simulation values of every node, `words` words per node.
#[derive(Clone, Debug)]
pub struct NodeValues {
    words: usize,
    data: Vec<u64>,
}

impl NodeValues {
    pub fn words(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn node(&self, node: usize) -> &[u64] {
        &self.data[node * self.words..(node + 1) * self.words]
    }

    /// Word `w` of a literal, complement applied.
    #[inline]
    pub fn lit_word(&self, lit: Lit, w: usize) -> u64 {
        let v = self.data[lit.node() * self.words + w];
        if lit.is_complemented() {
            !v
        } else {
            v
        }
    }

    pub fn lit(&self, lit: Lit) -> Vec<u64> {
        (0..self.words).map(|w| self.lit_word(lit, w)).collect()
    }
}

fn check_inputs(aig: &Aig, inputs: &[Vec<u64>]) -> Result<usize, AigError> {
    if inputs.len() != aig.num_inputs() {
        return Err(AigError::InputCount {
            expected: aig.num_inputs(),
            got: inputs.len(),
        });
    }
    let words = inputs.first().map_or(1, Vec::len);
    if inputs.iter().any(|w| w.len() != words) {
        return Err(AigError::WordWidth);
    }
    Ok(words)
}

pub fn simulate_nodes(aig: &Aig, inputs: &[Vec<u64>]) -> Result<NodeValues, AigError> {
    let words = check_inputs(aig, inputs)?;
    let mut data = vec![0u64; aig.num_nodes() * words];
    for (i, w) in inputs.iter().enumerate() {
        data[(i + 1) * words..(i + 2) * words].copy_from_slice(w);
    }
    let first = aig.first_and();
    for (k, g) in aig.ands().iter().enumerate() {
        let node = first + k;
        let (a, b) = (g.fanin0, g.fanin1);
        let ma = if a.is_complemented() { !0 } else { 0 };
        let mb = if b.is_complemented() { !0 } else { 0 };
        let (oa, ob, on) = (a.node() * words, b.node() * words, node * words);
        for w in 0..words {
            data[on + w] = (data[oa + w] ^ ma) & (data[ob + w] ^ mb);
        }
    }
    Ok(NodeValues { words, data })
}

/// Output words for the given input words.
pub fn simulate(aig: &Aig, inputs: &[Vec<u64>]) -> Result<Vec<Vec<u64>>, AigError> {
    let vals = simulate_nodes(aig, inputs)?;
    Ok(aig.outputs().iter().map(|&o| vals.lit(o)).collect())
}

pub fn random_words<R: Rng + ?Sized>(rng: &mut R, num_inputs: usize, words: usize) -> SimWords {
    (0..num_inputs)
        .map(|_| (0..words).map(|_| rng.gen()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::AigBuilder;

    #[test]
    fn single_and() {
        let mut b = AigBuilder::new(2);
        let g = b.and(b.input(0), b.input(1));
        b.add_output(g);
        let aig = b.build();
        let out = simulate(&aig, &[vec![0b1100], vec![0b1010]]).unwrap();
        assert_eq!(out, vec![vec![0b1000]]);
    }

    #[test]
    fn constant_outputs() {
        let mut b = AigBuilder::new(1);
        b.add_output(Lit::FALSE);
        b.add_output(Lit::TRUE);
        let aig = b.build();
        let out = simulate(&aig, &[vec![0x1234]]).unwrap();
        assert_eq!(out, vec![vec![0], vec![!0]]);
    }

    #[test]
    fn rejects_wrong_input_count() {
        let aig = AigBuilder::new(2).build();
        assert!(matches!(
            simulate(&aig, &[vec![0]]),
            Err(AigError::InputCount { expected: 2, got: 1 })
        ));
        assert!(matches!(
            simulate(&aig, &[vec![0], vec![0, 1]]),
            Err(AigError::WordWidth)
        ));
    }
}
