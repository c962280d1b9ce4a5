// SPDX-License-Identifier: Apache-2.0

use rustc_hash::FxHashMap;

use super::{Aig, AndGate, Lit};

/// Incremental AIG construction with structural hashing.
///
/// `and` folds constants, `x & x`, `x & !x`, orders fanins (smaller literal
/// first) and reuses an existing gate with the same fanin pair.
#[derive(Clone, Debug, Default)]
pub struct AigBuilder {
    num_inputs: usize,
    ands: Vec<AndGate>,
    outputs: Vec<Lit>,
    table: FxHashMap<(Lit, Lit), Lit>,
}

impl AigBuilder {
    pub fn new(num_inputs: usize) -> AigBuilder {
        AigBuilder {
            num_inputs,
            ands: Vec::new(),
            outputs: Vec::new(),
            table: FxHashMap::default(),
        }
    }

    #[inline]
    pub fn input(&self, i: usize) -> Lit {
        assert!(i < self.num_inputs, "input {i} out of range");
        Lit::new(1 + i, false)
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    pub fn num_nodes(&self) -> usize {
        1 + self.num_inputs + self.ands.len()
    }

    pub fn gate(&self, node: usize) -> AndGate {
        self.ands[node - 1 - self.num_inputs]
    }

    pub fn is_and(&self, node: usize) -> bool {
        node > self.num_inputs
    }

    /// Trivial simplification shared by `and` and `lookup_and`.
    #[inline]
    fn simplify(a: Lit, b: Lit) -> Result<Lit, (Lit, Lit)> {
        if a == Lit::FALSE || b == Lit::FALSE || a == !b {
            return Ok(Lit::FALSE);
        }
        if a == Lit::TRUE || a == b {
            return Ok(b);
        }
        if b == Lit::TRUE {
            return Ok(a);
        }
        Err(if a < b { (a, b) } else { (b, a) })
    }

    pub fn and(&mut self, a: Lit, b: Lit) -> Lit {
        match Self::simplify(a, b) {
            Ok(l) => l,
            Err(key) => {
                if let Some(&l) = self.table.get(&key) {
                    return l;
                }
                let l = Lit::new(self.num_nodes(), false);
                self.ands.push(AndGate {
                    fanin0: key.0,
                    fanin1: key.1,
                });
                self.table.insert(key, l);
                l
            }
        }
    }

    /// Result of `and(a, b)` if it needs no new gate.
    pub fn lookup_and(&self, a: Lit, b: Lit) -> Option<Lit> {
        match Self::simplify(a, b) {
            Ok(l) => Some(l),
            Err(key) => self.table.get(&key).copied(),
        }
    }

    pub fn or(&mut self, a: Lit, b: Lit) -> Lit {
        !self.and(!a, !b)
    }

    /// Three-gate xor: `!(a & b) & !(!a & !b)`.
    pub fn xor(&mut self, a: Lit, b: Lit) -> Lit {
        if a.is_const() {
            return b.xor_if(a == Lit::TRUE);
        }
        if b.is_const() {
            return a.xor_if(b == Lit::TRUE);
        }
        let both = self.and(a, b);
        let neither = self.and(!a, !b);
        self.and(!both, !neither)
    }

    pub fn xnor(&mut self, a: Lit, b: Lit) -> Lit {
        !self.xor(a, b)
    }

    /// `sel ? t : e`
    pub fn mux(&mut self, sel: Lit, t: Lit, e: Lit) -> Lit {
        let x = self.and(sel, t);
        let y = self.and(!sel, e);
        self.or(x, y)
    }

    pub fn and_many(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(Lit::TRUE, |acc, &l| self.and(acc, l))
    }

    pub fn or_many(&mut self, lits: &[Lit]) -> Lit {
        lits.iter().fold(Lit::FALSE, |acc, &l| self.or(acc, l))
    }

    pub fn add_output(&mut self, lit: Lit) {
        self.outputs.push(lit);
    }

    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    pub fn set_outputs(&mut self, outputs: Vec<Lit>) {
        self.outputs = outputs;
    }

    /// Finishes construction. Dangling gates are kept; see [`super::cleanup`].
    pub fn build(self) -> Aig {
        Aig {
            num_inputs: self.num_inputs,
            ands: self.ands,
            outputs: self.outputs,
            symbols: Vec::new(),
            comment: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashing_and_folding() {
        let mut b = AigBuilder::new(2);
        let (x, y) = (b.input(0), b.input(1));
        let g = b.and(x, y);
        assert_eq!(b.and(y, x), g);
        assert_eq!(b.and(x, x), x);
        assert_eq!(b.and(x, !x), Lit::FALSE);
        assert_eq!(b.and(x, Lit::TRUE), x);
        assert_eq!(b.and(Lit::FALSE, y), Lit::FALSE);
        assert_eq!(b.num_ands(), 1);
        assert_eq!(b.lookup_and(y, x), Some(g));
        assert_eq!(b.lookup_and(!y, x), None);
    }

    #[test]
    fn xor_uses_three_gates() {
        let mut b = AigBuilder::new(2);
        let (x, y) = (b.input(0), b.input(1));
        b.xor(x, y);
        assert_eq!(b.num_ands(), 3);
        assert_eq!(b.xor(x, Lit::TRUE), !x);
    }
}
