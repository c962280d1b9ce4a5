// SPDX-License-Identifier: Apache-2.0

use rustc_hash::FxHashMap;

use crate::aig::{AigBuilder, Lit};

use super::InstantiationLog;

/// Builder plus cell log shared by the three generator stages.
pub(crate) struct Netlist {
    pub b: AigBuilder,
    pub log: InstantiationLog,
    /// Number of product columns; carries into column `cols` are dropped.
    pub cols: usize,
    /// Logged half adders by carry: `(inputs, sum)`.
    ha_by_carry: FxHashMap<Lit, ([Lit; 2], Lit)>,
}

fn distinct(lits: &[Lit]) -> bool {
    lits.iter()
        .enumerate()
        .all(|(i, x)| lits[..i].iter().all(|y| x.node() != y.node()))
}

impl Netlist {
    pub fn new(num_inputs: usize, cols: usize) -> Netlist {
        Netlist {
            b: AigBuilder::new(num_inputs),
            log: InstantiationLog::default(),
            cols,
            ha_by_carry: FxHashMap::default(),
        }
    }

    /// Half adder `(sum, carry)`. Logged when both operands are live signals
    /// and the carry is consumed.
    ///
    /// Adding the carries of two chained half adders, `a & b` and
    /// `(a ^ b) & d`, is an OR since they never coincide; together the three
    /// cells are the full adder over `a, b, d`, and are logged as one.
    pub fn ha(&mut self, x: Lit, y: Lit, carry_live: bool) -> (Lit, Lit) {
        if let (Some(&(ix, sx)), Some(&(iy, sy))) = (self.ha_by_carry.get(&x), self.ha_by_carry.get(&y)) {
            if iy.contains(&sx) || ix.contains(&sy) {
                self.ha_by_carry.remove(&x);
                self.ha_by_carry.remove(&y);
                self.log.half_adders -= 2;
                self.log.full_adders += 1;
                return (self.b.or(x, y), Lit::FALSE);
            }
        }
        let s = self.b.xor(x, y);
        let c = self.b.and(x, y);
        if carry_live && !x.is_const() && !y.is_const() && distinct(&[x, y]) {
            self.log.half_adders += 1;
            self.ha_by_carry.insert(c, ([x, y], s));
        }
        (s, c)
    }

    /// Full adder `(sum, carry, propagate)` with propagate `x ^ y`.
    ///
    /// The carry is `(x & y) | ((x ^ y) & z)`; both and-terms are shared with
    /// the xor gates, 7 and-gates in total.
    pub fn fa(&mut self, x: Lit, y: Lit, z: Lit, carry_live: bool) -> (Lit, Lit, Lit) {
        let ops = [x, y, z];
        if let Some(k) = ops.iter().position(|&l| l == Lit::FALSE) {
            let rest: Vec<Lit> = (0..3).filter(|&i| i != k).map(|i| ops[i]).collect();
            let (s, c) = self.ha(rest[0], rest[1], carry_live);
            let p = if k == 2 { s } else { self.b.xor(x, y) };
            return (s, c, p);
        }
        let t = self.b.xor(x, y);
        let s = self.b.xor(t, z);
        let g = self.b.and(x, y);
        let tz = self.b.and(t, z);
        let c = self.b.or(g, tz);
        if carry_live && !ops.iter().any(|l| l.is_const()) && distinct(&ops) {
            self.log.full_adders += 1;
        }
        (s, c, t)
    }
}
