// SPDX-License-Identifier: Apache-2.0

//! Partial-product generators. Each row is a list of `(column, bit)`.

use crate::aig::Lit;

use super::cells::Netlist;

pub(crate) type Rows = Vec<Vec<(usize, Lit)>>;

/// `a_i & b_j` at column `i + j`, one row per multiplier bit.
pub(crate) fn simple(net: &mut Netlist, a: &[Lit], b: &[Lit]) -> Rows {
    b.iter()
        .enumerate()
        .map(|(j, &bj)| {
            a.iter()
                .enumerate()
                .map(|(i, &ai)| (i + j, net.b.and(ai, bj)))
                .collect()
        })
        .collect()
}

/// Radix-4 modified Booth recoding for unsigned operands.
///
/// Digit `i` examines `b[2i+1], b[2i], b[2i-1]`. Each row holds the
/// `N+1`-bit selected multiple, inverted when the digit is negative, and a
/// complemented sign bit at `N+1`; the `+1` of the two's complement goes into
/// the next row at column `2i`. The sign-extension constants of all rows are
/// folded into one constant row.
pub(crate) fn booth4(net: &mut Netlist, a: &[Lit], b: &[Lit]) -> Rows {
    let n = a.len();
    let cols = net.cols;
    let bit = |v: &[Lit], k: isize| -> Lit {
        if k < 0 || k as usize >= v.len() {
            Lit::FALSE
        } else {
            v[k as usize]
        }
    };
    let digits = n / 2 + 1;
    let mut rows: Rows = vec![Vec::new(); digits + 1];
    let mut constant: u128 = 0;
    let mut big_constant = vec![false; cols];
    for i in 0..digits {
        let k = 2 * i as isize;
        let (hi, mid, lo) = (bit(b, k + 1), bit(b, k), bit(b, k - 1));
        let one = net.b.xor(mid, lo);
        let all0 = net.b.and(!mid, !lo);
        let all1 = net.b.and(mid, lo);
        let two = net.b.mux(hi, all0, all1);
        let neg = hi;
        let row = &mut rows[i];
        for j in 0..=n {
            let x = net.b.and(one, bit(a, j as isize));
            let y = net.b.and(two, bit(a, j as isize - 1));
            let m = net.b.or(x, y);
            row.push((2 * i + j, net.b.xor(m, neg)));
        }
        if neg == Lit::FALSE {
            // A non-negative digit: the sign bit and its correction cancel.
            continue;
        }
        row.push((2 * i + n + 1, !neg));
        rows[i + 1].push((2 * i, neg));
        // -2^(N+1+2i), accumulated modulo 2^cols.
        let pos = n + 1 + 2 * i;
        if cols <= 127 {
            if pos < cols {
                constant = constant.wrapping_add(1u128 << pos);
            }
        } else if pos < cols {
            add_bit(&mut big_constant, pos);
        }
    }
    let const_bits: Vec<bool> = if cols <= 127 {
        let mask = (1u128 << cols) - 1;
        let v = constant.wrapping_neg() & mask;
        (0..cols).map(|c| (v >> c) & 1 == 1).collect()
    } else {
        negate(&big_constant)
    };
    let last = rows.last_mut().expect("constant row");
    for (c, &set) in const_bits.iter().enumerate() {
        if set {
            last.push((c, Lit::TRUE));
        }
    }
    for r in rows.iter_mut() {
        r.retain(|&(c, l)| c < cols && l != Lit::FALSE);
        r.sort_by_key(|&(c, _)| c);
    }
    rows.retain(|r| !r.is_empty());
    rows
}

fn add_bit(v: &mut [bool], mut pos: usize) {
    while pos < v.len() {
        v[pos] = !v[pos];
        if v[pos] {
            return;
        }
        pos += 1;
    }
}

/// Two's complement negation modulo `2^len`.
fn negate(v: &[bool]) -> Vec<bool> {
    let mut out: Vec<bool> = v.iter().map(|b| !b).collect();
    add_bit(&mut out, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_negation_matches_u128() {
        let mut v = vec![false; 200];
        add_bit(&mut v, 5);
        add_bit(&mut v, 7);
        add_bit(&mut v, 7);
        let n = negate(&v);
        let expect = (0u128.wrapping_sub((1 << 5) + (1 << 8))) as u128;
        for (i, &b) in n.iter().take(128).enumerate() {
            assert_eq!(b, (expect >> i) & 1 == 1, "bit {i}");
        }
        assert!(n[150]);
    }

    #[test]
    fn simple_rows_shape() {
        let mut net = Netlist::new(6, 6);
        let a: Vec<Lit> = (0..3).map(|i| net.b.input(i)).collect();
        let b: Vec<Lit> = (3..6).map(|i| net.b.input(i)).collect();
        let rows = simple(&mut net, &a, &b);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[2][0].0, 2);
        assert_eq!(net.b.num_ands(), 9);
    }
}
