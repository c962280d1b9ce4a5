// SPDX-License-Identifier: Apache-2.0

//! Partial-product accumulators: reduce the matrix to two addend rows.

use std::collections::VecDeque;

use crate::aig::Lit;

use super::cells::Netlist;
use super::ppg::Rows;
use super::PpaKind;

type Columns = Vec<Vec<Lit>>;

pub(crate) fn reduce(net: &mut Netlist, kind: PpaKind, rows: &Rows) -> [Vec<Lit>; 2] {
    let cols = match kind {
        PpaKind::Array => return array(net, rows),
        PpaKind::Wallace => wallace(net, to_columns(net.cols, rows), false),
        PpaKind::Dadda => dadda(net, to_columns(net.cols, rows)),
        PpaKind::Compressor4to2 => compressor42(net, to_columns(net.cols, rows)),
        PpaKind::CounterWallace => wallace(net, to_columns(net.cols, rows), true),
    };
    let mut out = [vec![Lit::FALSE; net.cols], vec![Lit::FALSE; net.cols]];
    for (c, bits) in cols.iter().enumerate() {
        assert!(bits.len() <= 2, "column {c} left with {} bits", bits.len());
        for (r, &l) in bits.iter().enumerate() {
            out[r][c] = l;
        }
    }
    out
}

fn to_columns(n: usize, rows: &Rows) -> Columns {
    let mut cols = vec![Vec::new(); n];
    for row in rows {
        for &(c, l) in row {
            if c < n && l != Lit::FALSE {
                cols[c].push(l);
            }
        }
    }
    cols
}

fn height(cols: &Columns) -> usize {
    cols.iter().map(Vec::len).max().unwrap_or(0)
}

/// Carry-save array: each row is added into a running (sum, carry) pair.
fn array(net: &mut Netlist, rows: &Rows) -> [Vec<Lit>; 2] {
    let n = net.cols;
    let mut sum = vec![Lit::FALSE; n];
    let mut carry = vec![Lit::FALSE; n];
    let mut rows = rows.iter();
    if let Some(first) = rows.next() {
        for &(c, l) in first {
            sum[c] = l;
        }
    }
    for row in rows {
        let mut r = vec![Lit::FALSE; n];
        for &(c, l) in row {
            debug_assert_eq!(r[c], Lit::FALSE);
            r[c] = l;
        }
        let mut ns = vec![Lit::FALSE; n];
        let mut nc = vec![Lit::FALSE; n];
        for c in 0..n {
            let bits: Vec<Lit> = [sum[c], carry[c], r[c]]
                .into_iter()
                .filter(|&l| l != Lit::FALSE)
                .collect();
            let live = c + 1 < n;
            match bits.len() {
                3 => {
                    let (s, cy, _) = net.fa(bits[0], bits[1], bits[2], live);
                    ns[c] = s;
                    if live {
                        nc[c + 1] = cy;
                    }
                }
                2 => {
                    let (s, cy) = net.ha(bits[0], bits[1], live);
                    ns[c] = s;
                    if live {
                        nc[c + 1] = cy;
                    }
                }
                1 => ns[c] = bits[0],
                _ => {}
            }
        }
        sum = ns;
        carry = nc;
    }
    [sum, carry]
}

/// Wallace tree: every stage compresses each column greedily with full
/// adders (or 7:3 counters first when `counters` is set) and a trailing
/// half adder.
fn wallace(net: &mut Netlist, mut cols: Columns, counters: bool) -> Columns {
    let n = net.cols;
    while height(&cols) > 2 {
        let mut next: Columns = vec![Vec::new(); n];
        for c in 0..n {
            let bits = std::mem::take(&mut cols[c]);
            let mut i = 0;
            if counters && c + 2 < n {
                while bits.len() - i >= 7 {
                    let [s, t, u] = counter73(net, &bits[i..i + 7]);
                    i += 7;
                    next[c].push(s);
                    next[c + 1].push(t);
                    next[c + 2].push(u);
                }
            }
            while bits.len() - i >= 3 {
                let live = c + 1 < n;
                let (s, cy, _) = net.fa(bits[i], bits[i + 1], bits[i + 2], live);
                i += 3;
                next[c].push(s);
                if live {
                    next[c + 1].push(cy);
                }
            }
            if bits.len() - i == 2 {
                let live = c + 1 < n;
                let (s, cy) = net.ha(bits[i], bits[i + 1], live);
                next[c].push(s);
                if live {
                    next[c + 1].push(cy);
                }
            } else if bits.len() - i == 1 {
                next[c].push(bits[i]);
            }
        }
        cols = next;
    }
    cols
}

/// (7:3) counter from four full adders: weights 1, 2 and 4.
fn counter73(net: &mut Netlist, x: &[Lit]) -> [Lit; 3] {
    net.log.counters += 1;
    let (s1, c1, _) = net.fa(x[0], x[1], x[2], true);
    let (s2, c2, _) = net.fa(x[3], x[4], x[5], true);
    let (s, c3, _) = net.fa(s1, s2, x[6], true);
    let (t, u, _) = net.fa(c1, c2, c3, true);
    [s, t, u]
}

/// Dadda tree: stage targets 2, 3, 4, 6, 9, ... applied from the largest
/// below the current height, reducing only as much as each target needs.
fn dadda(net: &mut Netlist, mut cols: Columns) -> Columns {
    let n = net.cols;
    let mut targets = vec![2usize];
    while *targets.last().unwrap() < height(&cols) {
        let d = *targets.last().unwrap();
        targets.push(d * 3 / 2);
    }
    targets.pop();
    for &d in targets.iter().rev() {
        let mut next: Columns = vec![Vec::new(); n];
        let mut incoming = vec![0usize; n + 1];
        for c in 0..n {
            let bits = std::mem::take(&mut cols[c]);
            let mut i = 0;
            let mut h = bits.len() + incoming[c];
            let live = c + 1 < n;
            while h > d && bits.len() - i >= 2 {
                if h == d + 1 || bits.len() - i == 2 {
                    let (s, cy) = net.ha(bits[i], bits[i + 1], live);
                    i += 2;
                    h -= 1;
                    next[c].push(s);
                    if live {
                        next[c + 1].push(cy);
                        incoming[c + 1] += 1;
                    }
                } else {
                    let (s, cy, _) = net.fa(bits[i], bits[i + 1], bits[i + 2], live);
                    i += 3;
                    h -= 2;
                    next[c].push(s);
                    if live {
                        next[c + 1].push(cy);
                        incoming[c + 1] += 1;
                    }
                }
            }
            next[c].extend_from_slice(&bits[i..]);
        }
        cols = next;
    }
    debug_assert!(height(&cols) <= 2);
    cols
}

/// Tree of 4:2 compressors, each two chained full adders with a horizontal
/// carry into the next column's compressor.
fn compressor42(net: &mut Netlist, mut cols: Columns) -> Columns {
    let n = net.cols;
    while height(&cols) > 2 {
        let mut next: Columns = vec![Vec::new(); n];
        let mut cins: Vec<VecDeque<Lit>> = vec![VecDeque::new(); n + 1];
        for c in 0..n {
            let bits = std::mem::take(&mut cols[c]);
            let live = c + 1 < n;
            let mut i = 0;
            while bits.len() - i >= 4 {
                let cin = cins[c].pop_front().unwrap_or(Lit::FALSE);
                let (s1, cout, _) = net.fa(bits[i], bits[i + 1], bits[i + 2], live);
                let (s, cy, _) = net.fa(s1, bits[i + 3], cin, live);
                i += 4;
                if live {
                    net.log.compressors += 1;
                    next[c + 1].push(cy);
                    cins[c + 1].push_back(cout);
                }
                next[c].push(s);
            }
            let mut rest: Vec<Lit> = bits[i..].to_vec();
            rest.extend(cins[c].drain(..));
            let mut j = 0;
            while rest.len() - j >= 3 {
                let (s, cy, _) = net.fa(rest[j], rest[j + 1], rest[j + 2], live);
                j += 3;
                next[c].push(s);
                if live {
                    next[c + 1].push(cy);
                }
            }
            next[c].extend_from_slice(&rest[j..]);
        }
        cols = next;
    }
    cols
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dadda_targets_follow_the_sequence() {
        // 8 bits in one column: targets 6, 4, 3, 2.
        let mut net = Netlist::new(8, 4);
        let bits: Vec<Lit> = (0..8).map(|i| net.b.input(i)).collect();
        let cols = vec![bits, vec![], vec![], vec![]];
        let out = dadda(&mut net, cols);
        assert!(height(&out) <= 2);
    }

    #[test]
    fn counter_weights() {
        use crate::aig::simulate;
        let mut net = Netlist::new(7, 3);
        let x: Vec<Lit> = (0..7).map(|i| net.b.input(i)).collect();
        let out = counter73(&mut net, &x);
        for l in out {
            net.b.add_output(l);
        }
        let aig = net.b.build();
        let inputs: Vec<Vec<u64>> = (0..7)
            .map(|i| vec![(0..64u64).filter(|p| (p >> i) & 1 == 1).fold(0, |w, p| w | 1 << p)])
            .collect();
        // Only 6 inputs vary over 64 patterns; the 7th is stuck at 0.
        let out = simulate(&aig, &inputs).unwrap();
        for p in 0..64u64 {
            let v: u64 = (0..3).map(|k| ((out[k][0] >> p) & 1) << k).sum();
            assert_eq!(v, p.count_ones() as u64);
        }
        assert_eq!(net.log.full_adders, 4);
    }
}
