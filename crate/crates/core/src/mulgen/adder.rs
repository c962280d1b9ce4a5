// SPDX-License-Identifier: Apache-2.0

//! Final-stage adders.
//!
//! Every adder computes the carries `c[1..=m]` of positions `0..m` and then
//! the sums `s_i = (x_i ^ y_i) ^ c_i`. A carry built as
//! `g_i | (p_i & c_i)` directly from the final carry-in of its position is
//! the carry of a full adder; those positions are logged as full adders, the
//! others as the half adders producing `(p_i, g_i)`.

use crate::aig::{cleanup, Aig, Lit};

use super::cells::Netlist;
use super::{FsaKind, GenError};

const GROUP: usize = 4;

/// Two-operand adder with `width + 1` outputs (sum bits then carry-out).
pub fn generate_adder(fsa: FsaKind, width: usize) -> Result<Aig, GenError> {
    if width == 0 || width > 1 << 16 {
        return Err(GenError::Unsupported {
            label: format!("{fsa}_{width}"),
            reason: "adder width must be in 1..=65536".into(),
        });
    }
    let mut net = Netlist::new(2 * width, width + 1);
    let x: Vec<Lit> = (0..width).map(|i| net.b.input(i)).collect();
    let y: Vec<Lit> = (0..width).map(|i| net.b.input(width + i)).collect();
    let out = add(&mut net, fsa, &x, &y, true);
    net.b.set_outputs(out);
    Ok(cleanup(&net.b.build()))
}

/// Adds the two reduced rows of a multiplier; the carry out of the top
/// column is dropped. Columns below the first one holding two bits pass
/// through.
pub(crate) fn final_stage(net: &mut Netlist, fsa: FsaKind, x: &[Lit], y: &[Lit]) -> Vec<Lit> {
    let n = x.len();
    let lo = (0..n)
        .find(|&c| x[c] != Lit::FALSE && y[c] != Lit::FALSE)
        .unwrap_or(n);
    let mut out: Vec<Lit> = (0..lo).map(|c| if x[c] == Lit::FALSE { y[c] } else { x[c] }).collect();
    if lo < n {
        out.extend(add(net, fsa, &x[lo..], &y[lo..], false));
    }
    out
}

fn add(net: &mut Netlist, fsa: FsaKind, x: &[Lit], y: &[Lit], carry_out: bool) -> Vec<Lit> {
    let w = x.len();
    let m = if carry_out { w } else { w - 1 };
    let (props, carries) = match fsa {
        FsaKind::RippleCarry => ripple(net, x, y, m),
        FsaKind::CarrySkip => carry_skip(net, x, y, m),
        FsaKind::CarryLookAhead => lookahead(net, x, y, m),
        _ => prefix(net, fsa, x, y, m),
    };
    let mut out: Vec<Lit> = (0..w).map(|i| net.b.xor(props[i], carries[i])).collect();
    if carry_out {
        out.push(carries[w]);
    }
    out
}

fn live(l: Lit) -> bool {
    !l.is_const()
}

/// Logs position `(x, y)` with carry-in `cin` and carry-out `cout`. The
/// position is a full adder when `cout` is structurally `g | (p & cin)`.
fn log_position(net: &mut Netlist, x: Lit, y: Lit, p: Lit, cin: Lit, cout: Lit) {
    let both = live(x) && live(y) && x.node() != y.node();
    let one = live(x) != live(y) && (x == Lit::FALSE || y == Lit::FALSE);
    let direct = live(cin) && {
        let g = net.b.lookup_and(x, y);
        let t = net.b.lookup_and(p, cin);
        match (g, t) {
            (Some(g), Some(t)) => net.b.lookup_and(!g, !t).map(|l| !l) == Some(cout),
            _ => false,
        }
    };
    if direct {
        if both {
            net.log.full_adders += 1;
        } else if one {
            net.log.half_adders += 1;
        }
    } else if both {
        net.log.half_adders += 1;
    }
}

fn ripple(net: &mut Netlist, x: &[Lit], y: &[Lit], m: usize) -> (Vec<Lit>, Vec<Lit>) {
    let w = x.len();
    let mut props = Vec::with_capacity(w);
    let mut c = vec![Lit::FALSE; w + 1];
    for i in 0..w {
        if i < m {
            let (_, cy, p) = net.fa(x[i], y[i], c[i], true);
            c[i + 1] = cy;
            props.push(p);
        } else {
            props.push(net.b.xor(x[i], y[i]));
        }
    }
    (props, c)
}

/// Ripple blocks of four with a skip path `c_out = ripple | (P & c_in)`.
fn carry_skip(net: &mut Netlist, x: &[Lit], y: &[Lit], m: usize) -> (Vec<Lit>, Vec<Lit>) {
    let w = x.len();
    let mut props = Vec::with_capacity(w);
    let mut c = vec![Lit::FALSE; w + 1];
    for start in (0..w).step_by(GROUP) {
        let end = (start + GROUP).min(w);
        let cin = c[start];
        let mut rc = cin;
        for i in start..end {
            if i < m {
                let (_, cy, p) = net.fa(x[i], y[i], rc, true);
                rc = cy;
                c[i + 1] = cy;
                props.push(p);
            } else {
                props.push(net.b.xor(x[i], y[i]));
            }
        }
        if end <= m && live(cin) {
            let block_p = net.b.and_many(&props[start..end]);
            let skip = net.b.and(block_p, cin);
            c[end] = net.b.or(rc, skip);
        }
    }
    (props, c)
}

/// 4-bit lookahead groups rippled at group level; carries inside a group are
/// two-level sums of products over the group's `(p, g)` and carry-in.
fn lookahead(net: &mut Netlist, x: &[Lit], y: &[Lit], m: usize) -> (Vec<Lit>, Vec<Lit>) {
    let w = x.len();
    let props: Vec<Lit> = (0..w).map(|i| net.b.xor(x[i], y[i])).collect();
    let gens: Vec<Lit> = (0..w)
        .map(|i| if i < m { net.b.and(x[i], y[i]) } else { Lit::FALSE })
        .collect();
    let mut c = vec![Lit::FALSE; w + 1];
    for start in (0..m).step_by(GROUP) {
        let end = (start + GROUP).min(m);
        let cin = c[start];
        for j in start..end {
            let mut terms = vec![gens[j]];
            let mut prod = props[j];
            for k in (start..j).rev() {
                terms.push(net.b.and(prod, gens[k]));
                prod = net.b.and(prod, props[k]);
            }
            terms.push(net.b.and(prod, cin));
            c[j + 1] = net.b.or_many(&terms);
            log_position(net, x[j], y[j], props[j], c[j], c[j + 1]);
        }
    }
    (props, c)
}

#[derive(Clone, Copy, Debug)]
struct Span {
    g: Lit,
    p: Lit,
    lo: usize,
}

struct Prefix<'a> {
    net: &'a mut Netlist,
    nodes: Vec<Span>,
}

impl Prefix<'_> {
    /// `(g, p)[i:lo.lo] = (g_hi | p_hi & g_lo, p_hi & p_lo)`.
    fn combine(&mut self, i: usize, lo: Span) -> Span {
        let hi = self.nodes[i];
        let t = self.net.b.and(hi.p, lo.g);
        let g = self.net.b.or(hi.g, t);
        let p = if lo.lo == 0 {
            Lit::FALSE
        } else {
            self.net.b.and(hi.p, lo.p)
        };
        self.net.log.prefix_cells += 1;
        Span { g, p, lo: lo.lo }
    }

    fn apply(&mut self, i: usize, j: usize) {
        let lo = self.nodes[j];
        debug_assert_eq!(self.nodes[i].lo, j + 1, "prefix spans must abut");
        self.nodes[i] = self.combine(i, lo);
    }
}

fn prefix(net: &mut Netlist, fsa: FsaKind, x: &[Lit], y: &[Lit], m: usize) -> (Vec<Lit>, Vec<Lit>) {
    let w = x.len();
    let props: Vec<Lit> = (0..w).map(|i| net.b.xor(x[i], y[i])).collect();
    let mut nodes = Vec::with_capacity(m);
    for i in 0..m {
        let g = net.b.and(x[i], y[i]);
        let p = if fsa == FsaKind::SerialPrefix {
            net.b.or(x[i], y[i])
        } else {
            props[i]
        };
        nodes.push(Span { g, p, lo: i });
    }
    let mut pf = Prefix {
        net,
        nodes,
    };
    match fsa {
        FsaKind::SerialPrefix => {
            for i in 1..m {
                pf.apply(i, i - 1);
            }
        }
        FsaKind::Sklansky => sklansky(&mut pf, &(0..m).collect::<Vec<_>>()),
        FsaKind::KoggeStone => kogge_stone(&mut pf, &(0..m).collect::<Vec<_>>()),
        FsaKind::BrentKung => {
            let mut d = 1;
            while d < m {
                for i in (2 * d - 1..m).step_by(2 * d) {
                    pf.apply(i, i - d);
                }
                d *= 2;
            }
            d /= 2;
            while d >= 1 {
                if 3 * d - 1 < m {
                    for i in (3 * d - 1..m).step_by(2 * d) {
                        pf.apply(i, i - d);
                    }
                }
                d /= 2;
            }
        }
        FsaKind::HanCarlson | FsaKind::LadnerFischer => {
            for i in (1..m).step_by(2) {
                pf.apply(i, i - 1);
            }
            let odd: Vec<usize> = (1..m).step_by(2).collect();
            if fsa == FsaKind::HanCarlson {
                kogge_stone(&mut pf, &odd);
            } else {
                sklansky(&mut pf, &odd);
            }
            for i in (2..m).step_by(2) {
                pf.apply(i, i - 1);
            }
        }
        _ => unreachable!("not a prefix adder"),
    }
    let mut c = vec![Lit::FALSE; w + 1];
    for i in 0..m {
        debug_assert_eq!(pf.nodes[i].lo, 0);
        c[i + 1] = pf.nodes[i].g;
        let p = if fsa == FsaKind::SerialPrefix {
            !pf.net.b.lookup_and(!x[i], !y[i]).unwrap_or(Lit::TRUE)
        } else {
            props[i]
        };
        log_position(pf.net, x[i], y[i], p, c[i], c[i + 1]);
    }
    (props, c)
}

/// Sklansky over the positions `pos`, whose spans tile the range below the
/// first of them.
fn sklansky(pf: &mut Prefix<'_>, pos: &[usize]) {
    let k = pos.len();
    let mut step = 1;
    while step < k {
        for q in 0..k {
            if q & step != 0 {
                let j = (q & !(2 * step - 1)) + step - 1;
                pf.apply(pos[q], pos[j]);
            }
        }
        step *= 2;
    }
}

fn kogge_stone(pf: &mut Prefix<'_>, pos: &[usize]) {
    let k = pos.len();
    let mut d = 1;
    while d < k {
        let old = pf.nodes.clone();
        for q in (d..k).rev() {
            let (i, j) = (pos[q], pos[q - d]);
            debug_assert_eq!(pf.nodes[i].lo, j + 1);
            pf.nodes[i] = pf.combine(i, old[j]);
        }
        d *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{max_output_level, simulate};

    fn exhaustive_add(aig: &Aig, w: usize) {
        let total = 1usize << (2 * w);
        for base in (0..total).step_by(64) {
            let inputs: Vec<Vec<u64>> = (0..2 * w)
                .map(|i| {
                    let mut word = 0u64;
                    for p in 0..64.min(total - base) {
                        word |= ((((base + p) >> i) & 1) as u64) << p;
                    }
                    vec![word]
                })
                .collect();
            let out = simulate(aig, &inputs).unwrap();
            for p in 0..64.min(total - base) {
                let v = base + p;
                let (a, b) = (v & ((1 << w) - 1), v >> w);
                let s: usize = (0..=w).map(|k| (((out[k][0] >> p) & 1) as usize) << k).sum();
                assert_eq!(s, a + b, "{a} + {b}");
            }
        }
    }

    #[test]
    fn all_adders_add() {
        for fsa in FsaKind::ALL {
            for w in 1..=7 {
                let aig = generate_adder(fsa, w).unwrap();
                assert_eq!(aig.num_outputs(), w + 1);
                exhaustive_add(&aig, w);
            }
        }
    }

    #[test]
    fn kogge_stone_is_shallower_than_ripple() {
        let ks = generate_adder(FsaKind::KoggeStone, 8).unwrap();
        let rc = generate_adder(FsaKind::RippleCarry, 8).unwrap();
        assert!(max_output_level(&ks) < max_output_level(&rc));
    }

    #[test]
    fn tree_adders_differ() {
        let mut sizes: Vec<usize> = FsaKind::TREE
            .iter()
            .map(|&k| generate_adder(k, 16).unwrap().num_ands())
            .collect();
        sizes.dedup();
        assert!(sizes.len() >= 3, "{sizes:?}");
        assert!(generate_adder(FsaKind::RippleCarry, 0).is_err());
    }
}
