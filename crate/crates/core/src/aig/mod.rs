// SPDX-License-Identifier: Apache-2.0

//! And-Inverter Graphs.
//!
//! Node ids are dense: `0` is the constant-false node, `1..=num_inputs` are
//! primary inputs and the and-gates follow in topological order. Complements
//! live on edges ([`Lit`]), never on nodes.

mod aiger;
mod analysis;
mod builder;
mod sim;

use std::fmt;
use std::ops::Not;

use thiserror::Error;

pub use aiger::{parse_aiger, read_aiger, write_aiger, AigerFormat};
pub use analysis::{
    cleanup, cleanup_with_map, fanout_counts, levels, logic_level, max_output_level, strash, support,
    support_size, CappedSupport,
};
pub use builder::AigBuilder;
pub use sim::{random_words, simulate, simulate_nodes, NodeValues, SimWords};

#[derive(Debug, Error)]
pub enum AigError {
    #[error("malformed AIGER header: {0}")]
    Header(String),
    #[error("sequential circuit: {0} latches (only combinational AIGs are supported)")]
    Sequential(usize),
    #[error("unsupported AIGER extension: {0}")]
    Extension(String),
    #[error("dangling literal {0}")]
    Dangling(u32),
    #[error("cyclic and-gate definitions")]
    Cycle,
    #[error("malformed AIGER body at line {line}: {msg}")]
    Body { line: usize, msg: String },
    #[error("unexpected end of binary AIGER data")]
    Truncated,
    #[error("expected {expected} input words, got {got}")]
    InputCount { expected: usize, got: usize },
    #[error("input words have inconsistent widths")]
    WordWidth,
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("invalid and-gate {node}: fanin {fanin} is not defined before it")]
    NotTopological { node: usize, fanin: Lit },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A node reference with an optional complement, encoded AIGER-style as
/// `2 * node + complemented`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lit(u32);

impl Lit {
    pub const FALSE: Lit = Lit(0);
    pub const TRUE: Lit = Lit(1);

    #[inline]
    pub fn new(node: usize, complemented: bool) -> Lit {
        Lit(((node as u32) << 1) | complemented as u32)
    }

    #[inline]
    pub fn from_raw(raw: u32) -> Lit {
        Lit(raw)
    }

    #[inline]
    pub fn raw(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn node(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    pub fn is_complemented(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    pub fn is_const(self) -> bool {
        self.0 < 2
    }

    /// Strips the complement.
    #[inline]
    pub fn regular(self) -> Lit {
        Lit(self.0 & !1)
    }

    /// Complements the literal when `cond` holds.
    #[inline]
    pub fn xor_if(self, cond: bool) -> Lit {
        Lit(self.0 ^ cond as u32)
    }
}

impl Not for Lit {
    type Output = Lit;
    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_complemented() {
            write!(f, "!n{}", self.node())
        } else {
            write!(f, "n{}", self.node())
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AndGate {
    pub fanin0: Lit,
    pub fanin1: Lit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Const,
    Input(usize),
    And(AndGate),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub index: usize,
    pub name: String,
}

/// Immutable combinational AIG.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Aig {
    num_inputs: usize,
    ands: Vec<AndGate>,
    outputs: Vec<Lit>,
    symbols: Vec<Symbol>,
    comment: Option<String>,
}

impl Aig {
    /// Builds an AIG from dense, topologically ordered parts.
    pub fn from_parts(
        num_inputs: usize,
        ands: Vec<AndGate>,
        outputs: Vec<Lit>,
    ) -> Result<Aig, AigError> {
        let aig = Aig {
            num_inputs,
            ands,
            outputs,
            symbols: Vec::new(),
            comment: None,
        };
        aig.validate()?;
        Ok(aig)
    }

    fn validate(&self) -> Result<(), AigError> {
        let first = self.first_and();
        for (i, g) in self.ands.iter().enumerate() {
            let node = first + i;
            for f in [g.fanin0, g.fanin1] {
                if f.node() >= node {
                    return Err(AigError::NotTopological { node, fanin: f });
                }
            }
        }
        let n = self.num_nodes();
        for &o in &self.outputs {
            if o.node() >= n {
                return Err(AigError::Dangling(o.raw()));
            }
        }
        Ok(())
    }

    pub fn with_symbols(mut self, symbols: Vec<Symbol>, comment: Option<String>) -> Aig {
        self.symbols = symbols;
        self.comment = comment;
        self
    }

    #[inline]
    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    #[inline]
    pub fn num_ands(&self) -> usize {
        self.ands.len()
    }

    #[inline]
    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Constant + inputs + and-gates.
    #[inline]
    pub fn num_nodes(&self) -> usize {
        1 + self.num_inputs + self.ands.len()
    }

    #[inline]
    pub fn first_and(&self) -> usize {
        1 + self.num_inputs
    }

    #[inline]
    pub fn input(&self, i: usize) -> Lit {
        Lit::new(1 + i, false)
    }

    pub fn input_ids(&self) -> impl Iterator<Item = usize> {
        1..=self.num_inputs
    }

    pub fn and_ids(&self) -> std::ops::Range<usize> {
        self.first_and()..self.num_nodes()
    }

    #[inline]
    pub fn outputs(&self) -> &[Lit] {
        &self.outputs
    }

    #[inline]
    pub fn ands(&self) -> &[AndGate] {
        &self.ands
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn comment(&self) -> Option<&str> {
        self.comment.as_deref()
    }

    #[inline]
    pub fn is_input(&self, node: usize) -> bool {
        node >= 1 && node <= self.num_inputs
    }

    #[inline]
    pub fn is_and(&self, node: usize) -> bool {
        node > self.num_inputs && node < self.num_nodes()
    }

    /// Gate of an and-node. Panics if `node` is not an and-gate.
    #[inline]
    pub fn gate(&self, node: usize) -> AndGate {
        self.ands[node - self.first_and()]
    }

    #[inline]
    pub fn fanins(&self, node: usize) -> [Lit; 2] {
        let g = self.gate(node);
        [g.fanin0, g.fanin1]
    }

    pub fn kind(&self, node: usize) -> Result<NodeKind, AigError> {
        if node == 0 {
            Ok(NodeKind::Const)
        } else if self.is_input(node) {
            Ok(NodeKind::Input(node - 1))
        } else if self.is_and(node) {
            Ok(NodeKind::And(self.gate(node)))
        } else {
            Err(AigError::UnknownNode(node))
        }
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<(), AigError> {
        if node < self.num_nodes() {
            Ok(())
        } else {
            Err(AigError::UnknownNode(node))
        }
    }

    /// Replaces the output list, keeping the node set.
    pub fn with_outputs(&self, outputs: Vec<Lit>) -> Result<Aig, AigError> {
        Aig::from_parts(self.num_inputs, self.ands.clone(), outputs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_encoding() {
        let l = Lit::new(3, true);
        assert_eq!(l.raw(), 7);
        assert_eq!(l.node(), 3);
        assert!(l.is_complemented());
        assert_eq!(!l, Lit::new(3, false));
        assert_eq!(!Lit::FALSE, Lit::TRUE);
        assert_eq!(Lit::TRUE.node(), 0);
    }

    #[test]
    fn from_parts_rejects_forward_references() {
        let bad = vec![AndGate {
            fanin0: Lit::new(1, false),
            fanin1: Lit::new(3, false),
        }];
        assert!(matches!(
            Aig::from_parts(1, bad, vec![]),
            Err(AigError::NotTopological { node: 2, .. })
        ));
    }
}
