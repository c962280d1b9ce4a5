// SPDX-License-Identifier: Apache-2.0

//! Architecture recovery for optimized gate-level integer multipliers.
//!
//! An optimized multiplier is cut into a small LSB cone and a depth-bounded
//! MSB cone, arithmetic blocks are recovered by cut enumeration, and a
//! directional GraphSAGE classifier ranks the partial-product accumulator
//! and final-stage adder architectures. The best-ranked reference templates
//! are then checked against the circuit with SAT-based equivalence
//! checking.

pub mod aig;
pub mod mulgen;
pub mod blocks;
pub mod cones;
pub mod features;
pub mod obfuscate;
pub mod gnn;
pub mod cec;
pub mod pipeline;
