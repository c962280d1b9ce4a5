// SPDX-License-Identifier: Apache-2.0

//! Reference multiplier generation.
//!
//! A multiplier is composed from three independent stages: a partial-product
//! generator (PPG), a partial-product accumulator (PPA) reducing the matrix
//! to two rows, and a final-stage adder (FSA). Operand `a` occupies inputs
//! `0..N`, operand `b` inputs `N..2N`, both LSB first; the `2N` outputs are
//! the product bits, LSB first.

mod adder;
mod cells;
mod check;
mod library;
mod ppa;
mod ppg;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{cleanup_with_map, Aig, AigError, Lit, Symbol, SymbolKind};

pub use adder::generate_adder;
pub use check::{exhaustive_multiplier_check, random_multiplier_check, MultiplierMismatch};
pub use library::{
    build_template_library, lookup_templates, LibraryEntry, LibraryIndex, TemplateLookup,
    INDEX_FILE,
};

use cells::Netlist;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unsupported configuration {label}: {reason}")]
    Unsupported { label: String, reason: String },
    #[error("unknown architecture code `{0}`")]
    Parse(String),
    #[error("template {label} failed its self-check ({detail})")]
    SelfCheck { label: String, detail: String },
    #[error("no template for width {width} in the library")]
    NoTemplate { width: usize },
    #[error("malformed library index at line {line}: {msg}")]
    Index { line: usize, msg: String },
    #[error(transparent)]
    Aig(#[from] AigError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PpgKind {
    Simple,
    /// Radix-4 modified Booth.
    Booth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PpaKind {
    Array,
    Wallace,
    Dadda,
    Compressor4to2,
    CounterWallace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FsaKind {
    RippleCarry,
    CarryLookAhead,
    CarrySkip,
    SerialPrefix,
    BrentKung,
    Sklansky,
    HanCarlson,
    LadnerFischer,
    KoggeStone,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Topology {
    NonTree,
    Tree,
}

impl PpgKind {
    pub const ALL: [PpgKind; 2] = [PpgKind::Simple, PpgKind::Booth];

    pub fn code(self) -> &'static str {
        match self {
            PpgKind::Simple => "SP",
            PpgKind::Booth => "BP",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl PpaKind {
    pub const ALL: [PpaKind; 5] = [
        PpaKind::Array,
        PpaKind::Wallace,
        PpaKind::Dadda,
        PpaKind::Compressor4to2,
        PpaKind::CounterWallace,
    ];

    pub fn code(self) -> &'static str {
        match self {
            PpaKind::Array => "AR",
            PpaKind::Wallace => "WT",
            PpaKind::Dadda => "DT",
            PpaKind::Compressor4to2 => "4to2",
            PpaKind::CounterWallace => "CWT",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<PpaKind> {
        Self::ALL.get(i).copied()
    }
}

impl FsaKind {
    pub const ALL: [FsaKind; 9] = [
        FsaKind::RippleCarry,
        FsaKind::CarryLookAhead,
        FsaKind::CarrySkip,
        FsaKind::SerialPrefix,
        FsaKind::BrentKung,
        FsaKind::Sklansky,
        FsaKind::HanCarlson,
        FsaKind::LadnerFischer,
        FsaKind::KoggeStone,
    ];
    pub const NON_TREE: [FsaKind; 4] = [
        FsaKind::RippleCarry,
        FsaKind::CarryLookAhead,
        FsaKind::CarrySkip,
        FsaKind::SerialPrefix,
    ];
    pub const TREE: [FsaKind; 5] = [
        FsaKind::BrentKung,
        FsaKind::Sklansky,
        FsaKind::HanCarlson,
        FsaKind::LadnerFischer,
        FsaKind::KoggeStone,
    ];

    pub fn code(self) -> &'static str {
        match self {
            FsaKind::RippleCarry => "RC",
            FsaKind::CarryLookAhead => "CL",
            FsaKind::CarrySkip => "CK",
            FsaKind::SerialPrefix => "SE",
            FsaKind::BrentKung => "BK",
            FsaKind::Sklansky => "SK",
            FsaKind::HanCarlson => "HC",
            FsaKind::LadnerFischer => "LF",
            FsaKind::KoggeStone => "KS",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<FsaKind> {
        Self::ALL.get(i).copied()
    }

    pub fn topology(self) -> Topology {
        if (self as usize) < 4 {
            Topology::NonTree
        } else {
            Topology::Tree
        }
    }

    /// Position within its topology category.
    pub fn subtype_index(self) -> usize {
        match self.topology() {
            Topology::NonTree => self as usize,
            Topology::Tree => self as usize - 4,
        }
    }

    pub fn from_subtype(topo: Topology, i: usize) -> Option<FsaKind> {
        match topo {
            Topology::NonTree => Self::NON_TREE.get(i).copied(),
            Topology::Tree => Self::TREE.get(i).copied(),
        }
    }
}

impl Topology {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn classes(self) -> usize {
        match self {
            Topology::NonTree => 4,
            Topology::Tree => 5,
        }
    }
}

macro_rules! code_parse {
    ($t:ty) => {
        impl FromStr for $t {
            type Err = GenError;
            fn from_str(s: &str) -> Result<Self, GenError> {
                <$t>::ALL
                    .iter()
                    .copied()
                    .find(|k| k.code().eq_ignore_ascii_case(s))
                    .ok_or_else(|| GenError::Parse(s.to_string()))
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.code())
            }
        }
    };
}

code_parse!(PpgKind);
code_parse!(PpaKind);
code_parse!(FsaKind);

/// Architecture triple without a width, e.g. `SP_WT_BK`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Architecture {
    pub ppg: PpgKind,
    pub ppa: PpaKind,
    pub fsa: FsaKind,
}

impl Architecture {
    pub fn new(ppg: PpgKind, ppa: PpaKind, fsa: FsaKind) -> Architecture {
        Architecture { ppg, ppa, fsa }
    }

    /// The full 2 x 5 x 9 grid in a fixed order.
    pub fn all() -> Vec<Architecture> {
        let mut out = Vec::with_capacity(90);
        for ppg in PpgKind::ALL {
            for ppa in PpaKind::ALL {
                for fsa in FsaKind::ALL {
                    out.push(Architecture { ppg, ppa, fsa });
                }
            }
        }
        out
    }

    pub fn with_width(self, width: usize) -> ArchitectureLabel {
        ArchitectureLabel { arch: self, width }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_{}", self.ppg, self.ppa, self.fsa)
    }
}

impl FromStr for Architecture {
    type Err = GenError;
    fn from_str(s: &str) -> Result<Architecture, GenError> {
        let parts: Vec<&str> = s.split('_').collect();
        if parts.len() != 3 {
            return Err(GenError::Parse(s.to_string()));
        }
        Ok(Architecture {
            ppg: parts[0].parse()?,
            ppa: parts[1].parse()?,
            fsa: parts[2].parse()?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArchitectureLabel {
    pub arch: Architecture,
    pub width: usize,
}

impl ArchitectureLabel {
    pub fn new(ppg: PpgKind, ppa: PpaKind, fsa: FsaKind, width: usize) -> ArchitectureLabel {
        Architecture::new(ppg, ppa, fsa).with_width(width)
    }

    pub fn file_name(&self) -> String {
        format!("{self}.aig")
    }
}

impl fmt::Display for ArchitectureLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.arch, self.width)
    }
}

impl FromStr for ArchitectureLabel {
    type Err = GenError;
    fn from_str(s: &str) -> Result<ArchitectureLabel, GenError> {
        let s = s.strip_suffix(".aig").unwrap_or(s);
        let (arch, width) = s
            .rsplit_once('_')
            .ok_or_else(|| GenError::Parse(s.to_string()))?;
        let width = width.parse().map_err(|_| GenError::Parse(s.to_string()))?;
        Ok(ArchitectureLabel {
            arch: arch.parse()?,
            width,
        })
    }
}

/// Cells emitted while generating a template.
///
/// Only cells whose carry is consumed are counted; a cell degenerated by a
/// constant operand (e.g. a full adder with a zero input) is counted as the
/// smaller cell it becomes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstantiationLog {
    pub half_adders: usize,
    pub full_adders: usize,
    pub compressors: usize,
    pub counters: usize,
    pub prefix_cells: usize,
}

/// A generated multiplier plus the two addend rows at the PPA/FSA boundary.
#[derive(Clone, Debug)]
pub struct MultiplierBuild {
    pub aig: Aig,
    pub log: InstantiationLog,
    /// Literals of `aig` feeding the final adder, `2N` columns each.
    pub final_rows: [Vec<Lit>; 2],
}

fn check_label(label: &ArchitectureLabel) -> Result<(), GenError> {
    let unsupported = |reason: &str| GenError::Unsupported {
        label: label.to_string(),
        reason: reason.to_string(),
    };
    if label.width < 2 {
        return Err(unsupported("width must be at least 2"));
    }
    if label.arch.ppg == PpgKind::Booth && label.width < 4 {
        return Err(unsupported("radix-4 Booth needs width at least 4"));
    }
    if label.width > 4096 {
        return Err(unsupported("width above 4096"));
    }
    Ok(())
}

pub fn generate_multiplier(label: &ArchitectureLabel) -> Result<(Aig, InstantiationLog), GenError> {
    let b = generate_multiplier_detailed(label)?;
    Ok((b.aig, b.log))
}

pub fn generate_multiplier_detailed(label: &ArchitectureLabel) -> Result<MultiplierBuild, GenError> {
    check_label(label)?;
    let n = label.width;
    let mut net = Netlist::new(2 * n, 2 * n);
    let a: Vec<Lit> = (0..n).map(|i| net.b.input(i)).collect();
    let b: Vec<Lit> = (0..n).map(|i| net.b.input(n + i)).collect();
    let rows = match label.arch.ppg {
        PpgKind::Simple => ppg::simple(&mut net, &a, &b),
        PpgKind::Booth => ppg::booth4(&mut net, &a, &b),
    };
    let [x, y] = ppa::reduce(&mut net, label.arch.ppa, &rows);
    let product = adder::final_stage(&mut net, label.arch.fsa, &x, &y);
    net.b.set_outputs(product);
    let log = net.log;
    let (aig, map) = cleanup_with_map(&net.b.build());
    let remap = |l: Lit| map[l.node()].xor_if(l.is_complemented());
    let final_rows = [x.iter().map(|&l| remap(l)).collect(), y.iter().map(|&l| remap(l)).collect()];
    let aig = aig.with_symbols(multiplier_symbols(n), Some(label.to_string()));
    Ok(MultiplierBuild {
        aig,
        log,
        final_rows,
    })
}

fn multiplier_symbols(n: usize) -> Vec<Symbol> {
    let mut s = Vec::with_capacity(4 * n);
    for i in 0..2 * n {
        let name = if i < n {
            format!("a{i}")
        } else {
            format!("b{}", i - n)
        };
        s.push(Symbol {
            kind: SymbolKind::Input,
            index: i,
            name,
        });
    }
    for i in 0..2 * n {
        s.push(Symbol {
            kind: SymbolKind::Output,
            index: i,
            name: format!("p{i}"),
        });
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::simulate;

    #[test]
    fn label_codes_round_trip() {
        for arch in Architecture::all() {
            let l = arch.with_width(16);
            assert_eq!(l.file_name().parse::<ArchitectureLabel>().unwrap(), l);
        }
        let l: ArchitectureLabel = "BP_4to2_HC_32".parse().unwrap();
        assert_eq!(l.arch.ppa, PpaKind::Compressor4to2);
        assert!("SP_XX_RC_8".parse::<ArchitectureLabel>().is_err());
        assert!("JCA".parse::<FsaKind>().is_err());
    }

    #[test]
    fn fsa_categories() {
        assert_eq!(FsaKind::NON_TREE.len(), 4);
        assert_eq!(FsaKind::TREE.len(), 5);
        for k in FsaKind::ALL {
            assert_eq!(FsaKind::from_subtype(k.topology(), k.subtype_index()), Some(k));
        }
    }

    #[test]
    fn three_times_five() {
        let label = ArchitectureLabel::new(PpgKind::Simple, PpaKind::Array, FsaKind::RippleCarry, 4);
        let (aig, _) = generate_multiplier(&label).unwrap();
        let mut inputs = vec![vec![0u64]; 8];
        for i in 0..4 {
            inputs[i][0] = (3 >> i) & 1;
            inputs[4 + i][0] = (5 >> i) & 1;
        }
        let out = simulate(&aig, &inputs).unwrap();
        let p: u64 = out.iter().enumerate().map(|(i, w)| (w[0] & 1) << i).sum();
        assert_eq!(p, 15);
    }

    #[test]
    fn rejects_bad_widths() {
        let l = ArchitectureLabel::new(PpgKind::Simple, PpaKind::Array, FsaKind::RippleCarry, 1);
        assert!(matches!(generate_multiplier(&l), Err(GenError::Unsupported { .. })));
        let l = ArchitectureLabel::new(PpgKind::Booth, PpaKind::Array, FsaKind::RippleCarry, 3);
        assert!(generate_multiplier(&l).is_err());
    }

    #[test]
    fn small_grid_is_exhaustively_correct() {
        for width in 2..=4 {
            for arch in Architecture::all() {
                let label = arch.with_width(width);
                if arch.ppg == PpgKind::Booth && width < 4 {
                    continue;
                }
                let (aig, _) = generate_multiplier(&label).unwrap();
                assert_eq!(aig.num_inputs(), 2 * width);
                assert_eq!(aig.num_outputs(), 2 * width);
                exhaustive_multiplier_check(&aig, width).unwrap_or_else(|m| panic!("{label}: {m:?}"));
            }
        }
    }

    #[test]
    fn reduction_ends_in_two_rows() {
        for ppg in PpgKind::ALL {
            for ppa in PpaKind::ALL {
                let label = ArchitectureLabel::new(ppg, ppa, FsaKind::KoggeStone, 9);
                let b = generate_multiplier_detailed(&label).unwrap();
                assert_eq!(b.final_rows[0].len(), 18);
                assert_eq!(b.final_rows[1].len(), 18);
            }
        }
    }
}
