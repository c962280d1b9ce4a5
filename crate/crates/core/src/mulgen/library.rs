// SPDX-License-Identifier: Apache-2.0

//! The on-disk template library: one binary AIGER file per label plus a
//! tab-separated index.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::aig::{read_aiger, write_aiger, Aig, AigerFormat};

use super::{
    generate_multiplier, random_multiplier_check, Architecture, ArchitectureLabel, GenError,
    InstantiationLog,
};

pub const INDEX_FILE: &str = "index.tsv";
const HEADER: &str =
    "#path\twidth\tppg\tppa\tfsa\tgates\tha_count\tfa_count\tcompressors\tcounters\tprefix_cells";
const SELF_CHECK_VECTORS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryEntry {
    pub label: ArchitectureLabel,
    /// Relative to the library directory.
    pub path: String,
    pub gates: usize,
    pub log: InstantiationLog,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LibraryIndex {
    pub dir: PathBuf,
    pub entries: Vec<LibraryEntry>,
}

impl LibraryIndex {
    pub fn load(dir: impl AsRef<Path>) -> Result<LibraryIndex, GenError> {
        let dir = dir.as_ref().to_path_buf();
        let text = fs::read_to_string(dir.join(INDEX_FILE))?;
        let mut entries = Vec::new();
        for (k, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            entries.push(parse_line(line).map_err(|msg| GenError::Index { line: k + 1, msg })?);
        }
        Ok(LibraryIndex { dir, entries })
    }

    pub fn widths(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|e| e.label.width).collect()
    }

    pub fn find(&self, label: &ArchitectureLabel) -> Option<&LibraryEntry> {
        self.entries.iter().find(|e| e.label == *label)
    }

    pub fn load_template(&self, entry: &LibraryEntry) -> Result<Aig, GenError> {
        let bytes = fs::read(self.dir.join(&entry.path))?;
        Ok(read_aiger(&bytes)?)
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from(HEADER);
        s.push('\n');
        for e in &self.entries {
            let a = e.label.arch;
            s.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                e.path,
                e.label.width,
                a.ppg,
                a.ppa,
                a.fsa,
                e.gates,
                e.log.half_adders,
                e.log.full_adders,
                e.log.compressors,
                e.log.counters,
                e.log.prefix_cells
            ));
        }
        s
    }
}

fn parse_line(line: &str) -> Result<LibraryEntry, String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() < 8 {
        return Err(format!("expected at least 8 fields, got {}", f.len()));
    }
    let num = |i: usize| -> Result<usize, String> {
        f.get(i)
            .map_or(Ok(0), |v| v.parse().map_err(|_| format!("field {} is not a count: `{v}`", i + 1)))
    };
    let arch = Architecture {
        ppg: f[2].parse().map_err(|e: GenError| e.to_string())?,
        ppa: f[3].parse().map_err(|e: GenError| e.to_string())?,
        fsa: f[4].parse().map_err(|e: GenError| e.to_string())?,
    };
    Ok(LibraryEntry {
        label: arch.with_width(num(1)?),
        path: f[0].to_string(),
        gates: num(5)?,
        log: InstantiationLog {
            half_adders: num(6)?,
            full_adders: num(7)?,
            compressors: num(8)?,
            counters: num(9)?,
            prefix_cells: num(10)?,
        },
    })
}

fn build_one(label: &ArchitectureLabel, dir: &Path, seed: u64) -> Result<Option<LibraryEntry>, GenError> {
    let (aig, log) = match generate_multiplier(label) {
        Ok(x) => x,
        Err(GenError::Unsupported { reason, .. }) => {
            log::warn!("skipping {label}: {reason}");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if let Err(m) = random_multiplier_check(&aig, label.width, SELF_CHECK_VECTORS, &mut rng) {
        return Err(GenError::SelfCheck {
            label: label.to_string(),
            detail: format!("{} * {} gave {}, expected {}", m.a, m.b, m.got, m.expected),
        });
    }
    let path = label.file_name();
    fs::write(dir.join(&path), write_aiger(&aig, AigerFormat::Binary))?;
    Ok(Some(LibraryEntry {
        label: *label,
        path,
        gates: aig.num_ands(),
        log,
    }))
}

/// Generates, self-checks and stores one template per `(width, arch)`.
///
/// Combinations the generator does not support (Booth below width 4) are
/// skipped with a warning. The index is written once, after every template
/// passed its check, in `widths` x `archs` order.
pub fn build_template_library(
    widths: &[usize],
    archs: &[Architecture],
    dir: impl AsRef<Path>,
    jobs: usize,
    seed: u64,
) -> Result<LibraryIndex, GenError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let labels: Vec<ArchitectureLabel> = widths
        .iter()
        .flat_map(|&w| archs.iter().map(move |a| a.with_width(w)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Option<LibraryEntry>, GenError>>>> =
        Mutex::new((0..labels.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(labels.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= labels.len() {
                    break;
                }
                let r = build_one(&labels[i], dir, seed.wrapping_add(i as u64));
                results.lock().expect("no poisoned workers")[i] = Some(r);
            });
        }
    });
    let mut entries = Vec::new();
    for r in results.into_inner().expect("workers joined") {
        if let Some(e) = r.expect("every label processed")? {
            entries.push(e);
        }
    }
    let index = LibraryIndex {
        dir: dir.to_path_buf(),
        entries,
    };
    fs::write(dir.join(INDEX_FILE), index.to_tsv())?;
    Ok(index)
}

/// Templates of the given width in rank order.
#[derive(Clone, Debug)]
pub struct TemplateLookup {
    pub templates: Vec<(ArchitectureLabel, Aig)>,
    pub warnings: Vec<String>,
}

pub fn lookup_templates(
    index: &LibraryIndex,
    width: usize,
    ranked: &[Architecture],
) -> Result<TemplateLookup, GenError> {
    let mut templates = Vec::new();
    let mut warnings = Vec::new();
    for arch in ranked {
        let label = arch.with_width(width);
        match index.find(&label) {
            Some(e) => templates.push((label, index.load_template(e)?)),
            None => {
                let w = format!("no template {label} in the library; skipped");
                log::warn!("{w}");
                warnings.push(w);
            }
        }
    }
    if templates.is_empty() {
        return Err(GenError::NoTemplate { width });
    }
    Ok(TemplateLookup {
        templates,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mulgen::{FsaKind, PpaKind, PpgKind};

    #[test]
    fn simple_grid_at_width_4() {
        let dir = tempfile::tempdir().unwrap();
        let archs: Vec<Architecture> = Architecture::all()
            .into_iter()
            .filter(|a| a.ppg == PpgKind::Simple)
            .collect();
        let idx = build_template_library(&[4], &archs, dir.path(), 2, 7).unwrap();
        assert_eq!(idx.entries.len(), 45);
        let loaded = LibraryIndex::load(dir.path()).unwrap();
        assert_eq!(loaded, idx);
        let again = build_template_library(&[4], &archs, dir.path(), 1, 7).unwrap();
        assert_eq!(again.to_tsv(), idx.to_tsv());
    }

    #[test]
    fn lookup_skips_missing_ranks() {
        let dir = tempfile::tempdir().unwrap();
        let a = Architecture::new(PpgKind::Simple, PpaKind::Wallace, FsaKind::BrentKung);
        let b = Architecture::new(PpgKind::Simple, PpaKind::Dadda, FsaKind::KoggeStone);
        let missing = Architecture::new(PpgKind::Booth, PpaKind::Array, FsaKind::Sklansky);
        let idx = build_template_library(&[6], &[a, b], dir.path(), 1, 1).unwrap();
        let one = lookup_templates(&idx, 6, &[a]).unwrap();
        assert_eq!(one.templates.len(), 1);
        assert_eq!(one.templates[0].0, a.with_width(6));
        let got = lookup_templates(&idx, 6, &[a, missing, b]).unwrap();
        assert_eq!(got.templates.len(), 2);
        assert_eq!(got.warnings.len(), 1);
        assert!(matches!(
            lookup_templates(&idx, 128, &[a]),
            Err(GenError::NoTemplate { width: 128 })
        ));
    }
}
