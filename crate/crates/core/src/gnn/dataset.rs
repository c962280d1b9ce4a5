// SPDX-License-Identifier: Apache-2.0

//! Labelled samples from generated and obfuscated templates.

use crate::aig::Aig;
use crate::mulgen::{generate_multiplier, Architecture, ArchitectureLabel};
use crate::obfuscate::{optimize, RewriteConfig};

use super::{Example, GnnError, GraphSample, ModelKind};

/// Samples for both classifiers, index-aligned with `labels`.
#[derive(Clone, Debug, Default)]
pub struct GridDataset {
    pub labels: Vec<ArchitectureLabel>,
    pub ppa: Vec<Example>,
    pub fsa: Vec<Example>,
}

impl GridDataset {
    pub fn push(&mut self, label: ArchitectureLabel, aig: &Aig) -> Result<(), GnnError> {
        self.ppa.push(Example::ppa(GraphSample::from_circuit(aig, ModelKind::Ppa)?, label.arch.ppa));
        self.fsa.push(Example::fsa(GraphSample::from_circuit(aig, ModelKind::Fsa)?, label.arch.fsa));
        self.labels.push(label);
        Ok(())
    }

    pub fn examples(&self, kind: ModelKind) -> &[Example] {
        match kind {
            ModelKind::Ppa => &self.ppa,
            ModelKind::Fsa => &self.fsa,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Seed of one obfuscated variant.
pub fn variant_seed(seed: u64, label: &ArchitectureLabel, variant: usize) -> u64 {
    let arch = Architecture::all().iter().position(|a| *a == label.arch).unwrap_or(0) as u64;
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ (label.width as u64) << 40
        ^ arch << 20
        ^ variant as u64
}

/// Optimization script of one variant: `dc2like` and `resyn3like`
/// alternate.
pub fn variant_script(seed: u64, label: &ArchitectureLabel, variant: usize) -> RewriteConfig {
    let s = variant_seed(seed, label, variant);
    if variant.is_multiple_of(2) {
        RewriteConfig::dc2like(s)
    } else {
        RewriteConfig::resyn3like(s)
    }
}

/// `variants` obfuscated copies of every `(width, arch)` template.
pub fn grid_dataset(
    widths: &[usize],
    archs: &[Architecture],
    variants: usize,
    seed: u64,
) -> Result<GridDataset, GnnError> {
    let mut d = GridDataset::default();
    for &w in widths {
        for a in archs {
            let label = a.with_width(w);
            let template = match generate_multiplier(&label) {
                Ok((t, _)) => t,
                Err(e) => {
                    log::warn!("skipping {label}: {e}");
                    continue;
                }
            };
            for v in 0..variants {
                let opt = optimize(&template, &variant_script(seed, &label, v))
                    .map_err(|e| GnnError::Config(format!("obfuscating {label}: {e}")))?;
                d.push(label, &opt)?;
            }
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_labels() {
        let archs: Vec<Architecture> = Architecture::all().into_iter().step_by(31).collect();
        let d = grid_dataset(&[6], &archs, 2, 1).unwrap();
        assert_eq!(d.len(), 2 * archs.len());
        for (i, l) in d.labels.iter().enumerate() {
            assert_eq!(d.ppa[i].label, l.arch.ppa.index());
            assert_eq!(d.fsa[i].label, l.arch.fsa.index());
        }
        let again = grid_dataset(&[6], &archs, 2, 1).unwrap();
        assert_eq!(again.fsa, d.fsa);
    }
}
