// SPDX-License-Identifier: Apache-2.0

use reveal::blocks::annotate_blocks;
use reveal::mulgen::{generate_multiplier, ArchitectureLabel, FsaKind, PpaKind, PpgKind};

#[test]
fn recovered_cells_match_generator_log() {
    let mut bad = Vec::new();
    for width in [8, 11, 16] {
        for ppa in [PpaKind::Array, PpaKind::Wallace, PpaKind::Dadda] {
            for fsa in FsaKind::ALL {
                let label = ArchitectureLabel::new(PpgKind::Simple, ppa, fsa, width);
                let (aig, log) = generate_multiplier(&label).unwrap();
                let ann = annotate_blocks(&aig);
                if (ann.ha_count(), ann.fa_count()) != (log.half_adders, log.full_adders) {
                    bad.push(format!("{label}: got {:?} want {:?} amb {}", (ann.ha_count(), ann.fa_count()), (log.half_adders, log.full_adders), ann.ambiguous));
                }
            }
        }
    }
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
