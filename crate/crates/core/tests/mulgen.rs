// SPDX-License-Identifier: Apache-2.0

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reveal::aig::{parse_aiger, simulate, write_aiger, AigerFormat};
use reveal::mulgen::{
    exhaustive_multiplier_check, generate_multiplier, generate_multiplier_detailed,
    random_multiplier_check, Architecture, ArchitectureLabel, FsaKind, PpaKind, PpgKind,
};

#[test]
fn grid_is_exhaustively_correct_at_5_and_6() {
    for width in [5, 6] {
        for arch in Architecture::all() {
            let label = arch.with_width(width);
            let (aig, _) = generate_multiplier(&label).unwrap();
            exhaustive_multiplier_check(&aig, width).unwrap_or_else(|m| panic!("{label}: {m:?}"));
        }
    }
}

#[test]
fn wallace_brent_kung_8_exhaustive() {
    let label = ArchitectureLabel::new(PpgKind::Simple, PpaKind::Wallace, FsaKind::BrentKung, 8);
    let (aig, _) = generate_multiplier(&label).unwrap();
    exhaustive_multiplier_check(&aig, 8).unwrap();
}

#[test]
fn booth_dadda_kogge_stone_8_random() {
    let label = ArchitectureLabel::new(PpgKind::Booth, PpaKind::Dadda, FsaKind::KoggeStone, 8);
    let (aig, _) = generate_multiplier(&label).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    random_multiplier_check(&aig, 8, 100_000, &mut rng).unwrap();
}

#[test]
fn wide_templates_are_correct() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (ppg, ppa, fsa, width) in [
        (PpgKind::Simple, PpaKind::Dadda, FsaKind::HanCarlson, 33),
        (PpgKind::Booth, PpaKind::CounterWallace, FsaKind::LadnerFischer, 64),
        (PpgKind::Booth, PpaKind::Compressor4to2, FsaKind::CarrySkip, 71),
        (PpgKind::Simple, PpaKind::Array, FsaKind::CarryLookAhead, 96),
    ] {
        let label = ArchitectureLabel::new(ppg, ppa, fsa, width);
        let (aig, _) = generate_multiplier(&label).unwrap();
        random_multiplier_check(&aig, width, 2_000, &mut rng).unwrap_or_else(|m| panic!("{label}: {m:?}"));
    }
}

#[test]
fn binary_round_trip_of_array_multiplier() {
    let label = ArchitectureLabel::new(PpgKind::Simple, PpaKind::Array, FsaKind::RippleCarry, 4);
    let (aig, _) = generate_multiplier(&label).unwrap();
    let ascii = parse_aiger(&write_aiger(&aig, AigerFormat::Ascii), AigerFormat::Ascii).unwrap();
    let binary = parse_aiger(&write_aiger(&aig, AigerFormat::Binary), AigerFormat::Binary).unwrap();
    let inputs: Vec<Vec<u64>> = (0..8)
        .map(|i| (0..4).map(|w| (0..64).fold(0u64, |acc, p| acc | ((((w * 64 + p) >> i) & 1) as u64) << p)).collect())
        .collect();
    assert_eq!(simulate(&ascii, &inputs).unwrap(), simulate(&binary, &inputs).unwrap());
}

#[test]
fn wallace_brent_kung_8_binary_is_bit_exact() {
    let label = ArchitectureLabel::new(PpgKind::Simple, PpaKind::Wallace, FsaKind::BrentKung, 8);
    let (aig, _) = generate_multiplier(&label).unwrap();
    let bytes = write_aiger(&aig, AigerFormat::Binary);
    let back = parse_aiger(&bytes, AigerFormat::Binary).unwrap();
    assert_eq!(back, aig);
    assert_eq!(write_aiger(&back, AigerFormat::Binary), bytes);
}

/// Swapping the final adder keeps the two addend rows' function.
#[test]
fn final_adder_swap_preserves_reduction() {
    for ppg in PpgKind::ALL {
        for ppa in PpaKind::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let inputs = reveal::aig::random_words(&mut rng, 20, 8);
            let mut reference: Option<Vec<Vec<u64>>> = None;
            for fsa in FsaKind::ALL {
                let b = generate_multiplier_detailed(&ArchitectureLabel::new(ppg, ppa, fsa, 10)).unwrap();
                let rows: Vec<_> = b.final_rows[0].iter().chain(&b.final_rows[1]).copied().collect();
                let probe = b.aig.with_outputs(rows).unwrap();
                let vals = simulate(&probe, &inputs).unwrap();
                match &reference {
                    None => reference = Some(vals),
                    Some(r) => assert_eq!(r, &vals, "{ppg}_{ppa}_{fsa}"),
                }
            }
        }
    }
}
