// SPDX-License-Identifier: Apache-2.0

use reveal::aig::{strash, write_aiger, AigerFormat};
use reveal::mulgen::{exhaustive_multiplier_check, generate_multiplier, random_multiplier_check, ArchitectureLabel};
use reveal::obfuscate::{eval, inject_bug, optimize, RewriteConfig};
use rand::SeedableRng;

fn template(label: &str) -> (reveal::aig::Aig, ArchitectureLabel) {
    let l: ArchitectureLabel = label.parse().unwrap();
    (generate_multiplier(&l).unwrap().0, l)
}

#[test]
fn optimized_width8_is_exact_and_smaller() {
    let (aig, l) = template("SP_WT_BK_8");
    for cfg in [RewriteConfig::dc2like(1), RewriteConfig::resyn3like(2)] {
        let out = optimize(&aig, &cfg).unwrap();
        exhaustive_multiplier_check(&out, l.width).unwrap();
        assert!(out.num_ands() < aig.num_ands());
    }
}

#[test]
fn optimized_wide_templates_multiply() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for label in ["BP_CWT_HC_16", "SP_4to2_LF_20", "BP_AR_SE_12", "SP_DT_CK_24"] {
        let (aig, l) = template(label);
        let out = optimize(&aig, &RewriteConfig::resyn3like(3).with_rounds(2)).unwrap();
        random_multiplier_check(&out, l.width, 2000, &mut rng).unwrap();
    }
}

#[test]
fn seeds_give_distinct_structures() {
    let (aig, _) = template("BP_DT_KS_12");
    let a = optimize(&aig, &RewriteConfig::dc2like(1)).unwrap();
    let b = optimize(&aig, &RewriteConfig::dc2like(2)).unwrap();
    assert_ne!(write_aiger(&a, AigerFormat::Binary), write_aiger(&b, AigerFormat::Binary));
}

#[test]
fn bugs_change_the_function() {
    let (aig, _) = template("SP_DT_SK_8");
    let aig = strash(&aig);
    for seed in 0..20 {
        let (buggy, w) = inject_bug(&aig, seed).unwrap();
        assert_ne!(eval(&aig, &w), eval(&buggy, &w));
    }
}
