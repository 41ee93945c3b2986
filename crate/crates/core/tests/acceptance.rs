//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use num_bigint::BigUint;
use overtake::acceptance::{self, CriterionResult, PairCodec, Profile};
use overtake::codec::{decode_word, word_of_index};
use overtake::Word;

fn check(r: CriterionResult) {
    println!("{r}");
    assert!(r.passed, "{r}");
}

#[test]
fn criterion_1_codec_round_trip() {
    check(acceptance::codec_round_trip(PairCodec::standard()));
}

#[test]
fn criterion_2_linear_index_law() {
    check(acceptance::linear_index_law());
}

#[test]
fn criterion_3_quasi_trivial_proposition() {
    check(acceptance::quasi_trivial_proposition(Profile::Full));
}

#[test]
fn criterion_4_busy_beaver() {
    check(acceptance::busy_beaver_values(Profile::Full));
}

#[test]
fn criterion_5_generalized_busy_beaver() {
    check(acceptance::generalized_busy_beaver(Profile::Full));
}

#[test]
fn criterion_6_non_domination() {
    check(acceptance::non_domination());
}

#[test]
fn criterion_7_g0_table() {
    check(acceptance::g0_table());
}

#[test]
fn criterion_8_simulator_properties() {
    check(acceptance::simulator_properties());
}

/// Doubling that drops the second copy of the last bit.
fn tampered_encode(n: &BigUint, m: &BigUint) -> Word {
    let mut bits = word_of_index(n).into_bits();
    bits.extend([true, false]);
    let xm = word_of_index(m);
    for &b in xm.bits() {
        bits.extend([b, b]);
    }
    if !xm.is_empty() {
        bits.pop();
    }
    Word::from_bits(bits)
}

#[test]
fn tampered_codec_fails_criterion_1() {
    let r = acceptance::codec_round_trip(PairCodec {
        encode: tampered_encode,
        decode: decode_word,
    });
    println!("{r}");
    assert!(!r.passed);
}

#[test]
fn quick_profile_runs() {
    let results = acceptance::run_all(Profile::Quick);
    assert_eq!(results.len(), 8);
    for r in results.iter().filter(|r| r.id != 6) {
        assert!(r.passed, "{r}");
    }
}
