//! The ℓ-Gödel numbering.
//!
//! Words and naturals are identified through the canonical (length, then
//! value) enumeration `∅, 0, 1, 00, 01, 10, 11, 000, …`. The pair `⟨n, m⟩` of a
//! parameter `n` and a machine code `m` is coded as the word
//! `x_n · 10 · double(x_m)`, and its ℓ-index is the canonical index of that
//! word. For fixed `m` the indices form an arithmetic progression in `n` with
//! ratio `2^(2|x_m| + 2)`.

use std::ops::Range;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::machine::MachineTable;
use crate::word::Word;

/// Canonical index of `w`: `2^|w| - 1 + value(w)`.
pub fn index_of_word(w: &Word) -> BigUint {
    // Pack "1"·w into little-endian bytes.
    let bits = w.bits();
    let total = bits.len() + 1;
    let mut bytes = vec![0u8; total.div_ceil(8)];
    let mut set = |pos: usize| bytes[pos / 8] |= 1 << (pos % 8);
    set(bits.len());
    for (k, &b) in bits.iter().enumerate() {
        if b {
            set(bits.len() - 1 - k);
        }
    }
    BigUint::from_bytes_le(&bytes) - 1u32
}

/// The `i`-th word of the canonical enumeration: `i + 1` in binary without its
/// leading one.
pub fn word_of_index(i: &BigUint) -> Word {
    let v = i + 1u32;
    let len = v.bits();
    let bits = (0..len - 1).rev().map(|k| v.bit(k)).collect();
    Word::from_bits(bits)
}

pub fn word_of_u64(i: u64) -> Word {
    word_of_index(&BigUint::from(i))
}

/// Writes every bit twice: `01 ↦ 0011`.
pub fn double(w: &Word) -> Word {
    Word::from_bits(w.bits().iter().flat_map(|&b| [b, b]).collect())
}

/// Code word of the pair `⟨n, m⟩`.
pub fn encode_pair(n: &BigUint, m: &BigUint) -> Word {
    let mut bits = word_of_index(n).into_bits();
    bits.extend([true, false]);
    bits.extend(double(&word_of_index(m)).into_bits());
    Word::from_bits(bits)
}

/// Total decoder. Tiles equal bit pairs back from the right end; if the two
/// symbols in front of that doubled suffix are `10` the word is a code and
/// the pair is returned, otherwise the word is junk and decodes to the
/// trivial machine `⟨0, 0⟩`.
pub fn decode_word(w: &Word) -> (BigUint, BigUint) {
    match split_code(w) {
        Some((prefix, halved)) => (index_of_word(&prefix), index_of_word(&halved)),
        None => (BigUint::zero(), BigUint::zero()),
    }
}

/// `Some((x_n, x_m))` when `w` is a valid code word.
pub fn split_code(w: &Word) -> Option<(Word, Word)> {
    let bits = w.bits();
    let pairs = doubled_suffix_pairs(w);
    let cut = bits.len() - 2 * pairs;
    if cut < 2 || !(bits[cut - 2] && !bits[cut - 1]) {
        return None;
    }
    let prefix = Word::from_bits(bits[..cut - 2].to_vec());
    let halved = Word::from_bits(bits[cut..].iter().step_by(2).copied().collect());
    Some((prefix, halved))
}

/// Number of equal pairs tiled from the right end of `w` (the greedy maximal
/// doubled suffix).
pub fn doubled_suffix_pairs(w: &Word) -> usize {
    let bits = w.bits();
    let mut end = bits.len();
    let mut pairs = 0;
    while end >= 2 && bits[end - 2] == bits[end - 1] {
        end -= 2;
        pairs += 1;
    }
    pairs
}

/// ℓ-index of `⟨n, m⟩`.
pub fn ell_index(n: &BigUint, m: &BigUint) -> BigUint {
    index_of_word(&encode_pair(n, m))
}

pub fn ell_index_u64(n: u64, m: u64) -> BigUint {
    ell_index(&BigUint::from(n), &BigUint::from(m))
}

/// `N(n) = a·n + b` for a fixed machine code `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearLaw {
    #[serde(serialize_with = "crate::ser::big")]
    pub a: BigUint,
    #[serde(serialize_with = "crate::ser::big")]
    pub b: BigUint,
    #[serde(serialize_with = "crate::ser::big")]
    pub m: BigUint,
}

impl LinearLaw {
    pub fn at(&self, n: &BigUint) -> BigUint {
        &self.a * n + &self.b
    }

    /// The ratio `2^(2|x_m| + 2)` predicted from the length of `x_m` alone.
    pub fn predicted_ratio(m: &BigUint) -> BigUint {
        BigUint::one() << (2 * word_of_index(m).len() + 2)
    }
}

/// Fits `(a, b)` from the first two probes and checks the law on every `n` in
/// `probe`. A mismatch is reported as an error; it would mean the codec is broken.
pub fn linear_law(m: &BigUint, probe: Range<u64>) -> Result<LinearLaw> {
    if probe.is_empty() {
        return Err(Error::LawViolation("empty probe range".into()));
    }
    let n0 = BigUint::from(probe.start);
    let first = ell_index(&n0, m);
    let second = ell_index(&(&n0 + 1u32), m);
    let a = second - &first;
    let predicted = LinearLaw::predicted_ratio(m);
    if a != predicted {
        return Err(Error::LawViolation(format!(
            "ratio {a} differs from 2^(2|x_m|+2) = {predicted}"
        )));
    }
    let b = first - &a * &n0;
    let law = LinearLaw {
        a,
        b,
        m: m.clone(),
    };
    for n in probe {
        let n = BigUint::from(n);
        let got = ell_index(&n, m);
        if got != law.at(&n) {
            return Err(Error::LawViolation(format!(
                "ell_index({n}, {m}) = {got} but a·n + b = {}",
                law.at(&n)
            )));
        }
    }
    Ok(law)
}

/// Canonical index of a table's binary serialization.
pub fn table_index(table: &MachineTable) -> BigUint {
    index_of_word(&table.to_word())
}

/// The table with canonical index `m`; indices that do not serialize a valid
/// table name the trivial machine.
pub fn table_of_index(m: &BigUint) -> MachineTable {
    MachineTable::from_word(&word_of_index(m)).unwrap_or_default()
}

/// Map from ℓ-indices into table indices of one-tape machines.
///
/// `i` is decoded to `(n, m)`, the emulating machine `M_m ∘ τ ∘ iₙ` is built
/// and serialized, and the result is the canonical index of
/// `word(i) · s · 1 · 0…0`, padded to a length that depends only on `|word(i)|`
/// and bounds every serialization reachable from a code of that length.
/// The map is strictly increasing and `to_standard(i) > i`.
pub fn to_standard(i: &BigUint) -> BigUint {
    let code = word_of_index(i);
    let (n, m) = decode_word(&code);
    let base = table_of_index(&m);
    let emulated = crate::ell::emulate_ell(&base, &n).expect("decoded tables are valid");
    let s = emulated.to_word();
    let width = serialization_bound(code.len());
    assert!(s.len() <= width, "serialization exceeds its length bound");
    let mut bits = code.into_bits();
    bits.extend_from_slice(s.bits());
    bits.push(true);
    bits.resize(bits.len() + width - s.len(), false);
    index_of_word(&Word::from_bits(bits))
}

/// Upper bound on the serialized length of the emulating machine for any code
/// word of length `len`.
pub fn serialization_bound(len: usize) -> usize {
    let n_len = len.saturating_sub(2);
    let m_len = n_len / 2;
    let widest_n = index_of_word(&Word::from_bits(vec![true; n_len]));
    let pairing = crate::ell::pairing_machine(&widest_n);
    let base_states: u64 = 1u64 << (m_len as u64).div_ceil(2).min(32);
    let base_lines = (m_len / 6) as u64;
    let states = pairing.n_states.max(1) as u64 + 1 + base_states;
    let lines = pairing.lines.len() as u64 + 6 + base_lines;
    let bitlen = |v: u64| (64 - v.leading_zeros()) as u64;
    let width = bitlen(states - 1).max(1);
    (2 * bitlen(states + 1) - 1 + lines * (2 * width + 6)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    /// Independent oracle: walk the enumeration word by word.
    fn enumerate_until(target: &str) -> u64 {
        let mut i = 0u64;
        for len in 0..32 {
            for v in 0..(1u64 << len) {
                let w: String = (0..len).rev().map(|k| if v >> k & 1 == 1 { '1' } else { '0' }).collect();
                if w == target {
                    return i;
                }
                i += 1;
            }
        }
        unreachable!()
    }

    #[test]
    fn canonical_enumeration_start() {
        let expected = ["", "0", "1", "00", "01", "10", "11", "000", "001"];
        for (i, w) in expected.iter().enumerate() {
            assert_eq!(word_of_u64(i as u64), Word::from(*w));
            assert_eq!(index_of_word(&Word::from(*w)), big(i as u64));
        }
        assert_eq!(index_of_word(&Word::from("000")), big(enumerate_until("000")));
        assert_eq!(enumerate_until("000"), 7);
    }

    #[test]
    fn word_round_trip_up_to_length_12() {
        for len in 0..=12u32 {
            for v in 0..(1u64 << len) {
                let w = Word::from_bits((0..len).rev().map(|k| v >> k & 1 == 1).collect());
                assert_eq!(word_of_index(&index_of_word(&w)), w);
            }
        }
    }

    #[test]
    fn doubling() {
        assert_eq!(double(&Word::from("01")), Word::from("0011"));
        assert_eq!(double(&Word::empty()), Word::empty());
        assert_eq!(double(&Word::from("101")), Word::from("110011"));
    }

    #[test]
    fn pair_codes() {
        assert_eq!(encode_pair(&big(0), &big(0)), Word::from("10"));
        assert_eq!(encode_pair(&big(2), &big(1)), Word::from("11000"));
        assert_eq!(encode_pair(&big(1), &big(1)), Word::from("01000"));
        assert_eq!(decode_word(&Word::from("11000")), (big(2), big(1)));
        assert_eq!(decode_word(&Word::from("111")), (big(0), big(0)));
        assert_eq!(split_code(&Word::from("111")), None);
        assert_eq!(split_code(&Word::from("10")), Some((Word::empty(), Word::empty())));
    }

    #[test]
    fn ell_index_spot_values_match_enumeration() {
        assert_eq!(ell_index_u64(1, 1), big(39));
        assert_eq!(ell_index_u64(2, 1), big(55));
        assert_eq!(ell_index_u64(0, 0), big(5));
        assert_eq!(enumerate_until("01000"), 39);
        assert_eq!(enumerate_until("11000"), 55);
        assert_eq!(enumerate_until("10"), 5);
    }

    #[test]
    fn law_ratios() {
        assert_eq!(linear_law(&big(1), 0..50).unwrap().a, big(16));
        assert_eq!(linear_law(&big(0), 0..50).unwrap().a, big(4));
        assert_eq!(linear_law(&big(3), 0..50).unwrap().a, big(64));
        assert_eq!(
            ell_index_u64(2, 1) - ell_index_u64(1, 1),
            linear_law(&big(1), 0..3).unwrap().a
        );
        assert!(linear_law(&big(1), 5..5).is_err());
    }

    #[test]
    fn junk_indices_name_the_trivial_table() {
        assert_eq!(table_of_index(&big(0)), MachineTable::empty());
        let t: MachineTable = "1 0 -> 1 R 0".parse().unwrap();
        assert_eq!(table_of_index(&table_index(&t)), t);
    }

    #[test]
    fn to_standard_is_strictly_increasing_and_above_identity() {
        let mut prev: Option<BigUint> = None;
        for i in 0..512u64 {
            let v = to_standard(&big(i));
            assert!(v > big(i));
            if let Some(p) = &prev {
                assert!(v > *p, "not increasing at {i}");
            }
            prev = Some(v);
        }
    }

    #[test]
    fn to_standard_embeds_the_emulating_table() {
        let i = ell_index_u64(2, 1);
        let code = word_of_index(&i);
        let out = word_of_index(&to_standard(&i));
        let emulated = crate::ell::emulate_ell(&table_of_index(&big(1)), &big(2)).unwrap();
        let s = emulated.to_word();
        assert_eq!(&out.bits()[..code.len()], code.bits());
        assert_eq!(&out.bits()[code.len()..code.len() + s.len()], s.bits());
    }

    #[test]
    fn to_standard_along_a_progression_has_tower_bound() {
        // Measure log2(to_standard(an + b)) and fit a linear bound on an
        // initial segment; the rest of the range must respect it.
        let law = linear_law(&big(1), 0..4).unwrap();
        let bits = |n: u64| to_standard(&law.at(&big(n))).bits();
        let c = (0..16u64).map(|n| bits(n).div_ceil(n + 1)).max().unwrap();
        for n in 16..96u64 {
            assert!(bits(n) <= c * (n + 1), "n={n}: {} bits > {}", bits(n), c * (n + 1));
        }
    }
}
