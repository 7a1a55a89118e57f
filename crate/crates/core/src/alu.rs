//! Arithmetic and logic on comb words through signal combination.
//!
//! Two slot-wise primitives generate everything here: superposition (the sum
//! column of the product/addition table) and the convolution product (its
//! multiplication column, realized as a normalized per-slot product). XOR is
//! the filtered combination `M(x + y - 2 x*y)`, AND/OR follow from the adder
//! and XOR alone, subtraction is the complement trick `NOT(NOT(x) + y)` with
//! an explicit branch sign, and the adder ripples carries one beat flip at a
//! time with unbounded word growth. All multi-bit operations read their
//! operands through the perturbative power measurement, never by peeking at
//! slot occupancy directly.

use thiserror::Error;

use crate::comb::{
    complement, decode_word, encode_word_with, flip_bit, psi_read_bit, shift_word, CombError,
    CombWord, PsiProbe, MAX_WORD_LEN,
};

#[derive(Debug, Error, PartialEq)]
pub enum AluError {
    #[error("operand lengths differ: {0} vs {1} bits")]
    LengthMismatch(usize, usize),
    #[error("operands use different base amplitude or slot spacing")]
    FrameMismatch,
    #[error("pair {0} holds a pattern outside the combination dictionary")]
    BadPattern(usize),
    #[error("word would grow past the {MAX_WORD_LEN}-bit ceiling")]
    WordCeiling,
    #[error(transparent)]
    Comb(#[from] CombError),
}

/// Per-pair occupancy code after a slot-wise combination. The first digit is
/// the low slot of the pair in units of `c0`, the second the high slot:
/// `P10`/`P01` are the Manchester patterns for bits 0 and 1, while `P00`,
/// `P11`, `P20` and `P02` are transitional patterns that must be normalized
/// back into the dictionary before a word leaves this module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCode {
    P00,
    P10,
    P01,
    P11,
    P20,
    P02,
}

/// Raw slot amplitudes produced by combining two words, before any
/// normalization. Entries stay on the discrete grid `{0, c0, 2c0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPattern {
    base_amplitude: f64,
    slots: Vec<f64>,
}

impl PairPattern {
    /// Slot-wise sum `x + y`: the addition column of the combination table.
    pub fn from_superposition(x: &CombWord, y: &CombWord) -> Result<PairPattern, AluError> {
        check_operands(x, y)?;
        let slots = x
            .slots()
            .iter()
            .zip(y.slots())
            .map(|(a, b)| a + b)
            .collect();
        Ok(PairPattern { base_amplitude: x.base_amplitude(), slots })
    }

    pub fn slots(&self) -> &[f64] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of slots carrying a tone.
    pub fn occupied_slots(&self) -> usize {
        let threshold = self.base_amplitude / 2.0;
        self.slots.iter().filter(|s| **s > threshold).count()
    }

    /// Classifies every pair against the combination dictionary.
    pub fn codes(&self) -> Result<Vec<PairCode>, AluError> {
        (0..self.len())
            .map(|k| {
                let low = quantize(self.slots[2 * k], self.base_amplitude);
                let high = quantize(self.slots[2 * k + 1], self.base_amplitude);
                match (low, high) {
                    (Some(0), Some(0)) => Ok(PairCode::P00),
                    (Some(1), Some(0)) => Ok(PairCode::P10),
                    (Some(0), Some(1)) => Ok(PairCode::P01),
                    (Some(1), Some(1)) => Ok(PairCode::P11),
                    (Some(2), Some(0)) => Ok(PairCode::P20),
                    (Some(0), Some(2)) => Ok(PairCode::P02),
                    _ => Err(AluError::BadPattern(k)),
                }
            })
            .collect()
    }
}

/// Snaps an amplitude to its level in units of `c0`, tolerating the rounding
/// of products and quotients but nothing coarser.
fn quantize(amplitude: f64, c0: f64) -> Option<u8> {
    let level = (amplitude / c0).round();
    if (0.0..=2.0).contains(&level) && (amplitude - level * c0).abs() <= 1e-6 * c0.abs() {
        Some(level as u8)
    } else {
        None
    }
}

fn check_operands(x: &CombWord, y: &CombWord) -> Result<(), AluError> {
    if x.base_amplitude() != y.base_amplitude() || x.slot_spacing() != y.slot_spacing() {
        return Err(AluError::FrameMismatch);
    }
    if x.len() != y.len() {
        return Err(AluError::LengthMismatch(x.len(), y.len()));
    }
    Ok(())
}

fn check_frame(x: &CombWord, y: &CombWord) -> Result<(), AluError> {
    if x.base_amplitude() != y.base_amplitude() || x.slot_spacing() != y.slot_spacing() {
        return Err(AluError::FrameMismatch);
    }
    Ok(())
}

/// Time-domain convolution of two comb signals, i.e. the slot-wise spectral
/// product, normalized by `c0` so amplitudes stay on the `{0, c0}` grid.
/// Matching bits keep their single occupied slot; mismatching bits cancel
/// to the empty pair.
pub fn conv_product(x: &CombWord, y: &CombWord) -> Result<PairPattern, AluError> {
    check_operands(x, y)?;
    let c0 = x.base_amplitude();
    let slots = x
        .slots()
        .iter()
        .zip(y.slots())
        .map(|(a, b)| a * b / c0)
        .collect();
    Ok(PairPattern { base_amplitude: c0, slots })
}

/// Hamming distance as the occupied-slot count of `x * NOT(y)`: every
/// differing bit position contributes exactly one surviving tone.
pub fn hamming_distance(x: &CombWord, y: &CombWord) -> Result<usize, AluError> {
    Ok(conv_product(x, &complement(y))?.occupied_slots())
}

/// Number of set bits, as the Hamming distance from the zero word.
pub fn digit_sum(x: &CombWord) -> usize {
    let zero = encode_word_with(0, x.len(), x.base_amplitude(), x.slot_spacing())
        .expect("zero word at an existing word's length");
    hamming_distance(x, &zero).expect("frames match by construction")
}

/// Bitwise XOR: the combination `x + y - 2 x*y` leaves the empty pair where
/// bits agree and the doubly occupied pair where they differ, and the `M`
/// filter rewrites those back into the bit dictionary (empty to the zero
/// pattern, double to the one pattern), restoring total power to `L c0^2`.
pub fn xor_op(x: &CombWord, y: &CombWord) -> Result<CombWord, AluError> {
    check_operands(x, y)?;
    let c0 = x.base_amplitude();
    let prod = conv_product(x, y)?;
    let mut slots: Vec<f64> = x
        .slots()
        .iter()
        .zip(y.slots())
        .zip(prod.slots())
        .map(|((a, b), p)| a + b - 2.0 * p)
        .collect();
    let codes = PairPattern { base_amplitude: c0, slots: slots.clone() }.codes()?;
    for (k, code) in codes.iter().enumerate() {
        match code {
            PairCode::P00 => {
                slots[2 * k] = c0;
                slots[2 * k + 1] = 0.0;
            }
            PairCode::P11 => {
                slots[2 * k] = 0.0;
                slots[2 * k + 1] = c0;
            }
            _ => return Err(AluError::BadPattern(k)),
        }
    }
    Ok(CombWord::from_slots(slots, c0, x.slot_spacing())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogicKind {
    And,
    Or,
}

/// AND and OR assembled from the adder and the XOR filter alone:
/// `2 AND = x + y - XOR` and `2 OR = x + y + XOR`, the halving being the
/// one-pair downshift (always exact, the combination is even).
pub fn linear_logic(kind: LogicKind, x: &CombWord, y: &CombWord) -> Result<CombWord, AluError> {
    check_operands(x, y)?;
    let l = x.len();
    let sum = upsa_add(x, y)?;
    let xo = xor_op(x, y)?;
    let doubled = match kind {
        LogicKind::And => minus(&sum, &xo)?.1,
        LogicKind::Or => upsa_add(&sum, &xo)?,
    };
    Ok(shift_word(&doubled, -1)?.truncated(l))
}

/// Serial adder with unbounded precision. The operand with the smaller
/// digit sum is scanned bit by bit through the power measurement and its
/// set bits are folded into the other word: a clear target pair simply
/// flips to one, while a set pair flips to zero and the carry ripples
/// upward through the block of consecutive ones, growing the word when it
/// runs off the top.
pub fn upsa_add(x: &CombWord, y: &CombWord) -> Result<CombWord, AluError> {
    check_frame(x, y)?;
    let (source, target) = if digit_sum(y) < digit_sum(x) { (y, x) } else { (x, y) };
    let probe = PsiProbe::default_for(source.base_amplitude());
    let mut acc = target.clone();
    for k in 0..source.len() {
        if psi_read_bit(source, k, &probe)? == 1 {
            acc = add_power_of_two(acc, k, &probe)?;
        }
    }
    Ok(acc)
}

/// Adds `2^k` into `acc` by beat flips: rule (a) sets a clear pair, rule (b)
/// clears set pairs and carries into the next one up.
fn add_power_of_two(mut acc: CombWord, k: usize, probe: &PsiProbe) -> Result<CombWord, AluError> {
    let mut j = k;
    loop {
        if j >= acc.len() {
            if j + 1 > MAX_WORD_LEN {
                return Err(AluError::WordCeiling);
            }
            acc = acc.grown_to(j + 1);
        }
        let was_set = psi_read_bit(&acc, j, probe)? == 1;
        acc = flip_bit(&acc, j)?;
        if !was_set {
            return Ok(acc);
        }
        j += 1;
    }
}

/// Branched subtraction. Both operands are padded to a common length `L`,
/// the smaller is subtracted from the larger via `t = NOT(NOT(larger) +
/// smaller)` with the inner sum folded back mod `2^L`, and the branch taken
/// is reported as the sign: `+1` when `x >= y`, `-1` otherwise. Equal
/// operands give `(+1, 0)`.
pub fn minus(x: &CombWord, y: &CombWord) -> Result<(i8, CombWord), AluError> {
    check_frame(x, y)?;
    let l = x.len().max(y.len());
    let xp = x.grown_to(l);
    let yp = y.grown_to(l);
    let probe = PsiProbe::default_for(x.base_amplitude());
    let xv = decode_word(&xp, &probe)?;
    let yv = decode_word(&yp, &probe)?;
    if xv >= yv {
        Ok((1, complement_difference(&xp, &yp, l)?))
    } else {
        Ok((-1, complement_difference(&yp, &xp, l)?))
    }
}

/// `NOT(NOT(x) + y)` at fixed length `l`; equals `x - y` when `x >= y`.
fn complement_difference(x: &CombWord, y: &CombWord, l: usize) -> Result<CombWord, AluError> {
    let inner = upsa_add(&complement(x), y)?.truncated(l);
    Ok(complement(&inner))
}

/// Shift-and-add multiplier. The operand with the smaller digit sum is
/// scanned for set bits; each contributes the other operand shifted up by
/// that bit's order, at full precision (the copy is grown before shifting
/// so no pair falls off the top).
pub fn multiply(x: &CombWord, y: &CombWord) -> Result<CombWord, AluError> {
    check_frame(x, y)?;
    let (scan, other) = if digit_sum(y) < digit_sum(x) { (y, x) } else { (x, y) };
    let probe = PsiProbe::default_for(x.base_amplitude());
    let mut acc = encode_word_with(
        0,
        x.len().max(y.len()),
        x.base_amplitude(),
        x.slot_spacing(),
    )?;
    for k in 0..scan.len() {
        if psi_read_bit(scan, k, &probe)? == 1 {
            if other.len() + k > MAX_WORD_LEN {
                return Err(AluError::WordCeiling);
            }
            let shifted = shift_word(&other.grown_to(other.len() + k), k as isize)?;
            acc = upsa_add(&acc, &shifted)?;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::{decode_word_default, encode_word, slot_power};

    fn w(value: u128, bits: usize) -> CombWord {
        encode_word(value, bits).unwrap()
    }

    #[test]
    fn product_table_rows() {
        let zero = w(0, 1);
        let one = w(1, 1);
        assert_eq!(conv_product(&zero, &zero).unwrap().codes().unwrap(), [PairCode::P10]);
        assert_eq!(conv_product(&one, &zero).unwrap().codes().unwrap(), [PairCode::P00]);
        assert_eq!(conv_product(&zero, &one).unwrap().codes().unwrap(), [PairCode::P00]);
        assert_eq!(conv_product(&one, &one).unwrap().codes().unwrap(), [PairCode::P01]);
    }

    #[test]
    fn sum_table_rows() {
        let zero = w(0, 1);
        let one = w(1, 1);
        assert_eq!(
            PairPattern::from_superposition(&zero, &zero).unwrap().codes().unwrap(),
            [PairCode::P20]
        );
        assert_eq!(
            PairPattern::from_superposition(&zero, &one).unwrap().codes().unwrap(),
            [PairCode::P11]
        );
        assert_eq!(
            PairPattern::from_superposition(&one, &one).unwrap().codes().unwrap(),
            [PairCode::P02]
        );
    }

    #[test]
    fn product_is_idempotent_on_equal_words() {
        let x = w(0b1011_0110, 8);
        assert_eq!(conv_product(&x, &x).unwrap().slots(), x.slots());
    }

    #[test]
    fn product_rejects_length_mismatch() {
        assert_eq!(
            conv_product(&w(1, 2), &w(1, 3)).unwrap_err(),
            AluError::LengthMismatch(2, 3)
        );
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(&w(0b1010, 4), &w(0b0110, 4)).unwrap(), 2);
        let x = w(0b1101, 4);
        assert_eq!(hamming_distance(&x, &x).unwrap(), 0);
        assert_eq!(hamming_distance(&w(0, 6), &w(63, 6)).unwrap(), 6);
    }

    #[test]
    fn digit_sum_examples() {
        assert_eq!(digit_sum(&w(7, 3)), 3);
        assert_eq!(digit_sum(&w(0, 9)), 0);
        // Distance from the all-ones mask counts the clear bits.
        let x = w(0b0101_1100, 8);
        assert_eq!(hamming_distance(&x, &w(255, 8)).unwrap(), 8 - digit_sum(&x));
    }

    #[test]
    fn xor_examples() {
        assert_eq!(decode_word_default(&xor_op(&w(6, 3), &w(3, 3)).unwrap()).unwrap(), 5);
        let x = w(0b1001_1010, 8);
        assert_eq!(decode_word_default(&xor_op(&x, &x).unwrap()).unwrap(), 0);
        assert_eq!(xor_op(&x, &w(0, 8)).unwrap(), x);
    }

    #[test]
    fn xor_restores_total_power() {
        let x = w(0b110101, 6);
        let y = w(0b011100, 6);
        assert_eq!(xor_op(&x, &y).unwrap().total_power(), 6.0);
    }

    #[test]
    fn logic_examples() {
        let and = linear_logic(LogicKind::And, &w(6, 3), &w(3, 3)).unwrap();
        assert_eq!(decode_word_default(&and).unwrap(), 2);
        let or = linear_logic(LogicKind::Or, &w(6, 3), &w(3, 3)).unwrap();
        assert_eq!(decode_word_default(&or).unwrap(), 7);
        let annihilated = linear_logic(LogicKind::And, &w(0b101, 3), &w(0, 3)).unwrap();
        assert_eq!(decode_word_default(&annihilated).unwrap(), 0);
    }

    #[test]
    fn add_ripples_a_block_of_ones() {
        let sum = upsa_add(&w(0b1011, 4), &w(0b0001, 4)).unwrap();
        assert_eq!(decode_word_default(&sum).unwrap(), 0b1100);
        assert_eq!(sum.len(), 4);
    }

    #[test]
    fn add_identity() {
        let x = w(0b10110, 5);
        assert_eq!(upsa_add(&x, &w(0, 5)).unwrap(), x);
    }

    #[test]
    fn add_grows_on_overflow() {
        let sum = upsa_add(&w(0b1111, 4), &w(0b0001, 4)).unwrap();
        assert_eq!(sum.len(), 5);
        assert_eq!(decode_word_default(&sum).unwrap(), 0b10000);
        assert_eq!(sum.total_power(), 5.0);
    }

    #[test]
    fn add_refuses_growth_past_the_ceiling() {
        let x = w(u128::MAX, 128);
        let one = w(1, 128);
        assert_eq!(upsa_add(&x, &one).unwrap_err(), AluError::WordCeiling);
    }

    #[test]
    fn minus_examples() {
        let (sign, mag) = minus(&w(5, 3), &w(3, 3)).unwrap();
        assert_eq!((sign, decode_word_default(&mag).unwrap()), (1, 2));
        let (sign, mag) = minus(&w(3, 3), &w(5, 3)).unwrap();
        assert_eq!((sign, decode_word_default(&mag).unwrap()), (-1, 2));
        let x = w(0b0110, 4);
        let (sign, mag) = minus(&x, &x).unwrap();
        assert_eq!((sign, decode_word_default(&mag).unwrap()), (1, 0));
    }

    #[test]
    fn minus_pads_mixed_lengths() {
        let (sign, mag) = minus(&w(300, 10), &w(7, 3)).unwrap();
        assert_eq!((sign, decode_word_default(&mag).unwrap()), (1, 293));
    }

    #[test]
    fn multiply_examples() {
        let p = multiply(&w(5, 3), &w(3, 3)).unwrap();
        assert_eq!(decode_word_default(&p).unwrap(), 15);
        let x = w(0b110101, 6);
        assert_eq!(
            decode_word_default(&multiply(&x, &w(1, 1)).unwrap()).unwrap(),
            0b110101
        );
        assert_eq!(
            decode_word_default(&multiply(&x, &w(0, 4)).unwrap()).unwrap(),
            0
        );
    }

    #[test]
    fn multiply_grows_to_full_precision() {
        let p = multiply(&w(0xFFFF, 16), &w(0xFFFF, 16)).unwrap();
        assert_eq!(decode_word_default(&p).unwrap(), 0xFFFFu128 * 0xFFFF);
    }

    #[test]
    fn transitional_patterns_never_leak() {
        // Direct slot inspection: every xor output pair is a dictionary
        // pattern even though the intermediate combination is not.
        let z = xor_op(&w(0b1100, 4), &w(0b1010, 4)).unwrap();
        for pair in z.slots().chunks(2) {
            assert!(pair == [1.0, 0.0] || pair == [0.0, 1.0]);
        }
        assert_eq!(slot_power(z.slots()), 4.0);
    }

    #[test]
    fn bad_pattern_is_reported() {
        let p = PairPattern { base_amplitude: 1.0, slots: vec![1.0, 1.0, 0.5, 0.0] };
        assert_eq!(p.codes().unwrap_err(), AluError::BadPattern(1));
    }
}
