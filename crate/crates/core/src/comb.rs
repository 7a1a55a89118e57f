//! Frequency-comb word representation and the power-measurement readout.
//!
//! An `L`-bit word occupies `2L` frequency slots, two per bit. Within each
//! pair the occupancy pattern `(c0, 0)` encodes bit 0 and `(0, c0)` encodes
//! bit 1, so every valid word carries exactly `L` occupied slots and a total
//! spectral power of `L*c0^2` regardless of its value. All protocol-state
//! operations (flips, complement, shifts) permute occupancy and therefore
//! conserve power exactly; only sampled waveforms involve floating tolerance.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Classification tolerance for power-measurement reads.
pub const PSI_TOLERANCE: f64 = 1e-9;

/// Maximum supported word length. Decoded values are carried as `u128`, so a
/// word may grow up to 128 bits before the integer view overflows.
pub const MAX_WORD_LEN: usize = 128;

#[derive(Debug, Error, PartialEq)]
pub enum CombError {
    #[error("value {value} does not fit in {bits} bits")]
    Overflow { value: u128, bits: usize },
    #[error("word length {0} outside supported range 1..={MAX_WORD_LEN}")]
    BadWordLength(usize),
    #[error("bit index {index} out of range for {len}-bit word")]
    BitIndex { index: usize, len: usize },
    #[error("shift by {shift} exceeds word length {len}")]
    ShiftRange { shift: isize, len: usize },
    #[error("ambiguous power measurement at bit {index}: pair power {power}")]
    AmbiguousRead { index: usize, power: f64 },
    #[error("slot amplitudes violate the pair occupancy protocol")]
    ProtocolViolation,
    #[error("probe constants are indistinguishable (delta {0})")]
    DegenerateProbe(f64),
    #[error("sample rate {rate} below the band limit {limit}")]
    Nyquist { rate: f64, limit: f64 },
    #[error("duration {duration} is not a whole number of fundamental periods {period}")]
    PartialPeriod { duration: f64, period: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A binary word encoded as occupancy of `2L` frequency slots.
///
/// Slot `n` sits at angular frequency `(n + 1) * slot_spacing`; bit `k`
/// (least significant first) owns the slot pair `(2k, 2k + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombWord {
    word_length: usize,
    base_amplitude: f64,
    slot_spacing: f64,
    slots: Vec<f64>,
}

impl CombWord {
    /// Bit count `L`.
    pub fn len(&self) -> usize {
        self.word_length
    }

    pub fn is_empty(&self) -> bool {
        self.word_length == 0
    }

    /// Per-component amplitude `c0`.
    pub fn base_amplitude(&self) -> f64 {
        self.base_amplitude
    }

    /// Pair interval is `2 * slot_spacing`; slot `n` sits at `(n+1) * slot_spacing`.
    pub fn slot_spacing(&self) -> f64 {
        self.slot_spacing
    }

    /// The `2L` slot amplitudes.
    pub fn slots(&self) -> &[f64] {
        &self.slots
    }

    /// Angular frequency of slot `n` in rad/s.
    pub fn slot_frequency(&self, n: usize) -> f64 {
        (n as f64 + 1.0) * self.slot_spacing
    }

    /// Sum of squared slot amplitudes; `L * c0^2` for any valid word.
    pub fn total_power(&self) -> f64 {
        slot_power(&self.slots)
    }

    /// Squared power carried by bit `k`'s slot pair.
    pub fn pair_power(&self, k: usize) -> f64 {
        let (a, b) = (self.slots[2 * k], self.slots[2 * k + 1]);
        a * a + b * b
    }

    /// Checks the Manchester protocol invariants: each pair holds exactly one
    /// occupied slot at amplitude `c0`, and total power is `L * c0^2`.
    pub fn is_valid(&self) -> bool {
        if self.slots.len() != 2 * self.word_length {
            return false;
        }
        self.slots.chunks(2).all(|pair| {
            (pair[0] == self.base_amplitude && pair[1] == 0.0)
                || (pair[0] == 0.0 && pair[1] == self.base_amplitude)
        })
    }

    /// Appends zero-bit ("10") pairs until the word is `len` bits long.
    pub fn grown_to(&self, len: usize) -> CombWord {
        let mut w = self.clone();
        while w.word_length < len {
            w.slots.push(w.base_amplitude);
            w.slots.push(0.0);
            w.word_length += 1;
        }
        w
    }

    /// Drops every pair at bit positions `>= len`: the low-pass step that
    /// realizes modulo-`2^len` arithmetic in the slot domain.
    pub fn truncated(&self, len: usize) -> CombWord {
        let mut w = self.clone();
        if len < w.word_length {
            w.slots.truncate(2 * len);
            w.word_length = len;
        }
        w
    }

    /// Builds a word from raw slot amplitudes, enforcing the pair occupancy
    /// protocol. `slots.len()` must be even and each pair must hold exactly
    /// one slot at `base_amplitude`.
    pub fn from_slots(
        slots: Vec<f64>,
        base_amplitude: f64,
        slot_spacing: f64,
    ) -> Result<CombWord, CombError> {
        if slots.len() % 2 != 0 || slots.is_empty() || slots.len() > 2 * MAX_WORD_LEN {
            return Err(CombError::BadWordLength(slots.len() / 2));
        }
        let word = CombWord {
            word_length: slots.len() / 2,
            base_amplitude,
            slot_spacing,
            slots,
        };
        if !word.is_valid() {
            return Err(CombError::ProtocolViolation);
        }
        Ok(word)
    }
}

impl fmt::Display for CombWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "comb L={} c0={} dw={}",
            self.word_length, self.base_amplitude, self.slot_spacing
        )
    }
}

/// The all-slots-occupied comb `1(t)`: total power `2L * c0^2`. Subtracting a
/// word from it yields the word's bitwise complement.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceComb {
    pub word_length: usize,
    pub base_amplitude: f64,
    pub slot_spacing: f64,
}

impl ReferenceComb {
    pub fn matching(word: &CombWord) -> ReferenceComb {
        ReferenceComb {
            word_length: word.len(),
            base_amplitude: word.base_amplitude,
            slot_spacing: word.slot_spacing,
        }
    }

    pub fn slots(&self) -> Vec<f64> {
        vec![self.base_amplitude; 2 * self.word_length]
    }

    pub fn total_power(&self) -> f64 {
        slot_power(&self.slots())
    }
}

/// Probe tone amplitudes for the perturbative read of one slot pair.
///
/// Adding `(c1, c2)` onto a pair and measuring total squared power yields one
/// of two detector values depending on which slot was occupied; the pair
/// `(c1, c2) = (c0, 2c0)` separates them as `10c0^2` vs `8c0^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiProbe {
    pub c1: f64,
    pub c2: f64,
}

impl PsiProbe {
    /// Default probe pair `(c0, 2c0)` for a word with base amplitude `c0`.
    pub fn default_for(c0: f64) -> PsiProbe {
        PsiProbe { c1: c0, c2: 2.0 * c0 }
    }

    /// Detector value when the first slot of the pair is missing (bit 1):
    /// `c1^2 + (c2 + c0)^2`.
    pub fn delta_one(&self, c0: f64) -> f64 {
        self.c1 * self.c1 + (self.c2 + c0) * (self.c2 + c0)
    }

    /// Detector value when the first slot is present (bit 0):
    /// `(c1 + c0)^2 + c2^2`.
    pub fn delta_zero(&self, c0: f64) -> f64 {
        (self.c1 + c0) * (self.c1 + c0) + self.c2 * self.c2
    }
}

/// One perturbative read: the classified bit and the pair power seen by the
/// square detector while the probe tones were applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiReading {
    pub bit: u8,
    pub pair_power: f64,
}

/// Sampled time-domain view of a comb word.
#[derive(Debug, Clone)]
pub struct WaveformView {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub duration: f64,
}

impl WaveformView {
    pub fn mean_square(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s * s).sum::<f64>() / self.samples.len() as f64
    }
}

/// Sum of squared amplitudes of an arbitrary slot sequence.
pub fn slot_power(slots: &[f64]) -> f64 {
    slots.iter().map(|s| s * s).sum()
}

/// Encodes `value` as an `bits`-bit comb word with unit defaults
/// (`c0 = 1`, `slot_spacing = 1` rad/s).
pub fn encode_word(value: u128, bits: usize) -> Result<CombWord, CombError> {
    encode_word_with(value, bits, 1.0, 1.0)
}

/// Encodes `value` with explicit base amplitude and slot spacing. Bit `k`
/// of `value` selects the occupancy pattern of slot pair `(2k, 2k + 1)`:
/// `0 -> (c0, 0)`, `1 -> (0, c0)`.
pub fn encode_word_with(
    value: u128,
    bits: usize,
    base_amplitude: f64,
    slot_spacing: f64,
) -> Result<CombWord, CombError> {
    if bits == 0 || bits > MAX_WORD_LEN {
        return Err(CombError::BadWordLength(bits));
    }
    if bits < 128 && value >> bits != 0 {
        return Err(CombError::Overflow { value, bits });
    }
    let mut slots = Vec::with_capacity(2 * bits);
    for k in 0..bits {
        if value >> k & 1 == 0 {
            slots.push(base_amplitude);
            slots.push(0.0);
        } else {
            slots.push(0.0);
            slots.push(base_amplitude);
        }
    }
    Ok(CombWord {
        word_length: bits,
        base_amplitude,
        slot_spacing,
        slots,
    })
}

/// Reads bit `k` by adding the probe tones onto its slot pair, measuring the
/// total squared power, withdrawing the tones and classifying the power
/// change against the two detector values. The word is not mutated.
pub fn psi_read(word: &CombWord, k: usize, probe: &PsiProbe) -> Result<PsiReading, CombError> {
    if k >= word.len() {
        return Err(CombError::BitIndex { index: k, len: word.len() });
    }
    let c0 = word.base_amplitude;
    let delta_one = probe.delta_one(c0);
    let delta_zero = probe.delta_zero(c0);
    if (delta_one - delta_zero).abs() <= 2.0 * PSI_TOLERANCE {
        return Err(CombError::DegenerateProbe(delta_one - delta_zero));
    }

    let unperturbed = word.total_power();
    let mut perturbed = word.slots.clone();
    perturbed[2 * k] += probe.c1;
    perturbed[2 * k + 1] += probe.c2;
    let measured_change = slot_power(&perturbed) - unperturbed;
    // Only the probed pair differs, so the change plus the pair's resting
    // power c0^2 is the perturbed pair power the detector classifies.
    let pair_power = measured_change + c0 * c0;

    if (pair_power - delta_one).abs() <= PSI_TOLERANCE {
        Ok(PsiReading { bit: 1, pair_power })
    } else if (pair_power - delta_zero).abs() <= PSI_TOLERANCE {
        Ok(PsiReading { bit: 0, pair_power })
    } else {
        Err(CombError::AmbiguousRead { index: k, power: pair_power })
    }
}

/// Reads bit `k`, discarding the detector value.
pub fn psi_read_bit(word: &CombWord, k: usize, probe: &PsiProbe) -> Result<u8, CombError> {
    Ok(psi_read(word, k, probe)?.bit)
}

/// Recovers the integer value of a word by reading every bit.
pub fn decode_word(word: &CombWord, probe: &PsiProbe) -> Result<u128, CombError> {
    let mut value = 0u128;
    for k in 0..word.len() {
        if psi_read_bit(word, k, probe)? == 1 {
            value |= 1 << k;
        }
    }
    Ok(value)
}

/// Decodes with the default probe for the word's own `c0`.
pub fn decode_word_default(word: &CombWord) -> Result<u128, CombError> {
    decode_word(word, &PsiProbe::default_for(word.base_amplitude()))
}

/// Flips bit `k` by the beat-signal swap: the occupied harmonic of the pair
/// is subtracted and the vacant one added, leaving total power unchanged.
pub fn flip_bit(word: &CombWord, k: usize) -> Result<CombWord, CombError> {
    if k >= word.len() {
        return Err(CombError::BitIndex { index: k, len: word.len() });
    }
    let mut w = word.clone();
    w.slots.swap(2 * k, 2 * k + 1);
    Ok(w)
}

/// Bitwise NOT as the signal difference from the reference comb: every slot
/// amplitude becomes `c0 - slot`.
pub fn complement(word: &CombWord) -> CombWord {
    let mut w = word.clone();
    for s in &mut w.slots {
        *s = w.base_amplitude - *s;
    }
    w
}

/// Shifts the word by `k` bit positions: `k > 0` moves slots up by `2k`
/// (multiply by `2^k`, overflow pairs discarded by the low-pass modulo step,
/// vacated low pairs refilled with the zero pattern); `k < 0` moves slots
/// down (floor division, the band-pass cut), refilling high pairs.
pub fn shift_word(word: &CombWord, k: isize) -> Result<CombWord, CombError> {
    let len = word.len();
    if k.unsigned_abs() > len {
        return Err(CombError::ShiftRange { shift: k, len });
    }
    let mut w = word.clone();
    if k > 0 {
        let n = 2 * k as usize;
        w.slots.truncate(2 * len - n);
        for _ in 0..k {
            w.slots.insert(0, 0.0);
            w.slots.insert(0, w.base_amplitude);
        }
    } else if k < 0 {
        let n = 2 * k.unsigned_abs();
        w.slots.drain(..n);
        for _ in 0..k.unsigned_abs() {
            w.slots.push(w.base_amplitude);
            w.slots.push(0.0);
        }
    }
    Ok(w)
}

/// Samples `sum_n slots[n] * cos(w_n t)` over `duration` seconds. The rate
/// must clear the band limit and the duration must span a whole number of
/// fundamental periods so the discrete mean square matches half the slot
/// power.
pub fn synthesize_waveform(
    word: &CombWord,
    sample_rate: f64,
    duration: f64,
) -> Result<WaveformView, CombError> {
    let band_limit = 2.0 * (2.0 * word.len() as f64 + 1.0) * word.slot_spacing
        / (2.0 * std::f64::consts::PI);
    if sample_rate <= band_limit {
        return Err(CombError::Nyquist { rate: sample_rate, limit: band_limit });
    }
    let period = 2.0 * std::f64::consts::PI / word.slot_spacing;
    let cycles = duration / period;
    if cycles < 0.5 || (cycles - cycles.round()).abs() > 1e-9 {
        return Err(CombError::PartialPeriod { duration, period });
    }
    let n = (sample_rate * duration).round() as usize;
    let dt = duration / n as f64;
    let samples = (0..n)
        .map(|j| {
            let t = j as f64 * dt;
            word.slots
                .iter()
                .enumerate()
                .filter(|(_, s)| **s != 0.0)
                .map(|(i, s)| s * (word.slot_frequency(i) * t).cos())
                .sum()
        })
        .collect();
    Ok(WaveformView { samples, sample_rate, duration })
}

/// Writes the line-oriented comb file format: a `comb L=.. c0=.. dw=..`
/// header followed by the 2L slot amplitudes.
pub fn write_comb_text(word: &CombWord) -> String {
    let slots: Vec<String> = word.slots.iter().map(|s| format!("{s}")).collect();
    format!("{}\n{}\n", word, slots.join(" "))
}

/// Parses the comb file format produced by [`write_comb_text`].
pub fn parse_comb_text(text: &str) -> Result<CombWord, CombError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(CombError::Parse { line: 1, msg: "empty comb file".into() })?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("comb") {
        return Err(CombError::Parse { line: 1, msg: "expected `comb` header".into() });
    }
    let mut len = None;
    let mut c0 = None;
    let mut dw = None;
    for field in fields {
        let (key, value) = field.split_once('=').ok_or(CombError::Parse {
            line: 1,
            msg: format!("malformed header field `{field}`"),
        })?;
        match key {
            "L" => {
                len = Some(usize::from_str(value).map_err(|e| CombError::Parse {
                    line: 1,
                    msg: format!("bad L: {e}"),
                })?)
            }
            "c0" => {
                c0 = Some(f64::from_str(value).map_err(|e| CombError::Parse {
                    line: 1,
                    msg: format!("bad c0: {e}"),
                })?)
            }
            "dw" => {
                dw = Some(f64::from_str(value).map_err(|e| CombError::Parse {
                    line: 1,
                    msg: format!("bad dw: {e}"),
                })?)
            }
            other => {
                return Err(CombError::Parse {
                    line: 1,
                    msg: format!("unknown header field `{other}`"),
                })
            }
        }
    }
    let word_length = len.ok_or(CombError::Parse { line: 1, msg: "missing L".into() })?;
    if word_length == 0 || word_length > MAX_WORD_LEN {
        return Err(CombError::BadWordLength(word_length));
    }
    let (_, slot_line) = lines
        .next()
        .ok_or(CombError::Parse { line: 2, msg: "missing slot line".into() })?;
    let slots: Vec<f64> = slot_line
        .split_whitespace()
        .map(|tok| {
            f64::from_str(tok).map_err(|e| CombError::Parse {
                line: 2,
                msg: format!("bad amplitude `{tok}`: {e}"),
            })
        })
        .collect::<Result<_, _>>()?;
    if slots.len() != 2 * word_length {
        return Err(CombError::Parse {
            line: 2,
            msg: format!("expected {} amplitudes, found {}", 2 * word_length, slots.len()),
        });
    }
    let word = CombWord {
        word_length,
        base_amplitude: c0.unwrap_or(1.0),
        slot_spacing: dw.unwrap_or(1.0),
        slots,
    };
    if !word.is_valid() {
        return Err(CombError::Parse {
            line: 2,
            msg: "slot amplitudes violate the pair occupancy protocol".into(),
        });
    }
    Ok(word)
}

/// Spectrum CSV rows: `slot_index,frequency_rad_s,amplitude`.
pub fn spectrum_csv(word: &CombWord) -> String {
    let mut out = String::from("slot_index,frequency_rad_s,amplitude\n");
    for (i, s) in word.slots.iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", i, word.slot_frequency(i), s));
    }
    out
}
