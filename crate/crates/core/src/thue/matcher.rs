//! Substring search as a circulant windowed-code scan.
//!
//! A rule with left side length `L` carries the weight mask
//! `(1, b, b^2, ..., b^(L-1))`; sliding it cyclically over the zero-padded
//! string produces at every offset the positional code of the window
//! starting there. Windows equal to the rule's lhs code are matches.
//! Because the padding symbol 0 never occurs inside a word and every lhs
//! digit is nonzero, a window that wraps across the edge always contains a
//! zero digit and can never produce a false positive.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::Zero;
use rustfft::FftPlanner;

use super::{ArithmetizedSystem, SymbolString, ThueError};

/// Weight mask of one rule's matching window, with its spectral form for
/// the distributed mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantMatcher {
    base: u32,
    window_len: usize,
    weights: Vec<BigUint>,
}

impl CirculantMatcher {
    /// Mask for the rule at `rule` in `sys`.
    pub fn for_rule(sys: &ArithmetizedSystem, rule: usize) -> CirculantMatcher {
        let window_len = sys.rules()[rule].lhs_len;
        let b = BigUint::from(sys.base());
        let mut weights = Vec::with_capacity(window_len);
        let mut w = BigUint::from(1u32);
        for _ in 0..window_len {
            weights.push(w.clone());
            w *= &b;
        }
        CirculantMatcher { base: sys.base(), window_len, weights }
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    /// Windowed code at every cyclic offset of `frame`: entry `j` is
    /// `sum_t b^t * frame[(j + t) mod N]`.
    pub fn window_codes(&self, frame: &[u32]) -> Vec<BigUint> {
        let n = frame.len();
        (0..n)
            .map(|j| {
                let mut acc = BigUint::zero();
                for (t, w) in self.weights.iter().enumerate() {
                    acc += w * BigUint::from(frame[(j + t) % n]);
                }
                acc
            })
            .collect()
    }

    /// Spectral diagonal of the matching circulant at frame length `n`:
    /// the conjugated discrete-Fourier transform of the zero-extended mask,
    /// so that multiplying a unitary-transformed frame by it realizes the
    /// cyclic correlation the window scan performs. Requires every weight
    /// to be exactly representable as a float.
    pub fn lambda(&self, n: usize, rule: usize) -> Result<Vec<Complex64>, ThueError> {
        if self.window_len > n {
            // A window longer than the frame has no valid offsets; the
            // zero-extension below would alias it.
            return Err(ThueError::SpectralRange { rule, exponent: self.window_len });
        }
        let mut mask: Vec<Complex64> = vec![Complex64::zero(); n];
        for (t, w) in self.weights.iter().enumerate() {
            let exact: f64 = match u64::try_from(w) {
                Ok(v) if v < (1u64 << 53) => v as f64,
                _ => return Err(ThueError::SpectralRange { rule, exponent: t }),
            };
            mask[t] = Complex64::new(exact, 0.0);
        }
        FftPlanner::new().plan_fft_forward(n).process(&mut mask);
        Ok(mask.iter().map(Complex64::conj).collect())
    }
}

/// Ascending 0-based positions where `rule`'s left side occurs in `s`,
/// found by scanning the windowed codes of the padded frame. Wrapped and
/// padding-touching windows are excluded by the zero-digit argument, so
/// only interior offsets are reported.
pub fn match_positions(s: &SymbolString, sys: &ArithmetizedSystem, rule: usize) -> Vec<usize> {
    let r = &sys.rules()[rule];
    if r.lhs_len > s.len() {
        return Vec::new();
    }
    let matcher = CirculantMatcher::for_rule(sys, rule);
    let frame = s.padded();
    let codes = matcher.window_codes(&frame);
    // Frame index 1 + j holds the window starting at string position j.
    (0..=s.len() - r.lhs_len)
        .filter(|&j| codes[j + 1] == r.lhs_code)
        .collect()
}
