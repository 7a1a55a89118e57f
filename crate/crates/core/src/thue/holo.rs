//! Spectral-domain rewriting. The string lives as a complex spectrum with
//! the acting rule's diagonal applied; each step demodulates back to
//! symbols, rewrites exactly as the direct mode would, and re-emits.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::matcher::CirculantMatcher;
use super::rewrite::{all_matches, apply_match, select_match, RewriteOutcome, Strategy};
use super::{ArithmetizedSystem, SymbolString, ThueError};

/// Decoded field entries must sit this close to their integer codes.
const DECODE_TOLERANCE: f64 = 1e-9;

/// A string carried as the spectrum of its padded frame, scaled by the
/// diagonal of whichever rule acted last. A fresh field has seen no rule
/// act and carries the bare spectrum. Rules are owned round-robin by a
/// fixed roster of agents; the roster only attributes steps, every agent
/// applies the identical rewrite.
#[derive(Debug, Clone)]
pub struct HolographicField {
    spectrum: Vec<Complex64>,
    activation: Option<usize>,
    agents: usize,
}

fn unitary_fft(values: &mut [Complex64], inverse: bool) {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(values);
    let scale = 1.0 / (n as f64).sqrt();
    for v in values.iter_mut() {
        *v *= scale;
    }
}

fn rule_diagonal(
    sys: &ArithmetizedSystem,
    rule: usize,
    n: usize,
) -> Result<Vec<Complex64>, ThueError> {
    CirculantMatcher::for_rule(sys, rule).lambda(n, rule)
}

fn emit(
    s: &SymbolString,
    sys: &ArithmetizedSystem,
    activation: Option<usize>,
) -> Result<Vec<Complex64>, ThueError> {
    let frame = s.padded();
    let mut spectrum: Vec<Complex64> = frame
        .iter()
        .map(|&c| Complex64::new(c as f64, 0.0))
        .collect();
    unitary_fft(&mut spectrum, false);
    if let Some(rule) = activation {
        let diagonal = rule_diagonal(sys, rule, spectrum.len())?;
        for (v, d) in spectrum.iter_mut().zip(&diagonal) {
            *v *= d;
        }
    }
    Ok(spectrum)
}

impl HolographicField {
    /// Wraps a string into a fresh field shared by `agents` agents.
    pub fn encode(
        s: &SymbolString,
        sys: &ArithmetizedSystem,
        agents: usize,
    ) -> Result<HolographicField, ThueError> {
        let agents = agents.max(1);
        Ok(HolographicField { spectrum: emit(s, sys, None)?, activation: None, agents })
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// Index of the rule that acted last, if any.
    pub fn activation(&self) -> Option<usize> {
        self.activation
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    /// The agent owning a rule under the round-robin roster.
    pub fn owner(&self, rule: usize) -> usize {
        rule % self.agents
    }

    /// The agent that performed the last step, if any step has run.
    pub fn acting_agent(&self) -> Option<usize> {
        self.activation.map(|rule| self.owner(rule))
    }
}

/// Demodulates the field back into its symbol string. Fails if any frame
/// entry has drifted beyond tolerance from its integer code, or if the
/// frame's shape (zero edges, nonzero interior) is broken.
pub fn decode_field(
    field: &HolographicField,
    sys: &ArithmetizedSystem,
) -> Result<SymbolString, ThueError> {
    let n = field.spectrum.len();
    let mut frame = field.spectrum.clone();
    if let Some(rule) = field.activation {
        let diagonal = rule_diagonal(sys, rule, n)?;
        for (v, d) in frame.iter_mut().zip(&diagonal) {
            *v /= d;
        }
    }
    unitary_fft(&mut frame, true);

    let limit = sys.base() - 1;
    let mut codes = Vec::with_capacity(n - 2);
    for (index, value) in frame.iter().enumerate() {
        let rounded = value.re.round();
        let drift = ThueError::FieldDrift { index, value: value.re };
        if (value - Complex64::new(rounded, 0.0)).norm() > DECODE_TOLERANCE {
            return Err(drift);
        }
        let edge = index == 0 || index == n - 1;
        if edge {
            if rounded != 0.0 {
                return Err(drift);
            }
            continue;
        }
        if rounded < 1.0 || rounded > limit as f64 {
            return Err(drift);
        }
        codes.push(rounded as u32);
    }
    SymbolString::new(codes)
}

/// One rewrite performed in the spectral domain. The field is demodulated,
/// the same match selection as the direct mode picks a (rule, position),
/// the owning agent splices the replacement, and the result is re-emitted
/// under that rule's diagonal. With no match the field passes through
/// unchanged.
pub fn holographic_step(
    field: &HolographicField,
    sys: &ArithmetizedSystem,
    strategy: Strategy,
) -> Result<(HolographicField, RewriteOutcome), ThueError> {
    let s = decode_field(field, sys)?;
    let matches = all_matches(&s, sys);
    let Some((rule, position)) = select_match(&matches, strategy, None) else {
        return Ok((field.clone(), RewriteOutcome::NormalForm));
    };
    let next = apply_match(&s, sys, rule, position);
    let spectrum = emit(&next, sys, Some(rule))?;
    let stepped =
        HolographicField { spectrum, activation: Some(rule), agents: field.agents };
    Ok((stepped, RewriteOutcome::Rewritten { string: next, rule, position }))
}
