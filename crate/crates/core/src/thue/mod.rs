//! Semi-Thue rewriting over arithmetized strings.
//!
//! Symbols map to integer codes `1..=l` and every word becomes a number in
//! base `b = l + 1` with the first symbol carrying weight `b^0` (code 0 is
//! reserved for the edge padding, so no word ever collides with a shifted
//! one). A rule packs its two sides into the single integer
//! `k = n + b^L * m`, recoverable exactly by mod and floor. Substring
//! search, rewriting and the distributed spectral mode all operate on these
//! codes rather than on the symbols themselves.

mod confluence;
mod holo;
mod matcher;
mod rewrite;

pub use confluence::{check_confluence_small, ConfluenceReport, ConfluenceWitness, Verdict};
pub use holo::{decode_field, holographic_step, HolographicField};
pub use matcher::{match_positions, CirculantMatcher};
pub use rewrite::{
    format_reduction_trace, reduce, rewrite_step, ReductionReport, RewriteOutcome, RewriteRecord,
    Strategy,
};

use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThueError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("symbol `{0}` is not in the rule alphabet")]
    UnknownSymbol(char),
    #[error("strings must hold at least one symbol")]
    EmptyString,
    #[error("lhs of rule {longer} extends the lhs of rule {shorter}: codes congruent")]
    PrefixConflict { shorter: usize, longer: usize },
    #[error("rule {rule}: window weight b^{exponent} exceeds exact float range")]
    SpectralRange { rule: usize, exponent: usize },
    #[error("field entry {index} drifted to {value}, beyond decode tolerance")]
    FieldDrift { index: usize, value: f64 },
}

/// Ordered rewrite rules plus the symbol codec. The alphabet is the set of
/// symbols in order of first appearance across the rule text; codes start
/// at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    rules: Vec<(String, String)>,
    alphabet: Vec<char>,
}

impl RuleTable {
    /// Builds a table from (lhs, rhs) pairs. Both sides must be nonempty.
    pub fn new<S: AsRef<str>>(pairs: &[(S, S)]) -> Result<RuleTable, ThueError> {
        let mut table = RuleTable { rules: Vec::new(), alphabet: Vec::new() };
        for (i, (lhs, rhs)) in pairs.iter().enumerate() {
            table.push_rule(lhs.as_ref(), rhs.as_ref(), i + 1)?;
        }
        Ok(table)
    }

    /// Parses the line-oriented rule format: `lhs -> rhs` per line, `#`
    /// comments, blank lines ignored.
    pub fn parse(text: &str) -> Result<RuleTable, ThueError> {
        let mut table = RuleTable { rules: Vec::new(), alphabet: Vec::new() };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((lhs, rhs)) = line.split_once("->") else {
                return Err(ThueError::Parse {
                    line: i + 1,
                    msg: format!("expected `lhs -> rhs`, found `{line}`"),
                });
            };
            table.push_rule(lhs.trim(), rhs.trim(), i + 1)?;
        }
        Ok(table)
    }

    fn push_rule(&mut self, lhs: &str, rhs: &str, line: usize) -> Result<(), ThueError> {
        if lhs.is_empty() || rhs.is_empty() {
            return Err(ThueError::Parse { line, msg: "null words are not allowed".into() });
        }
        for c in lhs.chars().chain(rhs.chars()) {
            if c.is_whitespace() || c == '#' {
                return Err(ThueError::Parse { line, msg: format!("invalid symbol `{c}`") });
            }
            if !self.alphabet.contains(&c) {
                self.alphabet.push(c);
            }
        }
        self.rules.push((lhs.to_string(), rhs.to_string()));
        Ok(())
    }

    pub fn rules(&self) -> &[(String, String)] {
        &self.rules
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    /// Alphabet size `l`; the coding base is `l + 1`.
    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    /// 1-based code of a symbol.
    pub fn symbol_code(&self, symbol: char) -> Result<u32, ThueError> {
        self.alphabet
            .iter()
            .position(|&c| c == symbol)
            .map(|p| p as u32 + 1)
            .ok_or(ThueError::UnknownSymbol(symbol))
    }

    pub fn code_symbol(&self, code: u32) -> Option<char> {
        (code >= 1)
            .then(|| self.alphabet.get(code as usize - 1).copied())
            .flatten()
    }

    /// Encodes a symbol string into its code sequence.
    pub fn string(&self, text: &str) -> Result<SymbolString, ThueError> {
        let codes = text
            .chars()
            .map(|c| self.symbol_code(c))
            .collect::<Result<Vec<_>, _>>()?;
        SymbolString::new(codes)
    }

    /// Renders a code sequence back into symbol text.
    pub fn text(&self, s: &SymbolString) -> String {
        s.codes()
            .iter()
            .map(|&c| self.code_symbol(c).expect("codes stay within the alphabet"))
            .collect()
    }
}

/// A word as its code sequence. Interior codes are never 0; the zero code
/// exists only as the edge padding added when matching.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolString {
    codes: Vec<u32>,
}

impl SymbolString {
    pub fn new(codes: Vec<u32>) -> Result<SymbolString, ThueError> {
        if codes.is_empty() {
            return Err(ThueError::EmptyString);
        }
        Ok(SymbolString { codes })
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// The cyclic matching frame: the word with one `0` symbol at each edge.
    pub fn padded(&self) -> Vec<u32> {
        let mut p = Vec::with_capacity(self.codes.len() + 2);
        p.push(0);
        p.extend_from_slice(&self.codes);
        p.push(0);
        p
    }

    /// Splices `rhs` over the `window` symbols starting at `pos`.
    pub(crate) fn spliced(&self, pos: usize, window: usize, rhs: &[u32]) -> SymbolString {
        let mut codes = Vec::with_capacity(self.codes.len() + rhs.len() - window);
        codes.extend_from_slice(&self.codes[..pos]);
        codes.extend_from_slice(rhs);
        codes.extend_from_slice(&self.codes[pos + window..]);
        SymbolString { codes }
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strs: Vec<String> = self.codes.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", strs.join(" "))
    }
}

/// One arithmetized rule: both sides as positional codes and the packed
/// form `k = n + b^L * m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithmetizedRule {
    pub lhs_code: BigUint,
    pub rhs_code: BigUint,
    pub packed: BigUint,
    pub lhs_len: usize,
    pub rhs_len: usize,
    pub lhs_codes: Vec<u32>,
    pub rhs_codes: Vec<u32>,
}

/// A rule table with every rule reduced to numbers in base `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArithmetizedSystem {
    table: RuleTable,
    base: u32,
    rules: Vec<ArithmetizedRule>,
}

/// Positional code of a code sequence: symbol `t` carries weight `b^t`.
pub fn positional_code(codes: &[u32], base: u32) -> BigUint {
    let b = BigUint::from(base);
    let mut acc = BigUint::zero();
    for &c in codes.iter().rev() {
        acc = acc * &b + BigUint::from(c);
    }
    acc
}

/// Reduces every rule to its code pair and packed form, and rejects tables
/// where one lhs extends another: such codes are congruent modulo `b^L`, so
/// the shorter rule's matches are a subset of positions where the longer
/// rule may also fire on the same window start, and the matcher could not
/// tell them apart.
pub fn arithmetize(table: &RuleTable) -> Result<ArithmetizedSystem, ThueError> {
    let base = table.alphabet_size() as u32 + 1;
    let rules: Vec<ArithmetizedRule> = table
        .rules()
        .iter()
        .map(|(lhs, rhs)| {
            let lhs_codes: Vec<u32> = lhs.chars().map(|c| table.symbol_code(c).unwrap()).collect();
            let rhs_codes: Vec<u32> = rhs.chars().map(|c| table.symbol_code(c).unwrap()).collect();
            let lhs_code = positional_code(&lhs_codes, base);
            let rhs_code = positional_code(&rhs_codes, base);
            let packed = &lhs_code + BigUint::from(base).pow(lhs_codes.len() as u32) * &rhs_code;
            ArithmetizedRule {
                lhs_code,
                rhs_code,
                packed,
                lhs_len: lhs_codes.len(),
                rhs_len: rhs_codes.len(),
                lhs_codes,
                rhs_codes,
            }
        })
        .collect();

    for (i, ri) in rules.iter().enumerate() {
        for (j, rj) in rules.iter().enumerate() {
            if ri.lhs_len < rj.lhs_len {
                let modulus = BigUint::from(base).pow(ri.lhs_len as u32);
                if &rj.lhs_code % &modulus == ri.lhs_code {
                    return Err(ThueError::PrefixConflict { shorter: i, longer: j });
                }
            }
        }
    }
    Ok(ArithmetizedSystem { table: table.clone(), base, rules })
}

impl ArithmetizedSystem {
    pub fn table(&self) -> &RuleTable {
        &self.table
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn rules(&self) -> &[ArithmetizedRule] {
        &self.rules
    }

    /// Recovers (lhs code, rhs code) from a rule's packed form.
    pub fn unpack(&self, rule: usize) -> (BigUint, BigUint) {
        let r = &self.rules[rule];
        let modulus = BigUint::from(self.base).pow(r.lhs_len as u32);
        (&r.packed % &modulus, &r.packed / &modulus)
    }

    /// Parses a string against this system's alphabet.
    pub fn string(&self, text: &str) -> Result<SymbolString, ThueError> {
        self.table.string(text)
    }
}
