//! Single rewrite steps and bounded reductions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matcher::match_positions;
use super::{ArithmetizedSystem, SymbolString};

/// How a step chooses among the available (rule, position) matches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Smallest position wins; rule index breaks ties.
    Leftmost,
    /// Uniform over all matches, driven by this seed.
    Random(u64),
}

/// Result of one attempted rewrite.
#[derive(Debug, Clone, PartialEq)]
pub enum RewriteOutcome {
    Rewritten {
        string: SymbolString,
        rule: usize,
        position: usize,
    },
    /// No rule matches anywhere.
    NormalForm,
}

/// Every (rule, position) match in the string, ordered by position then
/// rule index. All selection strategies draw from this one enumeration, so
/// the direct and spectral modes cannot disagree about candidate order.
pub(crate) fn all_matches(s: &SymbolString, sys: &ArithmetizedSystem) -> Vec<(usize, usize)> {
    let mut matches: Vec<(usize, usize)> = (0..sys.rules().len())
        .flat_map(|rule| {
            match_positions(s, sys, rule)
                .into_iter()
                .map(move |pos| (rule, pos))
        })
        .collect();
    matches.sort_by_key(|&(rule, pos)| (pos, rule));
    matches
}

pub(crate) fn select_match(
    matches: &[(usize, usize)],
    strategy: Strategy,
    rng: Option<&mut ChaCha8Rng>,
) -> Option<(usize, usize)> {
    if matches.is_empty() {
        return None;
    }
    match strategy {
        Strategy::Leftmost => Some(matches[0]),
        Strategy::Random(seed) => {
            let index = match rng {
                Some(r) => r.gen_range(0..matches.len()),
                None => ChaCha8Rng::seed_from_u64(seed).gen_range(0..matches.len()),
            };
            Some(matches[index])
        }
    }
}

pub(crate) fn apply_match(
    s: &SymbolString,
    sys: &ArithmetizedSystem,
    rule: usize,
    position: usize,
) -> SymbolString {
    let r = &sys.rules()[rule];
    s.spliced(position, r.lhs_len, &r.rhs_codes)
}

/// Applies one rewrite under the strategy, or reports normal form. The
/// replacement splices the right side over the matched window, so the
/// string length changes by the rule's length difference.
pub fn rewrite_step(
    s: &SymbolString,
    sys: &ArithmetizedSystem,
    strategy: Strategy,
) -> RewriteOutcome {
    let matches = all_matches(s, sys);
    match select_match(&matches, strategy, None) {
        None => RewriteOutcome::NormalForm,
        Some((rule, position)) => RewriteOutcome::Rewritten {
            string: apply_match(s, sys, rule, position),
            rule,
            position,
        },
    }
}

/// One applied rewrite within a reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRecord {
    pub step: usize,
    pub position: usize,
    pub rule: usize,
    pub len_after: usize,
}

/// A bounded reduction: the final string, how it got there, and whether a
/// normal form was actually reached within the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub string: SymbolString,
    pub steps: usize,
    pub terminated: bool,
    pub trace: Vec<RewriteRecord>,
}

/// Rewrites until normal form or until `max_steps` applications. A random
/// strategy threads one generator through the whole reduction.
pub fn reduce(
    s: &SymbolString,
    sys: &ArithmetizedSystem,
    strategy: Strategy,
    max_steps: usize,
) -> ReductionReport {
    let mut rng = match strategy {
        Strategy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        Strategy::Leftmost => None,
    };
    let mut current = s.clone();
    let mut trace = Vec::new();
    for step in 0..max_steps {
        let matches = all_matches(&current, sys);
        let Some((rule, position)) = select_match(&matches, strategy, rng.as_mut()) else {
            return ReductionReport { string: current, steps: step, terminated: true, trace };
        };
        current = apply_match(&current, sys, rule, position);
        trace.push(RewriteRecord { step, position, rule, len_after: current.len() });
    }
    let terminated = all_matches(&current, sys).is_empty();
    ReductionReport { string: current, steps: max_steps, terminated, trace }
}

/// Line-oriented reduction trace: `step pos rule lhs rhs |s|`.
pub fn format_reduction_trace(trace: &[RewriteRecord], sys: &ArithmetizedSystem) -> String {
    let mut out = String::new();
    for r in trace {
        let (lhs, rhs) = &sys.table().rules()[r.rule];
        out.push_str(&format!(
            "{} {} {} {} {} {}\n",
            r.step, r.position, r.rule, lhs, rhs, r.len_after
        ));
    }
    out
}
