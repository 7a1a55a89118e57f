//! Rewriting engine checked against naive string oracles: the spectral
//! matcher against a direct substring scan, packing against its inverse,
//! strategy choice against confluence, and the spectral-domain stepper
//! against the direct one.

use combsim_core::thue::{
    arithmetize, check_confluence_small, decode_field, holographic_step, match_positions,
    positional_code, reduce, rewrite_step, ArithmetizedSystem, HolographicField, RewriteOutcome,
    RuleTable, Strategy, SymbolString, Verdict,
};
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CONFLUENT_THUE: &str = include_str!("../fixtures/confluent.thue");
const SWAP_THUE: &str = include_str!("../fixtures/swap.thue");
const GROWTH_THUE: &str = include_str!("../fixtures/growth.thue");

const LETTERS: &[char] = &['a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'i'];

fn fixture(text: &str) -> ArithmetizedSystem {
    arithmetize(&RuleTable::parse(text).unwrap()).unwrap()
}

/// A random system over at most nine letters. Resamples until the table
/// passes the lhs congruence check.
fn random_system(rng: &mut ChaCha8Rng) -> ArithmetizedSystem {
    loop {
        let letters = rng.gen_range(1..=9usize);
        let rules = rng.gen_range(1..=3usize);
        let word = |rng: &mut ChaCha8Rng| -> String {
            (0..rng.gen_range(1..=4usize))
                .map(|_| LETTERS[rng.gen_range(0..letters)])
                .collect()
        };
        let pairs: Vec<(String, String)> = (0..rules).map(|_| (word(rng), word(rng))).collect();
        if let Ok(sys) = arithmetize(&RuleTable::new(&pairs).unwrap()) {
            return sys;
        }
    }
}

fn random_string(rng: &mut ChaCha8Rng, sys: &ArithmetizedSystem, max_len: usize) -> SymbolString {
    let l = sys.table().alphabet_size() as u32;
    let len = rng.gen_range(1..=max_len);
    SymbolString::new((0..len).map(|_| rng.gen_range(1..=l)).collect()).unwrap()
}

fn naive_positions(s: &SymbolString, lhs: &[u32]) -> Vec<usize> {
    if lhs.len() > s.len() {
        return Vec::new();
    }
    (0..=s.len() - lhs.len())
        .filter(|&j| &s.codes()[j..j + lhs.len()] == lhs)
        .collect()
}

#[test]
fn matcher_agrees_with_naive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB1);
    for _ in 0..1000 {
        let sys = random_system(&mut rng);
        let s = random_string(&mut rng, &sys, 64);
        for rule in 0..sys.rules().len() {
            let expected = naive_positions(&s, &sys.rules()[rule].lhs_codes);
            assert_eq!(match_positions(&s, &sys, rule), expected, "rule {rule} on {s}");
        }
    }
}

#[test]
fn packing_round_trips_for_random_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB2);
    for _ in 0..100 {
        let sys = random_system(&mut rng);
        let b = sys.base();
        for (i, rule) in sys.rules().iter().enumerate() {
            assert_eq!(sys.unpack(i), (rule.lhs_code.clone(), rule.rhs_code.clone()));
            assert_eq!(positional_code(&rule.lhs_codes, b), rule.lhs_code);
            assert_eq!(positional_code(&rule.rhs_codes, b), rule.rhs_code);

            // Peeling base-b digits recovers the symbol codes in order.
            let mut n = rule.lhs_code.clone();
            let big_b = BigUint::from(b);
            for &code in &rule.lhs_codes {
                assert_eq!(&n % &big_b, BigUint::from(code));
                n /= &big_b;
            }
            assert_eq!(n, BigUint::from(0u32));
        }
    }
}

#[test]
fn shipped_fixtures_have_verified_confluence() {
    let report = check_confluence_small(&fixture(CONFLUENT_THUE), 2, 5, 1_000_000);
    assert_eq!(report.verdict, Verdict::Confluent, "pair eraser must check out");
    assert_eq!(report.strings_checked, 2 + 4 + 8 + 16 + 32);

    let report = check_confluence_small(&fixture(SWAP_THUE), 2, 4, 1_000_000);
    assert_eq!(report.verdict, Verdict::Confluent, "doubling swap must check out");

    let report = check_confluence_small(&fixture(GROWTH_THUE), 1, 2, 10_000);
    assert_eq!(report.verdict, Verdict::Inconclusive, "growth never closes its search");
}

#[test]
fn strategies_agree_on_confluent_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB3);
    for (text, max_len) in [(CONFLUENT_THUE, 10), (SWAP_THUE, 6)] {
        let sys = fixture(text);
        for _ in 0..20 {
            let s = random_string(&mut rng, &sys, max_len);
            let leftmost = reduce(&s, &sys, Strategy::Leftmost, 10_000);
            assert!(leftmost.terminated, "fixture reductions must terminate on {s}");
            for seed in 0..100 {
                let random = reduce(&s, &sys, Strategy::Random(seed), 10_000);
                assert!(random.terminated);
                assert_eq!(random.string, leftmost.string, "seed {seed} diverged on {s}");
            }
        }
    }
}

#[test]
fn holographic_trajectories_match_direct_ones() {
    for (text, start) in [(CONFLUENT_THUE, "abbaab"), (SWAP_THUE, "aaaaaaab"), (GROWTH_THUE, "a")]
    {
        let sys = fixture(text);
        let mut s = sys.string(start).unwrap();
        let mut field = HolographicField::encode(&s, &sys, 2).unwrap();
        for step in 0..100 {
            let direct = rewrite_step(&s, &sys, Strategy::Leftmost);
            let (next_field, spectral) =
                holographic_step(&field, &sys, Strategy::Leftmost).unwrap();
            assert_eq!(spectral, direct, "step {step} on {start}");
            if let RewriteOutcome::Rewritten { string, .. } = direct {
                s = string;
            }
            assert_eq!(decode_field(&next_field, &sys).unwrap(), s, "step {step} on {start}");
            field = next_field;
        }
    }
}

#[test]
fn holographic_and_direct_agree_under_random_strategies() {
    let sys = fixture(CONFLUENT_THUE);
    let mut s = sys.string("abababab").unwrap();
    let mut field = HolographicField::encode(&s, &sys, 3).unwrap();
    for step in 0..100u64 {
        let strategy = Strategy::Random(0xC0 + step);
        let direct = rewrite_step(&s, &sys, strategy);
        let (next_field, spectral) = holographic_step(&field, &sys, strategy).unwrap();
        assert_eq!(spectral, direct, "step {step}");
        if let RewriteOutcome::Rewritten { string, .. } = direct {
            s = string;
        }
        assert_eq!(decode_field(&next_field, &sys).unwrap(), s, "step {step}");
        field = next_field;
    }
}

#[test]
fn applied_rules_change_length_by_their_delta() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB4);
    for _ in 0..500 {
        let sys = random_system(&mut rng);
        let s = random_string(&mut rng, &sys, 32);
        let seed = rng.gen();
        if let RewriteOutcome::Rewritten { string, rule, position } =
            rewrite_step(&s, &sys, Strategy::Random(seed))
        {
            let r = &sys.rules()[rule];
            assert_eq!(string.len() + r.lhs_len, s.len() + r.rhs_len);
            assert!(position + r.lhs_len <= s.len());
            assert_eq!(&string.codes()[position..position + r.rhs_len], &r.rhs_codes[..]);
        }
    }
}

#[test]
fn growth_fixture_exhausts_budgets_without_terminating() {
    let sys = fixture(GROWTH_THUE);
    let s = sys.string("a").unwrap();
    let report = reduce(&s, &sys, Strategy::Leftmost, 50);
    assert_eq!(report.steps, 50);
    assert!(!report.terminated);
    assert_eq!(report.string.len(), 51);
}
