//! Cellular automata treated as filters: a rule is both a lookup table
//! over neighborhood codes and a root-pole transfer function whose
//! magnitude classifies each code. Stepping comes in two interchangeable
//! routes, direct table lookup and a circular convolution mask, kept
//! equal by differential tests. The [`reservoir`] submodule drives a
//! lattice as a trainable echo state.

pub mod reservoir;

use thiserror::Error;

pub use reservoir::{
    evaluate_task, feature_rows, history_csv, train_readout, ReservoirConfig, ReservoirState,
    Task, TaskReport, TrainedReadout,
};

/// Largest supported neighborhood; the rule number for 8 cells would no
/// longer fit a 128-bit integer.
pub const MAX_NEIGHBORHOOD: usize = 7;

#[derive(Debug, Error, PartialEq)]
pub enum CaError {
    #[error("neighborhood size {0} is outside 1..=7")]
    NeighborhoodRange(usize),
    #[error("rule number {number} needs more than the {codes} table bits")]
    RuleRange { number: u128, codes: u32 },
    #[error("lattice cells must be 0 or 1, found {0}")]
    CellValue(u8),
    #[error("lattice width {width} is narrower than the neighborhood {neighborhood}")]
    LatticeTooNarrow { width: usize, neighborhood: usize },
    #[error("neighborhood code {code} is outside the {codes}-entry table")]
    CodeRange { code: u32, codes: u32 },
    #[error("transfer magnitude diverges exactly at pole code {code}")]
    PoleSingularity { code: u32 },
    #[error("detuning {0} must lie in [0, 1)")]
    DetuningRange(f64),
    #[error("input width {got} does not match the injection map width {expected}")]
    InputWidth { expected: usize, got: usize },
    #[error("readout length {got} does not match the feature dimension {expected}")]
    ReadoutWidth { expected: usize, got: usize },
    #[error("injection maps must target distinct in-range cells, one group per input bit")]
    Injection,
    #[error("training needs nonempty feature rows matching the target count")]
    EmptyTraining,
    #[error("ridge parameter must be positive and finite, got {0}")]
    RidgeRange(f64),
    #[error("config: {0}")]
    Config(String),
}

/// A cyclic update rule: neighborhood size `D` and a rule number whose bit
/// `j` is the output for neighborhood code `j`. Codes read the window with
/// the leftmost cell most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaRule {
    neighborhood: usize,
    number: u128,
    table: Vec<u8>,
}

impl CaRule {
    pub fn new(neighborhood: usize, number: u128) -> Result<CaRule, CaError> {
        if neighborhood == 0 || neighborhood > MAX_NEIGHBORHOOD {
            return Err(CaError::NeighborhoodRange(neighborhood));
        }
        let codes = 1u32 << neighborhood;
        if codes < 128 && number >> codes != 0 {
            return Err(CaError::RuleRange { number, codes });
        }
        let table = (0..codes).map(|j| (number >> j & 1) as u8).collect();
        Ok(CaRule { neighborhood, number, table })
    }

    /// A three-cell rule, the usual 0..=255 numbering.
    pub fn elementary(number: u8) -> CaRule {
        CaRule::new(3, number as u128).expect("every 8-bit number is a valid 3-cell rule")
    }

    pub fn neighborhood(&self) -> usize {
        self.neighborhood
    }

    pub fn number(&self) -> u128 {
        self.number
    }

    /// Output bit for a neighborhood code.
    pub fn output(&self, code: u32) -> Result<u8, CaError> {
        self.table
            .get(code as usize)
            .copied()
            .ok_or(CaError::CodeRange { code, codes: self.table.len() as u32 })
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// Number of codes the rule maps to 1.
    pub fn ones_count(&self) -> u32 {
        self.number.count_ones()
    }
}

/// A ring of binary cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    cells: Vec<u8>,
}

impl Lattice {
    pub fn new(cells: Vec<u8>) -> Result<Lattice, CaError> {
        if let Some(&bad) = cells.iter().find(|&&c| c > 1) {
            return Err(CaError::CellValue(bad));
        }
        Ok(Lattice { cells })
    }

    pub fn zeros(width: usize) -> Lattice {
        Lattice { cells: vec![0; width] }
    }

    /// All zeros except a single 1 at the middle cell.
    pub fn with_center_one(width: usize) -> Lattice {
        let mut cells = vec![0; width];
        if width > 0 {
            cells[width / 2] = 1;
        }
        Lattice { cells }
    }

    pub fn width(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    fn set(&mut self, index: usize, value: u8) {
        self.cells[index] = value;
    }
}

fn check_width(lat: &Lattice, rule: &CaRule) -> Result<(), CaError> {
    if lat.width() < rule.neighborhood() {
        return Err(CaError::LatticeTooNarrow {
            width: lat.width(),
            neighborhood: rule.neighborhood(),
        });
    }
    Ok(())
}

/// One synchronous update by table lookup. The window for cell `i` starts
/// `floor(D/2)` cells to its left and wraps cyclically.
pub fn ca_step_direct(lat: &Lattice, rule: &CaRule) -> Result<Lattice, CaError> {
    check_width(lat, rule)?;
    let w = lat.width();
    let d = rule.neighborhood();
    let reach = d / 2;
    let cells = (0..w)
        .map(|i| {
            let mut code = 0u32;
            for t in 0..d {
                let j = (i + w - reach + t) % w;
                code = code << 1 | lat.cells[j] as u32;
            }
            rule.table[code as usize]
        })
        .collect();
    Ok(Lattice { cells })
}

/// The weight each relative offset contributes to a cell's neighborhood
/// code. Only `D` of the `width` taps are nonzero; the alignment makes the
/// masked sum reproduce the direct route's window codes.
pub fn conv_mask(rule: &CaRule, width: usize) -> Vec<u32> {
    let d = rule.neighborhood();
    let reach = d / 2;
    let mut mask = vec![0u32; width];
    for t in 0..d {
        mask[(width - reach + t) % width] = 1 << (d - 1 - t);
    }
    mask
}

/// One synchronous update via the convolution route: circularly correlate
/// the lattice with the code mask, then map each code through the rule
/// table. Produces exactly the same lattice as [`ca_step_direct`].
pub fn ca_step_conv(lat: &Lattice, rule: &CaRule) -> Result<Lattice, CaError> {
    check_width(lat, rule)?;
    let w = lat.width();
    let mask = conv_mask(rule, w);
    let taps: Vec<(usize, u32)> =
        mask.iter().copied().enumerate().filter(|&(_, m)| m != 0).collect();
    let cells = (0..w)
        .map(|i| {
            let code: u32 =
                taps.iter().map(|&(delta, m)| m * lat.cells[(i + delta) % w] as u32).sum();
            rule.table[code as usize]
        })
        .collect();
    Ok(Lattice { cells })
}

/// A rule recast as a rational filter: codes mapping to 0 become zeros of
/// the transfer magnitude and codes mapping to 1 become poles, all placed
/// at the integer code values. Evaluating just off a code and comparing
/// the level in dB against the threshold recovers the table bit.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    zeros: Vec<u32>,
    poles: Vec<u32>,
    detuning: f64,
    threshold_db: f64,
}

/// A detuning small enough that the dB level at any detuned code clears
/// the threshold in the right direction for every rule of this
/// neighborhood size: the detuned factor must outweigh the worst-case
/// product of all other distances, which grows like (2^D)^(2^D - 1).
fn default_detuning(neighborhood: usize) -> f64 {
    let codes = (1u32 << neighborhood) as f64;
    let exponent = ((codes - 1.0) * codes.log10()).ceil() + 30.0;
    10f64.powf(-exponent)
}

impl TransferFunction {
    /// The filter form of a rule with a detuning guaranteed to classify
    /// every code of every rule at this neighborhood size.
    pub fn for_rule(rule: &CaRule) -> TransferFunction {
        Self::with_detuning(rule, default_detuning(rule.neighborhood()))
            .expect("the default detuning is always in range")
    }

    /// The filter form with an explicit detuning. Small neighborhoods
    /// tolerate coarse detunings; large ones need the default. A zero
    /// detuning only fails later, at pole evaluations.
    pub fn with_detuning(rule: &CaRule, detuning: f64) -> Result<TransferFunction, CaError> {
        if !(0.0..1.0).contains(&detuning) {
            return Err(CaError::DetuningRange(detuning));
        }
        let mut zeros = Vec::new();
        let mut poles = Vec::new();
        for (code, &bit) in rule.table.iter().enumerate() {
            if bit == 1 {
                poles.push(code as u32);
            } else {
                zeros.push(code as u32);
            }
        }
        Ok(TransferFunction { zeros, poles, detuning, threshold_db: 0.0 })
    }

    pub fn zeros(&self) -> &[u32] {
        &self.zeros
    }

    pub fn poles(&self) -> &[u32] {
        &self.poles
    }

    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    pub fn threshold_db(&self) -> f64 {
        self.threshold_db
    }

    fn codes(&self) -> u32 {
        (self.zeros.len() + self.poles.len()) as u32
    }

    /// Distance from the detuned evaluation point `code + detuning` to a
    /// root at `at`, computed from the integer gap so that detunings far
    /// below float resolution still register.
    fn distance(&self, code: u32, at: u32) -> f64 {
        if at == code {
            self.detuning
        } else if at < code {
            (code - at) as f64 + self.detuning
        } else {
            (at - code) as f64 - self.detuning
        }
    }

    /// Magnitude at the detuned code, in dB. Sums logarithms instead of
    /// multiplying factors: the products overflow f64 for 7-cell rules
    /// while their logs stay small.
    pub fn magnitude_db(&self, code: u32) -> Result<f64, CaError> {
        if code >= self.codes() {
            return Err(CaError::CodeRange { code, codes: self.codes() });
        }
        if self.detuning == 0.0 && self.poles.contains(&code) {
            return Err(CaError::PoleSingularity { code });
        }
        let log_sum = |roots: &[u32]| -> f64 {
            roots.iter().map(|&at| self.distance(code, at).log10()).sum()
        };
        Ok(20.0 * (log_sum(&self.zeros) - log_sum(&self.poles)))
    }
}

/// Classifies a neighborhood code by filter level: at or above the
/// threshold means pole proximity, below means zero proximity. Agrees
/// with the rule table bit for bit.
pub fn transfer_eval(code: u32, tf: &TransferFunction) -> Result<u8, CaError> {
    Ok((tf.magnitude_db(code)? >= tf.threshold_db) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lattice(rng: &mut ChaCha8Rng, width: usize) -> Lattice {
        Lattice::new((0..width).map(|_| rng.gen_range(0..=1)).collect()).unwrap()
    }

    #[test]
    fn table_bits_follow_the_rule_number() {
        let rule = CaRule::elementary(110);
        // Window (0,1,1) reads as code 3.
        assert_eq!(rule.output(3).unwrap(), 1);
        assert_eq!(rule.table(), &[0, 1, 1, 1, 0, 1, 1, 0]);
        assert_eq!(rule.ones_count(), 5);
    }

    #[test]
    fn rule_number_must_fit_the_table() {
        assert_eq!(
            CaRule::new(3, 256),
            Err(CaError::RuleRange { number: 256, codes: 8 })
        );
        assert!(CaRule::new(7, u128::MAX).is_ok());
        assert_eq!(CaRule::new(0, 0), Err(CaError::NeighborhoodRange(0)));
        assert_eq!(CaRule::new(8, 0), Err(CaError::NeighborhoodRange(8)));
    }

    #[test]
    fn quiescent_and_clearing_rules() {
        let zeros = Lattice::zeros(16);
        assert_eq!(ca_step_direct(&zeros, &CaRule::elementary(110)).unwrap(), zeros);
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA01);
        let lat = random_lattice(&mut rng, 16);
        assert_eq!(ca_step_direct(&lat, &CaRule::elementary(0)).unwrap(), Lattice::zeros(16));
    }

    #[test]
    fn single_seed_grows_leftward_under_rule_110() {
        let lat = Lattice::with_center_one(14);
        let next = ca_step_direct(&lat, &CaRule::elementary(110)).unwrap();
        assert_eq!(next.cells(), &[0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn boundary_wraps_cyclically() {
        let lat = Lattice::new(vec![1, 0, 0]).unwrap();
        let next = ca_step_direct(&lat, &CaRule::elementary(110)).unwrap();
        assert_eq!(next.cells(), &[1, 0, 1]);
    }

    #[test]
    fn narrow_lattice_is_rejected() {
        let lat = Lattice::new(vec![1, 0]).unwrap();
        assert_eq!(
            ca_step_direct(&lat, &CaRule::elementary(110)),
            Err(CaError::LatticeTooNarrow { width: 2, neighborhood: 3 })
        );
    }

    #[test]
    fn non_binary_cells_are_rejected() {
        assert_eq!(Lattice::new(vec![0, 2]), Err(CaError::CellValue(2)));
    }

    #[test]
    fn mask_carries_one_weight_per_window_cell() {
        let mask = conv_mask(&CaRule::elementary(110), 8);
        assert_eq!(mask, vec![2, 1, 0, 0, 0, 0, 0, 4]);
    }

    #[test]
    fn conv_route_equals_direct_route_for_every_elementary_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA02);
        for number in 0..=255u8 {
            let rule = CaRule::elementary(number);
            let lat = random_lattice(&mut rng, 32);
            assert_eq!(
                ca_step_conv(&lat, &rule).unwrap(),
                ca_step_direct(&lat, &rule).unwrap(),
                "rule {number}"
            );
        }
    }

    #[test]
    fn conv_route_handles_wide_and_even_neighborhoods() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA03);
        for &(d, number) in &[(1usize, 2u128), (2, 9), (4, 0xBEEF), (5, 0x89AB_CDEF)] {
            let rule = CaRule::new(d, number).unwrap();
            for _ in 0..20 {
                let lat = random_lattice(&mut rng, 24);
                assert_eq!(
                    ca_step_conv(&lat, &rule).unwrap(),
                    ca_step_direct(&lat, &rule).unwrap(),
                    "neighborhood {d}"
                );
            }
        }
    }

    #[test]
    fn rule_204_is_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xCA04);
        let lat = random_lattice(&mut rng, 20);
        assert_eq!(ca_step_conv(&lat, &CaRule::elementary(204)).unwrap(), lat);
    }

    #[test]
    fn rule_110_roots_partition_the_codes() {
        let tf = TransferFunction::for_rule(&CaRule::elementary(110));
        assert_eq!(tf.poles(), &[1, 2, 3, 5, 6]);
        assert_eq!(tf.zeros(), &[0, 4, 7]);
        assert_eq!(transfer_eval(4, &tf).unwrap(), 0);
    }

    #[test]
    fn root_counts_track_the_ones_count() {
        for number in 0..=255u8 {
            let rule = CaRule::elementary(number);
            let tf = TransferFunction::for_rule(&rule);
            assert_eq!(tf.poles().len() as u32, rule.ones_count());
            assert_eq!(tf.zeros().len() as u32, 8 - rule.ones_count());
        }
    }

    #[test]
    fn comparator_recovers_every_elementary_rule_table() {
        for number in 0..=255u8 {
            let rule = CaRule::elementary(number);
            let tf = TransferFunction::for_rule(&rule);
            for code in 0..8 {
                assert_eq!(
                    transfer_eval(code, &tf).unwrap(),
                    rule.output(code).unwrap(),
                    "rule {number} code {code}"
                );
            }
        }
    }

    #[test]
    fn coarse_detuning_still_classifies_rule_110() {
        let tf = TransferFunction::with_detuning(&CaRule::elementary(110), 0.01).unwrap();
        for code in [1u32, 2, 3, 5, 6] {
            assert_eq!(transfer_eval(code, &tf).unwrap(), 1, "pole code {code}");
        }
        for code in [0u32, 4, 7] {
            assert_eq!(transfer_eval(code, &tf).unwrap(), 0, "zero code {code}");
        }
    }

    #[test]
    fn zero_detuning_hits_the_pole_singularity() {
        let tf = TransferFunction::with_detuning(&CaRule::elementary(110), 0.0).unwrap();
        assert_eq!(transfer_eval(1, &tf), Err(CaError::PoleSingularity { code: 1 }));
        // Zero codes evaluate to a hard zero, far below any threshold.
        assert_eq!(transfer_eval(0, &tf).unwrap(), 0);
    }

    #[test]
    fn all_zero_rule_never_fires() {
        let tf = TransferFunction::for_rule(&CaRule::elementary(0));
        for code in 0..8 {
            assert_eq!(transfer_eval(code, &tf).unwrap(), 0);
        }
    }

    #[test]
    fn detuning_outside_the_unit_gap_is_rejected() {
        let rule = CaRule::elementary(110);
        assert!(matches!(
            TransferFunction::with_detuning(&rule, 1.0),
            Err(CaError::DetuningRange(_))
        ));
        assert!(matches!(
            TransferFunction::with_detuning(&rule, -0.5),
            Err(CaError::DetuningRange(_))
        ));
    }

    #[test]
    fn out_of_range_code_is_rejected() {
        let tf = TransferFunction::for_rule(&CaRule::elementary(110));
        assert_eq!(transfer_eval(8, &tf), Err(CaError::CodeRange { code: 8, codes: 8 }));
    }

    #[test]
    fn seven_cell_comparator_stays_within_float_range() {
        let rule = CaRule::new(7, u128::MAX - 0xDEAD_BEEF).unwrap();
        let tf = TransferFunction::for_rule(&rule);
        for code in 0..128 {
            let db = tf.magnitude_db(code).unwrap();
            assert!(db.is_finite());
            assert_eq!(
                transfer_eval(code, &tf).unwrap(),
                rule.output(code).unwrap(),
                "code {code}"
            );
        }
    }

    proptest! {
        #[test]
        fn conv_and_direct_agree_on_random_rules(
            number in 0u8..=255,
            seed in 0u64..1 << 32,
            width in 3usize..40,
        ) {
            let rule = CaRule::elementary(number);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lat = random_lattice(&mut rng, width);
            prop_assert_eq!(
                ca_step_conv(&lat, &rule).unwrap(),
                ca_step_direct(&lat, &rule).unwrap()
            );
        }

        #[test]
        fn comparator_matches_tables_of_random_wide_rules(
            neighborhood in 1usize..=6,
            number in 0u128..,
            code_seed in 0u64..,
        ) {
            let codes = 1u32 << neighborhood;
            let number = if codes < 128 { number & ((1u128 << codes) - 1) } else { number };
            let rule = CaRule::new(neighborhood, number).unwrap();
            let tf = TransferFunction::for_rule(&rule);
            let code = (code_seed % codes as u64) as u32;
            prop_assert_eq!(
                transfer_eval(code, &tf).unwrap(),
                rule.output(code).unwrap()
            );
        }
    }
}
