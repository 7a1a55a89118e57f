//! A lattice driven as an echo-state reservoir: inputs overwrite a fixed
//! random set of cells, the rule runs a few iterations per input, and the
//! concatenated snapshots feed a ridge-trained linear readout. There is no
//! output feedback and the internal update is the rule itself rather than
//! a weight matrix.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ca_step_direct, CaError, CaRule, Lattice};

/// Settings shared by the reservoir experiments, readable from the
/// line-oriented `key=value` config format.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    pub rule_number: u128,
    pub neighborhood: usize,
    pub width: usize,
    pub iterations: usize,
    pub seed: u64,
    pub lambda: f64,
}

impl Default for ReservoirConfig {
    fn default() -> ReservoirConfig {
        ReservoirConfig {
            rule_number: 110,
            neighborhood: 3,
            width: 128,
            iterations: 4,
            seed: 0,
            lambda: 1e-6,
        }
    }
}

impl ReservoirConfig {
    /// Parses `rule=<int> D=<int> width=<int> iters=<int> seed=<int>
    /// lambda=<float>` pairs separated by whitespace or newlines, with `#`
    /// comments. `rule` is required, everything else defaults.
    pub fn parse(text: &str) -> Result<ReservoirConfig, CaError> {
        let mut config = ReservoirConfig::default();
        let mut seen_rule = false;
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("");
            for token in line.split_whitespace() {
                let Some((key, value)) = token.split_once('=') else {
                    return Err(CaError::Config(format!(
                        "line {n}: expected key=value, found `{token}`"
                    )));
                };
                if seen.contains(&key.to_string()) {
                    return Err(CaError::Config(format!("line {n}: duplicate key `{key}`")));
                }
                seen.push(key.to_string());
                let bad = |what: &str| {
                    CaError::Config(format!("line {n}: {what} `{value}` for `{key}`"))
                };
                match key {
                    "rule" => {
                        config.rule_number = value.parse().map_err(|_| bad("bad integer"))?;
                        seen_rule = true;
                    }
                    "D" => config.neighborhood = value.parse().map_err(|_| bad("bad integer"))?,
                    "width" => config.width = value.parse().map_err(|_| bad("bad integer"))?,
                    "iters" => config.iterations = value.parse().map_err(|_| bad("bad integer"))?,
                    "seed" => config.seed = value.parse().map_err(|_| bad("bad integer"))?,
                    "lambda" => config.lambda = value.parse().map_err(|_| bad("bad number"))?,
                    _ => return Err(CaError::Config(format!("line {n}: unknown key `{key}`"))),
                }
            }
        }
        if !seen_rule {
            return Err(CaError::Config("missing required key `rule`".into()));
        }
        if !(config.lambda > 0.0 && config.lambda.is_finite()) {
            return Err(CaError::RidgeRange(config.lambda));
        }
        if config.iterations == 0 {
            return Err(CaError::Config("iters must be at least 1".into()));
        }
        Ok(config)
    }

    pub fn rule(&self) -> Result<CaRule, CaError> {
        CaRule::new(self.neighborhood, self.rule_number)
    }
}

/// A reservoir mid-run: the lattice, the injection map, and everything
/// recorded so far. Snapshot rows hold the `iterations * width` cell
/// values seen after each update; features derive from them on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    rule: CaRule,
    lattice: Lattice,
    injection: Vec<Vec<usize>>,
    iterations: usize,
    snapshots: Vec<Vec<u8>>,
    inputs: Vec<Vec<u8>>,
    readout: Option<Vec<f64>>,
}

/// How many cells each input bit drives when the injection map is drawn
/// randomly. Half the lattice, split across the input bits: strong enough
/// that the rule's dynamics are dominated by the inputs for a few steps,
/// while the untouched half keeps carrying the older history the tasks
/// need.
fn replication(width: usize, input_width: usize) -> usize {
    (width / (2 * input_width)).max(1)
}

impl ReservoirState {
    /// A fresh reservoir on an all-zero lattice. Each input bit gets a
    /// seeded random group of cells to overwrite, disjoint across bits.
    pub fn new(
        rule: CaRule,
        width: usize,
        input_width: usize,
        iterations: usize,
        seed: u64,
    ) -> Result<ReservoirState, CaError> {
        let group = replication(width, input_width);
        if input_width == 0 || input_width * group > width {
            return Err(CaError::Injection);
        }
        let mut cells: Vec<usize> = (0..width).collect();
        cells.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let injection = cells.chunks(group).take(input_width).map(<[usize]>::to_vec).collect();
        Self::with_injection(rule, width, injection, iterations)
    }

    /// A reservoir with an explicit injection map: one group of distinct
    /// in-range cells per input bit.
    pub fn with_injection(
        rule: CaRule,
        width: usize,
        injection: Vec<Vec<usize>>,
        iterations: usize,
    ) -> Result<ReservoirState, CaError> {
        if width < rule.neighborhood() {
            return Err(CaError::LatticeTooNarrow { width, neighborhood: rule.neighborhood() });
        }
        if iterations == 0 {
            return Err(CaError::Config("iterations must be at least 1".into()));
        }
        let mut targeted = vec![false; width];
        if injection.is_empty() {
            return Err(CaError::Injection);
        }
        for group in &injection {
            if group.is_empty() {
                return Err(CaError::Injection);
            }
            for &cell in group {
                if cell >= width || targeted[cell] {
                    return Err(CaError::Injection);
                }
                targeted[cell] = true;
            }
        }
        Ok(ReservoirState {
            rule,
            lattice: Lattice::zeros(width),
            injection,
            iterations,
            snapshots: Vec::new(),
            inputs: Vec::new(),
            readout: None,
        })
    }

    pub fn width(&self) -> usize {
        self.lattice.width()
    }

    pub fn input_width(&self) -> usize {
        self.injection.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn rule(&self) -> &CaRule {
        &self.rule
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn injection(&self) -> &[Vec<usize>] {
        &self.injection
    }

    /// Recorded snapshot rows, one per processed input.
    pub fn history(&self) -> &[Vec<u8>] {
        &self.snapshots
    }

    pub fn recorded_inputs(&self) -> &[Vec<u8>] {
        &self.inputs
    }

    /// Length of a feature row: every snapshot cell plus the raw input.
    pub fn feature_dim(&self) -> usize {
        self.iterations * self.width() + self.input_width()
    }

    pub fn readout(&self) -> Option<&[f64]> {
        self.readout.as_deref()
    }

    pub fn set_readout(&mut self, weights: Vec<f64>) -> Result<(), CaError> {
        if weights.len() != self.feature_dim() {
            return Err(CaError::ReadoutWidth { expected: self.feature_dim(), got: weights.len() });
        }
        self.readout = Some(weights);
        Ok(())
    }

    /// Drops recorded history and returns the lattice to all zeros. The
    /// injection map and readout survive.
    pub fn reset(&mut self) {
        self.lattice = Lattice::zeros(self.width());
        self.snapshots.clear();
        self.inputs.clear();
    }

    /// One reservoir update: overwrite the injection cells with the input
    /// bits, run the rule for the configured iterations, record the
    /// concatenated snapshots, and emit the readout value over
    /// [snapshot; input] features (0 when untrained).
    pub fn rc_update(&mut self, input: &[u8]) -> Result<f64, CaError> {
        if input.len() != self.injection.len() {
            return Err(CaError::InputWidth { expected: self.injection.len(), got: input.len() });
        }
        if let Some(&bad) = input.iter().find(|&&b| b > 1) {
            return Err(CaError::CellValue(bad));
        }
        for (&bit, group) in input.iter().zip(&self.injection) {
            for &cell in group {
                self.lattice.set(cell, bit);
            }
        }
        let mut snapshot = Vec::with_capacity(self.iterations * self.width());
        for _ in 0..self.iterations {
            self.lattice = ca_step_direct(&self.lattice, &self.rule)?;
            snapshot.extend_from_slice(self.lattice.cells());
        }
        let y = match &self.readout {
            Some(weights) => feature_row(&snapshot, input)
                .iter()
                .zip(weights)
                .map(|(x, w)| x * w)
                .sum(),
            None => 0.0,
        };
        self.snapshots.push(snapshot);
        self.inputs.push(input.to_vec());
        Ok(y)
    }
}

/// Bits become centered ±1 features, snapshot first, then the input.
fn feature_row(snapshot: &[u8], input: &[u8]) -> Vec<f64> {
    snapshot
        .iter()
        .chain(input)
        .map(|&b| 2.0 * b as f64 - 1.0)
        .collect()
}

/// Feature rows for everything the reservoir has recorded.
pub fn feature_rows(state: &ReservoirState) -> Vec<Vec<f64>> {
    state
        .snapshots
        .iter()
        .zip(&state.inputs)
        .map(|(snapshot, input)| feature_row(snapshot, input))
        .collect()
}

/// Recorded history as CSV: one row per input with the raw bits.
pub fn history_csv(state: &ReservoirState) -> String {
    let mut out = String::from("index");
    for k in 0..state.input_width() {
        out.push_str(&format!(",z{k}"));
    }
    for j in 0..state.iterations() * state.width() {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for (index, (snapshot, input)) in state.snapshots.iter().zip(&state.inputs).enumerate() {
        out.push_str(&index.to_string());
        for &b in input.iter().chain(snapshot) {
            out.push_str(&format!(",{b}"));
        }
        out.push('\n');
    }
    out
}

/// A ridge-trained readout and how well it fits its training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedReadout {
    pub weights: Vec<f64>,
    /// Mean squared training residual.
    pub train_error: f64,
    /// Set when the unregularized normal matrix is singular: the rows do
    /// not span the feature space and only the ridge term pins the
    /// solution down.
    pub rank_warning: bool,
}

/// Solves the ridge regression (XᵀX + λI) w = Xᵀt over the recorded
/// feature rows. λ must be positive; degenerate rows still train but
/// raise the rank warning.
pub fn train_readout(
    rows: &[Vec<f64>],
    targets: &[f64],
    lambda: f64,
) -> Result<TrainedReadout, CaError> {
    if rows.is_empty() || rows.len() != targets.len() {
        return Err(CaError::EmptyTraining);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(CaError::RidgeRange(lambda));
    }
    let dim = rows[0].len();
    if let Some(row) = rows.iter().find(|row| row.len() != dim) {
        return Err(CaError::ReadoutWidth { expected: dim, got: row.len() });
    }
    let n = rows.len();
    let x = DMatrix::from_row_iterator(n, dim, rows.iter().flatten().copied());
    let t = DVector::from_column_slice(targets);
    let gram = x.transpose() * &x;
    let rank_warning = Cholesky::new(gram.clone()).is_none();
    let mut regularized = gram;
    for i in 0..dim {
        regularized[(i, i)] += lambda;
    }
    let rhs = x.transpose() * &t;
    let weights = match Cholesky::new(regularized.clone()) {
        Some(chol) => chol.solve(&rhs),
        // Cholesky can reject nearly-singular systems that partial-pivot
        // elimination still solves.
        None => regularized
            .lu()
            .solve(&rhs)
            .ok_or_else(|| CaError::Config("ridge system could not be solved".into()))?,
    };
    let residual = &t - &x * &weights;
    let train_error = residual.norm_squared() / n as f64;
    Ok(TrainedReadout { weights: weights.as_slice().to_vec(), train_error, rank_warning })
}

/// Benchmark tasks over a one-bit input stream. Earlier inputs before the
/// stream start count as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    /// XOR over the most recent `lag` inputs.
    Parity { lag: usize },
    /// Echo the input from `delay` steps ago.
    Memory { delay: usize },
}

impl Task {
    /// The label for step `n` of an input stream.
    pub fn target(&self, inputs: &[u8], n: usize) -> u8 {
        match *self {
            Task::Parity { lag } => {
                let from = (n + 1).saturating_sub(lag);
                inputs[from..=n].iter().fold(0, |acc, &b| acc ^ b)
            }
            Task::Memory { delay } => {
                if delay > n {
                    0
                } else {
                    inputs[n - delay]
                }
            }
        }
    }
}

/// Accuracy of a trained reservoir against the constant-majority guess.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskReport {
    pub accuracy: f64,
    pub baseline: f64,
    pub margin: f64,
    pub train_error: f64,
    pub rank_warning: bool,
}

impl TaskReport {
    pub fn csv(&self) -> String {
        format!(
            "accuracy,baseline,margin,train_error\n{},{},{},{}\n",
            self.accuracy, self.baseline, self.margin, self.train_error
        )
    }
}

/// A readout score becomes a bit; exact zero falls back to the majority
/// class seen in training.
fn threshold_bit(score: f64, majority: u8) -> u8 {
    if score > 0.0 {
        1
    } else if score < 0.0 {
        0
    } else {
        majority
    }
}

/// Runs the full experiment: drive the reservoir over a seeded random bit
/// stream, ridge-train the readout on the first `train_len` steps, and
/// score the remaining `test_len` steps against the majority baseline.
/// Any history already in the reservoir is discarded first. The input
/// stream is derived from `seed` independently of the injection wiring.
pub fn evaluate_task(
    state: &mut ReservoirState,
    task: Task,
    seed: u64,
    train_len: usize,
    test_len: usize,
    lambda: f64,
) -> Result<TaskReport, CaError> {
    if state.input_width() != 1 {
        return Err(CaError::InputWidth { expected: state.input_width(), got: 1 });
    }
    if train_len == 0 || test_len == 0 {
        return Err(CaError::EmptyTraining);
    }
    state.reset();

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let total = train_len + test_len;
    let inputs: Vec<u8> = (0..total).map(|_| rng.gen_range(0..=1)).collect();
    for &bit in &inputs {
        state.rc_update(&[bit])?;
    }
    let rows = feature_rows(state);
    let target_bits: Vec<u8> = (0..total).map(|n| task.target(&inputs, n)).collect();
    let targets: Vec<f64> = target_bits.iter().map(|&b| 2.0 * b as f64 - 1.0).collect();

    let trained = train_readout(&rows[..train_len], &targets[..train_len], lambda)?;
    state.set_readout(trained.weights.clone())?;

    let train_ones: usize = target_bits[..train_len].iter().map(|&b| b as usize).sum();
    let majority = (2 * train_ones >= train_len) as u8;

    let mut correct = 0usize;
    let mut majority_correct = 0usize;
    for n in train_len..total {
        let score: f64 = rows[n].iter().zip(&trained.weights).map(|(x, w)| x * w).sum();
        if threshold_bit(score, majority) == target_bits[n] {
            correct += 1;
        }
        if majority == target_bits[n] {
            majority_correct += 1;
        }
    }
    let accuracy = correct as f64 / test_len as f64;
    let baseline = majority_correct as f64 / test_len as f64;
    Ok(TaskReport {
        accuracy,
        baseline,
        margin: accuracy - baseline,
        train_error: trained.train_error,
        rank_warning: trained.rank_warning,
    })
}
