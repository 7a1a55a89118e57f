//! Command line front end for the frequency-comb signal computer.
//!
//! Every subcommand reads plain text, computes through `combsim-core` and
//! writes plain text, either to stdout or to `--out`. The same arguments and
//! seeds always produce byte-identical output. Exit codes: 0 on success, 1
//! on a domain error (bad file contents, overflow, budget exhaustion turned
//! into an error by the core), 2 on a usage error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use combsim_core::{
    arithmetize, assemble, check_confluence_small, complement, decode_word_default, digit_sum,
    encode_word_with, evaluate_task, format_reduction_trace, format_trace, hamming_distance,
    history_csv, holographic_step, linear_logic, minus, multiply, parse_comb_text, reduce,
    run, run_integer_oracle, shift_word, spectrum_csv, upsa_add, write_comb_text, xor_op,
    AluMode, ArithmetizedSystem, CombWord, HolographicField, JumpMode, LogicKind,
    ReductionReport, ReservoirConfig, ReservoirState, RewriteOutcome, RewriteRecord, RuleTable,
    Strategy, SymbolString, Task, Verdict, VmOptions, DEFAULT_CELL_BITS,
};

#[derive(Parser)]
#[command(name = "combsim", version, about = "Frequency-comb signal computer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode an integer as a comb word file
    Encode(EncodeArgs),
    /// Decode a comb word file back to its integer
    Decode(DecodeArgs),
    /// Apply one ALU operation to integer operands
    Op(OpArgs),
    /// Assemble and run a single-instruction program
    RunSubleq(RunSubleqArgs),
    /// Reduce a string under a rewrite table
    RunThue(RunThueArgs),
    /// Train and score a reservoir readout on a streaming task
    RunReservoir(RunReservoirArgs),
    /// Search short strings for a confluence counterexample
    CheckConfluence(CheckConfluenceArgs),
    /// Print the spectrum of a comb word as CSV
    EmitSpectrum(EmitSpectrumArgs),
}

#[derive(Args)]
struct EncodeArgs {
    /// Value to encode
    #[arg(long)]
    value: u128,
    /// Word length in bits
    #[arg(long)]
    bits: usize,
    /// Base amplitude of an occupied slot
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    /// Slot spacing in rad/s
    #[arg(long, default_value_t = 1.0)]
    dw: f64,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Comb word file
    file: PathBuf,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OpName {
    Xor,
    And,
    Or,
    Add,
    Sub,
    Mul,
    Not,
    Shift,
    Hamming,
    Popcount,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OpMode {
    /// Through comb words and the signal ALU
    Signal,
    /// Through plain integer arithmetic
    Integer,
}

#[derive(Args)]
struct OpArgs {
    /// Operation to apply
    op: OpName,
    /// First operand
    #[arg(long)]
    a: u128,
    /// Second operand, for the two-operand operations
    #[arg(long)]
    b: Option<u128>,
    /// Word length in bits
    #[arg(long)]
    bits: usize,
    /// Shift distance, for `shift` only; negative shifts right
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<isize>,
    #[arg(long, value_enum, default_value_t = OpMode::Signal)]
    mode: OpMode,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AluFlag {
    Subleq,
    Addleq,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum JumpFlag {
    Indirect,
    Direct,
}

#[derive(Args)]
struct RunSubleqArgs {
    /// Program source file
    file: PathBuf,
    /// Input value, repeatable, consumed in order
    #[arg(long = "input", allow_hyphen_values = true)]
    inputs: Vec<i64>,
    /// Which combination the instruction applies
    #[arg(long, value_enum, default_value_t = AluFlag::Subleq)]
    alu: AluFlag,
    /// How a taken branch resolves its target
    #[arg(long, value_enum, default_value_t = JumpFlag::Indirect)]
    jump: JumpFlag,
    #[arg(long, value_enum, default_value_t = OpMode::Signal)]
    mode: OpMode,
    /// Cell width in bits
    #[arg(long, default_value_t = DEFAULT_CELL_BITS)]
    bits: usize,
    /// Step budget
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Include the executed-instruction trace
    #[arg(long)]
    trace: bool,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyFlag {
    /// First match by position, then by rule index
    Leftmost,
    /// Seeded uniform choice among all matches
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ThueMode {
    /// Rewrite symbol strings in place
    Direct,
    /// Rewrite through the spectral field, demodulating each step
    Holographic,
}

#[derive(Args)]
struct RunThueArgs {
    /// Rewrite table file
    file: PathBuf,
    /// Start string
    #[arg(long)]
    start: String,
    #[arg(long, value_enum, default_value_t = StrategyFlag::Leftmost)]
    strategy: StrategyFlag,
    /// Seed for the random strategy
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ThueMode::Direct)]
    mode: ThueMode,
    /// Number of agents sharing the spectral field
    #[arg(long, default_value_t = 1)]
    agents: usize,
    /// Rewrite budget
    #[arg(long, default_value_t = 10_000)]
    budget: usize,
    /// Include the applied-rewrite trace
    #[arg(long)]
    trace: bool,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunReservoirArgs {
    /// Reservoir config file
    file: PathBuf,
    /// Task selector: `parity[:lag]` or `memory[:delay]`
    #[arg(long, default_value = "parity:2")]
    task: String,
    /// Training stream length
    #[arg(long, default_value_t = 2000)]
    train: usize,
    /// Test stream length
    #[arg(long, default_value_t = 500)]
    test: usize,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the recorded snapshot history as CSV
    #[arg(long)]
    history: Option<PathBuf>,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckConfluenceArgs {
    /// Rewrite table file
    file: PathBuf,
    /// Longest start string to enumerate
    #[arg(long, default_value_t = 4)]
    max_len: usize,
    /// Use only the first N alphabet letters for start strings
    #[arg(long)]
    alphabet: Option<usize>,
    /// Total rewrite expansion budget
    #[arg(long, default_value_t = 100_000)]
    budget: usize,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmitSpectrumArgs {
    /// Value to encode
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    value: Option<u128>,
    /// Word length in bits
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    bits: Option<usize>,
    /// Base amplitude of an occupied slot
    #[arg(long, default_value_t = 1.0, conflicts_with = "file")]
    c0: f64,
    /// Slot spacing in rad/s
    #[arg(long, default_value_t = 1.0, conflicts_with = "file")]
    dw: f64,
    /// Read an existing comb word file instead of encoding
    #[arg(long = "in")]
    file: Option<PathBuf>,
    /// Write here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Encode(args) => encode(args),
        Command::Decode(args) => decode(args),
        Command::Op(args) => op(args),
        Command::RunSubleq(args) => run_subleq(args),
        Command::RunThue(args) => run_thue(args),
        Command::RunReservoir(args) => run_reservoir(args),
        Command::CheckConfluence(args) => check_confluence(args),
        Command::EmitSpectrum(args) => emit_spectrum(args),
    }
}

/// Writes the finished report to `--out` or stdout. The text is identical
/// either way.
fn deliver(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn encode(args: EncodeArgs) -> Result<()> {
    let word = encode_word_with(args.value, args.bits, args.c0, args.dw)?;
    deliver(args.out.as_deref(), &write_comb_text(&word))
}

fn decode(args: DecodeArgs) -> Result<()> {
    let word = load_comb(&args.file)?;
    let value = decode_word_default(&word)?;
    deliver(args.out.as_deref(), &format!("{value}\n"))
}

fn load_comb(path: &Path) -> Result<CombWord> {
    let text = read_to_string(path)?;
    parse_comb_text(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Mismatched operand flags are command-line mistakes, so they exit through
/// clap with the usage text, not as domain errors.
fn usage_error(kind: ErrorKind, msg: &str) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn check_operand_shape(args: &OpArgs) {
    let two_operand = !matches!(args.op, OpName::Not | OpName::Shift | OpName::Popcount);
    if two_operand && args.b.is_none() {
        usage_error(ErrorKind::MissingRequiredArgument, "this operation needs --b");
    }
    if !two_operand && args.b.is_some() {
        usage_error(ErrorKind::ArgumentConflict, "this operation takes no --b");
    }
    if args.op == OpName::Shift && args.shift.is_none() {
        usage_error(ErrorKind::MissingRequiredArgument, "shift needs --shift");
    }
    if args.op != OpName::Shift && args.shift.is_some() {
        usage_error(ErrorKind::ArgumentConflict, "--shift only applies to shift");
    }
}

fn op(args: OpArgs) -> Result<()> {
    check_operand_shape(&args);
    let result = match args.mode {
        OpMode::Signal => op_signal(&args)?,
        OpMode::Integer => op_integer(&args)?,
    };
    deliver(args.out.as_deref(), &format!("{result}\n"))
}

/// The second operand; [`check_operand_shape`] has already enforced presence.
fn operand_b(args: &OpArgs) -> u128 {
    args.b.expect("checked")
}

fn op_signal(args: &OpArgs) -> Result<i128> {
    let bits = args.bits;
    let a = encode_word_with(args.a, bits, 1.0, 1.0)?;
    let word_b = |args: &OpArgs| -> Result<CombWord> {
        Ok(encode_word_with(operand_b(args), bits, 1.0, 1.0)?)
    };
    let value = |w: &CombWord| -> Result<i128> { Ok(decode_word_default(w)? as i128) };
    match args.op {
        OpName::Xor => value(&xor_op(&a, &word_b(args)?)?),
        OpName::And => value(&linear_logic(LogicKind::And, &a, &word_b(args)?)?),
        OpName::Or => value(&linear_logic(LogicKind::Or, &a, &word_b(args)?)?),
        OpName::Add => value(&upsa_add(&a, &word_b(args)?)?),
        OpName::Sub => {
            let (sign, magnitude) = minus(&a, &word_b(args)?)?;
            Ok(i128::from(sign) * value(&magnitude)?)
        }
        OpName::Mul => value(&multiply(&a, &word_b(args)?)?),
        OpName::Not => value(&complement(&a)),
        OpName::Shift => value(&shift_word(&a, args.shift.expect("checked"))?),
        OpName::Hamming => Ok(hamming_distance(&a, &word_b(args)?)? as i128),
        OpName::Popcount => Ok(digit_sum(&a) as i128),
    }
}

/// The plain-integer route. Must print exactly what the signal route prints;
/// the CLI tests hold the two to that.
fn op_integer(args: &OpArgs) -> Result<i128> {
    let bits = args.bits;
    let check = |v: u128| -> Result<u128> {
        if bits == 0 {
            bail!("word length 0 is not usable");
        }
        if bits < 128 && v >> bits != 0 {
            bail!("value {v} does not fit in {bits} bits");
        }
        Ok(v)
    };
    let a = check(args.a)?;
    let mask = if bits >= 128 { u128::MAX } else { (1u128 << bits) - 1 };
    match args.op {
        OpName::Xor => Ok((a ^ check(operand_b(args))?) as i128),
        OpName::And => Ok((a & check(operand_b(args))?) as i128),
        OpName::Or => Ok((a | check(operand_b(args))?) as i128),
        OpName::Add => Ok(a as i128 + check(operand_b(args))? as i128),
        OpName::Sub => Ok(a as i128 - check(operand_b(args))? as i128),
        OpName::Mul => {
            let b = check(operand_b(args))?;
            match a.checked_mul(b) {
                Some(p) if p <= i128::MAX as u128 => Ok(p as i128),
                _ => bail!("product of {a} and {b} overflows"),
            }
        }
        OpName::Not => Ok((!a & mask) as i128),
        OpName::Shift => {
            let k = args.shift.expect("checked");
            if k.unsigned_abs() > bits {
                bail!("shift {k} exceeds the word length {bits}");
            }
            if k >= 0 {
                Ok((a.checked_shl(k as u32).unwrap_or(0) & mask) as i128)
            } else {
                Ok(a.checked_shr(k.unsigned_abs() as u32).unwrap_or(0) as i128)
            }
        }
        OpName::Hamming => Ok((a ^ check(operand_b(args))?).count_ones() as i128),
        OpName::Popcount => Ok(a.count_ones() as i128),
    }
}

fn run_subleq(args: RunSubleqArgs) -> Result<()> {
    let source = read_to_string(&args.file)?;
    let (image, _symbols) = assemble(&source)?;
    let opts = VmOptions {
        mode: match args.alu {
            AluFlag::Subleq => AluMode::SubLeq,
            AluFlag::Addleq => AluMode::AddLeq,
        },
        jump: match args.jump {
            JumpFlag::Indirect => JumpMode::Indirect,
            JumpFlag::Direct => JumpMode::Direct,
        },
        cell_bits: args.bits,
    };
    let report = match args.mode {
        OpMode::Signal => run(&image, &args.inputs, opts, args.budget)?,
        OpMode::Integer => run_integer_oracle(&image, &args.inputs, opts, args.budget)?,
    };
    let mut text = String::new();
    if args.trace {
        text.push_str(&format_trace(&report.trace));
    }
    text.push_str(&format!("status {}\n", report.status));
    text.push_str(&format!("steps {}\n", report.steps));
    for v in &report.outputs {
        text.push_str(&format!("out {v}\n"));
    }
    deliver(args.out.as_deref(), &text)
}

/// Strategy for one rewrite step. The random strategy derives a fresh seed
/// per step so the direct and holographic drivers stay in lockstep.
fn step_strategy(flag: StrategyFlag, seed: u64, step: usize) -> Strategy {
    match flag {
        StrategyFlag::Leftmost => Strategy::Leftmost,
        StrategyFlag::Random => Strategy::Random(seed.wrapping_add(step as u64)),
    }
}

fn reduce_holographic(
    start: &SymbolString,
    sys: &ArithmetizedSystem,
    args: &RunThueArgs,
) -> Result<ReductionReport> {
    let mut field = HolographicField::encode(start, sys, args.agents)?;
    let mut current = start.clone();
    let mut trace = Vec::new();
    for step in 0..args.budget {
        let strategy = step_strategy(args.strategy, args.seed, step);
        let (next, outcome) = holographic_step(&field, sys, strategy)?;
        match outcome {
            RewriteOutcome::NormalForm => {
                return Ok(ReductionReport { string: current, steps: step, terminated: true, trace })
            }
            RewriteOutcome::Rewritten { string, rule, position } => {
                trace.push(RewriteRecord { step, position, rule, len_after: string.len() });
                current = string;
                field = next;
            }
        }
    }
    let terminated =
        matches!(holographic_step(&field, sys, Strategy::Leftmost)?.1, RewriteOutcome::NormalForm);
    Ok(ReductionReport { string: current, steps: args.budget, terminated, trace })
}

fn reduce_direct(
    start: &SymbolString,
    sys: &ArithmetizedSystem,
    args: &RunThueArgs,
) -> ReductionReport {
    match args.strategy {
        StrategyFlag::Leftmost => reduce(start, sys, Strategy::Leftmost, args.budget),
        // Per-step reseeding, not one threaded generator: keeps the chosen
        // matches identical to the holographic driver under the same seed.
        StrategyFlag::Random => {
            let mut current = start.clone();
            let mut trace = Vec::new();
            for step in 0..args.budget {
                let strategy = step_strategy(args.strategy, args.seed, step);
                match combsim_core::rewrite_step(&current, sys, strategy) {
                    RewriteOutcome::NormalForm => {
                        return ReductionReport {
                            string: current,
                            steps: step,
                            terminated: true,
                            trace,
                        }
                    }
                    RewriteOutcome::Rewritten { string, rule, position } => {
                        trace.push(RewriteRecord { step, position, rule, len_after: string.len() });
                        current = string;
                    }
                }
            }
            let terminated = matches!(
                combsim_core::rewrite_step(&current, sys, Strategy::Leftmost),
                RewriteOutcome::NormalForm
            );
            ReductionReport { string: current, steps: args.budget, terminated, trace }
        }
    }
}

fn run_thue(args: RunThueArgs) -> Result<()> {
    let source = read_to_string(&args.file)?;
    let table = RuleTable::parse(&source)?;
    let sys = arithmetize(&table)?;
    let start = sys.string(&args.start)?;
    let report = match args.mode {
        ThueMode::Direct => reduce_direct(&start, &sys, &args),
        ThueMode::Holographic => reduce_holographic(&start, &sys, &args)?,
    };
    let mut text = String::new();
    if args.trace {
        text.push_str(&format_reduction_trace(&report.trace, &sys));
    }
    text.push_str(&format!("normal-form {}\n", report.terminated));
    text.push_str(&format!("steps {}\n", report.steps));
    text.push_str(&format!("result {}\n", sys.table().text(&report.string)));
    deliver(args.out.as_deref(), &text)
}

fn parse_task(selector: &str) -> Result<Task> {
    let (name, param) = match selector.split_once(':') {
        Some((name, raw)) => {
            let param: usize =
                raw.parse().with_context(|| format!("bad task parameter `{raw}`"))?;
            (name, Some(param))
        }
        None => (selector, None),
    };
    match name {
        "parity" => Ok(Task::Parity { lag: param.unwrap_or(2) }),
        "memory" => Ok(Task::Memory { delay: param.unwrap_or(0) }),
        other => bail!("unknown task `{other}`, expected parity[:lag] or memory[:delay]"),
    }
}

fn run_reservoir(args: RunReservoirArgs) -> Result<()> {
    let source = read_to_string(&args.file)?;
    let config = ReservoirConfig::parse(&source)
        .with_context(|| format!("parsing {}", args.file.display()))?;
    let task = parse_task(&args.task)?;
    let seed = args.seed.unwrap_or(config.seed);
    let mut state = ReservoirState::new(config.rule()?, config.width, 1, config.iterations, seed)?;
    let report = evaluate_task(&mut state, task, seed, args.train, args.test, config.lambda)?;
    if let Some(path) = &args.history {
        fs::write(path, history_csv(&state))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    deliver(args.out.as_deref(), &report.csv())
}

fn check_confluence(args: CheckConfluenceArgs) -> Result<()> {
    let source = read_to_string(&args.file)?;
    let table = RuleTable::parse(&source)?;
    let sys = arithmetize(&table)?;
    let letters = args.alphabet.unwrap_or_else(|| table.alphabet_size());
    let report = check_confluence_small(&sys, letters, args.max_len, args.budget);
    let verdict = match report.verdict {
        Verdict::Confluent => "confluent",
        Verdict::NonConfluent => "non-confluent",
        Verdict::Inconclusive => "inconclusive",
    };
    let mut text = String::new();
    text.push_str(&format!("verdict {verdict}\n"));
    text.push_str(&format!("strings-checked {}\n", report.strings_checked));
    text.push_str(&format!("expansions {}\n", report.expansions));
    if let Some(witness) = &report.witness {
        let table = sys.table();
        text.push_str(&format!("witness-start {}\n", table.text(&witness.start)));
        text.push_str(&format!(
            "witness-normal-forms {} {}\n",
            table.text(&witness.normal_forms.0),
            table.text(&witness.normal_forms.1)
        ));
    }
    deliver(args.out.as_deref(), &text)
}

fn emit_spectrum(args: EmitSpectrumArgs) -> Result<()> {
    let word = match &args.file {
        Some(path) => load_comb(path)?,
        None => {
            // clap enforces presence when --in is absent.
            let value = args.value.expect("required");
            let bits = args.bits.expect("required");
            encode_word_with(value, bits, args.c0, args.dw)?
        }
    };
    deliver(args.out.as_deref(), &spectrum_csv(&word))
}
