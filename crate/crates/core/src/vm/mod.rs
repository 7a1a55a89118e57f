//! One-instruction machine over signed comb-word cells.
//!
//! Every memory cell is a sign flag plus a fixed-width comb word; the single
//! instruction fetches three cells `(a, b, c)`, combines `m[a]` and `m[b]`
//! through the signal subtractor or adder, writes the result to `m[b]` and
//! falls through when it is positive, and otherwise branches. The branch
//! target is read from `m[c]` by default; a compatibility mode jumps to the
//! literal `c` instead, since published one-instruction programs assume
//! that. A negative `a` consumes one input value into `m[b]`, a negative `b`
//! emits `m[a]`, and a negative branch target halts.
//!
//! A plain-integer machine with the same observable behavior runs alongside
//! as the reference; the two must produce identical traces step for step.

mod asm;

pub use asm::{assemble, SymbolTable};

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::alu::{minus, upsa_add, AluError};
use crate::comb::{decode_word, encode_word, CombWord, PsiProbe};

/// Cell widths are capped so that sums of two cell magnitudes stay inside
/// `i64` during the branch test.
pub const MAX_CELL_BITS: usize = 62;

pub const DEFAULT_CELL_BITS: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum VmError {
    #[error("line {line}: {msg}")]
    Asm { line: usize, msg: String },
    #[error("address {addr} out of range at pc {pc} (step {step})")]
    AddressRange { addr: i64, pc: usize, step: u64 },
    #[error("value {value} does not fit in {bits}-bit cells")]
    CellOverflow { value: i64, bits: usize },
    #[error("cell width {0} outside supported range 1..={MAX_CELL_BITS}")]
    BadCellWidth(usize),
    #[error(transparent)]
    Alu(#[from] AluError),
}

/// Which combination the single instruction applies to `(m[a], m[b])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AluMode {
    /// `r = m[a] - m[b]`
    SubLeq,
    /// `r = m[a] + m[b]`
    AddLeq,
}

/// How a taken branch resolves its target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpMode {
    /// Jump to `m[c]`.
    Indirect,
    /// Jump to the literal `c`.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Running,
    Halted,
    AwaitingInput,
    EmittingOutput,
    Diverged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Instruction {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub mode: AluMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Arithmetic step: combine, conditionally write, branch or fall through.
    Compute,
    /// `a < 0`: one input value written to `m[b]`.
    Input,
    /// `b < 0`: `m[a]` emitted.
    Output,
}

/// One executed instruction. Events carry enough to replay the run: the
/// written value, the branch decision and the resolved jump target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub step: u64,
    pub pc: usize,
    pub instruction: Instruction,
    pub kind: EventKind,
    /// `m[a]` before the step; for inputs, the consumed value.
    pub operand_a: i64,
    /// `m[b]` before the step; zero when `b` is not an address.
    pub operand_b_before: i64,
    /// `m[b]` after the step; zero when `b` is not an address.
    pub operand_b_after: i64,
    /// Combination result after cell-width wrapping; for I/O, the value moved.
    pub r: i64,
    pub branch: bool,
    /// Resolved target of a taken branch; negative means halt.
    pub jump_target: Option<i64>,
}

/// First index at which two traces disagree, with both events.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceDivergence {
    pub index: usize,
    pub left: Option<TraceEvent>,
    pub right: Option<TraceEvent>,
}

/// Compares two traces event for event. `None` means they are identical.
pub fn diff_traces(left: &[TraceEvent], right: &[TraceEvent]) -> Option<TraceDivergence> {
    let n = left.len().max(right.len());
    for i in 0..n {
        let l = left.get(i).copied();
        let r = right.get(i).copied();
        if l != r {
            return Some(TraceDivergence { index: i, left: l, right: r });
        }
    }
    None
}

/// Line-oriented trace text: `step pc a b c r branch`.
pub fn format_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&format!(
            "{} {} {} {} {} {} {}\n",
            e.step,
            e.pc,
            e.instruction.a,
            e.instruction.b,
            e.instruction.c,
            e.r,
            e.branch as u8
        ));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VmOptions {
    pub mode: AluMode,
    pub jump: JumpMode,
    pub cell_bits: usize,
}

impl Default for VmOptions {
    fn default() -> VmOptions {
        VmOptions {
            mode: AluMode::SubLeq,
            jump: JumpMode::Indirect,
            cell_bits: DEFAULT_CELL_BITS,
        }
    }
}

/// A signed memory cell: sign flag plus comb-word magnitude at the machine's
/// cell width. Magnitude zero always carries sign `+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedCell {
    sign: i8,
    word: CombWord,
}

impl SignedCell {
    fn from_value(value: i64, bits: usize) -> SignedCell {
        let magnitude = value.unsigned_abs() as u128 & ((1u128 << bits) - 1);
        let sign = if value < 0 && magnitude != 0 { -1 } else { 1 };
        SignedCell {
            sign,
            word: encode_word(magnitude, bits).expect("wrapped magnitude fits the cell"),
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn word(&self) -> &CombWord {
        &self.word
    }

    /// Signed integer value, read through the power measurement.
    pub fn value(&self) -> i64 {
        let probe = PsiProbe::default_for(self.word.base_amplitude());
        let mag = decode_word(&self.word, &probe).expect("cell words stay protocol-valid") as i64;
        self.sign as i64 * mag
    }
}

#[derive(Debug, Clone)]
pub struct Machine {
    memory: Vec<SignedCell>,
    pc: usize,
    status: Status,
    step_count: u64,
    inputs: VecDeque<i64>,
    outputs: Vec<i64>,
    opts: VmOptions,
}

impl Machine {
    /// Loads an image. Load is strict: every cell value must already fit the
    /// cell width (runtime writes and inputs wrap instead).
    pub fn new(image: &[i64], opts: VmOptions) -> Result<Machine, VmError> {
        if opts.cell_bits == 0 || opts.cell_bits > MAX_CELL_BITS {
            return Err(VmError::BadCellWidth(opts.cell_bits));
        }
        let limit = 1i64 << opts.cell_bits;
        let memory = image
            .iter()
            .map(|&v| {
                if v.abs() >= limit {
                    Err(VmError::CellOverflow { value: v, bits: opts.cell_bits })
                } else {
                    Ok(SignedCell::from_value(v, opts.cell_bits))
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Machine {
            memory,
            pc: 0,
            status: Status::Running,
            step_count: 0,
            inputs: VecDeque::new(),
            outputs: Vec::new(),
            opts,
        })
    }

    pub fn push_input(&mut self, value: i64) {
        self.inputs.push_back(value);
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn outputs(&self) -> &[i64] {
        &self.outputs
    }

    pub fn cells(&self) -> &[SignedCell] {
        &self.memory
    }

    /// Integer view of memory, every cell decoded through the power readout.
    pub fn memory_values(&self) -> Vec<i64> {
        self.memory.iter().map(SignedCell::value).collect()
    }

    fn runnable(&self) -> bool {
        match self.status {
            Status::Running | Status::EmittingOutput => true,
            Status::AwaitingInput => !self.inputs.is_empty(),
            Status::Halted | Status::Diverged => false,
        }
    }

    fn read_cell(&self, addr: i64, pc: usize) -> Result<i64, VmError> {
        if addr < 0 || addr as usize >= self.memory.len() {
            return Err(VmError::AddressRange { addr, pc, step: self.step_count });
        }
        Ok(self.memory[addr as usize].value())
    }

    fn write_value(&mut self, addr: usize, value: i64) {
        self.memory[addr] = SignedCell::from_value(value, self.opts.cell_bits);
    }

    /// `m[a] -+ m[b]` through the signal subtractor or adder on the cells'
    /// comb words, with the magnitude folded back to the cell width before
    /// the sign test.
    fn combine(&self, a: usize, b: usize) -> Result<i64, VmError> {
        let (xa, xb) = (&self.memory[a], &self.memory[b]);
        let sb = match self.opts.mode {
            AluMode::SubLeq => -xb.sign,
            AluMode::AddLeq => xb.sign,
        };
        let (sign, magnitude) = if xa.sign == sb {
            (xa.sign, upsa_add(&xa.word, &xb.word)?)
        } else {
            let (order, magnitude) = minus(&xa.word, &xb.word)?;
            (order * xa.sign, magnitude)
        };
        let wrapped = magnitude.truncated(self.opts.cell_bits);
        let probe = PsiProbe::default_for(wrapped.base_amplitude());
        let mag = decode_word(&wrapped, &probe).map_err(AluError::from)? as i64;
        Ok(if mag == 0 { 0 } else { sign as i64 * mag })
    }

    /// Executes one instruction. Returns `None` when the machine cannot
    /// proceed (halted, diverged, or waiting on an empty input queue).
    pub fn step(&mut self) -> Result<Option<TraceEvent>, VmError> {
        if !self.runnable() {
            return Ok(None);
        }
        self.status = Status::Running;

        // Falling exactly off the end of memory is the graceful stop; a
        // partial trailing triple is a fault.
        if self.pc == self.memory.len() {
            self.status = Status::Halted;
            return Ok(None);
        }
        if self.pc + 2 >= self.memory.len() {
            return Err(VmError::AddressRange {
                addr: self.memory.len() as i64,
                pc: self.pc,
                step: self.step_count,
            });
        }

        let pc = self.pc;
        let a = self.memory[pc].value();
        let b = self.memory[pc + 1].value();
        let c = self.memory[pc + 2].value();
        let instruction = Instruction { a, b, c, mode: self.opts.mode };
        let step = self.step_count;

        let event = if a < 0 {
            if b < 0 || b as usize >= self.memory.len() {
                return Err(VmError::AddressRange { addr: b, pc, step });
            }
            let Some(value) = self.inputs.pop_front() else {
                self.status = Status::AwaitingInput;
                return Ok(None);
            };
            let before = self.memory[b as usize].value();
            self.write_value(b as usize, value);
            let after = self.memory[b as usize].value();
            self.pc += 3;
            TraceEvent {
                step,
                pc,
                instruction,
                kind: EventKind::Input,
                operand_a: value,
                operand_b_before: before,
                operand_b_after: after,
                r: after,
                branch: false,
                jump_target: None,
            }
        } else if b < 0 {
            let value = self.read_cell(a, pc)?;
            self.outputs.push(value);
            self.pc += 3;
            self.status = Status::EmittingOutput;
            TraceEvent {
                step,
                pc,
                instruction,
                kind: EventKind::Output,
                operand_a: value,
                operand_b_before: 0,
                operand_b_after: 0,
                r: value,
                branch: false,
                jump_target: None,
            }
        } else {
            let va = self.read_cell(a, pc)?;
            let vb = self.read_cell(b, pc)?;
            let r = self.combine(a as usize, b as usize)?;
            if r > 0 {
                self.write_value(b as usize, r);
                self.pc += 3;
                TraceEvent {
                    step,
                    pc,
                    instruction,
                    kind: EventKind::Compute,
                    operand_a: va,
                    operand_b_before: vb,
                    operand_b_after: r,
                    r,
                    branch: false,
                    jump_target: None,
                }
            } else {
                let target = match self.opts.jump {
                    JumpMode::Indirect => self.read_cell(c, pc)?,
                    JumpMode::Direct => c,
                };
                if target < 0 {
                    self.status = Status::Halted;
                } else {
                    self.pc = target as usize;
                }
                TraceEvent {
                    step,
                    pc,
                    instruction,
                    kind: EventKind::Compute,
                    operand_a: va,
                    operand_b_before: vb,
                    operand_b_after: vb,
                    r,
                    branch: true,
                    jump_target: Some(target),
                }
            }
        };
        self.step_count += 1;
        Ok(Some(event))
    }

    /// Steps until the machine stops or the budget runs out; exhausting the
    /// budget while still runnable marks the run diverged rather than
    /// raising an error.
    pub fn run(&mut self, budget: u64) -> Result<Vec<TraceEvent>, VmError> {
        let mut trace = Vec::new();
        loop {
            if self.step_count >= budget && self.runnable() && self.pc != self.memory.len() {
                self.status = Status::Diverged;
                return Ok(trace);
            }
            match self.step()? {
                Some(event) => trace.push(event),
                None => return Ok(trace),
            }
        }
    }
}

/// Final state and observable effects of a complete run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub memory: Vec<i64>,
    pub status: Status,
    pub outputs: Vec<i64>,
    pub trace: Vec<TraceEvent>,
    pub steps: u64,
}

/// Runs an image on the comb-cell machine.
pub fn run(
    image: &[i64],
    inputs: &[i64],
    opts: VmOptions,
    budget: u64,
) -> Result<RunReport, VmError> {
    let mut machine = Machine::new(image, opts)?;
    for &v in inputs {
        machine.push_input(v);
    }
    let trace = machine.run(budget)?;
    Ok(RunReport {
        memory: machine.memory_values(),
        status: machine.status,
        outputs: machine.outputs,
        trace,
        steps: machine.step_count,
    })
}

/// Runs an image on the plain-integer reference machine. Independent of the
/// comb implementation on purpose; the two must agree trace for trace.
pub fn run_integer_oracle(
    image: &[i64],
    inputs: &[i64],
    opts: VmOptions,
    budget: u64,
) -> Result<RunReport, VmError> {
    if opts.cell_bits == 0 || opts.cell_bits > MAX_CELL_BITS {
        return Err(VmError::BadCellWidth(opts.cell_bits));
    }
    let limit = 1i64 << opts.cell_bits;
    for &v in image {
        if v.abs() >= limit {
            return Err(VmError::CellOverflow { value: v, bits: opts.cell_bits });
        }
    }
    let wrap = |v: i64| -> i64 {
        let mag = (v.unsigned_abs() as u128 & ((1u128 << opts.cell_bits) - 1)) as i64;
        if v < 0 && mag != 0 {
            -mag
        } else {
            mag
        }
    };

    let mut memory: Vec<i64> = image.to_vec();
    let mut inputs: VecDeque<i64> = inputs.iter().copied().collect();
    let mut outputs = Vec::new();
    let mut trace = Vec::new();
    let mut pc = 0usize;
    let mut step: u64 = 0;
    let mut status = Status::Running;

    let read = |memory: &[i64], addr: i64, pc: usize, step: u64| -> Result<i64, VmError> {
        if addr < 0 || addr as usize >= memory.len() {
            Err(VmError::AddressRange { addr, pc, step })
        } else {
            Ok(memory[addr as usize])
        }
    };

    loop {
        if step >= budget && pc != memory.len() {
            status = Status::Diverged;
            break;
        }
        if pc == memory.len() {
            status = Status::Halted;
            break;
        }
        if pc + 2 >= memory.len() {
            return Err(VmError::AddressRange { addr: memory.len() as i64, pc, step });
        }
        let a = memory[pc];
        let b = memory[pc + 1];
        let c = memory[pc + 2];
        let instruction = Instruction { a, b, c, mode: opts.mode };

        let event = if a < 0 {
            if b < 0 || b as usize >= memory.len() {
                return Err(VmError::AddressRange { addr: b, pc, step });
            }
            let Some(value) = inputs.pop_front() else {
                status = Status::AwaitingInput;
                break;
            };
            let before = memory[b as usize];
            let after = wrap(value);
            memory[b as usize] = after;
            pc += 3;
            TraceEvent {
                step,
                pc: pc - 3,
                instruction,
                kind: EventKind::Input,
                operand_a: value,
                operand_b_before: before,
                operand_b_after: after,
                r: after,
                branch: false,
                jump_target: None,
            }
        } else if b < 0 {
            let value = read(&memory, a, pc, step)?;
            outputs.push(value);
            pc += 3;
            status = Status::EmittingOutput;
            TraceEvent {
                step,
                pc: pc - 3,
                instruction,
                kind: EventKind::Output,
                operand_a: value,
                operand_b_before: 0,
                operand_b_after: 0,
                r: value,
                branch: false,
                jump_target: None,
            }
        } else {
            let va = read(&memory, a, pc, step)?;
            let vb = read(&memory, b, pc, step)?;
            let r = wrap(match opts.mode {
                AluMode::SubLeq => va - vb,
                AluMode::AddLeq => va + vb,
            });
            if r > 0 {
                memory[b as usize] = r;
                pc += 3;
                TraceEvent {
                    step,
                    pc: pc - 3,
                    instruction,
                    kind: EventKind::Compute,
                    operand_a: va,
                    operand_b_before: vb,
                    operand_b_after: r,
                    r,
                    branch: false,
                    jump_target: None,
                }
            } else {
                let target = match opts.jump {
                    JumpMode::Indirect => read(&memory, c, pc, step)?,
                    JumpMode::Direct => c,
                };
                let event = TraceEvent {
                    step,
                    pc,
                    instruction,
                    kind: EventKind::Compute,
                    operand_a: va,
                    operand_b_before: vb,
                    operand_b_after: vb,
                    r,
                    branch: true,
                    jump_target: Some(target),
                };
                if target < 0 {
                    status = Status::Halted;
                    step += 1;
                    trace.push(event);
                    break;
                }
                pc = target as usize;
                event
            }
        };
        step += 1;
        trace.push(event);
        // Emitting is transient: the run continues on the next iteration.
        if status == Status::EmittingOutput {
            status = Status::Running;
        }
    }

    Ok(RunReport { memory, status, outputs, trace, steps: step })
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Status::Running => "running",
            Status::Halted => "halted",
            Status::AwaitingInput => "awaiting-input",
            Status::EmittingOutput => "emitting-output",
            Status::Diverged => "diverged",
        };
        f.write_str(name)
    }
}
