//! Simulator of a signal-based computer whose machine words are frequency
//! combs. Words live in slot pairs of a comb spectrum, logic and arithmetic
//! act through signal superposition and filtering, and the readout is a
//! perturbative power measurement. On top of the word layer sit a one
//! instruction machine, an arithmetized string rewriting engine and a
//! cellular automaton reservoir.

pub mod alu;
pub mod ca;
pub mod comb;
pub mod thue;
pub mod vm;

pub use alu::{
    conv_product, digit_sum, hamming_distance, linear_logic, minus, multiply, upsa_add, xor_op,
    AluError, LogicKind, PairCode, PairPattern,
};
pub use ca::{
    ca_step_conv, ca_step_direct, conv_mask, evaluate_task, feature_rows, history_csv,
    train_readout, transfer_eval, CaError, CaRule, Lattice, ReservoirConfig, ReservoirState,
    Task, TaskReport, TrainedReadout, TransferFunction, MAX_NEIGHBORHOOD,
};
pub use comb::{
    complement, decode_word, decode_word_default, encode_word, encode_word_with, flip_bit,
    parse_comb_text, psi_read, psi_read_bit, shift_word, slot_power, spectrum_csv,
    synthesize_waveform, write_comb_text, CombError, CombWord, PsiProbe, PsiReading,
    ReferenceComb, WaveformView, MAX_WORD_LEN, PSI_TOLERANCE,
};
pub use thue::{
    arithmetize, check_confluence_small, decode_field, format_reduction_trace, holographic_step,
    match_positions, positional_code, reduce, rewrite_step, ArithmetizedRule, ArithmetizedSystem,
    CirculantMatcher, ConfluenceReport, ConfluenceWitness, HolographicField, ReductionReport,
    RewriteOutcome, RewriteRecord, RuleTable, Strategy, SymbolString, ThueError, Verdict,
};
pub use vm::{
    assemble, diff_traces, format_trace, run, run_integer_oracle, AluMode, EventKind, Instruction,
    JumpMode, Machine, RunReport, SignedCell, Status, SymbolTable, TraceDivergence, TraceEvent,
    VmError, VmOptions, DEFAULT_CELL_BITS, MAX_CELL_BITS,
};
