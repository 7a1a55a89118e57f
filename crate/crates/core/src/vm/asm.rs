//! Two-pass assembler for the one-instruction machine.
//!
//! Surface syntax, one directive per line:
//!
//! ```text
//! # comment to end of line
//! label: other_label: a b c     three operands form one triple
//! name: .data v1 v2 ...         raw cells
//! ```
//!
//! Operands and data values are signed integers, label references, or the
//! relative form `?`, `?+n`, `?-n`, which resolves to the address of the
//! cell the operand itself occupies, offset by `n`.

use std::collections::BTreeMap;

use super::VmError;

/// Label name to cell address.
pub type SymbolTable = BTreeMap<String, usize>;

struct PendingLine {
    number: usize,
    operands: Vec<String>,
    base_address: usize,
}

fn err(line: usize, msg: impl Into<String>) -> VmError {
    VmError::Asm { line, msg: msg.into() }
}

fn valid_label(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Assembles source text into a memory image and the resolved symbol table.
pub fn assemble(source: &str) -> Result<(Vec<i64>, SymbolTable), VmError> {
    let mut symbols = SymbolTable::new();
    let mut pending = Vec::new();
    let mut address = 0usize;

    for (i, raw_line) in source.lines().enumerate() {
        let number = i + 1;
        let line = raw_line.split('#').next().unwrap_or("");
        let mut tokens: Vec<&str> = line.split_whitespace().collect();

        while let Some(first) = tokens.first() {
            let Some(name) = first.strip_suffix(':') else { break };
            if !valid_label(name) {
                return Err(err(number, format!("invalid label name `{name}`")));
            }
            if symbols.insert(name.to_string(), address).is_some() {
                return Err(err(number, format!("duplicate label `{name}`")));
            }
            tokens.remove(0);
        }
        if tokens.is_empty() {
            continue;
        }

        if tokens[0] == ".data" {
            tokens.remove(0);
            if tokens.is_empty() {
                return Err(err(number, "empty .data directive"));
            }
        } else if tokens.len() != 3 {
            return Err(err(
                number,
                format!("expected 3 operands, found {}", tokens.len()),
            ));
        }
        let operands: Vec<String> = tokens.iter().map(|t| t.to_string()).collect();
        let count = operands.len();
        pending.push(PendingLine { number, operands, base_address: address });
        address += count;
    }

    let mut image = Vec::with_capacity(address);
    for line in &pending {
        for (slot, operand) in line.operands.iter().enumerate() {
            let cell = line.base_address + slot;
            image.push(resolve(operand, cell, &symbols, line.number)?);
        }
    }
    Ok((image, symbols))
}

fn resolve(
    operand: &str,
    cell: usize,
    symbols: &SymbolTable,
    line: usize,
) -> Result<i64, VmError> {
    if let Ok(value) = operand.parse::<i64>() {
        return Ok(value);
    }
    if let Some(rest) = operand.strip_prefix('?') {
        let offset = if rest.is_empty() {
            0
        } else {
            rest.parse::<i64>()
                .map_err(|_| err(line, format!("bad relative operand `{operand}`")))?
        };
        return Ok(cell as i64 + offset);
    }
    if let Some(&addr) = symbols.get(operand) {
        return Ok(addr as i64);
    }
    if valid_label(operand) {
        Err(err(line, format!("unknown label `{operand}`")))
    } else {
        Err(err(line, format!("bad operand `{operand}`")))
    }
}
