use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::Instruction;
use crate::error::{Error, Result};

const STORE_KEYS: &[&str] = &["data", "arr_idx", "col_addr", "row_addr", "MLC_bits", "write_cycles"];
const READ_KEYS: &[&str] = &["data_size", "arr_idx", "col_addr", "row_addr", "MLC_bits"];
const MVM_KEYS: &[&str] = &["row_addr", "num_activated_row", "ADC_bits", "MLC_bits"];

/// Parses program text. `base_dir` resolves relative `@file` data references.
pub fn parse_program(text: &str, base_dir: Option<&Path>) -> Result<Vec<Instruction>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        out.push(parse_line(line, base_dir).map_err(|msg| Error::Parse { line: idx + 1, msg })?);
    }
    Ok(out)
}

pub fn parse_program_file(path: impl AsRef<Path>) -> Result<Vec<Instruction>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_program(&text, path.parent())
}

/// Canonical text form, one instruction per line with inline data.
pub fn render_program(program: &[Instruction]) -> String {
    program.iter().map(|i| format!("{i}\n")).collect()
}

// A comment starts at a `#` opening a token; `@file#row` is not a comment.
fn strip_comment(line: &str) -> &str {
    let mut prev_ws = true;
    for (i, ch) in line.char_indices() {
        if ch == '#' && prev_ws {
            return &line[..i];
        }
        prev_ws = ch.is_whitespace();
    }
    line
}

fn parse_line(line: &str, base_dir: Option<&Path>) -> std::result::Result<Instruction, String> {
    let mut tokens = line.split_whitespace();
    let opcode = tokens.next().unwrap_or_default();
    let allowed = match opcode {
        "STORE_HV" => STORE_KEYS,
        "READ_HV" => READ_KEYS,
        "MVM_COMPUTE" => MVM_KEYS,
        other => return Err(format!("unknown opcode `{other}`")),
    };
    let mut ops: BTreeMap<&str, &str> = BTreeMap::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{tok}`"))?;
        if !allowed.contains(&k) {
            return Err(format!("unknown operand `{k}` for {opcode}"));
        }
        if ops.insert(k, v).is_some() {
            return Err(format!("duplicate operand `{k}`"));
        }
    }
    let missing: Vec<String> = allowed
        .iter()
        .filter(|k| !ops.contains_key(*k))
        .map(|k| format!("`{k}`"))
        .collect();
    if !missing.is_empty() {
        return Err(format!("{opcode} is missing operand(s) {}", missing.join(", ")));
    }

    let mlc_bits = ranged::<u8>(&ops, "MLC_bits", 1, 3)?;
    Ok(match opcode {
        "STORE_HV" => {
            let data = parse_data(ops["data"], base_dir)?;
            if let Some(v) = data.iter().find(|v| v.unsigned_abs() > mlc_bits) {
                return Err(format!("data value {v} out of range for MLC_bits={mlc_bits}"));
            }
            Instruction::StoreHv {
                data,
                arr_idx: ranged::<i64>(&ops, "arr_idx", -1, i64::MAX)?,
                col_addr: ranged::<usize>(&ops, "col_addr", 0, usize::MAX)?,
                row_addr: ranged::<usize>(&ops, "row_addr", 0, usize::MAX)?,
                mlc_bits,
                write_cycles: ranged::<u32>(&ops, "write_cycles", 0, 1000)?,
            }
        }
        "READ_HV" => Instruction::ReadHv {
            data_size: ranged::<usize>(&ops, "data_size", 1, usize::MAX)?,
            arr_idx: ranged::<usize>(&ops, "arr_idx", 0, usize::MAX)?,
            col_addr: ranged::<usize>(&ops, "col_addr", 0, usize::MAX)?,
            row_addr: ranged::<usize>(&ops, "row_addr", 0, usize::MAX)?,
            mlc_bits,
        },
        _ => Instruction::MvmCompute {
            row_addr: ranged::<usize>(&ops, "row_addr", 0, usize::MAX)?,
            num_activated_row: ranged::<usize>(&ops, "num_activated_row", 1, usize::MAX)?,
            adc_bits: ranged::<u8>(&ops, "ADC_bits", 1, 6)?,
            mlc_bits,
        },
    })
}

fn ranged<T>(ops: &BTreeMap<&str, &str>, key: &str, lo: T, hi: T) -> std::result::Result<T, String>
where
    T: std::str::FromStr + PartialOrd + std::fmt::Display + Copy,
{
    let raw = ops[key];
    let v: T = raw.parse().map_err(|_| format!("operand `{key}` has invalid value `{raw}`"))?;
    if v < lo || v > hi {
        return Err(format!("operand `{key}`={v} out of range [{lo}, {hi}]"));
    }
    Ok(v)
}

fn parse_values(s: &str) -> std::result::Result<Vec<i8>, String> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i8>()
                .map_err(|_| format!("invalid data value `{t}`"))
        })
        .collect()
}

fn parse_data(raw: &str, base_dir: Option<&Path>) -> std::result::Result<Vec<i8>, String> {
    let Some(reference) = raw.strip_prefix('@') else {
        return parse_values(raw);
    };
    let (file, row) = reference
        .rsplit_once('#')
        .ok_or_else(|| format!("data reference `{raw}` must be @file#row"))?;
    let row: usize = row.parse().map_err(|_| format!("invalid row in `{raw}`"))?;
    let mut path = PathBuf::from(file);
    if path.is_relative() {
        if let Some(dir) = base_dir {
            path = dir.join(path);
        }
    }
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let line = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .nth(row)
        .ok_or_else(|| format!("{} has no row {row}", path.display()))?;
    parse_values(line)
}
