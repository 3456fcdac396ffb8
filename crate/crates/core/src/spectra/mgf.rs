use std::fmt::Write as _;
use std::path::Path;

use super::{Peak, Spectrum};
use crate::error::{Error, Result};

/// A record that could not be parsed. The record is skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    pub line: usize,
    pub msg: String,
}

#[derive(Debug, Clone, Default)]
pub struct MgfReport {
    pub spectra: Vec<Spectrum>,
    pub errors: Vec<RecordError>,
    /// Records without a CHARGE header; these default to charge 1.
    pub missing_charge: usize,
}

pub fn parse_mgf(path: impl AsRef<Path>) -> Result<MgfReport> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_mgf_str(&text))
}

#[derive(Default)]
struct Record {
    start: usize,
    title: Option<String>,
    pepmass: Option<f64>,
    charge: Option<u32>,
    label: Option<String>,
    peaks: Vec<Peak>,
    error: Option<RecordError>,
}

impl Record {
    fn fail(&mut self, line: usize, msg: impl Into<String>) {
        if self.error.is_none() {
            self.error = Some(RecordError {
                line,
                msg: msg.into(),
            });
        }
    }
}

pub fn parse_mgf_str(text: &str) -> MgfReport {
    let mut report = MgfReport::default();
    let mut current: Option<Record> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.eq_ignore_ascii_case("BEGIN IONS") {
            if let Some(open) = current.take() {
                report.errors.push(RecordError {
                    line: open.start,
                    msg: "record not terminated by END IONS".into(),
                });
            }
            current = Some(Record {
                start: lineno,
                ..Default::default()
            });
            continue;
        }
        let Some(rec) = current.as_mut() else {
            // Global parameters outside records are ignored.
            continue;
        };
        if line.eq_ignore_ascii_case("END IONS") {
            let rec = current.take().unwrap();
            finish(rec, lineno, &mut report);
            continue;
        }
        if let Some((key, value)) = line.split_once('=') {
            let value = value.trim();
            match key.trim().to_ascii_uppercase().as_str() {
                "TITLE" => rec.title = Some(value.to_string()),
                "PEPMASS" => match value.split_whitespace().next().map(str::parse::<f64>) {
                    Some(Ok(mz)) if mz > 0.0 && mz.is_finite() => rec.pepmass = Some(mz),
                    _ => rec.fail(lineno, format!("invalid PEPMASS `{value}`")),
                },
                "CHARGE" => match parse_charge(value) {
                    Some(z) => rec.charge = Some(z),
                    None => rec.fail(lineno, format!("invalid CHARGE `{value}`")),
                },
                "SEQ" => rec.label = Some(value.to_string()),
                _ => {}
            }
            continue;
        }
        let mut fields = line.split_whitespace();
        let mz = fields.next().map(str::parse::<f64>);
        let intensity = fields.next().map(str::parse::<f64>);
        match (mz, intensity) {
            (Some(Ok(mz)), Some(Ok(i))) if mz > 0.0 && i >= 0.0 && mz.is_finite() && i.is_finite() => {
                rec.peaks.push(Peak::new(mz, i))
            }
            _ => rec.fail(lineno, format!("malformed peak line `{line}`")),
        }
    }
    if let Some(open) = current {
        report.errors.push(RecordError {
            line: open.start,
            msg: "record not terminated by END IONS".into(),
        });
    }
    report
}

fn parse_charge(value: &str) -> Option<u32> {
    // Multi-charge lists ("2+ and 3+") take the first entry.
    let first = value.split(|c: char| c == ',' || c.is_whitespace()).next()?;
    let digits = first.trim_end_matches(['+', '-']);
    match digits.parse::<u32>() {
        Ok(z) if z >= 1 => Some(z),
        _ => None,
    }
}

fn finish(rec: Record, end_line: usize, report: &mut MgfReport) {
    if let Some(err) = rec.error {
        report.errors.push(err);
        return;
    }
    let Some(title) = rec.title else {
        report.errors.push(RecordError {
            line: end_line,
            msg: "missing TITLE".into(),
        });
        return;
    };
    let Some(pepmass) = rec.pepmass else {
        report.errors.push(RecordError {
            line: end_line,
            msg: "missing PEPMASS".into(),
        });
        return;
    };
    let charge = rec.charge.unwrap_or_else(|| {
        report.missing_charge += 1;
        1
    });
    let mut spectrum = Spectrum::new(title, pepmass, charge, rec.peaks);
    spectrum.label = rec.label;
    report.spectra.push(spectrum);
}

pub fn write_mgf_string(spectra: &[Spectrum]) -> String {
    let mut out = String::new();
    for s in spectra {
        out.push_str("BEGIN IONS\n");
        let _ = writeln!(out, "TITLE={}", s.id);
        let _ = writeln!(out, "PEPMASS={}", s.precursor_mz);
        let _ = writeln!(out, "CHARGE={}+", s.precursor_charge);
        if let Some(label) = &s.label {
            let _ = writeln!(out, "SEQ={label}");
        }
        for p in &s.peaks {
            let _ = writeln!(out, "{} {}", p.mz, p.intensity);
        }
        out.push_str("END IONS\n\n");
    }
    out
}

pub fn write_mgf(path: impl AsRef<Path>, spectra: &[Spectrum]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mgf_string(spectra)).map_err(|e| Error::io(path, e))
}
