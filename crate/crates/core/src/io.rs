// SPDX-License-Identifier: Apache-2.0

//! Readers for the unit CSV, aggregated-statistics, design and custom
//! coefficient files.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::stats::{PopulationFrame, StratumId, StratumInput, StratumSummary, Unit};

pub const UNIT_CSV_HEADER: [&str; 3] = ["stratum", "y", "x"];
pub const DESIGN_CSV_HEADER: [&str; 2] = ["stratum", "n"];
pub const CUSTOM_CSV_HEADER: [&str; 3] = ["stratum", "a", "b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    UnitCsv,
    Aggregated,
}

/// A first line of exactly `stratum,y,x` marks a unit CSV; anything else is
/// treated as an aggregated-statistics document.
pub fn detect_format(text: &str) -> InputFormat {
    let first = text.lines().next().unwrap_or("").trim_start_matches('\u{feff}');
    if first.trim_end_matches('\r') == UNIT_CSV_HEADER.join(",") {
        InputFormat::UnitCsv
    } else {
        InputFormat::Aggregated
    }
}

/// Reads CSV rows under an exact header, handing each data row (with its
/// 1-based line number) to `row`.
fn read_rows<R: Read>(
    source: R,
    header: &[&str],
    mut row: impl FnMut(u64, &csv::StringRecord) -> Result<()>,
) -> Result<usize> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut records = reader.records();
    let first = match records.next() {
        None => return Err(Error::EmptyInput),
        Some(r) => r.map_err(|e| Error::Parse(e.to_string()))?,
    };
    let got: Vec<&str> = first
        .iter()
        .enumerate()
        .map(|(i, f)| if i == 0 { f.trim_start_matches('\u{feff}') } else { f })
        .collect();
    if got != header {
        return Err(Error::ParseLine {
            line: 1,
            message: format!("expected header `{}`, got `{}`", header.join(","), got.join(",")),
        });
    }
    let mut count = 0;
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::ParseLine {
                line,
                message: e.to_string(),
            }
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(Error::ParseLine {
                line,
                message: format!("expected {} fields, got {}", header.len(), rec.len()),
            });
        }
        row(line, &rec)?;
        count += 1;
    }
    Ok(count)
}

fn parse_field<T: std::str::FromStr>(line: u64, name: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::ParseLine {
        line,
        message: format!("field `{name}` is not a valid number: `{raw}`"),
    })
}

/// Parses a unit CSV (`stratum,y,x`) into a population frame.
pub fn ingest_units<R: Read>(source: R) -> Result<PopulationFrame> {
    let mut units = Vec::new();
    read_rows(source, &UNIT_CSV_HEADER, |line, rec| {
        let y: f64 = parse_field(line, "y", &rec[1])?;
        let x: f64 = parse_field(line, "x", &rec[2])?;
        if !y.is_finite() || !x.is_finite() {
            return Err(Error::ParseLine {
                line,
                message: "non-finite value".into(),
            });
        }
        units.push(Unit {
            stratum: StratumId::new(&rec[0]),
            y,
            x,
        });
        Ok(())
    })?;
    if units.is_empty() {
        return Err(Error::EmptyInput);
    }
    PopulationFrame::new(units)
}

/// Writes a frame as a unit CSV. Values use shortest round-trip
/// formatting, so re-ingesting reproduces the frame exactly.
pub fn write_units<W: std::io::Write>(frame: &PopulationFrame, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io_err = |e: csv::Error| Error::Parse(format!("writing unit CSV: {e}"));
    w.write_record(UNIT_CSV_HEADER).map_err(io_err)?;
    for u in frame.units() {
        w.write_record([u.stratum.as_str(), &u.y.to_string(), &u.x.to_string()])
            .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("writing unit CSV: {e}")))?;
    Ok(())
}

/// Parses a design CSV (`stratum,n`).
pub fn read_design<R: Read>(source: R) -> Result<Vec<(StratumId, u64)>> {
    let mut design = Vec::new();
    read_rows(source, &DESIGN_CSV_HEADER, |line, rec| {
        design.push((StratumId::new(&rec[0]), parse_field(line, "n", &rec[1])?));
        Ok(())
    })?;
    if design.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(design)
}

/// Parses a custom coefficients CSV (`stratum,a,b`).
pub fn read_custom_coefficients<R: Read>(source: R) -> Result<BTreeMap<StratumId, (f64, f64)>> {
    let mut out = BTreeMap::new();
    read_rows(source, &CUSTOM_CSV_HEADER, |line, rec| {
        let id = StratumId::new(&rec[0]);
        let a = parse_field(line, "a", &rec[1])?;
        let b = parse_field(line, "b", &rec[2])?;
        if out.insert(id.clone(), (a, b)).is_some() {
            return Err(Error::DuplicateStratum(id.to_string()));
        }
        Ok(())
    })?;
    if out.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Label {
    Int(i64),
    Text(String),
}

#[derive(Deserialize)]
struct StratumRecord {
    id: Label,
    #[serde(rename = "N")]
    pop_size: u64,
    n: u64,
    mean_x: f64,
    mean_y: f64,
    sd_x: f64,
    sd_y: f64,
    rho: Option<f64>,
    cov_xy: Option<f64>,
    cx: Option<f64>,
    beta2x: Option<f64>,
}

// Population-level fields (overall C_x, beta_x, ...) are accepted and
// ignored; nothing downstream consumes them.
#[derive(Deserialize)]
struct AggregatedDoc {
    strata: Vec<StratumRecord>,
}

/// Parses an aggregated-statistics document (JSON, or TOML when the text
/// does not start with `{`).
pub fn read_aggregated(text: &str) -> Result<Vec<StratumSummary>> {
    let trimmed = text.trim_start_matches('\u{feff}').trim_start();
    if trimmed.is_empty() {
        return Err(Error::EmptyInput);
    }
    let doc: AggregatedDoc = if trimmed.starts_with('{') {
        serde_json::from_str(trimmed).map_err(|e| Error::Parse(format!("aggregated JSON: {e}")))?
    } else {
        toml::from_str(trimmed).map_err(|e| Error::Parse(format!("aggregated TOML: {e}")))?
    };
    if doc.strata.is_empty() {
        return Err(Error::InvalidInput("`strata` is empty".into()));
    }
    doc.strata
        .into_iter()
        .map(|r| {
            StratumSummary::from_input(StratumInput {
                id: match r.id {
                    Label::Int(i) => i.to_string(),
                    Label::Text(s) => s,
                },
                pop_size: r.pop_size,
                sample_size: r.n,
                mean_x: r.mean_x,
                mean_y: r.mean_y,
                sd_x: r.sd_x,
                sd_y: r.sd_y,
                rho: r.rho,
                cov_xy: r.cov_xy,
                cx: r.cx,
                beta2x: r.beta2x,
            })
        })
        .collect()
}
