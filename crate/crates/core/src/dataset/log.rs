//! Synchronised gameplay logs.
//!
//! One comma-separated record per line after a header:
//!
//! ```text
//! game,session,frame,ts_ms,mouse_x,mouse_y,lmb,rmb,w,a,...
//! pubg,s1,0,0,960,540,0,0,1,0,...
//! ```
//!
//! Input columns may appear in any order but each of the catalog's raw inputs
//! must be present exactly once. Cells are literal `0`/`1`.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::ops::Range;

use super::catalog::ActionCatalog;
use crate::error::{Error, Result};

const FIXED_COLUMNS: [&str; 6] = ["game", "session", "frame", "ts_ms", "mouse_x", "mouse_y"];

/// One synchronised sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimestepRecord {
    pub game_id: String,
    pub session_id: String,
    pub frame_index: u64,
    pub timestamp_ms: u64,
    pub mouse_x: i32,
    pub mouse_y: i32,
    /// Pressed state per raw input, in catalog input order.
    pub keys: Vec<bool>,
}

impl TimestepRecord {
    fn same_stream(&self, other: &TimestepRecord) -> bool {
        self.game_id == other.game_id && self.session_id == other.session_id
    }
}

/// Game and session ids end up inside `game/session/frame` sample ids and
/// tab-separated manifests.
pub(crate) fn check_id(kind: &str, id: &str) -> std::result::Result<(), String> {
    if id.is_empty() {
        return Err(format!("empty {kind}"));
    }
    if id.contains(['/', '\t', '\n', '\r']) {
        return Err(format!("{kind} `{id}` contains '/', a tab or a newline"));
    }
    Ok(())
}

pub fn parse_log<R: Read>(source: R, catalog: &ActionCatalog) -> Result<Vec<TimestepRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let mut rows = reader.records();

    let header = match rows.next() {
        Some(h) => h.map_err(|e| Error::MalformedHeader(e.to_string()))?,
        None => return Err(Error::MalformedHeader("missing header line".into())),
    };
    let column_map = header_to_inputs(&header, catalog)?;
    let width = FIXED_COLUMNS.len() + catalog.input_count();

    let mut last_frame: HashMap<(String, String), u64> = HashMap::new();
    let mut out = Vec::new();
    for row in rows {
        let row = row.map_err(|e| Error::MalformedRow {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            reason: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let bad = |reason: String| Error::MalformedRow { line, reason };
        if row.len() != width {
            return Err(bad(format!("expected {width} fields, found {}", row.len())));
        }
        let game_id = row[0].to_string();
        let session_id = row[1].to_string();
        check_id("game id", &game_id).map_err(bad)?;
        check_id("session id", &session_id).map_err(bad)?;
        let frame_index: u64 = parse_field(&row[2], "frame", line)?;
        let timestamp_ms: u64 = parse_field(&row[3], "ts_ms", line)?;
        let mouse_x: i32 = parse_field(&row[4], "mouse_x", line)?;
        let mouse_y: i32 = parse_field(&row[5], "mouse_y", line)?;

        let mut keys = vec![false; catalog.input_count()];
        for (cell, &slot) in row.iter().skip(FIXED_COLUMNS.len()).zip(&column_map) {
            keys[slot] = match cell {
                "0" => false,
                "1" => true,
                other => return Err(bad(format!("key cell `{other}` is not 0 or 1"))),
            };
        }

        let key = (game_id.clone(), session_id.clone());
        if let Some(&previous) = last_frame.get(&key) {
            if frame_index <= previous {
                return Err(Error::NonMonotonicFrame {
                    game: game_id,
                    session: session_id,
                    previous,
                    frame: frame_index,
                });
            }
        }
        last_frame.insert(key, frame_index);

        out.push(TimestepRecord {
            game_id,
            session_id,
            frame_index,
            timestamp_ms,
            mouse_x,
            mouse_y,
            keys,
        });
    }
    Ok(out)
}

/// Maps each input column of the header to its slot in the catalog's input order.
fn header_to_inputs(header: &csv::StringRecord, catalog: &ActionCatalog) -> Result<Vec<usize>> {
    if header.len() < FIXED_COLUMNS.len()
        || header.iter().zip(FIXED_COLUMNS).any(|(h, want)| h != want)
    {
        return Err(Error::MalformedHeader(format!(
            "header must start with `{}`",
            FIXED_COLUMNS.join(",")
        )));
    }
    let mut map = Vec::new();
    let mut seen = vec![false; catalog.input_count()];
    for name in header.iter().skip(FIXED_COLUMNS.len()) {
        let slot = catalog
            .inputs()
            .iter()
            .position(|(input, _)| input == name)
            .ok_or_else(|| Error::UnknownAction(name.to_string()))?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::MalformedHeader(format!("column `{name}` repeated")));
        }
        map.push(slot);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::MalformedHeader(format!(
            "missing input column `{}`",
            catalog.inputs()[missing].0
        )));
    }
    Ok(map)
}

fn parse_field<T: std::str::FromStr>(cell: &str, name: &str, line: usize) -> Result<T> {
    cell.parse().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("{name} `{cell}` is not a valid number"),
    })
}

/// Writes records in the canonical column order. `parse_log` reads the output
/// back field-for-field.
pub fn write_log<W: Write>(sink: W, records: &[TimestepRecord], catalog: &ActionCatalog) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    let header: Vec<&str> = FIXED_COLUMNS
        .iter()
        .copied()
        .chain(catalog.inputs().iter().map(|(n, _)| n.as_str()))
        .collect();
    w.write_record(&header).map_err(csv_io)?;
    let mut row: Vec<String> = Vec::with_capacity(header.len());
    for r in records {
        if r.keys.len() != catalog.input_count() {
            return Err(Error::DimMismatch {
                what: "record keys",
                expected: catalog.input_count(),
                found: r.keys.len(),
            });
        }
        row.clear();
        row.push(r.game_id.clone());
        row.push(r.session_id.clone());
        row.push(r.frame_index.to_string());
        row.push(r.timestamp_ms.to_string());
        row.push(r.mouse_x.to_string());
        row.push(r.mouse_y.to_string());
        row.extend(r.keys.iter().map(|&k| if k { "1" } else { "0" }.to_string()));
        w.write_record(&row).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

/// Splits records into contiguous runs.
///
/// A new segment starts whenever the stream (game, session) changes, the
/// frame index skips, or the timestamp gap exceeds `max_gap_ms`.
pub fn detect_discontinuities(records: &[TimestepRecord], max_gap_ms: u64) -> Vec<Range<usize>> {
    let mut segments = Vec::new();
    if records.is_empty() {
        return segments;
    }
    let mut start = 0;
    for i in 1..records.len() {
        let (prev, cur) = (&records[i - 1], &records[i]);
        let broken = !prev.same_stream(cur)
            || cur.frame_index != prev.frame_index + 1
            || cur.timestamp_ms.saturating_sub(prev.timestamp_ms) > max_gap_ms
            || cur.timestamp_ms < prev.timestamp_ms;
        if broken {
            segments.push(start..i);
            start = i;
        }
    }
    segments.push(start..records.len());
    segments
}
