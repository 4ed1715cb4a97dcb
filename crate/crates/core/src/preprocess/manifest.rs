//! Window manifests: one tab-separated record per window.
//!
//! ```text
//! sample_id	window	actions	categories	caption
//! pubg/s1/0	16	1000001000000000	110	Pan Left, Move Forward
//! ```
//!
//! `actions` holds one digit per catalog label, `categories` one digit each
//! for panning, navigation and weapon.

use std::io::{BufRead, BufReader, Read, Write};

use super::{categorize, semantic_action_mapper, CategoryFlags, WindowSample};
use crate::dataset::{check_id, ActionCatalog};
use crate::error::{Error, Result};

const HEADER: &str = "sample_id\twindow\tactions\tcategories\tcaption";

fn bit_string(bits: impl IntoIterator<Item = bool>) -> String {
    bits.into_iter().map(|b| if b { '1' } else { '0' }).collect()
}

pub fn write_manifest<W: Write>(mut sink: W, samples: &[WindowSample]) -> Result<()> {
    writeln!(sink, "{HEADER}")?;
    for s in samples {
        let c = s.categories;
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{}",
            s.sample_id,
            s.window_size,
            bit_string(s.actions.iter().copied()),
            bit_string([c.panning, c.navigation, c.weapon]),
            s.caption
        )?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads a manifest, checking every record against `catalog`: action width,
/// category flags and caption must all be what the pipeline would produce.
pub fn read_manifest<R: Read>(source: R, catalog: &ActionCatalog) -> Result<Vec<WindowSample>> {
    let mut lines = BufReader::new(source).lines();
    let header = lines.next().transpose()?.unwrap_or_default();
    if header.trim_end_matches('\r') != HEADER {
        return Err(Error::MalformedHeader(format!("expected `{HEADER}`")));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        let lineno = i + 2;
        let bad = |reason: String| Error::MalformedRow { line: lineno, reason };
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [sample_id, window, actions, categories, caption] = fields[..] else {
            return Err(bad(format!("expected 5 fields, found {}", fields.len())));
        };

        let parts: Vec<&str> = sample_id.split('/').collect();
        let [game_id, session_id, start] = parts[..] else {
            return Err(bad(format!("sample id `{sample_id}` is not game/session/frame")));
        };
        check_id("game id", game_id).map_err(bad)?;
        check_id("session id", session_id).map_err(bad)?;
        let start_frame: u64 = start
            .parse()
            .map_err(|_| bad(format!("start frame `{start}` is not a number")))?;
        let window_size: usize = window
            .parse()
            .map_err(|_| bad(format!("window `{window}` is not a number")))?;

        let parse_bits = |s: &str| -> Option<Vec<bool>> {
            s.chars()
                .map(|c| match c {
                    '0' => Some(false),
                    '1' => Some(true),
                    _ => None,
                })
                .collect()
        };
        let actions = parse_bits(actions).ok_or_else(|| bad("actions must be 0/1 digits".into()))?;
        if actions.len() != catalog.len() {
            return Err(Error::DimMismatch {
                what: "manifest action bits",
                expected: catalog.len(),
                found: actions.len(),
            });
        }
        let flags = parse_bits(categories)
            .filter(|f| f.len() == 3)
            .ok_or_else(|| bad("categories must be three 0/1 digits".into()))?;
        let categories = CategoryFlags {
            panning: flags[0],
            navigation: flags[1],
            weapon: flags[2],
        };
        if categories != categorize(&actions, catalog) {
            return Err(bad("category flags disagree with the action bits".into()));
        }
        if caption != semantic_action_mapper(&actions, catalog) {
            return Err(bad(format!("caption `{caption}` disagrees with the action bits")));
        }

        out.push(WindowSample {
            sample_id: sample_id.to_string(),
            game_id: game_id.to_string(),
            session_id: session_id.to_string(),
            start_frame,
            window_size,
            actions,
            caption: caption.to_string(),
            categories,
        });
    }
    Ok(out)
}
