//! Parsing of keystroke event logs and RR-interval recordings.
//!
//! Two input formats are understood, both plain UTF-8 text:
//!
//! * keystroke log — one `timestamp_ms,keycode` record per line, no header.
//!   A keymap (`keycode,symbol` per line) translates platform keycodes to
//!   normalized symbols; [`Keymap::ascii`] covers plain ASCII codes.
//! * RR recording — one beat-to-beat interval in milliseconds per line.
//!   Absolute time is anchored by a caller-supplied `start_ms`.
//!
//! All parsing is deterministic and allocation-light; parsed series can be
//! written back out with [`write_keystrokes`] / [`write_rr`] and re-parsed
//! to an identical result.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Mapped symbols that are treated as modifier keys and dropped from the
/// event stream.
const MODIFIER_SYMBOLS: &[&str] = &[
    "SHIFT", "LSHIFT", "RSHIFT", "CTRL", "LCTRL", "RCTRL", "CONTROL", "ALT", "LALT", "RALT",
    "ALTGR", "META", "CMD", "COMMAND", "SUPER", "WIN", "FN", "CAPSLOCK", "CAPS",
];

/// Plausibility band for RR intervals, in ms (30–200 bpm).
pub const DEFAULT_RR_BAND: (f64, f64) = (300.0, 2000.0);

/// A single key press.
///
/// `symbol` is either one normalized uppercase character ("T") or a named
/// key identifier ("SPACE").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyEvent {
    /// Milliseconds since the Unix epoch.
    pub timestamp_ms: i64,
    pub symbol: String,
}

impl KeyEvent {
    pub fn new(timestamp_ms: i64, symbol: impl Into<String>) -> Self {
        KeyEvent {
            timestamp_ms,
            symbol: symbol.into(),
        }
    }

    /// True if this event is a single letter (bigram material).
    pub fn is_letter(&self) -> bool {
        let mut chars = self.symbol.chars();
        matches!((chars.next(), chars.next()), (Some(c), None) if c.is_ascii_alphabetic())
    }
}

/// Translation table from numeric keycodes to symbols.
///
/// Symbols are normalized on insertion: single letters are uppercased,
/// named keys ("space") are uppercased wholesale.
#[derive(Debug, Clone, Default)]
pub struct Keymap {
    forward: BTreeMap<u32, String>,
    reverse: BTreeMap<String, u32>,
}

impl Keymap {
    /// Keymap where every keycode is its ASCII code: 65 → "A", 97 → "A",
    /// 32 → "SPACE", 9 → "TAB", 13 → "ENTER", 8 → "BACKSPACE".
    pub fn ascii() -> Self {
        let mut map = Keymap::default();
        for code in b'A'..=b'Z' {
            map.insert(code as u32, &(code as char).to_string());
        }
        for code in b'a'..=b'z' {
            map.insert(code as u32, &(code as char).to_string());
        }
        for code in 33..=126u32 {
            if !map.forward.contains_key(&code) {
                map.insert(code, &char::from_u32(code).unwrap().to_string());
            }
        }
        map.insert(32, "SPACE");
        map.insert(9, "TAB");
        map.insert(13, "ENTER");
        map.insert(10, "ENTER");
        map.insert(8, "BACKSPACE");
        map
    }

    fn insert(&mut self, code: u32, symbol: &str) {
        let normalized = normalize_symbol(symbol);
        self.forward.insert(code, normalized.clone());
        self.reverse.entry(normalized).or_insert(code);
    }

    /// Parse a `keycode,symbol` file. Duplicate keycodes are an error.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut map = Keymap::default();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (code_str, symbol) = line.split_once(',').ok_or_else(|| {
                Error::parse(lineno, format!("expected `keycode,symbol`, got {line:?}"))
            })?;
            let code: u32 = code_str
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid keycode {code_str:?}")))?;
            let symbol = symbol.trim();
            if symbol.is_empty() {
                return Err(Error::parse(lineno, "empty symbol"));
            }
            if map.forward.contains_key(&code) {
                return Err(Error::parse(lineno, format!("duplicate keycode {code}")));
            }
            map.insert(code, symbol);
        }
        Ok(map)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    pub fn symbol(&self, code: u32) -> Option<&str> {
        self.forward.get(&code).map(String::as_str)
    }

    /// Reverse lookup used when serializing events back to keycodes.
    pub fn code(&self, symbol: &str) -> Option<u32> {
        self.reverse.get(&normalize_symbol(symbol)).copied()
    }
}

fn normalize_symbol(symbol: &str) -> String {
    symbol.trim().to_ascii_uppercase()
}

fn is_modifier(symbol: &str) -> bool {
    MODIFIER_SYMBOLS.contains(&symbol)
}

/// Outcome of [`parse_keystrokes`]: the sorted events plus drop counters.
#[derive(Debug, Clone)]
pub struct KeystrokeParse {
    pub events: Vec<KeyEvent>,
    /// Records dropped because their keycode was not in the keymap
    /// (non-strict mode only).
    pub unmapped_dropped: usize,
    /// Records dropped because they mapped to a modifier key.
    pub modifiers_dropped: usize,
}

/// Parse a keystroke log (`timestamp_ms,keycode` per line).
///
/// Events are returned sorted by timestamp. In strict mode an unmapped
/// keycode is an error; otherwise it is dropped and counted.
pub fn parse_keystrokes(
    reader: impl BufRead,
    keymap: &Keymap,
    strict: bool,
) -> Result<KeystrokeParse> {
    let mut events = Vec::new();
    let mut unmapped_dropped = 0;
    let mut modifiers_dropped = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (ts_str, code_str) = line.split_once(',').ok_or_else(|| {
            Error::parse(
                lineno,
                format!("expected `timestamp_ms,keycode`, got {line:?}"),
            )
        })?;
        let timestamp_ms: i64 = ts_str
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid timestamp {ts_str:?}")))?;
        if timestamp_ms <= 0 {
            return Err(Error::parse(
                lineno,
                format!("non-positive timestamp {timestamp_ms}"),
            ));
        }
        let code: u32 = code_str
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid keycode {code_str:?}")))?;

        match keymap.symbol(code) {
            Some(symbol) if is_modifier(symbol) => modifiers_dropped += 1,
            Some(symbol) => events.push(KeyEvent::new(timestamp_ms, symbol)),
            None if strict => return Err(Error::UnmappedKeycode { code, line: lineno }),
            None => unmapped_dropped += 1,
        }
    }

    events.sort_by_key(|e| e.timestamp_ms);
    Ok(KeystrokeParse {
        events,
        unmapped_dropped,
        modifiers_dropped,
    })
}

/// Write events in the canonical `timestamp_ms,keycode` format.
///
/// Fails if a symbol has no keycode in the keymap.
pub fn write_keystrokes(
    mut writer: impl Write,
    events: &[KeyEvent],
    keymap: &Keymap,
) -> Result<()> {
    for event in events {
        let code = keymap
            .code(&event.symbol)
            .ok_or_else(|| Error::UnmappedSymbol(event.symbol.clone()))?;
        writeln!(writer, "{},{}", event.timestamp_ms, code).map_err(io_err)?;
    }
    Ok(())
}

/// One beat-to-beat interval and the absolute time of its ending beat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrSample {
    pub end_ms: i64,
    pub rr_ms: f64,
}

/// An ordered series of RR intervals.
///
/// End timestamps are strictly increasing and each consecutive pair differs
/// by the intervening interval up to ±1 ms of rounding.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RrSeries {
    pub samples: Vec<RrSample>,
}

impl RrSeries {
    /// Build a series from raw intervals, anchoring the first beat so that
    /// sample k ends at `start_ms` plus the rounded cumulative sum of the
    /// first k intervals. Intervals must be positive and finite.
    pub fn from_intervals(start_ms: i64, intervals: &[f64]) -> Result<Self> {
        let mut samples = Vec::with_capacity(intervals.len());
        let mut elapsed = 0.0;
        for (i, &rr) in intervals.iter().enumerate() {
            if !rr.is_finite() || rr <= 0.0 {
                return Err(Error::parse(i + 1, format!("non-positive interval {rr}")));
            }
            elapsed += rr;
            samples.push(RrSample {
                end_ms: start_ms + elapsed.round() as i64,
                rr_ms: rr,
            });
        }
        Ok(RrSeries { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Interval values without timestamps.
    pub fn intervals(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rr_ms).collect()
    }
}

/// Outcome of [`parse_rr`]: the series plus a count of implausible
/// intervals dropped before assembly.
#[derive(Debug, Clone)]
pub struct RrParse {
    pub series: RrSeries,
    pub dropped_implausible: usize,
}

/// Parse an RR file (one decimal interval in ms per line).
///
/// Intervals outside `band` are dropped with a counted warning before the
/// series is assembled, so timestamps are the cumulative sum of the kept
/// intervals only. Non-numeric or non-positive lines are errors.
pub fn parse_rr(reader: impl BufRead, start_ms: i64, band: (f64, f64)) -> Result<RrParse> {
    let mut kept = Vec::new();
    let mut dropped_implausible = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rr: f64 = line
            .parse()
            .map_err(|_| Error::parse(lineno, format!("invalid interval {line:?}")))?;
        if !rr.is_finite() || rr <= 0.0 {
            return Err(Error::parse(lineno, format!("non-positive interval {rr}")));
        }
        if rr < band.0 || rr > band.1 {
            dropped_implausible += 1;
            continue;
        }
        kept.push(rr);
    }

    Ok(RrParse {
        series: RrSeries::from_intervals(start_ms, &kept)?,
        dropped_implausible,
    })
}

/// Write a series in the canonical one-interval-per-line format.
pub fn write_rr(mut writer: impl Write, series: &RrSeries) -> Result<()> {
    for sample in &series.samples {
        writeln!(writer, "{}", sample.rr_ms).map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io {
        path: "<writer>".into(),
        source: e,
    }
}
