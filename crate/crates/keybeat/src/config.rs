//! Analysis configuration.
//!
//! Defaults reproduce the standard parameter set (top-10 bigrams, 1000 ms
//! cutoff, 5-minute windows with 2.5-minute overlap, 20% ectopic tolerance)
//! without any flags. A flat `key = value` config file can override any
//! field, and the CLI exposes a flag per key.

use std::collections::BTreeSet;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hrv::{DEFAULT_MALIK_TOLERANCE, DEFAULT_MIN_INTERVALS};
use crate::ingest::DEFAULT_RR_BAND;
use crate::keydyn::{
    default_bigram_set, Bigram, NonLetterPolicy, DEFAULT_CUTOFF_MS, DEFAULT_GAP_THRESHOLD_MS,
};
use crate::window::{DEFAULT_STEP_MS, DEFAULT_WINDOW_MS};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub bigrams: Vec<Bigram>,
    pub cutoff_ms: i64,
    pub window_ms: i64,
    pub step_ms: i64,
    pub gap_threshold_ms: i64,
    pub malik_tolerance: f64,
    pub min_intervals: usize,
    pub excluded_bigrams: BTreeSet<Bigram>,
    /// Anchor for the first RR interval (epoch ms).
    pub rr_start_ms: i64,
    pub rr_plausible_min_ms: f64,
    pub rr_plausible_max_ms: f64,
    /// Keep whole-episode windows from episodes shorter than one window.
    pub include_short_windows: bool,
    pub non_letter_policy: NonLetterPolicy,
    /// Error on keycodes missing from the keymap instead of dropping them.
    pub strict_keymap: bool,
    pub out_dir: PathBuf,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bigrams: default_bigram_set(),
            cutoff_ms: DEFAULT_CUTOFF_MS,
            window_ms: DEFAULT_WINDOW_MS,
            step_ms: DEFAULT_STEP_MS,
            gap_threshold_ms: DEFAULT_GAP_THRESHOLD_MS,
            malik_tolerance: DEFAULT_MALIK_TOLERANCE,
            min_intervals: DEFAULT_MIN_INTERVALS,
            excluded_bigrams: BTreeSet::new(),
            rr_start_ms: 0,
            rr_plausible_min_ms: DEFAULT_RR_BAND.0,
            rr_plausible_max_ms: DEFAULT_RR_BAND.1,
            include_short_windows: true,
            non_letter_policy: NonLetterPolicy::Break,
            strict_keymap: false,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl AnalysisConfig {
    /// Load defaults overridden by a config file.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut config = AnalysisConfig::default();
        for (key, value, line) in parse_kv(reader)? {
            config.set(&key, &value).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {line}: {msg}")),
                other => other,
            })?;
        }
        Ok(config)
    }

    /// Apply one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "bigrams" => self.bigrams = parse_bigram_list(value)?,
            "cutoff_ms" => self.cutoff_ms = parse_num(key, value)?,
            "window_ms" => self.window_ms = parse_num(key, value)?,
            "step_ms" => self.step_ms = parse_num(key, value)?,
            "gap_threshold_ms" => self.gap_threshold_ms = parse_num(key, value)?,
            "malik_tolerance" => self.malik_tolerance = parse_num(key, value)?,
            "min_intervals" => self.min_intervals = parse_num(key, value)?,
            "excluded_bigrams" => {
                self.excluded_bigrams = parse_bigram_list(value)?.into_iter().collect()
            }
            "rr_start_ms" => self.rr_start_ms = parse_num(key, value)?,
            "rr_plausible_min_ms" => self.rr_plausible_min_ms = parse_num(key, value)?,
            "rr_plausible_max_ms" => self.rr_plausible_max_ms = parse_num(key, value)?,
            "include_short_windows" => self.include_short_windows = parse_bool(key, value)?,
            "non_letter_policy" => self.non_letter_policy = value.parse()?,
            "strict_keymap" => self.strict_keymap = parse_bool(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.bigrams.is_empty() {
            return Err(Error::Config("bigrams: empty set".into()));
        }
        if self.cutoff_ms <= 0 {
            return Err(Error::Config(format!(
                "cutoff_ms must be positive, got {}",
                self.cutoff_ms
            )));
        }
        if !(self.window_ms > self.step_ms && self.step_ms > 0) {
            return Err(Error::Config(format!(
                "need window_ms > step_ms > 0, got window_ms={} step_ms={}",
                self.window_ms, self.step_ms
            )));
        }
        if self.gap_threshold_ms <= 0 {
            return Err(Error::Config("gap_threshold_ms must be positive".into()));
        }
        if !(self.malik_tolerance > 0.0 && self.malik_tolerance < 1.0) {
            return Err(Error::Config(format!(
                "malik_tolerance must be in (0, 1), got {}",
                self.malik_tolerance
            )));
        }
        if self.min_intervals < 2 {
            return Err(Error::Config("min_intervals must be at least 2".into()));
        }
        if !(self.rr_plausible_min_ms > 0.0 && self.rr_plausible_min_ms < self.rr_plausible_max_ms)
        {
            return Err(Error::Config("invalid RR plausibility band".into()));
        }
        let set: BTreeSet<Bigram> = self.bigrams.iter().copied().collect();
        for excluded in &self.excluded_bigrams {
            if !set.contains(excluded) {
                return Err(Error::Config(format!(
                    "excluded_bigrams: {excluded} is not in the configured bigram set"
                )));
            }
        }
        if !self.excluded_bigrams.is_empty() && self.excluded_bigrams.len() >= set.len() {
            return Err(Error::Config(
                "excluded_bigrams: excluding every configured bigram".into(),
            ));
        }
        Ok(())
    }

    pub fn bigram_set(&self) -> BTreeSet<Bigram> {
        self.bigrams.iter().copied().collect()
    }

    pub fn rr_band(&self) -> (f64, f64) {
        (self.rr_plausible_min_ms, self.rr_plausible_max_ms)
    }
}

/// Parse a flat `key = value` file: one pair per line, `#` comments and
/// blank lines ignored. Returns (key, value, line-number) triples.
pub(crate) fn parse_kv(reader: impl BufRead) -> Result<Vec<(String, String, usize)>> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, format!("expected `key = value`, got {line:?}")))?;
        pairs.push((key.trim().to_string(), value.trim().to_string(), lineno));
    }
    Ok(pairs)
}

fn parse_bigram_list(value: &str) -> Result<Vec<Bigram>> {
    let value = value.trim();
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|part| part.parse()).collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{key}: invalid value {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: invalid boolean {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn defaults_reproduce_standard_parameters() {
        let config = AnalysisConfig::default();
        assert_eq!(config.bigrams, default_bigram_set());
        assert_eq!(config.cutoff_ms, 1000);
        assert_eq!(config.window_ms, 300_000);
        assert_eq!(config.step_ms, 150_000);
        assert_eq!(config.gap_threshold_ms, 300_000);
        assert_eq!(config.malik_tolerance, 0.2);
        assert_eq!(config.min_intervals, 30);
        assert!(config.excluded_bigrams.is_empty());
        config.validate().unwrap();
    }

    #[test]
    fn file_overrides_and_comments() {
        let text = "# comment\n\ncutoff_ms = 800\nexcluded_bigrams = RE,TH\nstrict_keymap = true\n";
        let config = AnalysisConfig::from_reader(Cursor::new(text)).unwrap();
        assert_eq!(config.cutoff_ms, 800);
        assert_eq!(config.excluded_bigrams.len(), 2);
        assert!(config.strict_keymap);
        config.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_usage_error() {
        let err = AnalysisConfig::from_reader(Cursor::new("no_such_key = 1\n")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn invalid_windowing_rejected() {
        let mut config = AnalysisConfig::default();
        config.step_ms = config.window_ms;
        assert!(config.validate().is_err());
    }

    #[test]
    fn exclusion_must_stay_inside_set() {
        let mut config = AnalysisConfig {
            excluded_bigrams: ["QU".parse().unwrap()].into(),
            ..AnalysisConfig::default()
        };
        assert!(config.validate().is_err());

        config.excluded_bigrams = default_bigram_set().into_iter().collect();
        assert!(config.validate().is_err());
    }

    #[test]
    fn tolerance_bounds() {
        let mut config = AnalysisConfig {
            malik_tolerance: 1.0,
            ..AnalysisConfig::default()
        };
        assert!(config.validate().is_err());
        config.malik_tolerance = 0.0;
        assert!(config.validate().is_err());
    }
}
