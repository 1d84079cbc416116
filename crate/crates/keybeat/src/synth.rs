//! Synthetic session generation.
//!
//! Generates a keystroke log and an RR recording coupled through a shared
//! stress signal: stress stretches bigram latencies and suppresses RR
//! variability. With the coupling gains at zero the two streams are
//! independent, which makes generated sessions a controllable end-to-end
//! oracle for the analysis pipeline.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

use crate::config::parse_kv;
use crate::error::{Error, Result};
use crate::ingest::{KeyEvent, RrSample, RrSeries, DEFAULT_RR_BAND};
use crate::keydyn::{default_bigram_set, Bigram};
use crate::window::{anchors_for_span, DEFAULT_STEP_MS, DEFAULT_WINDOW_MS};

/// Stress levels are piecewise constant over 5-minute blocks so ground
/// truth aligns exactly with the analysis windows.
pub const STRESS_BLOCK_MS: i64 = 300_000;

fn spec_err(field: &str, reason: impl Into<String>) -> Error {
    Error::SessionSpec {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// A piecewise-constant stress level in [0, 1]. The block sequence repeats
/// cyclically over the session.
#[derive(Debug, Clone, PartialEq)]
pub struct StressSignal {
    blocks: Vec<f64>,
}

impl StressSignal {
    pub fn new(blocks: Vec<f64>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(spec_err("stress_blocks", "empty block list"));
        }
        for &level in &blocks {
            if !(0.0..=1.0).contains(&level) {
                return Err(spec_err(
                    "stress_blocks",
                    format!("level {level} outside [0, 1]"),
                ));
            }
        }
        Ok(StressSignal { blocks })
    }

    pub fn constant(level: f64) -> Result<Self> {
        Self::new(vec![level])
    }

    /// Alternating 0/1 blocks.
    pub fn alternating() -> Self {
        StressSignal {
            blocks: vec![0.0, 1.0],
        }
    }

    /// Stress level at `rel_ms` milliseconds into the session.
    pub fn level_at(&self, rel_ms: i64) -> f64 {
        let block = (rel_ms.max(0) / STRESS_BLOCK_MS) as usize % self.blocks.len();
        self.blocks[block]
    }

    /// Time-weighted mean stress over `[rel_start, rel_start + duration)`.
    pub fn window_mean(&self, rel_start: i64, duration_ms: i64) -> f64 {
        if duration_ms <= 0 {
            return self.level_at(rel_start);
        }
        let mut t = rel_start;
        let end = rel_start + duration_ms;
        let mut weighted = 0.0;
        while t < end {
            let block_end = (t / STRESS_BLOCK_MS + 1) * STRESS_BLOCK_MS;
            let span_end = block_end.min(end);
            weighted += self.level_at(t) * (span_end - t) as f64;
            t = span_end;
        }
        weighted / duration_ms as f64
    }
}

/// Parameters for one synthetic session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSpec {
    pub duration_ms: i64,
    /// Epoch anchor of the session start; also the RR anchor to pass to the
    /// analysis side.
    pub start_ms: i64,
    /// Relative frequency per bigram; must sum to 1.
    pub bigram_frequencies: BTreeMap<Bigram, f64>,
    /// Unstressed mean latency per bigram.
    pub base_latency_ms: BTreeMap<Bigram, f64>,
    pub latency_jitter_ms: f64,
    pub base_rr_ms: f64,
    pub base_sdnn_ms: f64,
    pub stress: StressSignal,
    /// Gain multiplying latencies under stress.
    pub coupling_latency: f64,
    /// Gain suppressing RR variability under stress.
    pub coupling_hrv: f64,
    /// Mean think-gap between bigrams; keep it above the latency cutoff so
    /// consecutive bigrams never pair up across the gap.
    pub bigram_gap_ms: f64,
    pub rng_seed: u64,
}

impl Default for SessionSpec {
    fn default() -> Self {
        let bigrams = default_bigram_set();
        let freq = 1.0 / bigrams.len() as f64;
        let base_latency: BTreeMap<Bigram, f64> = bigrams
            .iter()
            .enumerate()
            .map(|(i, &b)| (b, 110.0 + 10.0 * i as f64))
            .collect();
        SessionSpec {
            duration_ms: 1_800_000,
            start_ms: 1_600_000_000_000,
            bigram_frequencies: bigrams.iter().map(|&b| (b, freq)).collect(),
            base_latency_ms: base_latency,
            latency_jitter_ms: 15.0,
            base_rr_ms: 800.0,
            base_sdnn_ms: 50.0,
            stress: StressSignal::constant(0.0).expect("valid constant"),
            coupling_latency: 0.0,
            coupling_hrv: 0.0,
            bigram_gap_ms: 1500.0,
            rng_seed: 42,
        }
    }
}

impl SessionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.duration_ms < STRESS_BLOCK_MS {
            return Err(spec_err(
                "duration_ms",
                format!(
                    "must be at least {STRESS_BLOCK_MS}, got {}",
                    self.duration_ms
                ),
            ));
        }
        if self.start_ms <= 0 {
            return Err(spec_err("start_ms", "must be positive"));
        }
        if self.bigram_frequencies.is_empty() {
            return Err(spec_err("bigram_frequencies", "empty"));
        }
        let sum: f64 = self.bigram_frequencies.values().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(spec_err(
                "bigram_frequencies",
                format!("frequencies sum to {sum}, expected 1"),
            ));
        }
        for (bigram, &freq) in &self.bigram_frequencies {
            if !(0.0..=1.0).contains(&freq) {
                return Err(spec_err(
                    "bigram_frequencies",
                    format!("{bigram} has frequency {freq}"),
                ));
            }
            if freq > 0.0 {
                match self.base_latency_ms.get(bigram) {
                    Some(&lat) if lat > 0.0 => {}
                    Some(&lat) => {
                        return Err(spec_err(
                            "base_latency_ms",
                            format!("{bigram} has non-positive latency {lat}"),
                        ))
                    }
                    None => {
                        return Err(spec_err(
                            "base_latency_ms",
                            format!("missing latency for {bigram}"),
                        ))
                    }
                }
            }
        }
        if self.latency_jitter_ms < 0.0 {
            return Err(spec_err("latency_jitter_ms", "must be non-negative"));
        }
        if self.base_rr_ms < DEFAULT_RR_BAND.0 || self.base_rr_ms > DEFAULT_RR_BAND.1 {
            return Err(spec_err(
                "base_rr_ms",
                format!(
                    "must lie in the plausibility band [{}, {}]",
                    DEFAULT_RR_BAND.0, DEFAULT_RR_BAND.1
                ),
            ));
        }
        if self.base_sdnn_ms < 0.0 {
            return Err(spec_err("base_sdnn_ms", "must be non-negative"));
        }
        if self.coupling_latency < 0.0 {
            return Err(spec_err("coupling_latency", "must be non-negative"));
        }
        if self.coupling_hrv < 0.0 {
            return Err(spec_err("coupling_hrv", "must be non-negative"));
        }
        if self.bigram_gap_ms <= 0.0 {
            return Err(spec_err("bigram_gap_ms", "must be positive"));
        }
        Ok(())
    }

    /// Parse a flat `key = value` spec file; unset keys keep their defaults.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut spec = SessionSpec::default();
        for (key, value, line) in parse_kv(reader)? {
            spec.set(&key, &value).map_err(|e| match e {
                Error::SessionSpec { field, reason } => Error::SessionSpec {
                    field,
                    reason: format!("line {line}: {reason}"),
                },
                other => other,
            })?;
        }
        Ok(spec)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::from_reader(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "duration_ms" => self.duration_ms = num(key, value)?,
            "start_ms" => self.start_ms = num(key, value)?,
            "bigram_frequencies" => self.bigram_frequencies = bigram_map(key, value)?,
            "base_latency_ms" => self.base_latency_ms = bigram_map(key, value)?,
            "latency_jitter_ms" => self.latency_jitter_ms = num(key, value)?,
            "base_rr_ms" => self.base_rr_ms = num(key, value)?,
            "base_sdnn_ms" => self.base_sdnn_ms = num(key, value)?,
            "stress_blocks" => {
                let levels: Vec<f64> = value
                    .split(',')
                    .map(|part| num::<f64>(key, part))
                    .collect::<Result<_>>()?;
                self.stress = StressSignal::new(levels)?;
            }
            "coupling_latency" => self.coupling_latency = num(key, value)?,
            "coupling_hrv" => self.coupling_hrv = num(key, value)?,
            "bigram_gap_ms" => self.bigram_gap_ms = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            other => return Err(spec_err(other, "unknown key")),
        }
        Ok(())
    }
}

fn num<T: std::str::FromStr>(field: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| spec_err(field, format!("invalid value {value:?}")))
}

/// Parse `TH:0.2,HE:0.1,...` into a bigram map.
fn bigram_map(field: &str, value: &str) -> Result<BTreeMap<Bigram, f64>> {
    let mut map = BTreeMap::new();
    for part in value.split(',') {
        let (bigram, v) = part
            .split_once(':')
            .ok_or_else(|| spec_err(field, format!("expected `BG:value`, got {part:?}")))?;
        let bigram: Bigram = bigram
            .parse()
            .map_err(|_| spec_err(field, format!("invalid bigram {bigram:?}")))?;
        map.insert(bigram, num(field, v)?);
    }
    Ok(map)
}

/// Stress level of one canonical 5-minute analysis window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruthWindow {
    pub start_ms: i64,
    pub stress: f64,
}

/// A generated session.
#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub key_events: Vec<KeyEvent>,
    pub rr: RrSeries,
    /// Mean stress per canonical overlapping window over the session span.
    pub ground_truth: Vec<GroundTruthWindow>,
}

/// Generate a session. Deterministic for a fixed `rng_seed`.
///
/// Bigram latencies are drawn from Normal(base × (1 + coupling_latency ×
/// stress), jitter) resampled to stay positive; RR intervals from
/// Normal(base_rr, base_sdnn × (1 − coupling_hrv × stress)) resampled into
/// the plausibility band.
pub fn generate(spec: &SessionSpec) -> Result<Generated> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);

    let key_events = generate_keystrokes(spec, &mut rng)?;
    let rr = generate_rr(spec, &mut rng);
    let ground_truth = ground_truth_windows(spec);

    Ok(Generated {
        key_events,
        rr,
        ground_truth,
    })
}

fn generate_keystrokes(spec: &SessionSpec, rng: &mut ChaCha8Rng) -> Result<Vec<KeyEvent>> {
    let bigrams: Vec<Bigram> = spec.bigram_frequencies.keys().copied().collect();
    let weights: Vec<f64> = spec.bigram_frequencies.values().copied().collect();
    let pick =
        WeightedIndex::new(&weights).map_err(|e| spec_err("bigram_frequencies", e.to_string()))?;

    let end = (spec.start_ms + spec.duration_ms) as f64;
    let mut events = Vec::new();
    let mut cursor = spec.start_ms as f64;

    loop {
        let bigram = bigrams[pick.sample(rng)];
        let rel = cursor as i64 - spec.start_ms;
        let stress = spec.stress.level_at(rel);
        let mean = spec.base_latency_ms[&bigram] * (1.0 + spec.coupling_latency * stress);
        let latency = draw_positive(rng, mean, spec.latency_jitter_ms);
        if cursor + latency > end {
            break;
        }
        let chars: Vec<char> = bigram.as_str().chars().collect();
        events.push(KeyEvent::new(cursor.round() as i64, chars[0].to_string()));
        events.push(KeyEvent::new(
            (cursor + latency).round() as i64,
            chars[1].to_string(),
        ));
        let gap = rng.random_range(spec.bigram_gap_ms..2.0 * spec.bigram_gap_ms);
        cursor += latency + gap;
        if cursor > end {
            break;
        }
    }
    Ok(events)
}

fn draw_positive(rng: &mut ChaCha8Rng, mean: f64, jitter: f64) -> f64 {
    if jitter <= 0.0 {
        return mean;
    }
    let normal = Normal::new(mean, jitter).expect("finite parameters");
    for _ in 0..10_000 {
        let v = normal.sample(rng);
        if v > 0.0 {
            return v;
        }
    }
    mean.max(1.0)
}

fn generate_rr(spec: &SessionSpec, rng: &mut ChaCha8Rng) -> RrSeries {
    let mut samples = Vec::new();
    let mut elapsed = 0.0f64;
    loop {
        let stress = spec.stress.level_at(elapsed as i64);
        let sigma = spec.base_sdnn_ms * (1.0 - spec.coupling_hrv * stress);
        let rr = draw_in_band(rng, spec.base_rr_ms, sigma, DEFAULT_RR_BAND);
        elapsed += rr;
        if elapsed > spec.duration_ms as f64 {
            break;
        }
        samples.push(RrSample {
            end_ms: spec.start_ms + elapsed.round() as i64,
            rr_ms: rr,
        });
    }
    RrSeries { samples }
}

fn draw_in_band(rng: &mut ChaCha8Rng, mean: f64, sigma: f64, band: (f64, f64)) -> f64 {
    if sigma <= 0.0 {
        return mean;
    }
    let normal = Normal::new(mean, sigma).expect("finite parameters");
    for _ in 0..10_000 {
        let v = normal.sample(rng);
        if v >= band.0 && v <= band.1 {
            return v;
        }
    }
    mean
}

fn ground_truth_windows(spec: &SessionSpec) -> Vec<GroundTruthWindow> {
    anchors_for_span(
        spec.start_ms,
        spec.start_ms + spec.duration_ms,
        DEFAULT_WINDOW_MS,
        DEFAULT_STEP_MS,
    )
    .into_iter()
    .map(|anchor| GroundTruthWindow {
        start_ms: anchor.start_ms,
        stress: spec
            .stress
            .window_mean(anchor.start_ms - spec.start_ms, anchor.duration_ms),
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_zero_jitter_latencies_equal_base() {
        let mut spec = SessionSpec {
            latency_jitter_ms: 0.0,
            duration_ms: 600_000,
            ..SessionSpec::default()
        };
        spec.bigram_frequencies = [("TH".parse().unwrap(), 1.0)].into();
        spec.base_latency_ms = [("TH".parse().unwrap(), 120.0)].into();
        let generated = generate(&spec).unwrap();
        assert!(!generated.key_events.is_empty());
        for pair in generated.key_events.chunks(2) {
            assert_eq!(pair[1].timestamp_ms - pair[0].timestamp_ms, 120);
        }
    }

    #[test]
    fn stress_scales_mean_latency() {
        // stress 0 vs stress 1 with coupling 0.5: sample-mean ratio ~ 1.5
        let base = SessionSpec {
            duration_ms: 40_000_000, // ~13k instances at ~3s spacing
            coupling_latency: 0.5,
            latency_jitter_ms: 15.0,
            ..SessionSpec::default()
        };
        let calm = SessionSpec {
            stress: StressSignal::constant(0.0).unwrap(),
            ..base.clone()
        };
        let stressed = SessionSpec {
            stress: StressSignal::constant(1.0).unwrap(),
            rng_seed: 43,
            ..base
        };

        let mean_latency = |spec: &SessionSpec| {
            let generated = generate(spec).unwrap();
            let lats: Vec<f64> = generated
                .key_events
                .chunks(2)
                .map(|p| (p[1].timestamp_ms - p[0].timestamp_ms) as f64)
                .collect();
            assert!(lats.len() >= 10_000, "got {} instances", lats.len());
            lats.iter().sum::<f64>() / lats.len() as f64
        };

        let ratio = mean_latency(&stressed) / mean_latency(&calm);
        assert!((ratio - 1.5).abs() / 1.5 < 0.02, "ratio {ratio}");
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let spec = SessionSpec {
            coupling_latency: 0.5,
            coupling_hrv: 0.5,
            stress: StressSignal::alternating(),
            ..SessionSpec::default()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seed_differs() {
        let spec = SessionSpec::default();
        let other = SessionSpec {
            rng_seed: 7,
            ..spec.clone()
        };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn frequencies_must_sum_to_one() {
        let mut spec = SessionSpec::default();
        spec.bigram_frequencies.insert("TH".parse().unwrap(), 0.5);
        let err = generate(&spec).unwrap_err();
        match err {
            Error::SessionSpec { field, .. } => assert_eq!(field, "bigram_frequencies"),
            other => panic!("expected session spec error, got {other:?}"),
        }
    }

    #[test]
    fn rr_stays_in_band_and_ordered() {
        let spec = SessionSpec {
            base_sdnn_ms: 120.0,
            duration_ms: 3_600_000,
            ..SessionSpec::default()
        };
        let generated = generate(&spec).unwrap();
        for pair in generated.rr.samples.windows(2) {
            assert!(pair[0].end_ms < pair[1].end_ms);
        }
        for s in &generated.rr.samples {
            assert!(s.rr_ms >= DEFAULT_RR_BAND.0 && s.rr_ms <= DEFAULT_RR_BAND.1);
        }
    }

    #[test]
    fn ground_truth_follows_block_pattern() {
        let spec = SessionSpec {
            duration_ms: 1_200_000, // four blocks
            stress: StressSignal::alternating(),
            ..SessionSpec::default()
        };
        let generated = generate(&spec).unwrap();
        let stresses: Vec<f64> = generated.ground_truth.iter().map(|g| g.stress).collect();
        // anchors every 2.5 min: aligned windows see 0 or 1, straddlers 0.5
        assert_eq!(stresses, vec![0.0, 0.5, 1.0, 0.5, 0.0, 0.5, 1.0]);
        assert_eq!(generated.ground_truth[0].start_ms, spec.start_ms);
    }

    #[test]
    fn stress_window_mean_is_time_weighted() {
        let signal = StressSignal::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(signal.window_mean(0, STRESS_BLOCK_MS), 0.0);
        assert_eq!(signal.window_mean(STRESS_BLOCK_MS, STRESS_BLOCK_MS), 1.0);
        let straddle = signal.window_mean(STRESS_BLOCK_MS / 2, STRESS_BLOCK_MS);
        assert!((straddle - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spec_file_round_trip() {
        let text = "\
duration_ms = 900000
start_ms = 1000000
rng_seed = 7
bigram_frequencies = TH:0.6,HE:0.4
base_latency_ms = TH:120,HE:150
latency_jitter_ms = 10
base_rr_ms = 850
base_sdnn_ms = 40
stress_blocks = 0,1
coupling_latency = 0.5
coupling_hrv = 0.25
bigram_gap_ms = 1800
";
        let spec = SessionSpec::from_reader(std::io::Cursor::new(text)).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec.duration_ms, 900_000);
        assert_eq!(spec.rng_seed, 7);
        assert_eq!(spec.stress, StressSignal::new(vec![0.0, 1.0]).unwrap());
        assert_eq!(spec.bigram_frequencies.len(), 2);
    }

    #[test]
    fn unknown_spec_key_names_field() {
        let err = SessionSpec::from_reader(std::io::Cursor::new("wibble = 3\n")).unwrap_err();
        match err {
            Error::SessionSpec { field, .. } => assert_eq!(field, "wibble"),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
