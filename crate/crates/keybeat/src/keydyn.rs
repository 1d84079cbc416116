//! Keystroke-dynamics feature extraction.
//!
//! Key events are segmented into typing episodes at inactivity gaps, bigram
//! latencies are extracted for a configured bigram set, and latencies are
//! aggregated per overlapping window. A whole-recording baseline gives each
//! window a dimensionless deviation ratio.
//!
//! Latency here is key-down to key-down (press-to-press): the capture format
//! records presses only, so no dwell information exists.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ingest::KeyEvent;
use crate::window::{anchors_for_span, WindowAnchor};

/// Default within-pair cutoff: characters typed more than 1000 ms apart do
/// not count as a bigram instance.
pub const DEFAULT_CUTOFF_MS: i64 = 1000;
/// Default inactivity gap starting a new typing episode: 5 minutes, equal to
/// the window length so no window spans a segmentation gap.
pub const DEFAULT_GAP_THRESHOLD_MS: i64 = 300_000;

/// An ordered pair of uppercase ASCII letters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bigram([u8; 2]);

impl Bigram {
    /// Build from two letters; normalizes to uppercase. Returns `None` for
    /// non-alphabetic input.
    pub fn new(first: char, second: char) -> Option<Self> {
        if first.is_ascii_alphabetic() && second.is_ascii_alphabetic() {
            Some(Bigram([
                first.to_ascii_uppercase() as u8,
                second.to_ascii_uppercase() as u8,
            ]))
        } else {
            None
        }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.0).expect("bigram bytes are ASCII")
    }
}

impl fmt::Display for Bigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Bigram {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next(), chars.next()) {
            (Some(a), Some(b), None) => {
                Bigram::new(a, b).ok_or_else(|| Error::Config(format!("invalid bigram {s:?}")))
            }
            _ => Err(Error::Config(format!("invalid bigram {s:?}"))),
        }
    }
}

impl Serialize for Bigram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Bigram {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The ten most frequent English bigrams, in frequency order.
pub fn default_bigram_set() -> Vec<Bigram> {
    ["TH", "HE", "IN", "ER", "AN", "RE", "ON", "AT", "EN", "ND"]
        .iter()
        .map(|s| s.parse().expect("static bigram"))
        .collect()
}

/// How non-letter events (space, punctuation, backspace) affect bigram
/// adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonLetterPolicy {
    /// A bigram must be two consecutively typed letters with nothing between.
    #[default]
    Break,
    /// Non-letter events are removed first, so letters separated only by
    /// them still pair up.
    PassThrough,
}

impl FromStr for NonLetterPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "break" => Ok(NonLetterPolicy::Break),
            "passthrough" | "pass-through" | "pass_through" => Ok(NonLetterPolicy::PassThrough),
            other => Err(Error::Config(format!(
                "invalid non_letter_policy {other:?} (expected `break` or `passthrough`)"
            ))),
        }
    }
}

/// A contiguous burst of keystrokes bounded by inactivity gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct TypingEpisode {
    pub id: usize,
    pub events: Vec<KeyEvent>,
    pub start_ms: i64,
    pub end_ms: i64,
}

impl TypingEpisode {
    pub fn duration_ms(&self) -> i64 {
        self.end_ms - self.start_ms
    }

    /// Window anchors for this episode (anchored at the episode start).
    pub fn window_anchors(&self, window_ms: i64, step_ms: i64) -> Vec<WindowAnchor> {
        anchors_for_span(self.start_ms, self.end_ms, window_ms, step_ms)
    }
}

/// Split sorted events into typing episodes: a gap of `gap_threshold_ms` or
/// more between consecutive events starts a new episode.
pub fn segment_episodes(events: &[KeyEvent], gap_threshold_ms: i64) -> Vec<TypingEpisode> {
    let mut episodes = Vec::new();
    let mut current: Vec<KeyEvent> = Vec::new();

    for event in events {
        if let Some(last) = current.last() {
            if event.timestamp_ms - last.timestamp_ms >= gap_threshold_ms {
                episodes.push(close_episode(episodes.len(), std::mem::take(&mut current)));
            }
        }
        current.push(event.clone());
    }
    if !current.is_empty() {
        episodes.push(close_episode(episodes.len(), current));
    }
    episodes
}

fn close_episode(id: usize, events: Vec<KeyEvent>) -> TypingEpisode {
    let start_ms = events.first().expect("non-empty episode").timestamp_ms;
    let end_ms = events.last().expect("non-empty episode").timestamp_ms;
    TypingEpisode {
        id,
        events,
        start_ms,
        end_ms,
    }
}

/// One timed occurrence of a configured bigram.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramInstance {
    pub bigram: Bigram,
    /// Press-to-press latency, in (0, cutoff].
    pub latency_ms: f64,
    /// Timestamp of the first character.
    pub onset_ms: i64,
}

/// Extract bigram instances from one episode.
///
/// Every adjacent pair of letter events whose symbols form a configured
/// bigram and whose latency lies in (0, cutoff] yields an instance. Pairs
/// overlap: "E","R","E" yields both ER and RE.
pub fn extract_bigram_instances(
    episode: &TypingEpisode,
    bigrams: &BTreeSet<Bigram>,
    cutoff_ms: i64,
    policy: NonLetterPolicy,
) -> Vec<BigramInstance> {
    let letters: Vec<&KeyEvent> = match policy {
        NonLetterPolicy::PassThrough => episode.events.iter().filter(|e| e.is_letter()).collect(),
        NonLetterPolicy::Break => episode.events.iter().collect(),
    };

    let mut instances = Vec::new();
    for pair in letters.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if !a.is_letter() || !b.is_letter() {
            continue;
        }
        let latency = b.timestamp_ms - a.timestamp_ms;
        if latency <= 0 || latency > cutoff_ms {
            continue;
        }
        let bigram = Bigram::new(
            a.symbol.chars().next().unwrap(),
            b.symbol.chars().next().unwrap(),
        )
        .expect("letter events");
        if bigrams.contains(&bigram) {
            instances.push(BigramInstance {
                bigram,
                latency_ms: latency as f64,
                onset_ms: a.timestamp_ms,
            });
        }
    }
    instances
}

/// Mean latency and instance count for one bigram within one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowBigramStat {
    pub mean_ms: f64,
    pub n: usize,
}

/// Per-window latency statistics. Only bigrams with at least one instance
/// appear; windows with no instances at all are discarded upstream.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyWindow {
    pub episode_id: usize,
    pub start_ms: i64,
    pub duration_ms: i64,
    /// True when the episode was shorter than a full window.
    pub short: bool,
    pub per_bigram: BTreeMap<Bigram, WindowBigramStat>,
}

impl LatencyWindow {
    pub fn n_instances(&self) -> usize {
        self.per_bigram.values().map(|s| s.n).sum()
    }

    pub fn mean_of(&self, bigram: Bigram) -> Option<f64> {
        self.per_bigram.get(&bigram).map(|s| s.mean_ms)
    }

    /// Number of distinct bigrams present.
    pub fn distinct_bigrams(&self) -> usize {
        self.per_bigram.len()
    }

    fn from_instances(
        episode_id: usize,
        anchor: WindowAnchor,
        instances: &[&BigramInstance],
    ) -> Option<Self> {
        if instances.is_empty() {
            return None;
        }
        let mut sums: BTreeMap<Bigram, (f64, usize)> = BTreeMap::new();
        for inst in instances {
            let entry = sums.entry(inst.bigram).or_insert((0.0, 0));
            entry.0 += inst.latency_ms;
            entry.1 += 1;
        }
        let per_bigram = sums
            .into_iter()
            .map(|(bigram, (sum, n))| {
                (
                    bigram,
                    WindowBigramStat {
                        mean_ms: sum / n as f64,
                        n,
                    },
                )
            })
            .collect();
        Some(LatencyWindow {
            episode_id,
            start_ms: anchor.start_ms,
            duration_ms: anchor.duration_ms,
            short: anchor.short,
            per_bigram,
        })
    }
}

/// Windowed latency statistics for one episode.
///
/// Windows are anchored at the episode start and advance by `step_ms`; an
/// episode shorter than one window yields a single whole-episode window
/// flagged short. Instances are binned by onset into `[start, start+duration)`
/// and empty windows are dropped.
pub fn window_latency_stats(
    episode: &TypingEpisode,
    bigrams: &BTreeSet<Bigram>,
    window_ms: i64,
    step_ms: i64,
    cutoff_ms: i64,
    policy: NonLetterPolicy,
) -> Vec<LatencyWindow> {
    let instances = extract_bigram_instances(episode, bigrams, cutoff_ms, policy);
    let anchors = episode.window_anchors(window_ms, step_ms);
    bin_instances(episode.id, &anchors, &instances)
}

/// Bin already-extracted instances into the given anchors. Exposed so the
/// pipeline can reuse one extraction pass for windows and baseline.
pub fn bin_instances(
    episode_id: usize,
    anchors: &[WindowAnchor],
    instances: &[BigramInstance],
) -> Vec<LatencyWindow> {
    anchors
        .iter()
        .filter_map(|&anchor| {
            let in_window: Vec<&BigramInstance> = instances
                .iter()
                .filter(|inst| anchor.contains(inst.onset_ms))
                .collect();
            LatencyWindow::from_instances(episode_id, anchor, &in_window)
        })
        .collect()
}

/// Whole-recording mean latency per bigram plus the grand mean across
/// bigrams.
#[derive(Debug, Clone, PartialEq)]
pub struct BigramBaseline {
    pub per_bigram_mean: BTreeMap<Bigram, f64>,
    /// Arithmetic mean of the per-bigram means (over bigrams present).
    pub grand_mean: f64,
}

impl BigramBaseline {
    /// Build directly from per-bigram means.
    pub fn from_means(per_bigram_mean: BTreeMap<Bigram, f64>) -> Result<Self> {
        if per_bigram_mean.is_empty() {
            return Err(Error::EmptyBaseline);
        }
        let grand_mean = per_bigram_mean.values().sum::<f64>() / per_bigram_mean.len() as f64;
        Ok(BigramBaseline {
            per_bigram_mean,
            grand_mean,
        })
    }

    /// Baseline with the given bigrams removed, grand mean recomputed.
    /// Removing every bigram present is an error.
    pub fn excluding(&self, excluded: &BTreeSet<Bigram>) -> Result<Self> {
        let remaining: BTreeMap<Bigram, f64> = self
            .per_bigram_mean
            .iter()
            .filter(|(b, _)| !excluded.contains(b))
            .map(|(&b, &m)| (b, m))
            .collect();
        if remaining.is_empty() {
            return Err(Error::EmptyBigramSet);
        }
        Self::from_means(remaining)
    }
}

/// Per-bigram mean latency over all instances of a recording.
pub fn bigram_baseline(instances: &[BigramInstance]) -> Result<BigramBaseline> {
    let mut sums: BTreeMap<Bigram, (f64, usize)> = BTreeMap::new();
    for inst in instances {
        let entry = sums.entry(inst.bigram).or_insert((0.0, 0));
        entry.0 += inst.latency_ms;
        entry.1 += 1;
    }
    BigramBaseline::from_means(
        sums.into_iter()
            .map(|(b, (sum, n))| (b, sum / n as f64))
            .collect(),
    )
}

/// A window's mean relative deviation from the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeystrokeDeviation {
    pub episode_id: usize,
    pub start_ms: i64,
    /// Mean over bigrams present in both window and baseline of
    /// `(window mean − baseline mean) / baseline mean`.
    pub deviation: f64,
}

/// Deviation ratio of one window against the baseline, averaged over the
/// bigrams they share.
pub fn keystroke_deviation(
    window: &LatencyWindow,
    baseline: &BigramBaseline,
) -> Result<KeystrokeDeviation> {
    let mut sum = 0.0;
    let mut shared = 0;
    for (bigram, stat) in &window.per_bigram {
        if let Some(&base) = baseline.per_bigram_mean.get(bigram) {
            sum += (stat.mean_ms - base) / base;
            shared += 1;
        }
    }
    if shared == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(KeystrokeDeviation {
        episode_id: window.episode_id,
        start_ms: window.start_ms,
        deviation: sum / shared as f64,
    })
}

/// Windows with the given bigrams removed, as if they never occurred.
/// Windows left empty are dropped; excluding every bigram present across
/// the input is an error.
pub fn exclude_bigrams(
    windows: &[LatencyWindow],
    excluded: &BTreeSet<Bigram>,
) -> Result<Vec<LatencyWindow>> {
    let present: BTreeSet<Bigram> = windows
        .iter()
        .flat_map(|w| w.per_bigram.keys().copied())
        .collect();
    if !present.is_empty() && present.iter().all(|b| excluded.contains(b)) {
        return Err(Error::EmptyBigramSet);
    }

    Ok(windows
        .iter()
        .filter_map(|w| {
            let per_bigram: BTreeMap<Bigram, WindowBigramStat> = w
                .per_bigram
                .iter()
                .filter(|(b, _)| !excluded.contains(b))
                .map(|(&b, &s)| (b, s))
                .collect();
            if per_bigram.is_empty() {
                None
            } else {
                Some(LatencyWindow {
                    per_bigram,
                    ..w.clone()
                })
            }
        })
        .collect())
}
