//! Alignment of keystroke-deviation windows with HRV windows and the
//! correlation statistics reported over the paired samples.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hrv::{HrvBaseline, HrvWindow};
use crate::keydyn::{Bigram, BigramInstance, KeystrokeDeviation, LatencyWindow};

/// Fewest paired samples accepted by the correlation functions.
pub const MIN_CORRELATION_N: usize = 3;
/// Reports with fewer pairs than this carry a low-confidence flag.
pub const LOW_CONFIDENCE_N: usize = 10;

/// One time-aligned (keystroke deviation, HRV) observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedSample {
    pub start_ms: i64,
    pub keystroke_deviation: f64,
    pub sdnn_ms: f64,
    /// `(sdnn_ms − baseline) / baseline`.
    pub hrv_deviation: f64,
}

/// Result of [`align`]: the inner join plus drop counts for the unmatched
/// windows on either side.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub pairs: Vec<PairedSample>,
    pub unmatched_keystroke: usize,
    pub unmatched_hrv: usize,
}

/// Inner join of keystroke deviations and HRV windows on `start_ms`.
///
/// Both sides must come from the same anchor grid, so a start time appears
/// at most once per side.
pub fn align(
    deviations: &[KeystrokeDeviation],
    hrv_windows: &[HrvWindow],
    hrv_baseline: &HrvBaseline,
) -> Result<Aligned> {
    if hrv_baseline.mean_sdnn_ms <= 0.0 {
        return Err(Error::Degenerate("zero HRV baseline".into()));
    }

    let mut by_start: BTreeMap<i64, &HrvWindow> = BTreeMap::new();
    for w in hrv_windows {
        if by_start.insert(w.start_ms, w).is_some() {
            return Err(Error::Degenerate(format!(
                "duplicate HRV window anchor at {}",
                w.start_ms
            )));
        }
    }

    let mut pairs = Vec::new();
    let mut unmatched_keystroke = 0;
    let mut seen = std::collections::BTreeSet::new();
    for dev in deviations {
        if !seen.insert(dev.start_ms) {
            return Err(Error::Degenerate(format!(
                "duplicate keystroke window anchor at {}",
                dev.start_ms
            )));
        }
        match by_start.get(&dev.start_ms) {
            Some(w) => pairs.push(PairedSample {
                start_ms: dev.start_ms,
                keystroke_deviation: dev.deviation,
                sdnn_ms: w.sdnn_ms,
                hrv_deviation: (w.sdnn_ms - hrv_baseline.mean_sdnn_ms) / hrv_baseline.mean_sdnn_ms,
            }),
            None => unmatched_keystroke += 1,
        }
    }
    let unmatched_hrv = hrv_windows.len() - pairs.len();
    Ok(Aligned {
        pairs,
        unmatched_keystroke,
        unmatched_hrv,
    })
}

fn check_pair_lengths(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < MIN_CORRELATION_N {
        return Err(Error::Degenerate(format!(
            "need at least {MIN_CORRELATION_N} samples, got {}",
            x.len()
        )));
    }
    Ok(())
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair_lengths(x, y)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;

    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::Degenerate("zero variance".into()));
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson on mid-ranked data (ties receive the
/// average of the ranks they span).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair_lengths(x, y)?;
    pearson(&rank_with_ties(x), &rank_with_ties(y))
}

/// 1-based ranks; tied values get their average rank.
fn rank_with_ties(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let avg_rank = (i + j + 1) as f64 / 2.0; // mean of ranks i+1 ..= j
        for &idx in &order[i..j] {
            ranks[idx] = avg_rank;
        }
        i = j;
    }
    ranks
}

/// Empirical CDF of one bigram's latencies: `(latency_ms, cumulative
/// fraction)` points sorted by latency, duplicates collapsed, ending at 1.0.
pub fn latency_cdf(instances: &[BigramInstance], bigram: Bigram) -> Result<Vec<(f64, f64)>> {
    let mut latencies: Vec<f64> = instances
        .iter()
        .filter(|i| i.bigram == bigram)
        .map(|i| i.latency_ms)
        .collect();
    if latencies.is_empty() {
        return Err(Error::Degenerate(format!("no instances of {bigram}")));
    }
    latencies.sort_by(f64::total_cmp);

    let n = latencies.len();
    let mut points = Vec::new();
    let mut seen = 0usize;
    let mut i = 0;
    while i < n {
        let value = latencies[i];
        let mut j = i;
        while j < n && latencies[j] == value {
            j += 1;
        }
        seen += j - i;
        points.push((value, seen as f64 / n as f64));
        i = j;
    }
    Ok(points)
}

/// Window-coverage statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coverage {
    /// Candidate windows across all episodes, empty ones included.
    pub total_windows: usize,
    /// Windows containing at least one configured bigram.
    pub nonempty_windows: usize,
    /// Percentage of candidate windows that are non-empty.
    pub pct_nonempty: f64,
    /// Mean count of distinct bigrams over the non-empty windows.
    pub mean_distinct_bigrams: f64,
}

/// Coverage of the configured bigrams over all candidate windows.
pub fn coverage_summary(
    latency_windows: &[LatencyWindow],
    all_window_count: usize,
) -> Result<Coverage> {
    if all_window_count == 0 {
        return Err(Error::Degenerate("zero candidate windows".into()));
    }
    let nonempty = latency_windows.len();
    if all_window_count < nonempty {
        return Err(Error::Degenerate(format!(
            "candidate window count {all_window_count} below non-empty count {nonempty}"
        )));
    }
    let mean_distinct_bigrams = if nonempty == 0 {
        0.0
    } else {
        latency_windows
            .iter()
            .map(|w| w.distinct_bigrams() as f64)
            .sum::<f64>()
            / nonempty as f64
    };
    Ok(Coverage {
        total_windows: all_window_count,
        nonempty_windows: nonempty,
        pct_nonempty: 100.0 * nonempty as f64 / all_window_count as f64,
        mean_distinct_bigrams,
    })
}

/// Correlation statistics and coverage over the paired windows.
///
/// Serialized field order is fixed; the raw-SDNN pairing is the headline
/// coefficient, with the baseline-relative pairing alongside.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub n: usize,
    /// Keystroke deviation vs raw window SDNN.
    pub pearson_r: f64,
    pub spearman_rho: f64,
    /// Keystroke deviation vs baseline-relative HRV deviation.
    pub pearson_r_hrv_deviation: f64,
    pub spearman_rho_hrv_deviation: f64,
    pub low_confidence: bool,
    pub baseline_grand_mean_ms: f64,
    pub hrv_baseline_sdnn_ms: f64,
    pub total_windows: usize,
    pub nonempty_windows: usize,
    pub pct_nonempty: f64,
    pub mean_distinct_bigrams: f64,
    pub unmatched_latency_windows: usize,
    pub unmatched_hrv_windows: usize,
    pub excluded_bigrams: Vec<Bigram>,
}

impl CorrelationReport {
    pub fn build(
        aligned: &Aligned,
        coverage: Coverage,
        baseline_grand_mean_ms: f64,
        hrv_baseline_sdnn_ms: f64,
        excluded_bigrams: Vec<Bigram>,
    ) -> Result<Self> {
        let ks: Vec<f64> = aligned
            .pairs
            .iter()
            .map(|p| p.keystroke_deviation)
            .collect();
        let sdnn: Vec<f64> = aligned.pairs.iter().map(|p| p.sdnn_ms).collect();
        let hrv_dev: Vec<f64> = aligned.pairs.iter().map(|p| p.hrv_deviation).collect();

        Ok(CorrelationReport {
            n: aligned.pairs.len(),
            pearson_r: pearson(&ks, &sdnn)?,
            spearman_rho: spearman(&ks, &sdnn)?,
            pearson_r_hrv_deviation: pearson(&ks, &hrv_dev)?,
            spearman_rho_hrv_deviation: spearman(&ks, &hrv_dev)?,
            low_confidence: aligned.pairs.len() < LOW_CONFIDENCE_N,
            baseline_grand_mean_ms,
            hrv_baseline_sdnn_ms,
            total_windows: coverage.total_windows,
            nonempty_windows: coverage.nonempty_windows,
            pct_nonempty: coverage.pct_nonempty,
            mean_distinct_bigrams: coverage.mean_distinct_bigrams,
            unmatched_latency_windows: aligned.unmatched_keystroke,
            unmatched_hrv_windows: aligned.unmatched_hrv,
            excluded_bigrams,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keydyn::WindowBigramStat;

    fn dev(start_ms: i64, deviation: f64) -> KeystrokeDeviation {
        KeystrokeDeviation {
            episode_id: 0,
            start_ms,
            deviation,
        }
    }

    fn hrv_win(start_ms: i64, sdnn_ms: f64) -> HrvWindow {
        HrvWindow {
            start_ms,
            end_ms: start_ms + 300_000,
            sdnn_ms,
            rmssd_ms: sdnn_ms,
            n_intervals: 300,
        }
    }

    fn baseline(mean: f64) -> HrvBaseline {
        HrvBaseline {
            mean_sdnn_ms: mean,
            n_windows: 1,
        }
    }

    #[test]
    fn align_full_join() {
        let anchors = [0i64, 150_000, 300_000, 450_000, 600_000];
        let devs: Vec<_> = anchors.iter().map(|&a| dev(a, 0.1)).collect();
        let hrv: Vec<_> = anchors.iter().map(|&a| hrv_win(a, 50.0)).collect();
        let aligned = align(&devs, &hrv, &baseline(50.0)).unwrap();
        assert_eq!(aligned.pairs.len(), 5);
        assert_eq!(aligned.unmatched_keystroke, 0);
        assert_eq!(aligned.unmatched_hrv, 0);
    }

    #[test]
    fn align_disjoint_anchors() {
        let devs = vec![dev(0, 0.1), dev(150_000, 0.2)];
        let hrv = vec![hrv_win(300_000, 50.0), hrv_win(450_000, 60.0)];
        let aligned = align(&devs, &hrv, &baseline(55.0)).unwrap();
        assert!(aligned.pairs.is_empty());
        assert_eq!(aligned.unmatched_keystroke, 2);
        assert_eq!(aligned.unmatched_hrv, 2);
    }

    #[test]
    fn align_partial_overlap() {
        let devs = vec![dev(0, 0.1), dev(150_000, 0.2)];
        let hrv = vec![hrv_win(150_000, 40.0), hrv_win(300_000, 60.0)];
        let aligned = align(&devs, &hrv, &baseline(50.0)).unwrap();
        assert_eq!(aligned.pairs.len(), 1);
        let pair = aligned.pairs[0];
        assert_eq!(pair.start_ms, 150_000);
        assert_eq!(pair.sdnn_ms, 40.0);
        assert!((pair.hrv_deviation - (-0.2)).abs() < 1e-12);
        assert_eq!(aligned.unmatched_keystroke, 1);
        assert_eq!(aligned.unmatched_hrv, 1);
    }

    #[test]
    fn pearson_perfect_linear() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_hand_computed() {
        // cov/(sx*sy) for x=[1,2,3], y=[1,3,2] works out to 0.5
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(3, 2))
        ));
        assert!(matches!(
            pearson(&[5.0, 5.0, 5.0], &[1.0, 2.0, 3.0]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn spearman_monotone_and_reverse() {
        let x = [1.0f64, 2.0, 3.0];
        let cubed: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        assert!((spearman(&x, &cubed).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[9.0, 4.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_average_ties() {
        // tied x gets ranks [1.5, 1.5, 3]; rho is pearson of the rank vectors
        let rho = spearman(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        let expected = pearson(&[1.5, 1.5, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!((rho - expected).abs() < 1e-12);
        assert!((rho - 0.866025403784).abs() < 1e-9);
    }

    #[test]
    fn rank_assignment() {
        assert_eq!(rank_with_ties(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
        assert_eq!(rank_with_ties(&[1.0, 1.0, 2.0]), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank_with_ties(&[5.0, 5.0, 5.0]), vec![2.0, 2.0, 2.0]);
    }

    fn th_instance(latency_ms: f64) -> BigramInstance {
        BigramInstance {
            bigram: "TH".parse().unwrap(),
            latency_ms,
            onset_ms: 0,
        }
    }

    #[test]
    fn cdf_two_points() {
        let instances = vec![th_instance(100.0), th_instance(200.0)];
        let cdf = latency_cdf(&instances, "TH".parse().unwrap()).unwrap();
        assert_eq!(cdf, vec![(100.0, 0.5), (200.0, 1.0)]);
    }

    #[test]
    fn cdf_single_point() {
        let cdf = latency_cdf(&[th_instance(140.0)], "TH".parse().unwrap()).unwrap();
        assert_eq!(cdf, vec![(140.0, 1.0)]);
    }

    #[test]
    fn cdf_collapses_duplicates() {
        let instances = vec![th_instance(100.0), th_instance(100.0), th_instance(200.0)];
        let cdf = latency_cdf(&instances, "TH".parse().unwrap()).unwrap();
        assert_eq!(cdf.len(), 2);
        assert_eq!(cdf[0].0, 100.0);
        assert!((cdf[0].1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(cdf[1], (200.0, 1.0));
    }

    #[test]
    fn cdf_no_instances_is_error() {
        assert!(latency_cdf(&[], "TH".parse().unwrap()).is_err());
        assert!(latency_cdf(&[th_instance(1.0)], "HE".parse().unwrap()).is_err());
    }

    fn window_with_distinct(count: usize) -> LatencyWindow {
        let set = crate::keydyn::default_bigram_set();
        LatencyWindow {
            episode_id: 0,
            start_ms: 0,
            duration_ms: 300_000,
            short: false,
            per_bigram: set[..count]
                .iter()
                .map(|&b| {
                    (
                        b,
                        WindowBigramStat {
                            mean_ms: 100.0,
                            n: 1,
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn coverage_share_of_sparse_windows() {
        let windows: Vec<LatencyWindow> = (0..284).map(|_| window_with_distinct(4)).collect();
        let coverage = coverage_summary(&windows, 645).unwrap();
        assert!((coverage.pct_nonempty - 44.0).abs() < 0.1);
        assert_eq!(coverage.nonempty_windows, 284);
        assert_eq!(coverage.total_windows, 645);
    }

    #[test]
    fn coverage_saturation() {
        let windows: Vec<LatencyWindow> = (0..4).map(|_| window_with_distinct(10)).collect();
        let coverage = coverage_summary(&windows, 4).unwrap();
        assert_eq!(coverage.pct_nonempty, 100.0);
        assert_eq!(coverage.mean_distinct_bigrams, 10.0);
    }

    #[test]
    fn coverage_hand_arithmetic() {
        let windows = vec![window_with_distinct(4), window_with_distinct(5)];
        let coverage = coverage_summary(&windows, 4).unwrap();
        assert_eq!(coverage.pct_nonempty, 50.0);
        assert_eq!(coverage.mean_distinct_bigrams, 4.5);
    }

    #[test]
    fn coverage_zero_candidates_is_error() {
        assert!(coverage_summary(&[], 0).is_err());
    }

    #[test]
    fn report_serializes_with_fixed_key_order() {
        let devs = vec![dev(0, -0.1), dev(150_000, 0.0), dev(300_000, 0.1)];
        let hrv = vec![
            hrv_win(0, 60.0),
            hrv_win(150_000, 50.0),
            hrv_win(300_000, 40.0),
        ];
        let aligned = align(&devs, &hrv, &baseline(50.0)).unwrap();
        let coverage = coverage_summary(&[window_with_distinct(2)], 3).unwrap();
        let report = CorrelationReport::build(&aligned, coverage, 117.0, 50.0, vec![]).unwrap();
        assert_eq!(report.n, 3);
        assert!(report.low_confidence);
        let json = serde_json::to_string(&report).unwrap();
        let n_pos = json.find("\"n\"").unwrap();
        let pearson_pos = json.find("\"pearson_r\"").unwrap();
        let spearman_pos = json.find("\"spearman_rho\"").unwrap();
        let coverage_pos = json.find("\"pct_nonempty\"").unwrap();
        let excluded_pos = json.find("\"excluded_bigrams\"").unwrap();
        assert!(n_pos < pearson_pos);
        assert!(pearson_pos < spearman_pos);
        assert!(spearman_pos < coverage_pos);
        assert!(coverage_pos < excluded_pos);
    }
}
