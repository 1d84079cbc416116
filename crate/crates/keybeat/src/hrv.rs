//! Time-domain heart-rate-variability metrics.
//!
//! RR series are cleaned of ectopic beats with a 20% tolerance rule before
//! SDNN and RMSSD are computed over 5-minute windows. SDNN uses the
//! population (divide-by-N) standard deviation so results reproduce
//! bit-for-bit.

use crate::error::{Error, Result};
use crate::ingest::{RrSample, RrSeries};
use crate::window::WindowAnchor;

/// Default tolerance for the ectopic-beat filter: an interval may deviate
/// from the last accepted interval by at most 20%.
pub const DEFAULT_MALIK_TOLERANCE: f64 = 0.2;
/// Default minimum intervals per window for a valid SDNN estimate.
pub const DEFAULT_MIN_INTERVALS: usize = 30;

/// RR intervals surviving artifact rejection (NN intervals).
#[derive(Debug, Clone, PartialEq)]
pub struct NnSeries {
    pub samples: Vec<RrSample>,
    pub rejected_count: usize,
}

impl NnSeries {
    pub fn intervals(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rr_ms).collect()
    }
}

/// Remove ectopic beats: the first interval is accepted, and each later
/// interval is accepted iff it deviates from the last *accepted* interval
/// by at most `tolerance` of that interval. Comparing against the last
/// accepted interval keeps one ectopic beat from cascading rejections.
pub fn filter_ectopic_malik(rr: &RrSeries, tolerance: f64) -> Result<NnSeries> {
    if rr.is_empty() {
        return Err(Error::EmptySeries);
    }
    if !(0.0..1.0).contains(&tolerance) || tolerance == 0.0 {
        return Err(Error::Config(format!(
            "malik tolerance must be in (0, 1), got {tolerance}"
        )));
    }

    let mut samples = Vec::with_capacity(rr.len());
    let mut last_accepted: Option<f64> = None;
    for &sample in &rr.samples {
        let accept = match last_accepted {
            None => true,
            Some(prev) => (sample.rr_ms - prev).abs() <= tolerance * prev,
        };
        if accept {
            last_accepted = Some(sample.rr_ms);
            samples.push(sample);
        }
    }
    let rejected_count = rr.len() - samples.len();
    Ok(NnSeries {
        samples,
        rejected_count,
    })
}

/// Standard deviation of NN intervals (population, divide by N).
///
/// Uses Welford's online update for numerical stability.
pub fn sdnn(intervals: &[f64]) -> Result<f64> {
    if intervals.len() < 2 {
        return Err(Error::InsufficientIntervals {
            needed: 2,
            got: intervals.len(),
        });
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in intervals.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok((m2 / intervals.len() as f64).sqrt())
}

/// Root mean square of successive NN-interval differences.
pub fn rmssd(intervals: &[f64]) -> Result<f64> {
    if intervals.len() < 2 {
        return Err(Error::InsufficientIntervals {
            needed: 2,
            got: intervals.len(),
        });
    }
    let sum_sq: f64 = intervals.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    Ok((sum_sq / (intervals.len() - 1) as f64).sqrt())
}

/// HRV metrics for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct HrvWindow {
    pub start_ms: i64,
    pub end_ms: i64,
    pub sdnn_ms: f64,
    pub rmssd_ms: f64,
    pub n_intervals: usize,
}

/// Windowed SDNN/RMSSD at the given anchors.
///
/// Each anchor collects the NN samples whose ending beat falls in
/// `[start, start + duration)`; anchors with fewer than `min_intervals`
/// samples are excluded. An empty result is permitted.
pub fn window_hrv(nn: &NnSeries, anchors: &[WindowAnchor], min_intervals: usize) -> Vec<HrvWindow> {
    anchors
        .iter()
        .filter_map(|anchor| {
            let values: Vec<f64> = nn
                .samples
                .iter()
                .filter(|s| anchor.contains(s.end_ms))
                .map(|s| s.rr_ms)
                .collect();
            if values.len() < min_intervals.max(2) {
                return None;
            }
            Some(HrvWindow {
                start_ms: anchor.start_ms,
                end_ms: anchor.end_ms(),
                sdnn_ms: sdnn(&values).expect("len checked"),
                rmssd_ms: rmssd(&values).expect("len checked"),
                n_intervals: values.len(),
            })
        })
        .collect()
}

/// A user's whole-recording HRV baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrvBaseline {
    /// Arithmetic mean of `sdnn_ms` over all valid windows.
    pub mean_sdnn_ms: f64,
    pub n_windows: usize,
}

/// Mean SDNN over all valid windows.
pub fn hrv_baseline(windows: &[HrvWindow]) -> Result<HrvBaseline> {
    if windows.is_empty() {
        return Err(Error::NoValidWindows);
    }
    let mean_sdnn_ms = windows.iter().map(|w| w.sdnn_ms).sum::<f64>() / windows.len() as f64;
    Ok(HrvBaseline {
        mean_sdnn_ms,
        n_windows: windows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::RrSeries;
    use crate::window::{anchors_for_span, DEFAULT_STEP_MS, DEFAULT_WINDOW_MS};

    fn series(intervals: &[f64]) -> RrSeries {
        RrSeries::from_intervals(0, intervals).unwrap()
    }

    #[test]
    fn malik_accepts_within_tolerance() {
        let nn = filter_ectopic_malik(&series(&[800.0, 810.0, 805.0]), 0.2).unwrap();
        assert_eq!(nn.intervals(), vec![800.0, 810.0, 805.0]);
        assert_eq!(nn.rejected_count, 0);
    }

    #[test]
    fn malik_rejects_spike_and_compares_to_last_accepted() {
        // |1200 - 810| = 390 > 0.2 * 810 = 162 -> rejected;
        // 805 is then compared to 810, not 1200.
        let nn = filter_ectopic_malik(&series(&[800.0, 810.0, 1200.0, 805.0]), 0.2).unwrap();
        assert_eq!(nn.intervals(), vec![800.0, 810.0, 805.0]);
        assert_eq!(nn.rejected_count, 1);
    }

    #[test]
    fn malik_constant_series_unchanged() {
        let constant = vec![700.0; 50];
        let nn = filter_ectopic_malik(&series(&constant), 0.2).unwrap();
        assert_eq!(nn.intervals(), constant);
        assert_eq!(nn.rejected_count, 0);
    }

    #[test]
    fn malik_empty_is_error() {
        let empty = RrSeries::default();
        assert!(matches!(
            filter_ectopic_malik(&empty, 0.2),
            Err(Error::EmptySeries)
        ));
    }

    #[test]
    fn malik_keeps_timestamps_of_accepted_samples() {
        let rr = series(&[800.0, 810.0, 1200.0, 805.0]);
        let nn = filter_ectopic_malik(&rr, 0.2).unwrap();
        assert_eq!(nn.samples[2].end_ms, rr.samples[3].end_ms);
    }

    #[test]
    fn sdnn_constant_is_zero() {
        assert_eq!(sdnn(&[800.0, 800.0, 800.0]).unwrap(), 0.0);
    }

    #[test]
    fn sdnn_hand_computed() {
        // population std of [800, 850, 900] = sqrt((50^2 + 0 + 50^2)/3)
        let expected = (5000.0f64 / 3.0).sqrt();
        let got = sdnn(&[800.0, 850.0, 900.0]).unwrap();
        assert!((got - expected).abs() < 1e-9);
        assert!((got - 40.82).abs() < 0.005);
    }

    #[test]
    fn sdnn_scales_linearly() {
        let base = sdnn(&[700.0, 820.0, 760.0, 905.0]).unwrap();
        let doubled = sdnn(&[1400.0, 1640.0, 1520.0, 1810.0]).unwrap();
        assert!((doubled - 2.0 * base).abs() < 1e-9);
    }

    #[test]
    fn sdnn_needs_two_intervals() {
        assert!(matches!(
            sdnn(&[800.0]),
            Err(Error::InsufficientIntervals { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn rmssd_cases() {
        assert_eq!(rmssd(&[800.0, 800.0, 800.0]).unwrap(), 0.0);
        assert_eq!(rmssd(&[800.0, 850.0]).unwrap(), 50.0);
        // sqrt((50^2 + 50^2)/2) = 50
        assert!((rmssd(&[800.0, 850.0, 900.0]).unwrap() - 50.0).abs() < 1e-12);
        assert!(rmssd(&[800.0]).is_err());
    }

    #[test]
    fn window_hrv_on_aligned_episode() {
        // beats every 800 ms over 15 minutes, anchors as in the keystroke side
        let n = 900_000 / 800;
        let rr = series(&vec![800.0; n]);
        let nn = filter_ectopic_malik(&rr, 0.2).unwrap();
        let anchors = anchors_for_span(0, 900_000, DEFAULT_WINDOW_MS, DEFAULT_STEP_MS);
        let windows = window_hrv(&nn, &anchors, 30);
        assert_eq!(windows.len(), 5);
        for w in &windows {
            assert_eq!(w.sdnn_ms, 0.0);
            assert!(w.n_intervals >= 370);
        }
    }

    #[test]
    fn window_below_min_intervals_is_excluded() {
        let rr = series(&[800.0, 810.0, 805.0]);
        let nn = filter_ectopic_malik(&rr, 0.2).unwrap();
        let anchors = vec![WindowAnchor {
            start_ms: 0,
            duration_ms: DEFAULT_WINDOW_MS,
            short: false,
        }];
        assert!(window_hrv(&nn, &anchors, 30).is_empty());
    }

    #[test]
    fn constant_beats_full_window() {
        let n = 300_000 / 1000;
        let rr = series(&vec![1000.0; n]);
        let nn = filter_ectopic_malik(&rr, 0.2).unwrap();
        let anchors = vec![WindowAnchor {
            start_ms: 0,
            duration_ms: DEFAULT_WINDOW_MS,
            short: false,
        }];
        let windows = window_hrv(&nn, &anchors, 30);
        assert_eq!(windows.len(), 1);
        assert_eq!(windows[0].sdnn_ms, 0.0);
        assert_eq!(windows[0].n_intervals, 299); // beat at 300000 falls outside [0, 300000)
    }

    #[test]
    fn baseline_is_mean_of_window_sdnn() {
        let windows: Vec<HrvWindow> = [100.0, 110.0, 120.0]
            .iter()
            .enumerate()
            .map(|(i, &s)| HrvWindow {
                start_ms: i as i64 * 150_000,
                end_ms: i as i64 * 150_000 + 300_000,
                sdnn_ms: s,
                rmssd_ms: s,
                n_intervals: 300,
            })
            .collect();
        let baseline = hrv_baseline(&windows).unwrap();
        assert!((baseline.mean_sdnn_ms - 110.0).abs() < 1e-12);
        assert_eq!(baseline.n_windows, 3);
    }

    #[test]
    fn baseline_singleton_and_empty() {
        let w = HrvWindow {
            start_ms: 0,
            end_ms: 300_000,
            sdnn_ms: 42.5,
            rmssd_ms: 40.0,
            n_intervals: 200,
        };
        assert_eq!(hrv_baseline(&[w]).unwrap().mean_sdnn_ms, 42.5);
        assert!(matches!(hrv_baseline(&[]), Err(Error::NoValidWindows)));
    }

    #[test]
    fn baselines_at_recording_scale() {
        // realistic recording sizes: 275 windows averaging 106.3 ms and
        // 86 windows averaging 40.9 ms
        let spread = |center: f64, count: usize| -> Vec<HrvWindow> {
            (0..count)
                .map(|i| {
                    let offset = (i as f64 - (count as f64 - 1.0) / 2.0) * 0.1;
                    HrvWindow {
                        start_ms: i as i64 * 150_000,
                        end_ms: i as i64 * 150_000 + 300_000,
                        sdnn_ms: center + offset,
                        rmssd_ms: center,
                        n_intervals: 300,
                    }
                })
                .collect()
        };
        let user1 = hrv_baseline(&spread(106.3, 275)).unwrap();
        assert!((user1.mean_sdnn_ms - 106.3).abs() < 1e-9);
        assert_eq!(user1.n_windows, 275);
        let user2 = hrv_baseline(&spread(40.9, 86)).unwrap();
        assert!((user2.mean_sdnn_ms - 40.9).abs() < 1e-9);
        assert_eq!(user2.n_windows, 86);
    }
}
