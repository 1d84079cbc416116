//! Shared sliding-window anchor arithmetic.
//!
//! Keystroke and HRV statistics are computed over the same anchors so the
//! two sides of the analysis line up window for window.

/// Default window length: 5 minutes.
pub const DEFAULT_WINDOW_MS: i64 = 300_000;
/// Default step between window starts: 2.5 minutes (50% overlap).
pub const DEFAULT_STEP_MS: i64 = 150_000;

/// Start and length of one analysis window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowAnchor {
    pub start_ms: i64,
    pub duration_ms: i64,
    /// True when the span was shorter than a full window and the anchor
    /// covers the whole span instead.
    pub short: bool,
}

impl WindowAnchor {
    pub fn end_ms(&self) -> i64 {
        self.start_ms + self.duration_ms
    }

    /// Half-open containment test: `[start, start + duration)`.
    pub fn contains(&self, t_ms: i64) -> bool {
        t_ms >= self.start_ms && t_ms < self.end_ms()
    }
}

/// Number of full windows over a span of `duration_ms`:
/// `floor((duration - window) / step) + 1` when the span is at least one
/// window long, zero otherwise.
pub fn window_count(duration_ms: i64, window_ms: i64, step_ms: i64) -> usize {
    if duration_ms < window_ms {
        0
    } else {
        ((duration_ms - window_ms) / step_ms + 1) as usize
    }
}

/// Overlapping window anchors covering `[start_ms, end_ms]`.
///
/// Anchors sit at offsets 0, step, 2·step, … while the whole window still
/// fits. A span shorter than one window yields a single anchor covering the
/// span, flagged `short`.
pub fn anchors_for_span(
    start_ms: i64,
    end_ms: i64,
    window_ms: i64,
    step_ms: i64,
) -> Vec<WindowAnchor> {
    debug_assert!(window_ms > step_ms && step_ms > 0);
    let duration = end_ms - start_ms;
    if duration < window_ms {
        return vec![WindowAnchor {
            start_ms,
            duration_ms: duration,
            short: true,
        }];
    }
    (0..window_count(duration, window_ms, step_ms) as i64)
        .map(|k| WindowAnchor {
            start_ms: start_ms + k * step_ms,
            duration_ms: window_ms,
            short: false,
        })
        .collect()
}
