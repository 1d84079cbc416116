//! Clean an RR series of ectopic beats and compute windowed SDNN/RMSSD
//! with a whole-recording baseline.
//!
//! ```bash
//! cargo run -p keybeat --example hrv_metrics
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use keybeat::hrv::{filter_ectopic_malik, hrv_baseline, rmssd, sdnn, window_hrv};
use keybeat::ingest::RrSeries;
use keybeat::window::anchors_for_span;

fn main() -> keybeat::Result<()> {
    // 20 minutes of beats around 800 ms with a few ectopic spikes mixed in.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut intervals = Vec::new();
    let mut elapsed = 0.0;
    while elapsed < 1_200_000.0 {
        let rr = if rng.random_ratio(1, 150) {
            1600.0 // ectopic-looking outlier
        } else {
            800.0 + rng.random_range(-60.0..60.0)
        };
        intervals.push(rr);
        elapsed += rr;
    }
    let rr = RrSeries::from_intervals(0, &intervals)?;

    let nn = filter_ectopic_malik(&rr, 0.2)?;
    println!(
        "{} raw intervals, {} rejected as ectopic, {} NN intervals",
        rr.len(),
        nn.rejected_count,
        nn.samples.len()
    );

    let values = nn.intervals();
    println!(
        "whole recording: SDNN {:.2} ms, RMSSD {:.2} ms",
        sdnn(&values)?,
        rmssd(&values)?
    );

    // 5-minute windows with 2.5-minute overlap across the recording.
    let end = nn.samples.last().unwrap().end_ms;
    let anchors = anchors_for_span(0, end, 300_000, 150_000);
    let windows = window_hrv(&nn, &anchors, 30);
    println!("\n{} of {} windows valid:", windows.len(), anchors.len());
    for w in &windows {
        println!(
            "  [{:>7}..{:>7}) SDNN {:6.2} ms  RMSSD {:6.2} ms  ({} beats)",
            w.start_ms, w.end_ms, w.sdnn_ms, w.rmssd_ms, w.n_intervals
        );
    }

    let baseline = hrv_baseline(&windows)?;
    println!(
        "\nHRV baseline: mean SDNN {:.2} ms over {} windows",
        baseline.mean_sdnn_ms, baseline.n_windows
    );
    Ok(())
}
