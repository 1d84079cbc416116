//! Empirical cumulative distribution of bigram latencies, the plot-ready
//! view of how typing speed varies for each bigram.
//!
//! ```bash
//! cargo run -p keybeat --example latency_cdf
//! ```

use keybeat::correlate::latency_cdf;
use keybeat::keydyn::{extract_bigram_instances, segment_episodes, NonLetterPolicy};
use keybeat::synth::{generate, SessionSpec};

fn main() -> keybeat::Result<()> {
    let spec = SessionSpec {
        duration_ms: 1_200_000,
        latency_jitter_ms: 25.0,
        ..SessionSpec::default()
    };
    let session = generate(&spec)?;

    let bigrams = spec.bigram_frequencies.keys().copied().collect();
    let mut instances = Vec::new();
    for episode in segment_episodes(&session.key_events, 300_000) {
        instances.extend(extract_bigram_instances(
            &episode,
            &bigrams,
            1000,
            NonLetterPolicy::Break,
        ));
    }
    println!("{} instances extracted", instances.len());

    for bigram in ["TH", "ER", "ND"] {
        let cdf = latency_cdf(&instances, bigram.parse()?)?;
        println!("\n{bigram} latency CDF ({} distinct values):", cdf.len());
        // print a coarse sketch: every fifth point
        for (latency, fraction) in cdf.iter().step_by(5) {
            let bar = "#".repeat((fraction * 40.0).round() as usize);
            println!("  {latency:7.1} ms {fraction:5.2} {bar}");
        }
        let (last_latency, last_fraction) = cdf.last().unwrap();
        println!("  {last_latency:7.1} ms {last_fraction:5.2} (end of CDF)");
    }
    Ok(())
}
