//! Segment key events into typing episodes, extract top-10 bigram
//! latencies, and compute windowed statistics with per-window deviations
//! from the whole-recording baseline.
//!
//! ```bash
//! cargo run -p keybeat --example bigram_windows
//! ```

use keybeat::ingest::KeyEvent;
use keybeat::keydyn::{
    bigram_baseline, default_bigram_set, extract_bigram_instances, keystroke_deviation,
    segment_episodes, window_latency_stats, NonLetterPolicy,
};

fn main() -> keybeat::Result<()> {
    // Type "THE THEN" twice: a quick burst, a 6-minute break, a slower burst.
    let mut events = Vec::new();
    let mut t = 1_600_000_000_000i64;
    for (pace, text) in [(110i64, "THE THEN"), (170, "THE THEN")] {
        for c in text.chars() {
            let symbol = if c == ' ' {
                "SPACE".to_string()
            } else {
                c.to_string()
            };
            events.push(KeyEvent::new(t, symbol));
            t += pace;
        }
        t += 360_000; // inactivity gap
    }

    let episodes = segment_episodes(&events, 300_000);
    println!("{} episodes from {} events", episodes.len(), events.len());

    let bigrams = default_bigram_set().into_iter().collect();
    let mut instances = Vec::new();
    for episode in &episodes {
        let found = extract_bigram_instances(episode, &bigrams, 1000, NonLetterPolicy::Break);
        println!(
            "episode {} ({} s): {} bigram instances",
            episode.id,
            episode.duration_ms() / 1000,
            found.len()
        );
        for inst in &found {
            println!("  {} latency {} ms", inst.bigram, inst.latency_ms);
        }
        instances.extend(found);
    }

    let baseline = bigram_baseline(&instances)?;
    println!("\nbaseline over the whole recording:");
    for (bigram, mean) in &baseline.per_bigram_mean {
        println!("  {bigram}: {mean:.1} ms");
    }
    println!("grand mean: {:.1} ms", baseline.grand_mean);

    // Short episodes yield one whole-episode window flagged `short`.
    println!("\nper-window deviation from baseline:");
    for episode in &episodes {
        let windows = window_latency_stats(
            episode,
            &bigrams,
            300_000,
            150_000,
            1000,
            NonLetterPolicy::Break,
        );
        for window in &windows {
            let dev = keystroke_deviation(window, &baseline)?;
            println!(
                "  episode {} window @{}{}: deviation {:+.3}",
                window.episode_id,
                window.start_ms,
                if window.short { " (short)" } else { "" },
                dev.deviation
            );
        }
    }
    Ok(())
}
