//! Generate a synthetic session and write it in the canonical file formats
//! (keystrokes.csv, rr.txt, ground_truth.csv).
//!
//! ```bash
//! cargo run -p keybeat --example synth_session
//! ```

use keybeat::pipeline::run_synth;
use keybeat::synth::{generate, SessionSpec, StressSignal};

fn main() -> keybeat::Result<()> {
    // 40 minutes alternating between calm and stressed 5-minute blocks.
    // Stress stretches latencies by 40% and halves RR variability.
    let spec = SessionSpec {
        duration_ms: 2_400_000,
        stress: StressSignal::alternating(),
        coupling_latency: 0.4,
        coupling_hrv: 0.5,
        rng_seed: 99,
        ..SessionSpec::default()
    };

    let session = generate(&spec)?;
    println!(
        "generated {} key events and {} RR intervals",
        session.key_events.len(),
        session.rr.len()
    );
    println!("\nground truth stress per 5-minute window:");
    for g in &session.ground_truth {
        println!("  window @{}: stress {:.2}", g.start_ms, g.stress);
    }

    let dir = std::env::temp_dir().join("keybeat_synth_example");
    let outcome = run_synth(&spec, &dir)?;
    println!("\nwrote {}", outcome.keystrokes_csv.display());
    println!("wrote {}", outcome.rr_txt.display());
    println!("wrote {}", outcome.ground_truth_csv.display());
    println!("\nanalyze them with:");
    println!(
        "  keybeat analyze --keystrokes {} --rr {} --rr-start-ms {}",
        outcome.keystrokes_csv.display(),
        outcome.rr_txt.display(),
        spec.start_ms
    );
    Ok(())
}
