//! Parse a keystroke log and an RR recording from the canonical text
//! formats.
//!
//! ```bash
//! cargo run -p keybeat --example parse_logs
//! ```

use std::io::Cursor;

use keybeat::ingest::{parse_keystrokes, parse_rr, Keymap, DEFAULT_RR_BAND};

fn main() -> keybeat::Result<()> {
    // Keystroke log: `timestamp_ms,keycode` per line. With the built-in
    // ASCII keymap, 84 is T, 72 is H, 32 is SPACE.
    let keystroke_log = "\
1627800000000,84
1627800000120,72
1627800000300,69
1627800000450,32
1627800000700,9999
";
    let keymap = Keymap::ascii();
    let parsed = parse_keystrokes(Cursor::new(keystroke_log), &keymap, false)?;
    println!("parsed {} key events", parsed.events.len());
    for event in &parsed.events {
        println!("  {} {}", event.timestamp_ms, event.symbol);
    }
    println!("dropped {} unmapped keycode(s)", parsed.unmapped_dropped);

    // A custom keymap adapts platform-specific keycodes.
    let custom = Keymap::from_reader(Cursor::new("17,t\n23,h\n"))?;
    let parsed = parse_keystrokes(Cursor::new("1000,17\n1120,23\n"), &custom, true)?;
    println!(
        "custom keymap: {} -> {}",
        parsed.events[0].symbol, parsed.events[1].symbol
    );

    // RR recording: one interval in ms per line, anchored at start_ms.
    // 5000 ms is outside the plausibility band and gets dropped.
    let rr_log = "812\n798.5\n805\n5000\n790\n";
    let parsed = parse_rr(Cursor::new(rr_log), 1_627_800_000_000, DEFAULT_RR_BAND)?;
    println!(
        "parsed {} RR intervals, dropped {} implausible",
        parsed.series.len(),
        parsed.dropped_implausible
    );
    for sample in &parsed.series.samples {
        println!("  beat at {} after {} ms", sample.end_ms, sample.rr_ms);
    }
    Ok(())
}
