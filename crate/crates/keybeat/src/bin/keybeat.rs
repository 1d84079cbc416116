//! Command-line front end for the keybeat pipeline.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data or I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use keybeat::config::AnalysisConfig;
use keybeat::error::Error;
use keybeat::pipeline;

#[derive(Parser)]
#[command(
    name = "keybeat",
    version,
    about = "Keystroke-dynamics vs HRV analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis: baseline, windows, HRV, correlation report.
    Analyze {
        /// Keystroke log (`timestamp_ms,keycode` per line).
        #[arg(long)]
        keystrokes: PathBuf,
        /// RR recording (one interval in ms per line).
        #[arg(long)]
        rr: PathBuf,
        /// Keymap (`keycode,symbol` per line); defaults to ASCII codes.
        #[arg(long)]
        keymap: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Generate a synthetic session from a spec file.
    Synth {
        /// Session spec (`key = value` per line).
        #[arg(long)]
        spec: PathBuf,
        /// Output directory for keystrokes.csv, rr.txt, ground_truth.csv.
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Compute only the whole-recording bigram baseline.
    Baseline {
        #[arg(long)]
        keystrokes: PathBuf,
        #[arg(long)]
        keymap: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Compute only the windowed HRV metrics.
    Hrv {
        #[arg(long)]
        rr: PathBuf,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
}

/// Every analysis-config key, exposed as a flag of the same name.
#[derive(Args)]
struct ConfigOverrides {
    /// Config file (`key = value` per line); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated bigram set, e.g. `TH,HE,IN`.
    #[arg(long)]
    bigrams: Option<String>,
    #[arg(long)]
    cutoff_ms: Option<String>,
    #[arg(long)]
    window_ms: Option<String>,
    #[arg(long)]
    step_ms: Option<String>,
    #[arg(long)]
    gap_threshold_ms: Option<String>,
    #[arg(long)]
    malik_tolerance: Option<String>,
    #[arg(long)]
    min_intervals: Option<String>,
    /// Comma-separated bigrams to exclude from all statistics.
    #[arg(long)]
    excluded_bigrams: Option<String>,
    /// Epoch anchor (ms) of the first RR interval.
    #[arg(long)]
    rr_start_ms: Option<String>,
    #[arg(long)]
    rr_plausible_min_ms: Option<String>,
    #[arg(long)]
    rr_plausible_max_ms: Option<String>,
    #[arg(long)]
    include_short_windows: Option<String>,
    /// `break` or `passthrough`.
    #[arg(long)]
    non_letter_policy: Option<String>,
    #[arg(long)]
    strict_keymap: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
}

impl ConfigOverrides {
    fn build(&self) -> Result<AnalysisConfig, Error> {
        let mut config = match &self.config {
            Some(path) => AnalysisConfig::from_path(path)?,
            None => AnalysisConfig::default(),
        };
        let flags: [(&str, &Option<String>); 15] = [
            ("bigrams", &self.bigrams),
            ("cutoff_ms", &self.cutoff_ms),
            ("window_ms", &self.window_ms),
            ("step_ms", &self.step_ms),
            ("gap_threshold_ms", &self.gap_threshold_ms),
            ("malik_tolerance", &self.malik_tolerance),
            ("min_intervals", &self.min_intervals),
            ("excluded_bigrams", &self.excluded_bigrams),
            ("rr_start_ms", &self.rr_start_ms),
            ("rr_plausible_min_ms", &self.rr_plausible_min_ms),
            ("rr_plausible_max_ms", &self.rr_plausible_max_ms),
            ("include_short_windows", &self.include_short_windows),
            ("non_letter_policy", &self.non_letter_policy),
            ("strict_keymap", &self.strict_keymap),
            ("out_dir", &self.out_dir),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                config.set(key, value)?;
            }
        }
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Analyze {
            keystrokes,
            rr,
            keymap,
            overrides,
        } => {
            let config = overrides.build()?;
            let outcome = pipeline::run_analyze(&keystrokes, &rr, keymap.as_deref(), &config)?;
            let report = &outcome.analysis.report;
            println!(
                "n={} pearson_r={:.4} spearman_rho={:.4} coverage={:.1}% ({} of {} windows)",
                report.n,
                report.pearson_r,
                report.spearman_rho,
                report.pct_nonempty,
                report.nonempty_windows,
                report.total_windows,
            );
            println!("report: {}", outcome.report_json.display());
        }
        Command::Synth { spec, out_dir } => {
            let outcome = pipeline::run_synth_file(&spec, &out_dir)?;
            println!("wrote {}", outcome.keystrokes_csv.display());
            println!("wrote {}", outcome.rr_txt.display());
            println!("wrote {}", outcome.ground_truth_csv.display());
        }
        Command::Baseline {
            keystrokes,
            keymap,
            overrides,
        } => {
            let config = overrides.build()?;
            let (baseline, path) = pipeline::run_baseline(&keystrokes, keymap.as_deref(), &config)?;
            for (bigram, mean) in &baseline.per_bigram_mean {
                println!("{bigram}: {mean:.1} ms");
            }
            println!("grand mean: {:.2} ms", baseline.grand_mean);
            println!("wrote {}", path.display());
        }
        Command::Hrv { rr, overrides } => {
            let config = overrides.build()?;
            let (windows, baseline, path) = pipeline::run_hrv(&rr, &config)?;
            println!(
                "{} valid windows, mean SDNN {:.2} ms",
                windows.len(),
                baseline.mean_sdnn_ms
            );
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
