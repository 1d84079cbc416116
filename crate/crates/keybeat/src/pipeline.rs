//! End-to-end orchestration: parse inputs, run the analysis, write exports.
//!
//! All outputs are pure functions of (inputs, config): re-running a command
//! on the same data produces byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::AnalysisConfig;
use crate::correlate::{
    align, coverage_summary, Aligned, CorrelationReport, Coverage, PairedSample,
};
use crate::error::{Error, Result};
use crate::hrv::{filter_ectopic_malik, hrv_baseline, window_hrv, HrvBaseline, HrvWindow};
use crate::ingest::{
    parse_keystrokes, parse_rr, write_keystrokes, write_rr, KeyEvent, Keymap, RrSeries,
};
use crate::keydyn::{
    bigram_baseline, bin_instances, exclude_bigrams, extract_bigram_instances, keystroke_deviation,
    segment_episodes, BigramBaseline, BigramInstance, KeystrokeDeviation, LatencyWindow,
    TypingEpisode,
};
use crate::synth::{generate, SessionSpec};
use crate::window::WindowAnchor;

/// Full in-memory result of one analysis run.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub episodes: Vec<TypingEpisode>,
    /// All instances of the configured bigrams, before exclusion.
    pub instances: Vec<BigramInstance>,
    /// Non-empty latency windows, exclusions applied.
    pub windows: Vec<LatencyWindow>,
    pub baseline: BigramBaseline,
    pub deviations: Vec<KeystrokeDeviation>,
    pub hrv_windows: Vec<HrvWindow>,
    pub hrv_baseline: HrvBaseline,
    pub pairs: Vec<PairedSample>,
    pub coverage: Coverage,
    pub report: CorrelationReport,
}

/// Run the whole analysis on already-parsed inputs.
///
/// Keystroke windows and HRV windows share the same anchors: every episode
/// contributes its overlapping window grid, and HRV metrics are computed at
/// exactly those anchors before the inner join.
pub fn analyze_data(
    events: &[KeyEvent],
    rr: &RrSeries,
    config: &AnalysisConfig,
) -> Result<Analysis> {
    config.validate()?;
    let bigram_set = config.bigram_set();

    let episodes = segment_episodes(events, config.gap_threshold_ms);

    let mut anchors: Vec<WindowAnchor> = Vec::new();
    let mut instances: Vec<BigramInstance> = Vec::new();
    let mut windows: Vec<LatencyWindow> = Vec::new();
    for episode in &episodes {
        let episode_anchors: Vec<WindowAnchor> = episode
            .window_anchors(config.window_ms, config.step_ms)
            .into_iter()
            .filter(|a| config.include_short_windows || !a.short)
            .collect();
        let episode_instances = extract_bigram_instances(
            episode,
            &bigram_set,
            config.cutoff_ms,
            config.non_letter_policy,
        );
        windows.extend(bin_instances(
            episode.id,
            &episode_anchors,
            &episode_instances,
        ));
        anchors.extend(episode_anchors);
        instances.extend(episode_instances);
    }

    let mut baseline = bigram_baseline(&instances)?;
    if !config.excluded_bigrams.is_empty() {
        windows = exclude_bigrams(&windows, &config.excluded_bigrams)?;
        baseline = baseline.excluding(&config.excluded_bigrams)?;
    }

    let deviations: Vec<KeystrokeDeviation> = windows
        .iter()
        .map(|w| keystroke_deviation(w, &baseline))
        .collect::<Result<_>>()?;

    let nn = filter_ectopic_malik(rr, config.malik_tolerance)?;
    let hrv_windows = window_hrv(&nn, &anchors, config.min_intervals);
    let hrv_base = hrv_baseline(&hrv_windows)?;

    let aligned = align(&deviations, &hrv_windows, &hrv_base)?;
    let coverage = coverage_summary(&windows, anchors.len())?;
    let report = CorrelationReport::build(
        &aligned,
        coverage,
        baseline.grand_mean,
        hrv_base.mean_sdnn_ms,
        config.excluded_bigrams.iter().copied().collect(),
    )?;

    let Aligned { pairs, .. } = aligned;
    Ok(Analysis {
        episodes,
        instances,
        windows,
        baseline,
        deviations,
        hrv_windows,
        hrv_baseline: hrv_base,
        pairs,
        coverage,
        report,
    })
}

/// Files written by [`run_analyze`].
#[derive(Debug, Clone)]
pub struct AnalyzeOutcome {
    pub analysis: Analysis,
    pub baseline_csv: PathBuf,
    pub windows_csv: PathBuf,
    pub hrv_windows_csv: PathBuf,
    pub scatter_csv: PathBuf,
    pub report_json: PathBuf,
}

/// Parse the input files, run the analysis, and write all exports into
/// `config.out_dir`.
pub fn run_analyze(
    keystrokes_path: &Path,
    rr_path: &Path,
    keymap_path: Option<&Path>,
    config: &AnalysisConfig,
) -> Result<AnalyzeOutcome> {
    config.validate()?;
    let keymap = match keymap_path {
        Some(path) => Keymap::from_path(path)?,
        None => Keymap::ascii(),
    };
    let events = read_keystroke_file(keystrokes_path, &keymap, config.strict_keymap)?;
    let rr = read_rr_file(rr_path, config)?;

    let analysis = analyze_data(&events, &rr, config)?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::Io {
        path: config.out_dir.clone(),
        source: e,
    })?;
    let baseline_csv = config.out_dir.join("baseline.csv");
    let windows_csv = config.out_dir.join("windows.csv");
    let hrv_windows_csv = config.out_dir.join("hrv_windows.csv");
    let scatter_csv = config.out_dir.join("scatter.csv");
    let report_json = config.out_dir.join("report.json");

    write_baseline_csv(&baseline_csv, &analysis.baseline)?;
    write_windows_csv(&windows_csv, &analysis.windows)?;
    write_hrv_windows_csv(&hrv_windows_csv, &analysis.hrv_windows)?;
    write_scatter_csv(&scatter_csv, &analysis.pairs)?;
    write_report_json(&report_json, &analysis.report)?;

    Ok(AnalyzeOutcome {
        analysis,
        baseline_csv,
        windows_csv,
        hrv_windows_csv,
        scatter_csv,
        report_json,
    })
}

/// Compute and export only the bigram baseline.
pub fn run_baseline(
    keystrokes_path: &Path,
    keymap_path: Option<&Path>,
    config: &AnalysisConfig,
) -> Result<(BigramBaseline, PathBuf)> {
    config.validate()?;
    let keymap = match keymap_path {
        Some(path) => Keymap::from_path(path)?,
        None => Keymap::ascii(),
    };
    let events = read_keystroke_file(keystrokes_path, &keymap, config.strict_keymap)?;
    let bigram_set = config.bigram_set();

    let mut instances = Vec::new();
    for episode in segment_episodes(&events, config.gap_threshold_ms) {
        instances.extend(extract_bigram_instances(
            &episode,
            &bigram_set,
            config.cutoff_ms,
            config.non_letter_policy,
        ));
    }
    let mut baseline = bigram_baseline(&instances)?;
    if !config.excluded_bigrams.is_empty() {
        baseline = baseline.excluding(&config.excluded_bigrams)?;
    }

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::Io {
        path: config.out_dir.clone(),
        source: e,
    })?;
    let path = config.out_dir.join("baseline.csv");
    write_baseline_csv(&path, &baseline)?;
    Ok((baseline, path))
}

/// Compute and export only the windowed HRV metrics, on a grid anchored at
/// `config.rr_start_ms` and covering the whole recording.
pub fn run_hrv(
    rr_path: &Path,
    config: &AnalysisConfig,
) -> Result<(Vec<HrvWindow>, HrvBaseline, PathBuf)> {
    config.validate()?;
    let rr = read_rr_file(rr_path, config)?;
    let nn = filter_ectopic_malik(&rr, config.malik_tolerance)?;
    let end = nn
        .samples
        .last()
        .map(|s| s.end_ms)
        .ok_or(Error::EmptySeries)?;
    let anchors =
        crate::window::anchors_for_span(config.rr_start_ms, end, config.window_ms, config.step_ms);
    let windows = window_hrv(&nn, &anchors, config.min_intervals);
    let baseline = hrv_baseline(&windows)?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::Io {
        path: config.out_dir.clone(),
        source: e,
    })?;
    let path = config.out_dir.join("hrv_windows.csv");
    write_hrv_windows_csv(&path, &windows)?;
    Ok((windows, baseline, path))
}

/// Files written by [`run_synth`].
#[derive(Debug, Clone)]
pub struct SynthOutcome {
    pub keystrokes_csv: PathBuf,
    pub rr_txt: PathBuf,
    pub ground_truth_csv: PathBuf,
}

/// Generate a session and write it in the canonical ingest formats plus a
/// ground-truth stress file.
pub fn run_synth(spec: &SessionSpec, out_dir: &Path) -> Result<SynthOutcome> {
    let generated = generate(spec)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;

    let keystrokes_csv = out_dir.join("keystrokes.csv");
    let rr_txt = out_dir.join("rr.txt");
    let ground_truth_csv = out_dir.join("ground_truth.csv");

    let keymap = Keymap::ascii();
    let mut w = create(&keystrokes_csv)?;
    write_keystrokes(&mut w, &generated.key_events, &keymap)
        .map_err(|e| e.in_file(&keystrokes_csv))?;
    finish(w, &keystrokes_csv)?;

    let mut w = create(&rr_txt)?;
    write_rr(&mut w, &generated.rr).map_err(|e| e.in_file(&rr_txt))?;
    finish(w, &rr_txt)?;

    let mut w = create(&ground_truth_csv)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "window_start_ms,stress")?;
        for g in &generated.ground_truth {
            writeln!(w, "{},{}", g.start_ms, g.stress)?;
        }
        Ok(())
    })()
    .map_err(|e| Error::Io {
        path: ground_truth_csv.clone(),
        source: e,
    })?;
    finish(w, &ground_truth_csv)?;

    Ok(SynthOutcome {
        keystrokes_csv,
        rr_txt,
        ground_truth_csv,
    })
}

/// [`run_synth`] driven by a spec file.
pub fn run_synth_file(spec_path: &Path, out_dir: &Path) -> Result<SynthOutcome> {
    let spec = SessionSpec::from_path(spec_path)?;
    run_synth(&spec, out_dir)
}

fn read_keystroke_file(path: &Path, keymap: &Keymap, strict: bool) -> Result<Vec<KeyEvent>> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let parsed = parse_keystrokes(std::io::BufReader::new(file), keymap, strict)
        .map_err(|e| e.in_file(path))?;
    Ok(parsed.events)
}

fn read_rr_file(path: &Path, config: &AnalysisConfig) -> Result<RrSeries> {
    let file = File::open(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let parsed = parse_rr(
        std::io::BufReader::new(file),
        config.rr_start_ms,
        config.rr_band(),
    )
    .map_err(|e| e.in_file(path))?;
    Ok(parsed.series)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_baseline_csv(path: &Path, baseline: &BigramBaseline) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "bigram,baseline_ms")?;
        for (bigram, mean) in &baseline.per_bigram_mean {
            writeln!(w, "{bigram},{mean}")?;
        }
        Ok(())
    })()
    .map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    finish(w, path)
}

fn write_windows_csv(path: &Path, windows: &[LatencyWindow]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "episode_id,start_ms,bigram,mean_latency_ms,n")?;
        for window in windows {
            for (bigram, stat) in &window.per_bigram {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    window.episode_id, window.start_ms, bigram, stat.mean_ms, stat.n
                )?;
            }
        }
        Ok(())
    })()
    .map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    finish(w, path)
}

fn write_hrv_windows_csv(path: &Path, windows: &[HrvWindow]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "start_ms,sdnn_ms,rmssd_ms,n_intervals")?;
        for window in windows {
            writeln!(
                w,
                "{},{},{},{}",
                window.start_ms, window.sdnn_ms, window.rmssd_ms, window.n_intervals
            )?;
        }
        Ok(())
    })()
    .map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    finish(w, path)
}

fn write_scatter_csv(path: &Path, pairs: &[PairedSample]) -> Result<()> {
    let mut w = create(path)?;
    (|| -> std::io::Result<()> {
        writeln!(w, "start_ms,keystroke_deviation,sdnn_ms,hrv_deviation")?;
        for p in pairs {
            writeln!(
                w,
                "{},{},{},{}",
                p.start_ms, p.keystroke_deviation, p.sdnn_ms, p.hrv_deviation
            )?;
        }
        Ok(())
    })()
    .map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    finish(w, path)
}

fn write_report_json(path: &Path, report: &CorrelationReport) -> Result<()> {
    let mut w = create(path)?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Degenerate(format!("report serialization: {e}")))?;
    (|| -> std::io::Result<()> {
        w.write_all(json.as_bytes())?;
        w.write_all(b"\n")
    })()
    .map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    finish(w, path)
}
