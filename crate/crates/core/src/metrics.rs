//! Run metrics and the CSV files the plotting side consumes.
//!
//! Files written per run: `timeseries_<strategy>_<seed>.csv`,
//! `sinr_hist_<strategy>_<seed>.csv`, `sinr_cdf_<strategy>_<seed>.csv`.
//! `summary.csv` holds one row per run.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::hdma::HdmaKind;
use crate::sim::{HandoverEvent, HandoverKind, SimOutput};

pub const DEFAULT_PING_PONG_WINDOW_S: f64 = 1.0;
pub const DEFAULT_HIST_BIN_DB: f64 = 1.0;

pub const SUMMARY_HEADER: &str =
    "strategy,seed,handover_count,ping_pong_count,mean_sinr_db,mean_throughput_bps";
pub const TIMESERIES_HEADER: &str = "time_s,sn_ncgi,sinr_db,throughput_bps";
pub const HIST_HEADER: &str = "bin_low_db,count";
pub const CDF_HEADER: &str = "sinr_db,cumulative_fraction";

/// SN attachments and changes; releases are not handovers.
pub fn count_handovers(events: &[HandoverEvent]) -> usize {
    events
        .iter()
        .filter(|e| matches!(e.kind, HandoverKind::SnChange | HandoverKind::SnAttach))
        .count()
}

/// SN changes that return to the SN left by the previous change within
/// `window_s` seconds.
pub fn count_ping_pongs(events: &[HandoverEvent], window_s: f64) -> usize {
    let changes: Vec<_> = events
        .iter()
        .filter(|e| e.kind == HandoverKind::SnChange)
        .collect();
    changes
        .windows(2)
        .filter(|w| w[1].to == w[0].from && w[1].time_s - w[0].time_s <= window_s)
        .count()
}

/// Half-open bins `[k*w, (k+1)*w)` from the lowest to the highest occupied
/// bin, empty bins included.
pub fn histogram(samples: &[f64], bin_width: f64) -> Vec<(f64, usize)> {
    assert!(bin_width > 0.0, "bin width must be positive");
    let idx: Vec<i64> = samples
        .iter()
        .map(|s| (s / bin_width).floor() as i64)
        .collect();
    let (Some(&lo), Some(&hi)) = (idx.iter().min(), idx.iter().max()) else {
        return Vec::new();
    };
    let mut counts = vec![0usize; (hi - lo + 1) as usize];
    for i in idx {
        counts[(i - lo) as usize] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, c)| ((lo + k as i64) as f64 * bin_width, c))
        .collect()
}

/// Empirical CDF, one point per distinct value.
pub fn cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = frac,
            _ => out.push((*v, frac)),
        }
    }
    if let Some(last) = out.last_mut() {
        last.1 = 1.0;
    }
    out
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    xs.sum::<f64>() / n as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub strategy: HdmaKind,
    pub seed: u64,
    pub handover_count: usize,
    pub ping_pong_count: usize,
    pub mean_sinr_db: f64,
    pub mean_throughput_bps: f64,
    pub sinr_samples: Vec<f64>,
    pub throughput_series: Vec<(f64, f64)>,
}

impl RunMetrics {
    pub fn from_output(out: &SimOutput) -> Self {
        Self::with_window(out, DEFAULT_PING_PONG_WINDOW_S)
    }

    pub fn with_window(out: &SimOutput, ping_pong_window_s: f64) -> Self {
        let sinr_samples: Vec<f64> = out.ticks.iter().map(|t| t.sinr_db).collect();
        let throughput_series: Vec<(f64, f64)> =
            out.ticks.iter().map(|t| (t.time_s, t.throughput_bps)).collect();
        Self {
            strategy: out.strategy,
            seed: out.seed,
            handover_count: count_handovers(&out.events),
            ping_pong_count: count_ping_pongs(&out.events, ping_pong_window_s),
            mean_sinr_db: mean(sinr_samples.iter().copied()),
            mean_throughput_bps: mean(throughput_series.iter().map(|p| p.1)),
            sinr_samples,
            throughput_series,
        }
    }

    pub fn summary_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.strategy,
            self.seed,
            self.handover_count,
            self.ping_pong_count,
            fmt_sig6(self.mean_sinr_db),
            fmt_sig6(self.mean_throughput_bps)
        )
    }
}

/// `%.6g`-style rendering: six significant digits, trailing zeros trimmed,
/// exponent form outside `[1e-4, 1e6)`.
pub fn fmt_sig6(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let m = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (5 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn timeseries_path(dir: &Path, strategy: HdmaKind, seed: u64) -> PathBuf {
    dir.join(format!("timeseries_{strategy}_{seed}.csv"))
}

pub fn hist_path(dir: &Path, strategy: HdmaKind, seed: u64) -> PathBuf {
    dir.join(format!("sinr_hist_{strategy}_{seed}.csv"))
}

pub fn cdf_path(dir: &Path, strategy: HdmaKind, seed: u64) -> PathBuf {
    dir.join(format!("sinr_cdf_{strategy}_{seed}.csv"))
}

/// Writes the three per-run files for `out`.
pub fn write_run_csv(dir: &Path, out: &SimOutput, metrics: &RunMetrics) -> io::Result<()> {
    let mut w = create(&timeseries_path(dir, out.strategy, out.seed))?;
    writeln!(w, "{TIMESERIES_HEADER}")?;
    for t in &out.ticks {
        let sn = t.sn.map(|n| n.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            fmt_sig6(t.time_s),
            sn,
            fmt_sig6(t.sinr_db),
            fmt_sig6(t.throughput_bps)
        )?;
    }
    w.flush()?;

    let mut w = create(&hist_path(dir, out.strategy, out.seed))?;
    writeln!(w, "{HIST_HEADER}")?;
    for (low, count) in histogram(&metrics.sinr_samples, DEFAULT_HIST_BIN_DB) {
        writeln!(w, "{},{count}", fmt_sig6(low))?;
    }
    w.flush()?;

    let mut w = create(&cdf_path(dir, out.strategy, out.seed))?;
    writeln!(w, "{CDF_HEADER}")?;
    for (v, f) in cdf(&metrics.sinr_samples) {
        writeln!(w, "{},{}", fmt_sig6(v), fmt_sig6(f))?;
    }
    w.flush()
}

pub fn write_summary(dir: &Path, runs: &[RunMetrics]) -> io::Result<()> {
    let mut w = create(&dir.join("summary.csv"))?;
    writeln!(w, "{SUMMARY_HEADER}")?;
    for m in runs {
        writeln!(w, "{}", m.summary_row())?;
    }
    w.flush()
}
