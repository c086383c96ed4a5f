//! Metric reports: evaluation and selection drivers plus JSON and Markdown
//! rendering.
//!
//! Each metric carries its raw value and a display value scaled for tables
//! (x100 for rates and F1, x1000 for AURC and DS-AURC). Markdown prints
//! display values with two decimals.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binning::BinnedCurve;
use crate::dataset::{EvalSet, ThresholdPair};
use crate::detection::{aupr, auroc, fpr_at_95_tpr};
use crate::ds::{DoubleSweep, Execution};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, ThresholdGrid, DEFAULT_T_GRID};
use crate::binning::DEFAULT_K_BINS;
use crate::oracle::{oracle_ds_aurc, oracle_ds_f1};
use crate::selection::{test_opt, transfer, FrozenPair, Mode};
use crate::single::{best_f1_single, channel_aurc};

pub const METRIC_SCALE: f64 = 100.0;
pub const AURC_SCALE: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub raw: f64,
    pub display: f64,
}

impl Metric {
    pub fn scaled(raw: f64, scale: f64) -> Self {
        Metric {
            raw,
            display: raw * scale,
        }
    }

    /// Rates, F1, AUROC and friends.
    pub fn percent(raw: f64) -> Self {
        Self::scaled(raw, METRIC_SCALE)
    }

    /// AURC and DS-AURC.
    pub fn permille(raw: f64) -> Self {
        Self::scaled(raw, AURC_SCALE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub metrics: f64,
    pub aurc: f64,
}

impl Default for Scaling {
    fn default() -> Self {
        Scaling {
            metrics: METRIC_SCALE,
            aurc: AURC_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub id_channel: String,
    pub ood_channel: String,
    pub grid: GridSpec,
    pub k_bins: usize,
    pub sentinels: bool,
    pub parallel: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub n_id: usize,
    pub n_ood: usize,
    pub id_errors: usize,
    pub id_accuracy: f64,
}

impl DatasetSummary {
    pub fn of(set: &EvalSet) -> Self {
        DatasetSummary {
            n_id: set.n_id(),
            n_ood: set.n_ood(),
            id_errors: set.id_errors(),
            id_accuracy: set.id_accuracy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleMetrics {
    pub f1: Metric,
    pub f1_threshold: f64,
    pub aurc: Metric,
    /// Detection metrics need at least one OOD sample.
    pub auroc: Option<Metric>,
    pub fpr_at_95_tpr: Option<Metric>,
    pub aupr: Option<Metric>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoubleMetrics {
    pub id_channel: String,
    pub ood_channel: String,
    pub ds_f1: Metric,
    pub best_pair: ThresholdPair,
    pub ds_aurc: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleMetrics {
    pub ds_f1: Metric,
    pub best_pair: ThresholdPair,
    pub ds_aurc: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionEntry {
    pub mode: Mode,
    pub frozen: FrozenPair,
    pub val_f1: Metric,
    pub transfer_f1: Metric,
    pub test_opt_frozen: FrozenPair,
    pub test_opt_f1: Metric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tool: String,
    pub config: ConfigEcho,
    pub scaling: Scaling,
    /// The evaluated set (the test split for selection reports).
    pub dataset: DatasetSummary,
    pub validation: Option<DatasetSummary>,
    pub single: BTreeMap<String, SingleMetrics>,
    pub double: Option<DoubleMetrics>,
    pub selection: Vec<SelectionEntry>,
    pub oracle: Option<OracleMetrics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub id_channel: String,
    pub ood_channel: String,
    pub grid: GridSpec,
    pub k_bins: usize,
    pub execution: Execution,
    pub oracle: bool,
}

impl EvalOptions {
    pub fn new(id_channel: impl Into<String>, ood_channel: impl Into<String>) -> Self {
        EvalOptions {
            id_channel: id_channel.into(),
            ood_channel: ood_channel.into(),
            grid: GridSpec::Quantile(DEFAULT_T_GRID),
            k_bins: DEFAULT_K_BINS,
            execution: Execution::Sequential,
            oracle: false,
        }
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            id_channel: self.id_channel.clone(),
            ood_channel: self.ood_channel.clone(),
            grid: self.grid,
            k_bins: self.k_bins,
            sentinels: true,
            parallel: self.execution == Execution::Parallel,
            seed: None,
        }
    }
}

/// Report plus the sweep and binned curve it was computed from, for exports.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: MetricReport,
    pub sweep: DoubleSweep,
    pub curve: BinnedCurve,
}

/// Single-score metrics of one channel on a sentinel-augmented grid.
pub fn single_metrics(set: &EvalSet, channel: &str, grid: GridSpec, k_bins: usize) -> Result<SingleMetrics> {
    let axis = grid.axis(set.channel(channel)?, true)?;
    let (f1, tau) = best_f1_single(set, channel, &axis)?;
    let aurc = channel_aurc(set, channel, &axis, k_bins)?;
    let (id, ood) = set.split_channel(channel)?;
    let detection = |f: fn(&[f64], &[f64]) -> Result<f64>| -> Result<Option<Metric>> {
        if ood.is_empty() {
            Ok(None)
        } else {
            f(&id, &ood).map(|v| Some(Metric::percent(v)))
        }
    };
    Ok(SingleMetrics {
        f1: Metric::percent(f1),
        f1_threshold: tau,
        aurc: Metric::permille(aurc),
        auroc: detection(auroc)?,
        fpr_at_95_tpr: detection(fpr_at_95_tpr)?,
        aupr: detection(aupr)?,
    })
}

fn single_block(set: &EvalSet, grid: GridSpec, k_bins: usize) -> Result<BTreeMap<String, SingleMetrics>> {
    set.channel_names()
        .iter()
        .map(|c| Ok((c.clone(), single_metrics(set, c, grid, k_bins)?)))
        .collect()
}

pub fn evaluate(set: &EvalSet, options: &EvalOptions) -> Result<Evaluation> {
    let (ch_id, ch_ood) = (options.id_channel.as_str(), options.ood_channel.as_str());
    let grid = ThresholdGrid::build(set, ch_id, ch_ood, options.grid, true)?;
    let sweep = DoubleSweep::new(set, ch_id, ch_ood, grid)?.with_execution(options.execution);
    let best = sweep.best_f1();
    let curve = sweep.binned_risk(options.k_bins)?;
    let oracle = if options.oracle {
        let (f1, pair) = oracle_ds_f1(set, ch_id, ch_ood)?;
        Some(OracleMetrics {
            ds_f1: Metric::percent(f1),
            best_pair: pair,
            ds_aurc: Metric::permille(oracle_ds_aurc(set, ch_id, ch_ood, options.k_bins)?),
        })
    } else {
        None
    };
    let report = MetricReport {
        tool: format!("dualscore {}", env!("CARGO_PKG_VERSION")),
        config: options.echo(),
        scaling: Scaling::default(),
        dataset: DatasetSummary::of(set),
        validation: None,
        single: single_block(set, options.grid, options.k_bins)?,
        double: Some(DoubleMetrics {
            id_channel: ch_id.to_string(),
            ood_channel: ch_ood.to_string(),
            ds_f1: Metric::percent(best.value),
            best_pair: best.pair,
            ds_aurc: Metric::permille(curve.area()),
        }),
        selection: Vec::new(),
        oracle,
    };
    Ok(Evaluation {
        report,
        sweep,
        curve,
    })
}

/// Runs threshold transfer from `val` to `test` and the test-optimal
/// reference for each mode.
pub fn select_report(
    val: &EvalSet,
    test: &EvalSet,
    id_channel: &str,
    ood_channel: &str,
    modes: &[Mode],
    grid: GridSpec,
) -> Result<MetricReport> {
    let mut selection = Vec::with_capacity(modes.len());
    for &mode in modes {
        let moved = transfer(val, test, id_channel, ood_channel, mode, grid)?;
        let best = test_opt(test, id_channel, ood_channel, mode, grid)?;
        selection.push(SelectionEntry {
            mode,
            frozen: moved.frozen,
            val_f1: Metric::percent(moved.val_f1),
            transfer_f1: Metric::percent(moved.test_f1.unwrap_or(0.0)),
            test_opt_frozen: best.frozen,
            test_opt_f1: Metric::percent(best.test_f1.unwrap_or(0.0)),
        });
    }
    Ok(MetricReport {
        tool: format!("dualscore {}", env!("CARGO_PKG_VERSION")),
        config: ConfigEcho {
            id_channel: id_channel.to_string(),
            ood_channel: ood_channel.to_string(),
            grid,
            k_bins: DEFAULT_K_BINS,
            sentinels: true,
            parallel: false,
            seed: None,
        },
        scaling: Scaling::default(),
        dataset: DatasetSummary::of(test),
        validation: Some(DatasetSummary::of(val)),
        single: BTreeMap::new(),
        double: None,
        selection,
        oracle: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl ReportFormat {
    /// `.md` and `.markdown` select Markdown; anything else JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("md" | "markdown") => ReportFormat::Markdown,
            _ => ReportFormat::Json,
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::Usage(format!("unknown report format `{other}`"))),
        }
    }
}

pub fn render(report: &MetricReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

pub fn render_json(report: &MetricReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// Two-decimal table cell, `n/a` when absent.
pub fn cell(metric: Option<&Metric>) -> String {
    metric.map_or_else(|| "n/a".to_string(), |m| format!("{:.2}", m.display))
}

fn tau(value: Option<f64>) -> String {
    value.map_or_else(|| "accept all".to_string(), |v| format!("{v:.4}"))
}

pub fn render_markdown(report: &MetricReport) -> String {
    let mut out = String::new();
    let d = &report.dataset;
    let _ = writeln!(out, "# Reliability report\n");
    let _ = writeln!(
        out,
        "{} ID samples ({} misclassified, accuracy {:.2}%), {} OOD samples.\n",
        d.n_id,
        d.id_errors,
        d.id_accuracy * 100.0,
        d.n_ood
    );
    if let Some(v) = &report.validation {
        let _ = writeln!(
            out,
            "Validation split: {} ID samples ({} misclassified), {} OOD samples.\n",
            v.n_id, v.id_errors, v.n_ood
        );
    }

    if let Some(ds) = &report.double {
        let single = report.single.get(&ds.id_channel);
        let _ = writeln!(out, "## Single vs double scoring\n");
        let _ = writeln!(out, "| Scores | F1 | AURC | DS-F1 | DS-AURC |");
        let _ = writeln!(out, "|---|---:|---:|---:|---:|");
        let _ = writeln!(
            out,
            "| {} + {} | {} | {} | {:.2} | {:.2} |\n",
            ds.id_channel,
            ds.ood_channel,
            cell(single.map(|s| &s.f1)),
            cell(single.map(|s| &s.aurc)),
            ds.ds_f1.display,
            ds.ds_aurc.display
        );
        let _ = writeln!(
            out,
            "Best DS-F1 pair: tau_id = {}, tau_ood = {}.\n",
            ds.best_pair.tau_id, ds.best_pair.tau_ood
        );
    }

    if !report.single.is_empty() {
        let _ = writeln!(out, "## Per-channel metrics\n");
        let _ = writeln!(out, "| Channel | F1 | AURC | AUROC | FPR@95 | AUPR |");
        let _ = writeln!(out, "|---|---:|---:|---:|---:|---:|");
        for (name, m) in &report.single {
            let _ = writeln!(
                out,
                "| {name} | {} | {} | {} | {} | {} |",
                cell(Some(&m.f1)),
                cell(Some(&m.aurc)),
                cell(m.auroc.as_ref()),
                cell(m.fpr_at_95_tpr.as_ref()),
                cell(m.aupr.as_ref())
            );
        }
        out.push('\n');
    }

    if !report.selection.is_empty() {
        let _ = writeln!(out, "## Threshold transfer\n");
        let _ = writeln!(
            out,
            "| Mode | tau_id | tau_ood | Val F1 | Transfer F1 | Test-opt F1 |"
        );
        let _ = writeln!(out, "|---|---:|---:|---:|---:|---:|");
        for s in &report.selection {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:.2} | {:.2} | {:.2} |",
                s.mode.label(),
                tau(s.frozen.tau_id),
                tau(s.frozen.tau_ood),
                s.val_f1.display,
                s.transfer_f1.display,
                s.test_opt_f1.display
            );
        }
        out.push('\n');
    }

    if let Some(o) = &report.oracle {
        let _ = writeln!(
            out,
            "Brute-force check: DS-F1 {:.2}, DS-AURC {:.2}.\n",
            o.ds_f1.display, o.ds_aurc.display
        );
    }

    let grid = match report.config.grid {
        GridSpec::Exhaustive => "exhaustive".to_string(),
        GridSpec::Quantile(t) => format!("{t} quantiles"),
    };
    let _ = writeln!(
        out,
        "Grid: {grid} plus sentinels; {} coverage bins. F1, AUROC, FPR@95 and AUPR are x{}, AURC and DS-AURC x{}.",
        report.config.k_bins, report.scaling.metrics, report.scaling.aurc
    );
    out
}

pub fn write_report(report: &MetricReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render(report, format)).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: impl AsRef<Path>) -> Result<MetricReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
