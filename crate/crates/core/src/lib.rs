//! Reliability evaluation for classifiers facing mixed in-distribution (ID)
//! and out-of-distribution (OOD) inputs.
//!
//! A sample is accepted only when both an ID-oriented score and an
//! OOD-oriented score clear their thresholds. Over a grid of threshold pairs
//! the crate computes DS-F1 (best F1 of accepting correct ID samples) and
//! DS-AURC (area under the lower envelope of selective risk versus coverage),
//! next to the classical single-score F1, AURC, AUROC, FPR@95 and AUPR.
//!
//! ```
//! use dualscore::{ds_f1, fixtures, ThresholdGrid};
//!
//! let set = fixtures::five_sample();
//! let grid = ThresholdGrid::exhaustive(&set, "s_id", "s_ood").unwrap();
//! let result = ds_f1(&set, "s_id", "s_ood", &grid, false).unwrap();
//! assert_eq!(result.value, 0.8);
//! ```

pub mod binning;
pub mod cli;
pub mod dataset;
pub mod detection;
pub mod ds;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod ingest;
pub mod oracle;
pub mod report;
pub mod scoring;
pub mod selection;
pub mod single;
pub mod sweep;
pub mod synth;

pub use binning::{BinnedCurve, RiskCoveragePoint, DEFAULT_K_BINS};
pub use dataset::{acceptance_set, EvalSet, Origin, Population, SampleRecord, ThresholdPair};
pub use ds::{
    confusion_counts, ds_aurc, ds_f1, ds_risk_points, ds_sweep_fast, ConfusionCounts, DoubleSweep,
    DsResult, Execution, SurfaceRow,
};
pub use error::{Error, Result};
pub use grid::{GridSpec, ThresholdAxis, ThresholdGrid, DEFAULT_T_GRID};
pub use report::{evaluate, EvalOptions, MetricReport};
pub use selection::{apply_thresholds, select_thresholds, test_opt, transfer, FrozenPair, Mode};
pub use single::{best_f1_single, channel_aurc, coverage, risk_coverage_curve, selective_risk};
pub use sweep::SweepTables;
pub use synth::{generate, SynthConfig};
