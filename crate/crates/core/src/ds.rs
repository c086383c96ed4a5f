//! Double-scoring metrics: confusion accounting over threshold pairs, DS-F1
//! and DS-AURC.
//!
//! At a pair `(tau_id, tau_ood)` the accepted set `A` holds samples passing
//! both thresholds. True accepts are accepted correct ID samples; false
//! accepts are accepted OOD samples plus accepted misclassified ID samples;
//! false rejects are ID samples that are rejected or misclassified. An
//! accepted misclassified ID sample counts as both FA and FR, which keeps
//! `TA + FR = |D_ID|` and `TA + FA = |A|`.
//!
//! DS-F1 is the best F1 over the grid. DS-AURC bins every pair's
//! (coverage, risk) point and keeps the minimum risk per coverage bin before
//! integrating, see [`crate::binning`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binning::{BinAccumulator, BinnedCurve, RiskCoveragePoint};
use crate::dataset::{EvalSet, ThresholdPair};
use crate::error::Result;
use crate::grid::ThresholdGrid;
use crate::sweep::SweepTables;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub ta: u64,
    pub fa: u64,
    pub fr: u64,
    pub accepted_total: u64,
    pub accepted_id: u64,
    pub accepted_ood: u64,
}

impl ConfusionCounts {
    pub fn from_accepted(n_id: u64, ta: u64, accepted_id: u64, accepted_ood: u64) -> Self {
        debug_assert!(ta <= accepted_id && accepted_id <= n_id);
        let accepted_total = accepted_id + accepted_ood;
        ConfusionCounts {
            ta,
            fa: accepted_total - ta,
            fr: n_id - ta,
            accepted_total,
            accepted_id,
            accepted_ood,
        }
    }

    pub fn n_id(&self) -> u64 {
        self.ta + self.fr
    }

    /// `TA / |A|`, zero on an empty acceptance set.
    pub fn precision(&self) -> f64 {
        if self.accepted_total == 0 {
            0.0
        } else {
            self.ta as f64 / self.accepted_total as f64
        }
    }

    pub fn recall(&self) -> f64 {
        self.ta as f64 / self.n_id() as f64
    }

    /// Harmonic mean of precision and recall, written as `2 TA / (|A| + |D_ID|)`.
    pub fn f1(&self) -> f64 {
        if self.ta == 0 {
            0.0
        } else {
            (2 * self.ta) as f64 / (self.accepted_total + self.n_id()) as f64
        }
    }

    /// Fraction of ID samples accepted.
    pub fn coverage(&self) -> f64 {
        self.accepted_id as f64 / self.n_id() as f64
    }

    /// Failures among accepted samples (misclassified ID plus OOD), zero when
    /// nothing is accepted.
    pub fn risk(&self) -> f64 {
        if self.accepted_total == 0 {
            0.0
        } else {
            self.fa as f64 / self.accepted_total as f64
        }
    }
}

pub fn f1_from_counts(counts: &ConfusionCounts) -> f64 {
    counts.f1()
}

/// Direct per-sample count at one pair.
pub fn confusion_counts(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    pair: ThresholdPair,
) -> Result<ConfusionCounts> {
    let s_id = set.channel(ch_id)?;
    let s_ood = set.channel(ch_ood)?;
    let mut accepted = [0u64; 3];
    for ((&a, &b), population) in s_id.iter().zip(s_ood).zip(set.populations()) {
        if a >= pair.tau_id && b >= pair.tau_ood {
            accepted[population.index()] += 1;
        }
    }
    let [correct, wrong, ood] = accepted;
    Ok(ConfusionCounts::from_accepted(
        set.n_id() as u64,
        correct,
        correct + wrong,
        ood,
    ))
}

/// Counts for an arbitrary accepted index set.
pub fn counts_for_accepted(set: &EvalSet, accepted: &[usize]) -> ConfusionCounts {
    let mut tally = [0u64; 3];
    for &i in accepted {
        tally[set.populations()[i].index()] += 1;
    }
    let [correct, wrong, ood] = tally;
    ConfusionCounts::from_accepted(set.n_id() as u64, correct, correct + wrong, ood)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    #[default]
    Sequential,
    /// Rows of the grid are evaluated on the rayon pool. Results are
    /// bit-identical to sequential execution.
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRiskPoint {
    pub coverage: f64,
    pub risk: f64,
    pub pair: ThresholdPair,
}

/// One cell of the F1 / risk surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub tau_id: f64,
    pub tau_ood: f64,
    pub coverage: f64,
    pub risk: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsResult {
    pub value: f64,
    /// Achieving pair, DS-F1 only.
    pub best_pair: Option<ThresholdPair>,
    pub surface: Option<Vec<SurfaceRow>>,
    /// Filled per-bin minimum risk, DS-AURC only.
    pub curve: Option<BinnedCurve>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F1Optimum {
    pub value: f64,
    pub pair: ThresholdPair,
    pub id_index: usize,
    pub ood_index: usize,
}

#[derive(Clone, Copy)]
struct Candidate {
    value: f64,
    ood_index: usize,
    id_index: usize,
}

impl Candidate {
    /// Higher F1 wins; ties go to the lexicographically smaller `(tau_ood, tau_id)`.
    fn better(self, other: Candidate) -> Candidate {
        if self.value > other.value
            || (self.value == other.value
                && (self.ood_index, self.id_index) < (other.ood_index, other.id_index))
        {
            self
        } else {
            other
        }
    }
}

/// Grid-product evaluation backed by [`SweepTables`].
#[derive(Debug, Clone)]
pub struct DoubleSweep {
    grid: ThresholdGrid,
    tables: SweepTables,
    execution: Execution,
}

impl DoubleSweep {
    pub fn new(set: &EvalSet, ch_id: &str, ch_ood: &str, grid: ThresholdGrid) -> Result<Self> {
        let tables = SweepTables::build(set, ch_id, ch_ood, &grid)?;
        Ok(DoubleSweep {
            grid,
            tables,
            execution: Execution::Sequential,
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn grid(&self) -> &ThresholdGrid {
        &self.grid
    }

    pub fn tables(&self) -> &SweepTables {
        &self.tables
    }

    pub fn pair(&self, id_index: usize, ood_index: usize) -> ThresholdPair {
        ThresholdPair::new(
            self.grid.id.thresholds()[id_index],
            self.grid.ood.thresholds()[ood_index],
        )
    }

    fn row_best(&self, ood_index: usize) -> Candidate {
        let mut best = Candidate {
            value: f64::NEG_INFINITY,
            ood_index,
            id_index: 0,
        };
        for id_index in 0..self.tables.id_len() {
            let value = self.tables.counts(id_index, ood_index).f1();
            if value > best.value {
                best = Candidate {
                    value,
                    ood_index,
                    id_index,
                };
            }
        }
        best
    }

    pub fn best_f1(&self) -> F1Optimum {
        let rows = 0..self.tables.ood_len();
        let best = match self.execution {
            Execution::Sequential => rows.map(|j| self.row_best(j)).reduce(Candidate::better),
            Execution::Parallel => rows
                .into_par_iter()
                .map(|j| self.row_best(j))
                .reduce_with(Candidate::better),
        }
        .expect("grid has at least one row");
        F1Optimum {
            value: best.value,
            pair: self.pair(best.id_index, best.ood_index),
            id_index: best.id_index,
            ood_index: best.ood_index,
        }
    }

    fn row_bins(&self, ood_index: usize, acc: &mut BinAccumulator) {
        for id_index in 0..self.tables.id_len() {
            let counts = self.tables.counts(id_index, ood_index);
            acc.push(counts.coverage(), counts.risk());
        }
    }

    /// Per-bin minimum risk over all pairs, filled.
    pub fn binned_risk(&self, k_bins: usize) -> Result<BinnedCurve> {
        let empty = BinAccumulator::new(k_bins)?;
        let rows = 0..self.tables.ood_len();
        let acc = match self.execution {
            Execution::Sequential => {
                let mut acc = empty;
                for j in rows {
                    self.row_bins(j, &mut acc);
                }
                acc
            }
            Execution::Parallel => rows
                .into_par_iter()
                .fold(
                    || empty.clone(),
                    |mut acc, j| {
                        self.row_bins(j, &mut acc);
                        acc
                    },
                )
                .reduce(
                    || empty.clone(),
                    |mut a, b| {
                        a.merge(&b);
                        a
                    },
                ),
        };
        acc.finish()
    }

    /// One point per pair, ood-major then id, both ascending.
    pub fn risk_points(&self) -> Vec<PairRiskPoint> {
        let mut points = Vec::with_capacity(self.grid.pairs());
        for j in 0..self.tables.ood_len() {
            for i in 0..self.tables.id_len() {
                let counts = self.tables.counts(i, j);
                points.push(PairRiskPoint {
                    coverage: counts.coverage(),
                    risk: counts.risk(),
                    pair: self.pair(i, j),
                });
            }
        }
        points
    }

    pub fn surface(&self) -> Vec<SurfaceRow> {
        let mut rows = Vec::with_capacity(self.grid.pairs());
        for j in 0..self.tables.ood_len() {
            for i in 0..self.tables.id_len() {
                let counts = self.tables.counts(i, j);
                let pair = self.pair(i, j);
                rows.push(SurfaceRow {
                    tau_id: pair.tau_id,
                    tau_ood: pair.tau_ood,
                    coverage: counts.coverage(),
                    risk: counts.risk(),
                    f1: counts.f1(),
                });
            }
        }
        rows
    }
}

pub fn ds_sweep_fast(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    grid: &ThresholdGrid,
) -> Result<SweepTables> {
    SweepTables::build(set, ch_id, ch_ood, grid)
}

pub fn ds_f1(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    grid: &ThresholdGrid,
    with_surface: bool,
) -> Result<DsResult> {
    let sweep = DoubleSweep::new(set, ch_id, ch_ood, grid.clone())?;
    let best = sweep.best_f1();
    Ok(DsResult {
        value: best.value,
        best_pair: Some(best.pair),
        surface: with_surface.then(|| sweep.surface()),
        curve: None,
    })
}

pub fn ds_risk_points(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    grid: &ThresholdGrid,
) -> Result<Vec<PairRiskPoint>> {
    Ok(DoubleSweep::new(set, ch_id, ch_ood, grid.clone())?.risk_points())
}

pub fn ds_aurc(
    set: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    grid: &ThresholdGrid,
    k_bins: usize,
    with_surface: bool,
) -> Result<DsResult> {
    let sweep = DoubleSweep::new(set, ch_id, ch_ood, grid.clone())?;
    let curve = sweep.binned_risk(k_bins)?;
    Ok(DsResult {
        value: curve.area(),
        best_pair: None,
        surface: with_surface.then(|| sweep.surface()),
        curve: Some(curve),
    })
}

/// Pair points flattened to single-threshold points (threshold = `tau_id`),
/// for reuse with [`crate::binning::aurc`].
pub fn as_curve_points(points: &[PairRiskPoint]) -> Vec<RiskCoveragePoint> {
    points
        .iter()
        .map(|p| RiskCoveragePoint {
            coverage: p.coverage,
            risk: p.risk,
            threshold: p.pair.tau_id,
        })
        .collect()
}
