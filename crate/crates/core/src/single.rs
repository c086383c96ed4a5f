//! Single-score metrics on mixed ID+OOD sets: coverage, selective risk,
//! risk-coverage curves, AURC and best F1 over one threshold.
//!
//! A single channel is the double-scoring rule with the other threshold at
//! its sentinel, so counts here agree exactly with [`crate::ds`] on such pairs.

use crate::binning::{self, RiskCoveragePoint};
use crate::dataset::{EvalSet, Population};
use crate::ds::{counts_for_accepted, ConfusionCounts};
use crate::error::Result;
use crate::grid::ThresholdAxis;

/// Fraction of ID samples with `score >= tau`.
pub fn coverage(set: &EvalSet, channel: &str, tau: f64) -> Result<f64> {
    Ok(single_counts(set, channel, tau)?.coverage())
}

/// Misclassified-ID plus OOD share of the accepted samples; zero when empty.
pub fn selective_risk(set: &EvalSet, accepted: &[usize]) -> f64 {
    counts_for_accepted(set, accepted).risk()
}

/// Risk counting only misclassified ID samples in the numerator (the ID-only
/// definition). Matches [`selective_risk`] whenever no OOD sample is accepted.
pub fn id_only_selective_risk(set: &EvalSet, accepted: &[usize]) -> f64 {
    if accepted.is_empty() {
        return 0.0;
    }
    let errors = accepted
        .iter()
        .filter(|&&i| set.populations()[i] == Population::IdWrong)
        .count();
    errors as f64 / accepted.len() as f64
}

pub fn single_counts(set: &EvalSet, channel: &str, tau: f64) -> Result<ConfusionCounts> {
    Ok(SingleSweep::new(set, channel)?.counts(tau))
}

/// Per-population sorted scores of one channel; counting at a threshold is
/// a binary search per population.
#[derive(Debug, Clone)]
pub struct SingleSweep {
    n_id: u64,
    sorted: [Vec<f64>; 3],
}

impl SingleSweep {
    pub fn new(set: &EvalSet, channel: &str) -> Result<Self> {
        let column = set.channel(channel)?;
        let mut sorted: [Vec<f64>; 3] = Default::default();
        for (&s, population) in column.iter().zip(set.populations()) {
            sorted[population.index()].push(s);
        }
        for v in &mut sorted {
            v.sort_by(f64::total_cmp);
        }
        Ok(SingleSweep {
            n_id: set.n_id() as u64,
            sorted,
        })
    }

    pub fn counts(&self, tau: f64) -> ConfusionCounts {
        let [correct, wrong, ood] =
            [0, 1, 2].map(|k| (self.sorted[k].len() - self.sorted[k].partition_point(|&s| s < tau)) as u64);
        ConfusionCounts::from_accepted(self.n_id, correct, correct + wrong, ood)
    }
}

/// One point per grid threshold, ordered by descending threshold.
pub fn risk_coverage_curve(
    set: &EvalSet,
    channel: &str,
    grid: &ThresholdAxis,
) -> Result<Vec<RiskCoveragePoint>> {
    let sweep = SingleSweep::new(set, channel)?;
    Ok(grid
        .thresholds()
        .iter()
        .rev()
        .map(|&tau| {
            let c = sweep.counts(tau);
            RiskCoveragePoint {
                coverage: c.coverage(),
                risk: c.risk(),
                threshold: tau,
            }
        })
        .collect())
}

pub fn aurc(points: &[RiskCoveragePoint], k_bins: usize) -> Result<f64> {
    binning::aurc(points, k_bins)
}

/// AURC of one channel over `grid`.
pub fn channel_aurc(set: &EvalSet, channel: &str, grid: &ThresholdAxis, k_bins: usize) -> Result<f64> {
    aurc(&risk_coverage_curve(set, channel, grid)?, k_bins)
}

/// Maximum F1 over the grid and the smallest threshold achieving it.
pub fn best_f1_single(set: &EvalSet, channel: &str, grid: &ThresholdAxis) -> Result<(f64, f64)> {
    let sweep = SingleSweep::new(set, channel)?;
    let mut best = (f64::NEG_INFINITY, f64::NAN);
    for &tau in grid.thresholds() {
        let f1 = sweep.counts(tau).f1();
        if f1 > best.0 {
            best = (f1, tau);
        }
    }
    Ok(best)
}
