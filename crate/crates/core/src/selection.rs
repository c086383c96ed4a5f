//! Validation-to-test threshold transfer.
//!
//! Thresholds are chosen to maximize F1 on a validation set (ID channel
//! only, OOD channel only, or both), frozen as raw score values, and applied
//! unchanged to a test set. `test_opt` repeats the search on the test set
//! itself, which leaks test labels and only serves as an upper reference.

use serde::{Deserialize, Serialize};

use crate::dataset::EvalSet;
use crate::ds::{ConfusionCounts, DoubleSweep};
use crate::error::Result;
use crate::grid::{GridSpec, ThresholdAxis, ThresholdGrid};
use crate::single::best_f1_single;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    IdOnly,
    OodOnly,
    Double,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::IdOnly, Mode::OodOnly, Mode::Double];

    pub fn label(self) -> &'static str {
        match self {
            Mode::IdOnly => "ID-only",
            Mode::OodOnly => "OOD-only",
            Mode::Double => "Double Scoring",
        }
    }
}

/// Frozen thresholds; `None` means accept-all on that channel, so a
/// validation sentinel never leaks into the test set as a raw value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrozenPair {
    pub tau_id: Option<f64>,
    pub tau_ood: Option<f64>,
}

impl FrozenPair {
    fn from_axes(id: &ThresholdAxis, id_index: usize, ood: &ThresholdAxis, ood_index: usize) -> Self {
        FrozenPair {
            tau_id: (!id.is_sentinel(id_index)).then(|| id.thresholds()[id_index]),
            tau_ood: (!ood.is_sentinel(ood_index)).then(|| ood.thresholds()[ood_index]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub mode: Mode,
    pub frozen: FrozenPair,
    /// Optimum F1 on the split the thresholds were selected on.
    pub val_f1: f64,
    /// F1 of the frozen thresholds on the test split, once applied.
    pub test_f1: Option<f64>,
    pub test_counts: Option<ConfusionCounts>,
}

fn axis(set: &EvalSet, channel: &str, spec: GridSpec) -> Result<ThresholdAxis> {
    spec.axis(set.channel(channel)?, true)
}

pub fn select_thresholds(
    val: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    mode: Mode,
    spec: GridSpec,
) -> Result<SelectionResult> {
    let (val_f1, frozen) = match mode {
        Mode::IdOnly => {
            let grid = axis(val, ch_id, spec)?;
            val.channel(ch_ood)?;
            let (f1, tau) = best_f1_single(val, ch_id, &grid)?;
            let index = grid.thresholds().iter().position(|&t| t == tau).unwrap();
            let tau_id = (!grid.is_sentinel(index)).then_some(tau);
            (f1, FrozenPair { tau_id, tau_ood: None })
        }
        Mode::OodOnly => {
            let grid = axis(val, ch_ood, spec)?;
            val.channel(ch_id)?;
            let (f1, tau) = best_f1_single(val, ch_ood, &grid)?;
            let index = grid.thresholds().iter().position(|&t| t == tau).unwrap();
            let tau_ood = (!grid.is_sentinel(index)).then_some(tau);
            (f1, FrozenPair { tau_id: None, tau_ood })
        }
        Mode::Double => {
            let grid = ThresholdGrid::build(val, ch_id, ch_ood, spec, true)?;
            let sweep = DoubleSweep::new(val, ch_id, ch_ood, grid)?;
            let best = sweep.best_f1();
            let g = sweep.grid();
            (
                best.value,
                FrozenPair::from_axes(&g.id, best.id_index, &g.ood, best.ood_index),
            )
        }
    };
    Ok(SelectionResult {
        mode,
        frozen,
        val_f1,
        test_f1: None,
        test_counts: None,
    })
}

/// One confusion evaluation at the frozen thresholds; no re-optimization.
pub fn apply_thresholds(
    test: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    frozen: FrozenPair,
) -> Result<(f64, ConfusionCounts)> {
    let s_id = test.channel(ch_id)?;
    let s_ood = test.channel(ch_ood)?;
    let passes = |threshold: Option<f64>, score: f64| threshold.is_none_or(|t| score >= t);
    let accepted: Vec<usize> = (0..test.len())
        .filter(|&i| passes(frozen.tau_id, s_id[i]) && passes(frozen.tau_ood, s_ood[i]))
        .collect();
    let counts = crate::ds::counts_for_accepted(test, &accepted);
    Ok((counts.f1(), counts))
}

/// Selects on `val` and evaluates the frozen thresholds on `test`.
pub fn transfer(
    val: &EvalSet,
    test: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    mode: Mode,
    spec: GridSpec,
) -> Result<SelectionResult> {
    let mut result = select_thresholds(val, ch_id, ch_ood, mode, spec)?;
    let (f1, counts) = apply_thresholds(test, ch_id, ch_ood, result.frozen)?;
    result.test_f1 = Some(f1);
    result.test_counts = Some(counts);
    Ok(result)
}

/// Thresholds selected directly on the test set.
pub fn test_opt(
    test: &EvalSet,
    ch_id: &str,
    ch_ood: &str,
    mode: Mode,
    spec: GridSpec,
) -> Result<SelectionResult> {
    transfer(test, test, ch_id, ch_ood, mode, spec)
}
