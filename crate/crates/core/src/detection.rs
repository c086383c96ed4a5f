//! Threshold-free OOD detection metrics with ID as the positive class
//! (higher score means more ID).

use crate::error::{Error, Result};

fn check_sides(id: &[f64], ood: &[f64]) -> Result<()> {
    if id.is_empty() {
        return Err(Error::EmptySide("id"));
    }
    if ood.is_empty() {
        return Err(Error::EmptySide("ood"));
    }
    Ok(())
}

/// Mann-Whitney statistic normalized to `[0, 1]`; ties count one half.
pub fn auroc(id: &[f64], ood: &[f64]) -> Result<f64> {
    check_sides(id, ood)?;
    let mut all: Vec<(f64, bool)> = id
        .iter()
        .map(|&s| (s, true))
        .chain(ood.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));

    // twice the rank sum of the ID scores, kept integral
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end].0 == all[start].0 {
            end += 1;
        }
        // ranks start+1 ..= end share the midrank (start + 1 + end) / 2
        let ids_in_group = all[start..end].iter().filter(|(_, is_id)| *is_id).count() as u128;
        twice_rank_sum += ids_in_group * (start + 1 + end) as u128;
        start = end;
    }
    let n_id = id.len() as u128;
    let twice_u = twice_rank_sum - n_id * (n_id + 1);
    Ok(twice_u as f64 / (2 * n_id * ood.len() as u128) as f64)
}

/// Smallest false-positive rate among thresholds whose true-positive rate
/// reaches `tpr`.
pub fn fpr_at_tpr(id: &[f64], ood: &[f64], tpr: f64) -> Result<f64> {
    check_sides(id, ood)?;
    if !(tpr > 0.0 && tpr <= 1.0) {
        return Err(Error::InvalidArgument(format!("tpr must lie in (0, 1], got {tpr}")));
    }
    let mut sorted_id = id.to_vec();
    sorted_id.sort_by(|a, b| b.total_cmp(a));
    let n = id.len();
    let needed = (1..=n)
        .find(|&k| k as f64 / n as f64 >= tpr)
        .unwrap_or(n);
    // the highest threshold keeping `needed` ID samples
    let threshold = sorted_id[needed - 1];
    let false_positives = ood.iter().filter(|&&s| s >= threshold).count();
    Ok(false_positives as f64 / ood.len() as f64)
}

pub fn fpr_at_95_tpr(id: &[f64], ood: &[f64]) -> Result<f64> {
    fpr_at_tpr(id, ood, 0.95)
}

/// Average precision with step interpolation: `sum (R_k - R_{k-1}) P_k`
/// over descending distinct thresholds.
pub fn aupr(id: &[f64], ood: &[f64]) -> Result<f64> {
    check_sides(id, ood)?;
    let mut all: Vec<(f64, bool)> = id
        .iter()
        .map(|&s| (s, true))
        .chain(ood.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let n_id = id.len() as f64;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut prev_recall = 0.0;
    let mut area = 0.0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start;
        while end < all.len() && all[end].0 == all[start].0 {
            if all[end].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            end += 1;
        }
        let recall = tp as f64 / n_id;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        start = end;
    }
    Ok(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pairwise_auroc(id: &[f64], ood: &[f64]) -> f64 {
        let mut wins = 0.0;
        for &a in id {
            for &b in ood {
                wins += if a > b { 1.0 } else if a == b { 0.5 } else { 0.0 };
            }
        }
        wins / (id.len() * ood.len()) as f64
    }

    fn threshold_scan_aupr(id: &[f64], ood: &[f64]) -> f64 {
        let mut thresholds: Vec<f64> = id.iter().chain(ood).copied().collect();
        thresholds.sort_by(|a, b| b.total_cmp(a));
        thresholds.dedup();
        let mut prev = 0.0;
        let mut area = 0.0;
        for t in thresholds {
            let tp = id.iter().filter(|&&s| s >= t).count() as f64;
            let fp = ood.iter().filter(|&&s| s >= t).count() as f64;
            let recall = tp / id.len() as f64;
            area += (recall - prev) * if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            prev = recall;
        }
        area
    }

    #[test]
    fn perfect_separation() {
        let (id, ood) = ([2.0, 3.0], [0.0, 1.0]);
        assert_eq!(auroc(&id, &ood).unwrap(), 1.0);
        assert_eq!(fpr_at_95_tpr(&id, &ood).unwrap(), 0.0);
        assert_eq!(aupr(&id, &ood).unwrap(), 1.0);
        assert_eq!(auroc(&ood, &id).unwrap(), 0.0);
    }

    #[test]
    fn all_ties() {
        assert_eq!(auroc(&[1.0; 4], &[1.0; 7]).unwrap(), 0.5);
        assert_eq!(fpr_at_95_tpr(&[1.0; 4], &[1.0; 7]).unwrap(), 1.0);
    }

    #[test]
    fn shuffled_ten_sample_fixture() {
        let id = [0.31, 0.77, 0.52, 0.52, 0.9];
        let ood = [0.12, 0.52, 0.64, 0.05, 0.31];
        assert_abs_diff_eq!(auroc(&id, &ood).unwrap(), pairwise_auroc(&id, &ood), epsilon = 1e-15);
        assert_abs_diff_eq!(auroc(&id, &ood).unwrap(), 0.78, epsilon = 1e-15);
        assert_abs_diff_eq!(aupr(&id, &ood).unwrap(), threshold_scan_aupr(&id, &ood), epsilon = 1e-15);
    }

    #[test]
    fn fpr_uses_highest_qualifying_threshold() {
        let id: Vec<f64> = (1..=20).map(f64::from).collect();
        // 19 of 20 ID scores are >= 2, so threshold 2 keeps TPR at 0.95
        let ood = [1.5, 2.0, 2.5, 30.0];
        assert_abs_diff_eq!(fpr_at_95_tpr(&id, &ood).unwrap(), 0.75);
    }

    #[test]
    fn empty_sides() {
        assert!(matches!(auroc(&[], &[1.0]), Err(Error::EmptySide("id"))));
        assert!(matches!(aupr(&[1.0], &[]), Err(Error::EmptySide("ood"))));
        assert!(fpr_at_tpr(&[1.0], &[1.0], 0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn auroc_matches_pairwise_and_flips_under_negation(
            id in proptest::collection::vec(-50i32..50, 1..40),
            ood in proptest::collection::vec(-50i32..50, 1..40),
        ) {
            let id: Vec<f64> = id.into_iter().map(|v| v as f64 / 4.0).collect();
            let ood: Vec<f64> = ood.into_iter().map(|v| v as f64 / 4.0).collect();
            let a = auroc(&id, &ood).unwrap();
            proptest::prop_assert!((a - pairwise_auroc(&id, &ood)).abs() <= 1e-12);
            let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
            // ties stay ties under negation, so the identity holds with half credit too
            let flipped = auroc(&neg(&id), &neg(&ood)).unwrap();
            proptest::prop_assert!((flipped - (1.0 - a)).abs() <= 1e-12);
            let ap = aupr(&id, &ood).unwrap();
            proptest::prop_assert!((ap - threshold_scan_aupr(&id, &ood)).abs() <= 1e-12);
        }
    }
}
