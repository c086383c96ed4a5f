//! Confusion counts for every threshold pair of a grid in `O(N log T + T_id * T_ood)`.
//!
//! Each sample is bucketed once by the largest threshold it reaches on each
//! axis, split into three populations (ID-correct, ID-wrong, OOD). A
//! two-dimensional suffix sum over the bucket counts then gives, for every
//! pair `(i, j)`, the number of samples of each population whose buckets
//! dominate `(i, j)` — exactly the accepted samples at that pair.

use crate::dataset::EvalSet;
use crate::ds::ConfusionCounts;
use crate::error::{Error, Result};
use crate::grid::ThresholdGrid;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepTables {
    id_len: usize,
    ood_len: usize,
    n_id: u64,
    /// Row-major over `(ood index, id index)`: `[correct, wrong, ood]` accepted.
    cells: Vec<[u64; 3]>,
}

impl SweepTables {
    pub fn build(set: &EvalSet, ch_id: &str, ch_ood: &str, grid: &ThresholdGrid) -> Result<Self> {
        let s_id = set.channel(ch_id)?;
        let s_ood = set.channel(ch_ood)?;
        if grid.id.is_empty() {
            return Err(Error::EmptyGrid("id"));
        }
        if grid.ood.is_empty() {
            return Err(Error::EmptyGrid("ood"));
        }
        let id_len = grid.id.len();
        let ood_len = grid.ood.len();
        let mut cells = vec![[0u64; 3]; id_len * ood_len];

        for ((&a, &b), population) in s_id.iter().zip(s_ood).zip(set.populations()) {
            if let (Some(i), Some(j)) = (grid.id.bucket(a), grid.ood.bucket(b)) {
                cells[j * id_len + i][population.index()] += 1;
            }
        }

        // suffix along the id axis, then along the ood axis
        for row in cells.chunks_mut(id_len) {
            for i in (0..id_len - 1).rev() {
                let next = row[i + 1];
                for (c, n) in row[i].iter_mut().zip(next) {
                    *c += n;
                }
            }
        }
        for j in (0..ood_len - 1).rev() {
            let (head, tail) = cells.split_at_mut((j + 1) * id_len);
            for (c, n) in head[j * id_len..].iter_mut().zip(&tail[..id_len]) {
                for k in 0..3 {
                    c[k] += n[k];
                }
            }
        }

        Ok(SweepTables {
            id_len,
            ood_len,
            n_id: set.n_id() as u64,
            cells,
        })
    }

    pub fn id_len(&self) -> usize {
        self.id_len
    }

    pub fn ood_len(&self) -> usize {
        self.ood_len
    }

    pub fn n_id(&self) -> u64 {
        self.n_id
    }

    /// Counts at `(id threshold index, ood threshold index)`.
    #[inline]
    pub fn counts(&self, id_index: usize, ood_index: usize) -> ConfusionCounts {
        let [correct, wrong, ood] = self.cells[ood_index * self.id_len + id_index];
        ConfusionCounts::from_accepted(self.n_id, correct, correct + wrong, ood)
    }

    /// Accepted true-accept counts, row-major over `(ood, id)`.
    pub fn ta_table(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c[0]).collect()
    }

    pub fn accepted_id_table(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c[0] + c[1]).collect()
    }

    pub fn accepted_ood_table(&self) -> Vec<u64> {
        self.cells.iter().map(|c| c[2]).collect()
    }
}
