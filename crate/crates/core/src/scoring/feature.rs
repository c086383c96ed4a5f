//! Scores computed from penultimate-layer features: Mahalanobis distance to
//! class means, k-NN cosine distance, L1 norm and principal-subspace residual.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative ridge added to the shared covariance.
pub const COVARIANCE_RIDGE: f64 = 1e-6;
/// Eigenvalues below this fraction of the largest count as zero.
const RANK_TOLERANCE: f64 = 1e-10;
pub const MAX_PCA_DIM: usize = 256;

fn dims(features: &[Vec<f64>]) -> Result<usize> {
    let d = features.first().map(Vec::len).ok_or(Error::EmptyScores)?;
    if d == 0 || features.iter().any(|f| f.len() != d) {
        return Err(Error::InvalidArgument(
            "feature vectors must share a non-zero dimension".into(),
        ));
    }
    Ok(d)
}

fn check_dim(f: &[f64], expected: usize) -> Result<()> {
    if f.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "feature dimension {} does not match fitted dimension {expected}",
            f.len()
        )));
    }
    Ok(())
}

/// Class means and the inverse of the regularized shared covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianStats {
    means: Vec<DVector<f64>>,
    precision: DMatrix<f64>,
}

impl GaussianStats {
    pub fn dim(&self) -> usize {
        self.precision.nrows()
    }

    pub fn class_means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }
}

/// Fits per-label means and a shared covariance `Sigma + lambda I` with
/// `lambda = 1e-6 * trace(Sigma) / D`.
pub fn fit_gaussian_stats(features: &[Vec<f64>], labels: &[usize]) -> Result<GaussianStats> {
    let d = dims(features)?;
    if labels.len() != features.len() {
        return Err(Error::InvalidArgument("one label per feature vector".into()));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![DVector::zeros(d); classes];
    let mut counts = vec![0usize; classes];
    for (f, &y) in features.iter().zip(labels) {
        sums[y] += DVector::from_column_slice(f);
        counts[y] += 1;
    }
    let means: Vec<DVector<f64>> = sums
        .into_iter()
        .zip(&counts)
        .filter(|(_, &c)| c > 0)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let mut index = vec![usize::MAX; classes];
    let mut next = 0;
    for (y, &c) in counts.iter().enumerate() {
        if c > 0 {
            index[y] = next;
            next += 1;
        }
    }
    let mut cov = DMatrix::zeros(d, d);
    for (f, &y) in features.iter().zip(labels) {
        let centered = DVector::from_column_slice(f) - &means[index[y]];
        cov.ger(1.0, &centered, &centered, 1.0);
    }
    cov /= features.len() as f64;
    let ridge = COVARIANCE_RIDGE * cov.trace() / d as f64;
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    let chol = cov.cholesky().ok_or(Error::SingularCovariance)?;
    Ok(GaussianStats {
        means,
        precision: chol.inverse(),
    })
}

/// `-min_c (f - mu_c)^T P (f - mu_c)`.
pub fn mahalanobis(f: &[f64], stats: &GaussianStats) -> Result<f64> {
    check_dim(f, stats.dim())?;
    let x = DVector::from_column_slice(f);
    let best = stats
        .means
        .iter()
        .map(|mu| {
            let diff = &x - mu;
            diff.dot(&(&stats.precision * &diff))
        })
        .fold(f64::INFINITY, f64::min);
    Ok(-best)
}

fn unit(f: &[f64]) -> Result<Vec<f64>> {
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(f.iter().map(|v| v / norm).collect())
}

/// L2-normalized fit features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBank {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl FeatureBank {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

pub fn build_feature_bank(features: &[Vec<f64>]) -> Result<FeatureBank> {
    let dim = dims(features)?;
    let rows = features.iter().map(|f| unit(f)).collect::<Result<_>>()?;
    Ok(FeatureBank { rows, dim })
}

/// `max(1, floor(0.005 * bank_size))`.
pub fn default_knn_k(bank_size: usize) -> usize {
    (bank_size / 200).max(1)
}

/// Negative Euclidean distance from the normalized feature to its k-th
/// nearest bank entry.
pub fn knn_score(f: &[f64], bank: &FeatureBank, k: usize) -> Result<f64> {
    check_dim(f, bank.dim)?;
    if k == 0 || k > bank.len() {
        return Err(Error::KTooLarge { k, bank: bank.len() });
    }
    let z = unit(f)?;
    let mut distances: Vec<f64> = bank
        .rows
        .iter()
        .map(|row| {
            row.iter()
                .zip(&z)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let (_, kth, _) = distances.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(-*kth)
}

pub fn l1_feature_norm(f: &[f64]) -> f64 {
    f.iter().map(|v| v.abs()).sum()
}

/// Mean of the fit features and the top-`d` principal directions as columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalBasis {
    mean: DVector<f64>,
    basis: DMatrix<f64>,
}

impl PrincipalBasis {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn components(&self) -> usize {
        self.basis.ncols()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }
}

/// `min(D - 1, 256)`.
pub fn default_pca_dim(dim: usize) -> usize {
    dim.saturating_sub(1).min(MAX_PCA_DIM)
}

pub fn fit_principal_subspace(features: &[Vec<f64>], d: usize) -> Result<PrincipalBasis> {
    let dim = dims(features)?;
    if d == 0 || d >= dim {
        return Err(Error::InvalidArgument(format!(
            "subspace dimension must lie in [1, {}), got {d}",
            dim
        )));
    }
    let n = features.len() as f64;
    let mut mean = DVector::zeros(dim);
    for f in features {
        mean += DVector::from_column_slice(f);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(dim, dim);
    for f in features {
        let centered = DVector::from_column_slice(f) - &mean;
        cov.ger(1.0, &centered, &centered, 1.0);
    }
    cov /= n;
    let eigen = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let top = eigen.eigenvalues[order[0]];
    let rank = order
        .iter()
        .take_while(|&&i| top > 0.0 && eigen.eigenvalues[i] > RANK_TOLERANCE * top)
        .count();
    if rank < d {
        return Err(Error::RankDeficient { rank, requested: d });
    }
    let basis = DMatrix::from_columns(
        &order[..d]
            .iter()
            .map(|&i| eigen.eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(PrincipalBasis { mean, basis })
}

/// Norm of the component of `f - mean` orthogonal to the principal subspace.
pub fn residual_norm(f: &[f64], basis: &PrincipalBasis) -> Result<f64> {
    check_dim(f, basis.dim())?;
    let centered = DVector::from_column_slice(f) - &basis.mean;
    let projected = &basis.basis * (basis.basis.transpose() * &centered);
    Ok((centered - projected).norm())
}

pub fn residual_score(f: &[f64], basis: &PrincipalBasis) -> Result<f64> {
    residual_norm(f, basis).map(|r| -r)
}
