//! Post-hoc confidence scores from stored logits and features.
//!
//! Every score is oriented so that higher means "more ID, more
//! trustworthy". Methods needing fitted state (class templates, Gaussian
//! statistics, a feature bank, a principal subspace, VIM and SIRC constants)
//! take it from [`FitArtifacts`], estimated on the ID rows of a separate fit
//! file and immutable afterwards.

mod combine;
mod feature;
mod logit;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{EvalSet, Origin, Population};
use crate::error::{Error, Result};

pub use combine::{fit_sirc_params, fit_vim_alpha, sirc_combine, vim, SircParams};
pub use feature::{
    build_feature_bank, default_knn_k, default_pca_dim, fit_gaussian_stats,
    fit_principal_subspace, knn_score, l1_feature_norm, mahalanobis, residual_norm,
    residual_score, FeatureBank, GaussianStats, PrincipalBasis, COVARIANCE_RIDGE, MAX_PCA_DIM,
};
pub use logit::{
    argmax, clamp_probs, energy, fit_class_templates, klm, max_logit, msp, neg_entropy, softmax,
    ClassTemplates, PROB_EPS,
};

/// One row of a logits or features file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorRecord {
    pub sample_id: String,
    pub origin: Origin,
    pub label: Option<usize>,
    pub values: Vec<f64>,
}

pub type LogitRecord = VectorRecord;
pub type FeatureRecord = VectorRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Msp,
    MaxLogit,
    Energy,
    NegEntropy,
    Klm,
    Mahalanobis,
    Knn,
    L1Norm,
    Residual,
    Vim,
    SircMspL1,
    SircMspResidual,
    SircNegEntropyL1,
    SircNegEntropyResidual,
}

impl Method {
    pub const ALL: [Method; 14] = [
        Method::Msp,
        Method::MaxLogit,
        Method::Energy,
        Method::NegEntropy,
        Method::Klm,
        Method::Mahalanobis,
        Method::Knn,
        Method::L1Norm,
        Method::Residual,
        Method::Vim,
        Method::SircMspL1,
        Method::SircMspResidual,
        Method::SircNegEntropyL1,
        Method::SircNegEntropyResidual,
    ];

    /// Channel name written to the scores file.
    pub fn name(self) -> &'static str {
        match self {
            Method::Msp => "msp",
            Method::MaxLogit => "mls",
            Method::Energy => "energy",
            Method::NegEntropy => "negent",
            Method::Klm => "klm",
            Method::Mahalanobis => "mds",
            Method::Knn => "knn",
            Method::L1Norm => "l1",
            Method::Residual => "residual",
            Method::Vim => "vim",
            Method::SircMspL1 => "sirc_msp_l1",
            Method::SircMspResidual => "sirc_msp_res",
            Method::SircNegEntropyL1 => "sirc_negent_l1",
            Method::SircNegEntropyResidual => "sirc_negent_res",
        }
    }

    pub fn needs_logits(self) -> bool {
        !matches!(
            self,
            Method::Mahalanobis | Method::Knn | Method::L1Norm | Method::Residual
        )
    }

    pub fn needs_features(self) -> bool {
        !matches!(
            self,
            Method::Msp | Method::MaxLogit | Method::Energy | Method::NegEntropy | Method::Klm
        )
    }

    /// Which fit inputs `(logits, features)` the fitted state is estimated from.
    pub fn fit_inputs(self) -> (bool, bool) {
        match self {
            Method::Msp | Method::MaxLogit | Method::Energy | Method::NegEntropy | Method::L1Norm => {
                (false, false)
            }
            Method::Klm => (true, false),
            Method::Vim => (true, true),
            _ => (false, true),
        }
    }

    /// Parses a comma-separated method list.
    pub fn parse_list(text: &str) -> Result<Vec<Method>> {
        let methods = text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(Error::Usage("no scoring method given".into()));
        }
        Ok(methods)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let method = match lower.as_str() {
            "ebo" => Method::Energy,
            "max_logit" => Method::MaxLogit,
            "neg_entropy" => Method::NegEntropy,
            "mahalanobis" => Method::Mahalanobis,
            other => *Method::ALL
                .iter()
                .find(|m| m.name() == other)
                .ok_or_else(|| Error::Usage(format!("unknown scoring method `{s}`")))?,
        };
        Ok(method)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    pub temperature: f64,
    /// Defaults to `max(1, floor(0.005 * bank size))`.
    pub knn_k: Option<usize>,
    /// Defaults to `min(D - 1, 256)`.
    pub pca_dim: Option<usize>,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            temperature: 1.0,
            knn_k: None,
            pca_dim: None,
        }
    }
}

/// Logit and/or feature rows, aligned by position when both are present.
#[derive(Debug, Clone, Copy, Default)]
pub struct Inputs<'a> {
    pub logits: Option<&'a [VectorRecord]>,
    pub features: Option<&'a [VectorRecord]>,
}

impl<'a> Inputs<'a> {
    pub fn new(logits: Option<&'a [VectorRecord]>, features: Option<&'a [VectorRecord]>) -> Self {
        Inputs { logits, features }
    }

    fn validate(&self) -> Result<usize> {
        match (self.logits, self.features) {
            (None, None) => Err(Error::Usage("no logits or features given".into())),
            (Some(l), Some(f)) => {
                let aligned =
                    l.len() == f.len() && l.iter().zip(f).all(|(a, b)| a.sample_id == b.sample_id);
                if !aligned {
                    return Err(Error::InvalidArgument(
                        "logits and features must list the same samples in the same order".into(),
                    ));
                }
                Ok(l.len())
            }
            (Some(rows), None) | (None, Some(rows)) => Ok(rows.len()),
        }
    }

    fn require_fit(&self, method: Method) -> Result<()> {
        let (logits, features) = method.fit_inputs();
        if logits && self.logits.is_none() {
            return Err(Error::Usage(format!("method `{method}` needs fit logits")));
        }
        if features && self.features.is_none() {
            return Err(Error::Usage(format!("method `{method}` needs fit features")));
        }
        Ok(())
    }

    fn require(&self, method: Method) -> Result<()> {
        if method.needs_logits() && self.logits.is_none() {
            return Err(Error::Usage(format!("method `{method}` needs logits")));
        }
        if method.needs_features() && self.features.is_none() {
            return Err(Error::Usage(format!("method `{method}` needs features")));
        }
        Ok(())
    }
}

fn id_rows(rows: Option<&[VectorRecord]>) -> Vec<&VectorRecord> {
    rows.map(|r| r.iter().filter(|x| x.origin == Origin::Id).collect())
        .unwrap_or_default()
}

fn values(rows: &[&VectorRecord]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.values.clone()).collect()
}

/// Fitted state for the requested methods; fields a method does not need
/// stay `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitArtifacts {
    pub class_templates: Option<ClassTemplates>,
    pub gaussian_stats: Option<GaussianStats>,
    pub feature_bank: Option<FeatureBank>,
    pub knn_k: Option<usize>,
    pub principal_basis: Option<PrincipalBasis>,
    pub vim_alpha: Option<f64>,
    pub sirc_l1: Option<SircParams>,
    pub sirc_residual: Option<SircParams>,
}

impl FitArtifacts {
    /// Fits everything `methods` need on the ID rows of `fit`.
    pub fn fit(methods: &[Method], fit: Inputs<'_>, config: &ScoringConfig) -> Result<Self> {
        for &m in methods {
            fit.require_fit(m)?;
        }
        if fit.logits.is_some() || fit.features.is_some() {
            fit.validate()?;
        }
        let logit_rows = id_rows(fit.logits);
        let feature_rows = id_rows(fit.features);
        let logits = values(&logit_rows);
        let features = values(&feature_rows);
        let needs = |wanted: &[Method]| methods.iter().any(|m| wanted.contains(m));
        let mut out = FitArtifacts::default();

        if needs(&[Method::Klm]) {
            let probs: Vec<Vec<f64>> = logits.iter().map(|z| softmax(z)).collect();
            let predictions: Vec<usize> = logits.iter().map(|z| argmax(z)).collect();
            out.class_templates = Some(
                fit_class_templates(&probs, &predictions).map_err(|e| e.in_method("klm"))?,
            );
        }
        if needs(&[Method::Mahalanobis]) {
            let labels = feature_rows
                .iter()
                .map(|r| {
                    r.label.ok_or_else(|| {
                        Error::InvalidArgument(format!("fit row `{}` has no label", r.sample_id))
                    })
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_method("mds"))?;
            out.gaussian_stats =
                Some(fit_gaussian_stats(&features, &labels).map_err(|e| e.in_method("mds"))?);
        }
        if needs(&[Method::Knn]) {
            let bank = build_feature_bank(&features).map_err(|e| e.in_method("knn"))?;
            let k = config.knn_k.unwrap_or_else(|| default_knn_k(bank.len()));
            if k == 0 || k > bank.len() {
                return Err(Error::KTooLarge { k, bank: bank.len() }.in_method("knn"));
            }
            out.knn_k = Some(k);
            out.feature_bank = Some(bank);
        }
        let residual_methods = [
            Method::Residual,
            Method::Vim,
            Method::SircMspResidual,
            Method::SircNegEntropyResidual,
        ];
        if needs(&residual_methods) {
            let dim = features.first().map_or(0, Vec::len);
            let d = config.pca_dim.unwrap_or_else(|| default_pca_dim(dim));
            let basis = fit_principal_subspace(&features, d).map_err(|e| e.in_method("residual"))?;
            if needs(&[Method::Vim]) {
                out.vim_alpha =
                    Some(fit_vim_alpha(&logits, &features, &basis).map_err(|e| e.in_method("vim"))?);
            }
            if needs(&[Method::SircMspResidual, Method::SircNegEntropyResidual]) {
                let s2 = features
                    .iter()
                    .map(|f| residual_score(f, &basis))
                    .collect::<Result<Vec<_>>>()?;
                out.sirc_residual =
                    Some(fit_sirc_params(&s2).map_err(|e| e.in_method("sirc_res"))?);
            }
            out.principal_basis = Some(basis);
        }
        if needs(&[Method::SircMspL1, Method::SircNegEntropyL1]) {
            let s2: Vec<f64> = features.iter().map(|f| l1_feature_norm(f)).collect();
            out.sirc_l1 = Some(fit_sirc_params(&s2).map_err(|e| e.in_method("sirc_l1"))?);
        }
        Ok(out)
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidArgument(format!("{what} were not fitted"))
}

/// Score of one sample under one method.
pub fn score_one(
    method: Method,
    artifacts: &FitArtifacts,
    config: &ScoringConfig,
    logits: Option<&[f64]>,
    feature: Option<&[f64]>,
) -> Result<f64> {
    let z = || logits.ok_or_else(|| Error::Usage(format!("method `{method}` needs logits")));
    let f = || feature.ok_or_else(|| Error::Usage(format!("method `{method}` needs features")));
    let basis = || artifacts.principal_basis.as_ref().ok_or_else(|| missing("principal directions"));
    let sirc = |s1: f64, s1_max: f64, s2: f64, params: Option<SircParams>| {
        params
            .map(|p| sirc_combine(s1, s1_max, s2, p))
            .ok_or_else(|| missing("SIRC parameters"))
    };
    match method {
        Method::Msp => Ok(msp(z()?)),
        Method::MaxLogit => Ok(max_logit(z()?)),
        Method::Energy => energy(z()?, config.temperature),
        Method::NegEntropy => Ok(neg_entropy(z()?)),
        Method::Klm => {
            let templates = artifacts.class_templates.as_ref().ok_or_else(|| missing("class templates"))?;
            Ok(klm(&softmax(z()?), templates))
        }
        Method::Mahalanobis => {
            let stats = artifacts.gaussian_stats.as_ref().ok_or_else(|| missing("class statistics"))?;
            mahalanobis(f()?, stats)
        }
        Method::Knn => {
            let bank = artifacts.feature_bank.as_ref().ok_or_else(|| missing("feature bank"))?;
            knn_score(f()?, bank, artifacts.knn_k.unwrap_or_else(|| default_knn_k(bank.len())))
        }
        Method::L1Norm => Ok(l1_feature_norm(f()?)),
        Method::Residual => residual_score(f()?, basis()?),
        Method::Vim => {
            let alpha = artifacts.vim_alpha.ok_or_else(|| missing("VIM scale"))?;
            vim(z()?, f()?, basis()?, alpha)
        }
        Method::SircMspL1 => sirc(msp(z()?), 1.0, l1_feature_norm(f()?), artifacts.sirc_l1),
        Method::SircMspResidual => sirc(
            msp(z()?),
            1.0,
            residual_score(f()?, basis()?)?,
            artifacts.sirc_residual,
        ),
        Method::SircNegEntropyL1 => {
            sirc(neg_entropy(z()?), 0.0, l1_feature_norm(f()?), artifacts.sirc_l1)
        }
        Method::SircNegEntropyResidual => sirc(
            neg_entropy(z()?),
            0.0,
            residual_score(f()?, basis()?)?,
            artifacts.sirc_residual,
        ),
    }
}

/// One score column per method over every row of `target`.
pub fn score_columns(
    methods: &[Method],
    artifacts: &FitArtifacts,
    config: &ScoringConfig,
    target: Inputs<'_>,
) -> Result<Vec<(String, Vec<f64>)>> {
    let n = target.validate()?;
    let mut columns = Vec::with_capacity(methods.len());
    for &method in methods {
        target.require(method)?;
        let column = (0..n)
            .into_par_iter()
            .map(|i| {
                let z = target.logits.map(|rows| rows[i].values.as_slice());
                let f = target.features.map(|rows| rows[i].values.as_slice());
                score_one(method, artifacts, config, z, f)
            })
            .collect::<Result<Vec<f64>>>()
            .map_err(|e| e.in_method(method.name()))?;
        columns.push((method.name().to_string(), column));
    }
    Ok(columns)
}

/// Scores `target` and labels each ID row correct when the logit argmax
/// matches its label.
pub fn score_eval_set(
    methods: &[Method],
    artifacts: &FitArtifacts,
    config: &ScoringConfig,
    target: Inputs<'_>,
) -> Result<EvalSet> {
    let logits = target.logits.ok_or_else(|| {
        Error::Usage("correctness of ID rows is derived from logits; pass a logits file".into())
    })?;
    let columns = score_columns(methods, artifacts, config, target)?;
    let populations = logits
        .iter()
        .map(|r| match (r.origin, r.label) {
            (Origin::Ood, _) => Ok(Population::Ood),
            (Origin::Id, Some(label)) if argmax(&r.values) == label => Ok(Population::IdCorrect),
            (Origin::Id, Some(_)) => Ok(Population::IdWrong),
            (Origin::Id, None) => Err(Error::InvalidArgument(format!(
                "ID row `{}` has no label",
                r.sample_id
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    let sample_ids = logits.iter().map(|r| r.sample_id.clone()).collect();
    EvalSet::from_columns(sample_ids, populations, columns)
}
