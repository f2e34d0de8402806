// SPDX-License-Identifier: Apache-2.0

//! Classifiers over feature tables (KNN, random forest, gradient-boosted
//! trees) and the evaluation metrics.

pub mod binning;
pub mod forest;
pub mod gbt;
pub mod knn;
pub mod metrics;
pub mod tree;

pub use forest::{Forest, ForestParams};
pub use gbt::{Gbt, GbtParams};
pub use knn::{Knn, KnnParams};
pub use metrics::{rank_classes, roc_auc, ClassMetrics, MetricsReport};
pub use tree::Growth;

use crate::extract::Dataset;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use thiserror::Error;

const MAGIC: &[u8; 8] = b"WTMODEL\0";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("training data has fewer than two classes")]
    SingleClass,
    #[error("feature `{feature}` of row `{row}` is not finite")]
    NonFiniteFeature { row: String, feature: String },
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("test split is empty")]
    EmptyTest,
    #[error("label `{0}` was not seen at training time")]
    UnknownClass(String),
    #[error("k must be in 1..={max}, got {k}")]
    BadK { k: usize, max: usize },
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Knn,
    RandomForest,
    Gbt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Knn, ModelKind::RandomForest, ModelKind::Gbt];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Gbt => "gbt",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = MlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "knn" => Ok(ModelKind::Knn),
            "random_forest" | "rf" => Ok(ModelKind::RandomForest),
            "gbt" => Ok(ModelKind::Gbt),
            other => Err(MlError::UnknownKind(other.to_string())),
        }
    }
}

/// Hyperparameters for every kind; only the fitted kind's entry is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub knn: KnnParams,
    pub random_forest: ForestParams,
    pub gbt: GbtParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FittedState {
    Knn(Knn),
    RandomForest(Forest),
    Gbt(Gbt),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub kind: ModelKind,
    /// Sorted labels; probability rows align to this order.
    pub classes: Vec<String>,
    pub feature_names: Vec<String>,
    pub params: ModelParams,
    pub seed: u64,
    pub state: FittedState,
}

fn check_training(train: &Dataset) -> Result<(Vec<String>, Vec<u16>), MlError> {
    let classes = train.classes();
    if classes.len() < 2 {
        return Err(MlError::SingleClass);
    }
    for r in &train.rows {
        if let Some(f) = r.features.iter().position(|v| !v.is_finite()) {
            return Err(MlError::NonFiniteFeature { row: r.scenario_id.clone(), feature: train.feature_names[f].clone() });
        }
        if r.features.len() != train.n_features() {
            return Err(MlError::DimensionMismatch { expected: train.n_features(), found: r.features.len() });
        }
    }
    let y = train.rows.iter().map(|r| classes.binary_search(&r.label).expect("label from class set") as u16).collect();
    Ok((classes, y))
}

/// Fit a classifier. Deterministic given data, parameters and seed.
pub fn fit(kind: ModelKind, train: &Dataset, params: &ModelParams, seed: u64) -> Result<ClassifierModel, MlError> {
    let (classes, y) = check_training(train)?;
    let rows: Vec<&[f64]> = train.rows.iter().map(|r| r.features.as_slice()).collect();
    let (m, d) = (classes.len(), train.n_features());
    let state = match kind {
        ModelKind::Knn => FittedState::Knn(Knn::fit(&rows, &y, m, d, &params.knn)),
        ModelKind::RandomForest => FittedState::RandomForest(Forest::fit(&rows, &y, m, d, &params.random_forest, seed)),
        ModelKind::Gbt => FittedState::Gbt(Gbt::fit(&rows, &y, m, d, &params.gbt)),
    };
    Ok(ClassifierModel { kind, classes, feature_names: train.feature_names.clone(), params: params.clone(), seed, state })
}

impl ClassifierModel {
    /// Class probabilities aligned to [`Self::classes`].
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, MlError> {
        if x.len() != self.feature_names.len() {
            return Err(MlError::DimensionMismatch { expected: self.feature_names.len(), found: x.len() });
        }
        Ok(match &self.state {
            FittedState::Knn(m) => m.predict_proba(x),
            FittedState::RandomForest(m) => m.predict_proba(x),
            FittedState::Gbt(m) => m.predict_proba(x),
        })
    }

    /// The `k` most probable labels, ties in class order.
    pub fn predict_topk(&self, x: &[f64], k: usize) -> Result<Vec<(String, f64)>, MlError> {
        let m = self.classes.len();
        if k == 0 || k > m {
            return Err(MlError::BadK { k, max: m });
        }
        let p = self.predict_proba(x)?;
        Ok(rank_classes(&p).into_iter().take(k).map(|c| (self.classes[c].clone(), p[c])).collect())
    }

    /// Per-feature importance (total gain) for boosted models.
    pub fn feature_importance(&self) -> Option<&[f64]> {
        match &self.state {
            FittedState::Gbt(g) => Some(&g.importance),
            _ => None,
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<(), MlError> {
        out.write_all(MAGIC)?;
        out.write_all(&FORMAT_VERSION.to_le_bytes())?;
        bincode::serialize_into(&mut out, self).map_err(|e| MlError::Format(e.to_string()))?;
        out.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<ClassifierModel, MlError> {
        let mut head = [0u8; 12];
        input.read_exact(&mut head).map_err(|_| MlError::Format("truncated header".into()))?;
        if &head[..8] != MAGIC {
            return Err(MlError::Format("not a model file".into()));
        }
        let version = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(MlError::Format(format!("unsupported format version {version}")));
        }
        bincode::deserialize_from(input).map_err(|e| MlError::Format(e.to_string()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.write_to(&mut v).expect("in-memory write");
        v
    }
}

/// Probability rows for every test sample, in parallel.
pub fn predict_dataset(model: &ClassifierModel, test: &Dataset) -> Result<Vec<Vec<f64>>, MlError> {
    test.rows.par_iter().map(|r| model.predict_proba(&r.features)).collect()
}

/// Metrics of `model` on `test`.
pub fn evaluate(model: &ClassifierModel, test: &Dataset) -> Result<MetricsReport, MlError> {
    if test.is_empty() {
        return Err(MlError::EmptyTest);
    }
    let truth = test
        .rows
        .iter()
        .map(|r| model.classes.binary_search(&r.label).map_err(|_| MlError::UnknownClass(r.label.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let scores = predict_dataset(model, test)?;
    Ok(MetricsReport::from_scores(&scores, &truth, model.classes.clone()))
}
