//! Cross-validated grid search: step 1 tunes a linear learner on its own,
//! step 2 tunes the engine around the step-1 winner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smapy::{Dataset, DatasetKind, Engine, EngineConfig, LinearParams, ModelKind};

use crate::cv::{accuracy, kfold_split, training_indices};
use crate::error::BenchError;
use crate::grid::{LinearGrid, SmapyGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stage {
    Alone,
    Mas,
}

/// How every candidate is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Protocol {
    pub folds: usize,
    pub cv_seed: u64,
    /// Passes over the training rows for standalone linear learners.
    pub epochs: usize,
    pub fit_seed: u64,
}

impl Default for Protocol {
    fn default() -> Self {
        Self { folds: 5, cv_seed: 0, epochs: 100, fit_seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub dataset: DatasetKind,
    pub kind: ModelKind,
    pub stage: Stage,
    pub linear_params: LinearParams<f64>,
    /// Winning engine parameters; absent for the standalone stage.
    pub smapy_params: Option<EngineConfig<f64>>,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Per-fold validation accuracies of `train_and_predict`, which receives
/// `(train_x, train_y, validation_x)`.
fn cross_validate<F>(data: &Dataset<f64>, protocol: &Protocol, train_and_predict: F) -> Result<Vec<f64>, BenchError>
where
    F: Fn(&[Vec<f64>], &[u8], &[Vec<f64>]) -> Result<Vec<u8>, BenchError>,
{
    let folds = kfold_split(&data.y, protocol.folds, protocol.cv_seed)?;
    (0..folds.len())
        .map(|held| {
            let train_idx = training_indices(&folds, held);
            debug_assert!(train_idx.iter().all(|i| folds[held].binary_search(i).is_err()));
            let (tx, ty) = data.subset(&train_idx);
            let (vx, vy) = data.subset(&folds[held]);
            accuracy(&train_and_predict(&tx, &ty, &vx)?, &vy)
        })
        .collect()
}

pub fn cross_validate_linear(
    data: &Dataset<f64>,
    params: &LinearParams<f64>,
    protocol: &Protocol,
) -> Result<Vec<f64>, BenchError> {
    cross_validate(data, protocol, |tx, ty, vx| {
        let mut m = params.build(data.dim())?;
        m.fit(tx, ty, protocol.epochs, protocol.fit_seed)?;
        Ok(m.predict_batch(vx)?)
    })
}

pub fn cross_validate_smapy(
    data: &Dataset<f64>,
    params: &LinearParams<f64>,
    config: &EngineConfig<f64>,
    protocol: &Protocol,
) -> Result<Vec<f64>, BenchError> {
    cross_validate(data, protocol, |tx, ty, vx| {
        let mut e = Engine::new(config.clone(), params.clone(), data.dim())?;
        e.train(tx, ty)?;
        Ok(e.predict_batch(vx)?)
    })
}

/// Index of the best mean; the first one on ties.
fn best_cell(scores: &[Vec<f64>]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if mean(s) > mean(&scores[best]) {
            best = i;
        }
    }
    best
}

/// Step 1: every cell of `grid` for `base.kind`, scored by k-fold CV.
pub fn grid_search_linear(
    data: &Dataset<f64>,
    base: &LinearParams<f64>,
    grid: &LinearGrid,
    protocol: &Protocol,
    dataset: DatasetKind,
) -> Result<ResultRecord, BenchError> {
    let cells = grid.cells(base);
    let scores: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|p| cross_validate_linear(data, p, protocol))
        .collect::<Result<_, _>>()?;
    let best = best_cell(&scores);
    Ok(ResultRecord {
        dataset,
        kind: base.kind,
        stage: Stage::Alone,
        linear_params: cells[best].clone(),
        smapy_params: None,
        mean_accuracy: mean(&scores[best]),
        fold_accuracies: scores[best].clone(),
    })
}

/// Step 2: every engine cell of `grid` with agents carrying `linear`, the
/// step-1 winner, frozen.
pub fn grid_search_smapy(
    data: &Dataset<f64>,
    linear: &LinearParams<f64>,
    base: &EngineConfig<f64>,
    grid: &SmapyGrid,
    protocol: &Protocol,
    dataset: DatasetKind,
) -> Result<ResultRecord, BenchError> {
    let cells = grid.cells(base);
    let scores: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|cfg| cross_validate_smapy(data, linear, cfg, protocol))
        .collect::<Result<_, _>>()?;
    let best = best_cell(&scores);
    Ok(ResultRecord {
        dataset,
        kind: linear.kind,
        stage: Stage::Mas,
        linear_params: linear.clone(),
        smapy_params: Some(cells[best].clone()),
        mean_accuracy: mean(&scores[best]),
        fold_accuracies: scores[best].clone(),
    })
}
