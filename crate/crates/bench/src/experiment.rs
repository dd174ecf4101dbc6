//! The full benchmark: for each data set and each linear learner, tune the
//! learner alone (step 1), then tune the engine around it (step 2), and
//! write the records, the accuracy table and the decision-boundary grids.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smapy::{
    Dataset, DatasetKind, Engine, EngineConfig, GeneratorSpec, LinearParams, ModelKind, Normalization,
    DEFAULT_EPSILON_SCALE,
};

use crate::boundary::{boundary_grid, Extent, SavedModel, DEFAULT_STEP};
use crate::error::BenchError;
use crate::grid::{LinearGrid, SmapyGrid};
use crate::search::{grid_search_linear, grid_search_smapy, Protocol, ResultRecord, Stage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSettings {
    pub datasets: Vec<DatasetKind>,
    pub n: usize,
    pub seed: u64,
}

impl Default for DataSettings {
    fn default() -> Self {
        Self { datasets: DatasetKind::ALL.to_vec(), n: 100, seed: 0 }
    }
}

/// Learner settings that the step-1 grid does not search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearDefaults {
    pub kinds: Vec<ModelKind>,
    pub learning_rate0: f64,
    pub l1_ratio: f64,
}

impl Default for LinearDefaults {
    fn default() -> Self {
        Self { kinds: ModelKind::ALL.to_vec(), learning_rate0: 0.01, l1_ratio: 0.15 }
    }
}

impl LinearDefaults {
    pub fn base(&self, kind: ModelKind) -> LinearParams<f64> {
        LinearParams { l1_ratio: self.l1_ratio, ..LinearParams::new(kind).with_learning_rate0(self.learning_rate0) }
    }
}

/// Engine settings that the step-2 grid does not search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineDefaults {
    pub seed: u64,
    pub epsilon_scale: f64,
    pub exploration_passes: usize,
    pub train_on_correct: bool,
}

impl Default for EngineDefaults {
    fn default() -> Self {
        Self { seed: 0, epsilon_scale: DEFAULT_EPSILON_SCALE, exploration_passes: 1, train_on_correct: true }
    }
}

impl EngineDefaults {
    pub fn base(&self) -> EngineConfig<f64> {
        EngineConfig {
            seed: self.seed,
            epsilon_scale: self.epsilon_scale,
            exploration_passes: self.exploration_passes,
            train_on_correct: self.train_on_correct,
            normalization: Normalization::Sigmoid,
            ..EngineConfig::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data: DataSettings,
    pub protocol: Protocol,
    pub linear: LinearDefaults,
    pub engine: EngineDefaults,
    pub linear_grid: LinearGrid,
    pub smapy_grid: SmapyGrid,
    pub boundary: BoundarySettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundarySettings {
    pub export: bool,
    pub step: f64,
}

impl Default for BoundarySettings {
    fn default() -> Self {
        Self { export: true, step: DEFAULT_STEP }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked before any training starts.
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.data.datasets.is_empty() || self.linear.kinds.is_empty() {
            return Err(BenchError::Config("at least one data set and one model kind are required".into()));
        }
        if self.data.n < 2 * self.protocol.folds {
            return Err(BenchError::Config(format!(
                "n = {} is too small for {}-fold stratified CV",
                self.data.n, self.protocol.folds
            )));
        }
        if self.protocol.folds < 2 {
            return Err(BenchError::Config("cross-validation needs at least 2 folds".into()));
        }
        if !(self.boundary.step > 0.0) {
            return Err(BenchError::Config(format!("boundary step must be positive, got {}", self.boundary.step)));
        }
        self.linear_grid.validate()?;
        for &kind in &self.linear.kinds {
            for cell in self.linear_grid.cells(&self.linear.base(kind)) {
                cell.validate()?;
            }
        }
        self.smapy_grid.validate(&self.engine.base())?;
        Ok(())
    }

    pub fn dataset(&self, kind: DatasetKind) -> Result<Dataset<f64>, BenchError> {
        Ok(GeneratorSpec::reference(kind, self.data.n, self.data.seed).generate()?)
    }
}

/// Step-1 and step-2 records for one data set and one learner.
pub fn run_pair(
    cfg: &ExperimentConfig,
    data: &Dataset<f64>,
    dataset: DatasetKind,
    kind: ModelKind,
) -> Result<(ResultRecord, ResultRecord), BenchError> {
    let alone = grid_search_linear(data, &cfg.linear.base(kind), &cfg.linear_grid, &cfg.protocol, dataset)?;
    let mas = grid_search_smapy(
        data,
        &alone.linear_params,
        &cfg.engine.base(),
        &cfg.smapy_grid,
        &cfg.protocol,
        dataset,
    )?;
    Ok((alone, mas))
}

/// Retrains the winner of `record` on the whole data set.
pub fn refit(record: &ResultRecord, data: &Dataset<f64>, protocol: &Protocol) -> Result<SavedModel, BenchError> {
    Ok(match &record.smapy_params {
        None => {
            let mut m = record.linear_params.build(data.dim())?;
            m.fit(&data.x, &data.y, protocol.epochs, protocol.fit_seed)?;
            SavedModel::Linear(m)
        }
        Some(engine_cfg) => {
            let mut e = Engine::new(engine_cfg.clone(), record.linear_params.clone(), data.dim())?;
            e.train(&data.x, &data.y)?;
            SavedModel::Smapy(e)
        }
    })
}

/// Runs every (data set, learner) pair; records are sorted by data set,
/// learner, then stage.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>, BenchError> {
    cfg.validate()?;
    let jobs: Vec<(DatasetKind, ModelKind)> = cfg
        .data
        .datasets
        .iter()
        .flat_map(|&d| cfg.linear.kinds.iter().map(move |&k| (d, k)))
        .collect();
    let datasets: Vec<(DatasetKind, Dataset<f64>)> =
        cfg.data.datasets.iter().map(|&d| Ok((d, cfg.dataset(d)?))).collect::<Result<_, BenchError>>()?;
    let data_for = |d: DatasetKind| &datasets.iter().find(|(k, _)| *k == d).expect("generated above").1;
    let mut records: Vec<ResultRecord> = jobs
        .par_iter()
        .map(|&(d, k)| run_pair(cfg, data_for(d), d, k).map(|(a, m)| [a, m]))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    sort_records(&mut records);
    Ok(records)
}

pub fn sort_records(records: &mut [ResultRecord]) {
    let order = |r: &ResultRecord| {
        (
            DatasetKind::ALL.iter().position(|&d| d == r.dataset),
            ModelKind::ALL.iter().position(|&k| k == r.kind),
            r.stage,
        )
    };
    records.sort_by_key(order);
}

fn find(records: &[ResultRecord], d: DatasetKind, k: ModelKind, s: Stage) -> Option<f64> {
    records.iter().find(|r| r.dataset == d && r.kind == k && r.stage == s).map(|r| r.mean_accuracy)
}

fn present<T: Copy + PartialEq>(all: &[T], wanted: impl Fn(T) -> bool) -> Vec<T> {
    all.iter().copied().filter(|&x| wanted(x)).collect()
}

/// Accuracy table with one row per learner and an Alone/MAS column pair per
/// data set.
pub fn table_csv(records: &[ResultRecord]) -> String {
    let datasets = present(&DatasetKind::ALL, |d| records.iter().any(|r| r.dataset == d));
    let kinds = present(&ModelKind::ALL, |k| records.iter().any(|r| r.kind == k));
    let mut out = String::from("model");
    for d in &datasets {
        let name = format!("{d:?}").to_lowercase();
        let _ = write!(out, ",{name}_alone,{name}_mas");
    }
    out.push('\n');
    for k in &kinds {
        out.push_str(k.label());
        for &d in &datasets {
            for s in [Stage::Alone, Stage::Mas] {
                match find(records, d, *k, s) {
                    Some(v) => {
                        let _ = write!(out, ",{v:.2}");
                    }
                    None => out.push(','),
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Fixed-width rendering of [`table_csv`]; the better stage is starred.
pub fn table_text(records: &[ResultRecord]) -> String {
    let datasets = present(&DatasetKind::ALL, |d| records.iter().any(|r| r.dataset == d));
    let kinds = present(&ModelKind::ALL, |k| records.iter().any(|r| r.kind == k));
    let mut out = format!("{:<12}", "");
    for d in &datasets {
        let _ = write!(out, "| {:^19} ", d.label());
    }
    out.push('\n');
    let _ = write!(out, "{:<12}", "");
    for _ in &datasets {
        let _ = write!(out, "| {:^9}{:^10} ", "Alone", "MAS");
    }
    out.push('\n');
    for k in &kinds {
        let _ = write!(out, "{:<12}", k.label());
        for &d in &datasets {
            let a = find(records, d, *k, Stage::Alone);
            let m = find(records, d, *k, Stage::Mas);
            let cell = |v: Option<f64>, other: Option<f64>| match (v, other) {
                (Some(v), Some(o)) if v >= o => format!("{v:.2}*"),
                (Some(v), _) => format!("{v:.2}"),
                (None, _) => "-".into(),
            };
            let _ = write!(out, "| {:^9}{:^10} ", cell(a, m), cell(m, a));
        }
        out.push('\n');
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::io(path, e))
}

/// Runs the experiment and writes `results.json`, `table3.csv`,
/// `table3.txt` and, when enabled, one `x1,x2,yhat` grid per record under
/// `boundaries/`.
pub fn reproduce(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<ResultRecord>, BenchError> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| BenchError::io(out_dir, e))?;
    let records = run_experiment(cfg)?;
    write(&out_dir.join("config.json"), &serde_json::to_string_pretty(cfg)?)?;
    write(&out_dir.join("results.json"), &serde_json::to_string_pretty(&records)?)?;
    write(&out_dir.join("table3.csv"), &table_csv(&records))?;
    write(&out_dir.join("table3.txt"), &table_text(&records))?;
    if cfg.boundary.export {
        let dir = out_dir.join("boundaries");
        fs::create_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
        records.par_iter().try_for_each(|r| -> Result<(), BenchError> {
            let data = cfg.dataset(r.dataset)?;
            let model = refit(r, &data, &cfg.protocol)?;
            let grid = boundary_grid(&model, Extent::of(&data)?, cfg.boundary.step)?;
            let name = format!("{:?}_{:?}_{:?}.csv", r.dataset, r.kind, r.stage).to_lowercase();
            write(&dir.join(name), &grid.to_csv())
        })?;
    }
    Ok(records)
}
