//! Cross-validated benchmark harness for the `smapy` engine: stratified
//! folds, the two-step grid search, decision-boundary lattices and the full
//! three-data-set experiment.

pub mod boundary;
pub mod cv;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod search;

pub use boundary::{boundary_grid, BoundaryGrid, Classifier, Extent, SavedModel};
pub use cv::{accuracy, kfold_split};
pub use error::BenchError;
pub use experiment::{reproduce, run_experiment, ExperimentConfig};
pub use grid::{LinearGrid, SmapyGrid};
pub use search::{grid_search_linear, grid_search_smapy, Protocol, ResultRecord, Stage};
