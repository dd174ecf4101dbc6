//! Hyperparameter grids of the two search steps.

use serde::{Deserialize, Serialize};
use smapy::{EngineConfig, LinearParams, ModelKind, Normalization, Penalty};

use crate::error::BenchError;

/// Step 1 grid: `alpha x penalty` for the SGD learners, `C` for the
/// passive-aggressive ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearGrid {
    pub alpha: Vec<f64>,
    pub penalty: Vec<Penalty>,
    #[serde(rename = "C")]
    pub c: Vec<f64>,
}

impl Default for LinearGrid {
    fn default() -> Self {
        Self {
            alpha: vec![1e-4, 1e-3, 1e-2],
            penalty: vec![Penalty::L1, Penalty::L2, Penalty::ElasticNet],
            c: vec![0.5, 1.0, 2.0],
        }
    }
}

impl LinearGrid {
    /// Cells in enumeration order (last parameter varies fastest), built on
    /// top of `base` which supplies the parameters the grid does not cover.
    pub fn cells(&self, base: &LinearParams<f64>) -> Vec<LinearParams<f64>> {
        if base.kind.is_passive_aggressive() {
            self.c.iter().map(|&c| base.clone().with_c(c)).collect()
        } else {
            self.alpha
                .iter()
                .flat_map(|&a| self.penalty.iter().map(move |&p| base.clone().with_alpha(a).with_penalty(p)))
                .collect()
        }
    }

    pub fn size(&self, kind: ModelKind) -> usize {
        if kind.is_passive_aggressive() {
            self.c.len()
        } else {
            self.alpha.len() * self.penalty.len()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.alpha.is_empty() || self.penalty.is_empty() || self.c.is_empty() {
            return Err(BenchError::Config("linear grid has an empty axis".into()));
        }
        if self.alpha.iter().any(|&a| !(a >= 0.0)) || self.c.iter().any(|&c| !(c > 0.0)) {
            return Err(BenchError::Config("linear grid needs alpha >= 0 and C > 0".into()));
        }
        Ok(())
    }
}

/// Step 2 grid over the engine's external parameters. `O = null` stands for
/// "no overlap threshold".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmapyGrid {
    #[serde(rename = "R")]
    pub radius: Vec<f64>,
    #[serde(rename = "O")]
    pub overlap_threshold: Vec<Option<f64>>,
    #[serde(rename = "E")]
    pub point_exclusion: Vec<bool>,
    #[serde(rename = "Nc")]
    pub normalization: Vec<Normalization>,
    pub alpha: Vec<f64>,
    #[serde(rename = "Fplus")]
    pub f_plus: Vec<f64>,
    #[serde(rename = "Fminus")]
    pub f_minus: Vec<f64>,
}

impl Default for SmapyGrid {
    fn default() -> Self {
        Self {
            radius: vec![0.1, 0.2, 0.5],
            overlap_threshold: vec![Some(0.2), Some(0.5)],
            point_exclusion: vec![false, true],
            normalization: vec![Normalization::Sigmoid],
            alpha: vec![0.0, 0.1, 0.2],
            f_plus: vec![1.0],
            f_minus: vec![0.5, 1.0, 2.0],
        }
    }
}

impl SmapyGrid {
    pub fn size(&self) -> usize {
        self.radius.len()
            * self.overlap_threshold.len()
            * self.point_exclusion.len()
            * self.normalization.len()
            * self.alpha.len()
            * self.f_plus.len()
            * self.f_minus.len()
    }

    /// Cells in enumeration order (`Fminus` varies fastest). Fields outside
    /// the grid come from `base`.
    pub fn cells(&self, base: &EngineConfig<f64>) -> Vec<EngineConfig<f64>> {
        let mut out = Vec::with_capacity(self.size());
        for &radius in &self.radius {
            for &overlap_threshold in &self.overlap_threshold {
                for &point_exclusion in &self.point_exclusion {
                    for &normalization in &self.normalization {
                        for &alpha in &self.alpha {
                            for &f_plus in &self.f_plus {
                                for &f_minus in &self.f_minus {
                                    out.push(EngineConfig {
                                        radius,
                                        overlap_threshold,
                                        point_exclusion,
                                        normalization,
                                        alpha,
                                        f_plus,
                                        f_minus,
                                        ..base.clone()
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self, base: &EngineConfig<f64>) -> Result<(), BenchError> {
        if self.size() == 0 {
            return Err(BenchError::Config("smapy grid has an empty axis".into()));
        }
        for cell in self.cells(base) {
            cell.validate()?;
        }
        Ok(())
    }
}
