//! Context agents, Percept extrema and the feedback arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Hypercube, DEFAULT_EPSILON_SCALE};
use crate::online_linear::LinearModel;
use crate::scalar::{sigmoid, Scalar};

/// Maps an agent's confidence onto a score in `(0, 1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Normalization {
    #[default]
    Sigmoid,
}

impl Normalization {
    pub fn apply<T: Scalar>(self, confidence: T) -> T {
        match self {
            Normalization::Sigmoid => sigmoid(confidence),
        }
    }
}

/// External parameters of the cooperative engine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EngineConfig<T> {
    /// Half-width of a newly created agent in every dimension.
    #[serde(rename = "R")]
    pub radius: T,
    /// Overlap index above which same-class agents merge; `None` always pushes.
    #[serde(rename = "O")]
    pub overlap_threshold: Option<T>,
    /// Wrongly-proposing agents carve the point out instead of retraining.
    #[serde(rename = "E")]
    pub point_exclusion: bool,
    #[serde(rename = "Nc", default)]
    pub normalization: Normalization,
    /// Expansion/retraction factor applied on feedback.
    pub alpha: T,
    #[serde(rename = "Fplus")]
    pub f_plus: T,
    #[serde(rename = "Fminus")]
    pub f_minus: T,
    pub seed: u64,
    pub epsilon_scale: T,
    pub exploration_passes: usize,
    /// Agents that proposed the right class also fine-tune their model.
    pub train_on_correct: bool,
}

impl<T: Scalar> Default for EngineConfig<T> {
    fn default() -> Self {
        Self {
            radius: T::of(0.2),
            overlap_threshold: Some(T::of(0.5)),
            point_exclusion: false,
            normalization: Normalization::Sigmoid,
            alpha: T::of(0.1),
            f_plus: T::one(),
            f_minus: T::one(),
            seed: 0,
            epsilon_scale: T::of(DEFAULT_EPSILON_SCALE),
            exploration_passes: 1,
            train_on_correct: true,
        }
    }
}

impl<T: Scalar> EngineConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.radius > T::zero() && self.radius.is_finite()) {
            return bad("R", format!("must be positive, got {}", self.radius));
        }
        if let Some(o) = self.overlap_threshold {
            if !(o >= T::zero() && o <= T::one()) {
                return bad("O", format!("must lie in [0, 1], got {o}"));
            }
        }
        if !(self.alpha >= T::zero() && self.alpha < T::one()) {
            return bad("alpha", format!("must lie in [0, 1), got {}", self.alpha));
        }
        if !(self.f_plus >= T::zero()) {
            return bad("Fplus", format!("must be non-negative, got {}", self.f_plus));
        }
        if !(self.f_minus >= T::zero()) {
            return bad("Fminus", format!("must be non-negative, got {}", self.f_minus));
        }
        if !(self.epsilon_scale > T::zero() && self.epsilon_scale < T::of(0.5)) {
            return bad("epsilon_scale", format!("must lie in (0, 0.5), got {}", self.epsilon_scale));
        }
        if self.exploration_passes == 0 {
            return bad("exploration_passes", "at least one pass is required".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ContextAgent<T> {
    pub id: u64,
    pub region: Hypercube<T>,
    /// Running sum `F+ * #correct - F- * #wrong`.
    pub confidence: T,
    pub model: LinearModel<T>,
    pub creation_cycle: u64,
    pub alive: bool,
    pub n_correct: u64,
    pub n_wrong: u64,
}

impl<T: Scalar> ContextAgent<T> {
    pub fn new(id: u64, region: Hypercube<T>, model: LinearModel<T>, creation_cycle: u64) -> Result<Self> {
        check_dim(region.dim(), model.dim())?;
        Ok(Self {
            id,
            region,
            confidence: T::zero(),
            model,
            creation_cycle,
            alive: true,
            n_correct: 0,
            n_wrong: 0,
        })
    }

    pub fn score(&self, cfg: &EngineConfig<T>) -> T {
        cfg.normalization.apply(self.confidence)
    }

    pub fn is_activated_by(&self, x: &[T]) -> bool {
        self.alive && self.region.contains_unchecked(x)
    }

    /// Class the internal model assigns to `x`.
    pub fn propose(&self, x: &[T]) -> Result<u8> {
        self.model.predict(x)
    }

    /// Feedback from the Head after this agent proposed a class for `(x, y)`.
    pub fn apply_feedback(&mut self, correct: bool, x: &[T], y: u8, cfg: &EngineConfig<T>) -> Result<()> {
        check_dim(self.region.dim(), x.len())?;
        if !self.alive {
            return Err(Error::InvalidInput(format!("agent {} is destroyed", self.id)));
        }
        if correct {
            self.confidence += cfg.f_plus;
            self.n_correct += 1;
            self.region = self.region.expand(cfg.alpha)?;
            if cfg.train_on_correct {
                self.model.partial_fit(x, y)?;
            }
        } else {
            self.confidence -= cfg.f_minus;
            self.n_wrong += 1;
            if cfg.point_exclusion {
                if let Some(r) = self.region.exclude_point(x, cfg.epsilon_scale)? {
                    self.region = r;
                }
            } else {
                self.model.partial_fit(x, y)?;
                self.region = self.region.retract(cfg.alpha)?;
            }
        }
        Ok(())
    }
}

/// Observed per-variable extrema.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PerceptState<T> {
    pub min: Vec<T>,
    pub max: Vec<T>,
    pub count: u64,
}

impl<T: Scalar> PerceptState<T> {
    pub fn update_extrema(&mut self, x: &[T]) -> Result<()> {
        if self.count == 0 {
            self.min = x.to_vec();
            self.max = x.to_vec();
        } else {
            check_dim(self.min.len(), x.len())?;
            for (j, &v) in x.iter().enumerate() {
                self.min[j] = self.min[j].min(v);
                self.max[j] = self.max[j].max(v);
            }
        }
        self.count += 1;
        Ok(())
    }
}
