//! Online binary linear classifiers updated one observation at a time.
//!
//! Four learners share one state type:
//!
//! * logistic regression and linear SVM, trained by plain SGD on the log loss
//!   and the hinge loss respectively, with an L1, L2 or elastic-net penalty and
//!   the step size `eta_t = eta_0 / (1 + eta_0 * alpha * t)`;
//! * the passive-aggressive learners PA-I and PA-II, which take the closed-form
//!   step that zeroes the hinge loss on the current sample (capped by `C`,
//!   resp. smoothed by `1 / 2C`). The bias is treated as the weight of a
//!   constant feature equal to 1.
//!
//! Labels are `0` or `1`; internally the signed label `s = 2y - 1` is used.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{dot, norm_sq, sigmoid, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    Logit,
    LinearSvm,
    PaI,
    PaIi,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Logit, ModelKind::LinearSvm, ModelKind::PaI, ModelKind::PaIi];

    pub fn is_passive_aggressive(self) -> bool {
        matches!(self, ModelKind::PaI | ModelKind::PaIi)
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Logit => "Logit",
            ModelKind::LinearSvm => "Linear SVM",
            ModelKind::PaI => "PA-I",
            ModelKind::PaIi => "PA-II",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "logit" | "logistic" => Ok(ModelKind::Logit),
            "linearsvm" | "svm" => Ok(ModelKind::LinearSvm),
            "pai" | "pa1" => Ok(ModelKind::PaI),
            "paii" | "pa2" => Ok(ModelKind::PaIi),
            _ => Err(Error::InvalidInput(format!("unknown model kind `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Penalty {
    L1,
    L2,
    #[serde(rename = "ELASTICNET")]
    ElasticNet,
}

/// Hyperparameters of a linear learner. Fields not used by a kind are ignored
/// (`alpha`, `penalty`, `l1_ratio`, `learning_rate0` for PA; `c` for SGD).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearParams<T> {
    pub kind: ModelKind,
    pub alpha: T,
    pub penalty: Penalty,
    pub l1_ratio: T,
    pub c: T,
    pub learning_rate0: T,
}

impl<T: Scalar> LinearParams<T> {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            alpha: T::of(1e-4),
            penalty: Penalty::L2,
            l1_ratio: T::of(0.15),
            c: T::one(),
            learning_rate0: T::of(0.01),
        }
    }

    pub fn with_alpha(mut self, alpha: T) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn with_c(mut self, c: T) -> Self {
        self.c = c;
        self
    }

    pub fn with_learning_rate0(mut self, eta0: T) -> Self {
        self.learning_rate0 = eta0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.kind.is_passive_aggressive() {
            if !(self.c > T::zero()) {
                return bad("C", format!("aggressiveness must be positive, got {}", self.c));
            }
        } else {
            if !(self.alpha >= T::zero()) {
                return bad("alpha", format!("penalty strength must be non-negative, got {}", self.alpha));
            }
            if !(self.learning_rate0 > T::zero()) {
                return bad("learning_rate0", format!("must be positive, got {}", self.learning_rate0));
            }
            if !(self.l1_ratio >= T::zero() && self.l1_ratio <= T::one()) {
                return bad("l1_ratio", format!("must lie in [0, 1], got {}", self.l1_ratio));
            }
        }
        Ok(())
    }

    /// Fresh model with zero weights over `dim` features.
    pub fn build(&self, dim: usize) -> Result<LinearModel<T>> {
        self.validate()?;
        Ok(LinearModel {
            weights: vec![T::zero(); dim],
            bias: T::zero(),
            params: self.clone(),
            step_count: 0,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LinearModel<T> {
    pub weights: Vec<T>,
    pub bias: T,
    pub params: LinearParams<T>,
    pub step_count: u64,
}

/// Signed label `2y - 1`.
pub(crate) fn signed<T: Scalar>(y: u8) -> T {
    if y == 1 {
        T::one()
    } else {
        -T::one()
    }
}

fn check_label(y: u8) -> Result<()> {
    if y <= 1 {
        Ok(())
    } else {
        Err(Error::UnknownLabel(y))
    }
}

impl<T: Scalar> LinearModel<T> {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn kind(&self) -> ModelKind {
        self.params.kind
    }

    pub fn decision_value(&self, x: &[T]) -> Result<T> {
        check_dim(self.dim(), x.len())?;
        Ok(self.margin(x))
    }

    #[inline]
    pub(crate) fn margin(&self, x: &[T]) -> T {
        dot(&self.weights, x) + self.bias
    }

    /// Class 1 when the decision value is non-negative.
    pub fn predict(&self, x: &[T]) -> Result<u8> {
        check_dim(self.dim(), x.len())?;
        Ok(self.predict_unchecked(x))
    }

    pub(crate) fn predict_unchecked(&self, x: &[T]) -> u8 {
        u8::from(self.margin(x) >= T::zero())
    }

    /// Current SGD step size.
    pub fn learning_rate(&self) -> T {
        let p = &self.params;
        let t = T::from_u64(self.step_count).expect("step count fits in a float");
        p.learning_rate0 / (T::one() + p.learning_rate0 * p.alpha * t)
    }

    /// Penalty subgradient at the current weights (`sign(0) = 0` for L1).
    pub fn penalty_gradient(&self) -> Vec<T> {
        let p = &self.params;
        let sign = |w: T| if w == T::zero() { T::zero() } else { w.signum() };
        self.weights
            .iter()
            .map(|&w| match p.penalty {
                Penalty::L2 => p.alpha * w,
                Penalty::L1 => p.alpha * sign(w),
                Penalty::ElasticNet => {
                    p.alpha * (p.l1_ratio * sign(w) + (T::one() - p.l1_ratio) * w)
                }
            })
            .collect()
    }

    /// Gradient of the data loss (log loss or hinge) with respect to
    /// `(weights, bias)`, without the penalty term.
    pub fn loss_gradient(&self, x: &[T], y: u8) -> (Vec<T>, T) {
        let s: T = signed(y);
        let z = s * self.margin(x);
        let g = match self.params.kind {
            // d/dz log(1 + e^{-z}) = -sigmoid(-z)
            ModelKind::Logit => -sigmoid(-z),
            ModelKind::LinearSvm if z < T::one() => -T::one(),
            _ => T::zero(),
        } * s;
        (x.iter().map(|&v| g * v).collect(), g)
    }

    /// Hinge loss `max(0, 1 - s f(x))`.
    pub fn hinge_loss(&self, x: &[T], y: u8) -> T {
        let s: T = signed(y);
        (T::one() - s * self.margin(x)).max(T::zero())
    }

    /// One online update with the labelled observation `(x, y)`.
    pub fn partial_fit(&mut self, x: &[T], y: u8) -> Result<()> {
        check_dim(self.dim(), x.len())?;
        check_label(y)?;
        self.update(x, y);
        Ok(())
    }

    pub(crate) fn update(&mut self, x: &[T], y: u8) {
        match self.params.kind {
            ModelKind::Logit | ModelKind::LinearSvm => self.sgd_step(x, y),
            ModelKind::PaI | ModelKind::PaIi => self.pa_step(x, y),
        }
        self.step_count += 1;
    }

    fn sgd_step(&mut self, x: &[T], y: u8) {
        let eta = self.learning_rate();
        let (gw, gb) = self.loss_gradient(x, y);
        let pen = self.penalty_gradient();
        for ((w, g), r) in self.weights.iter_mut().zip(gw).zip(pen) {
            *w -= eta * (g + r);
        }
        self.bias -= eta * gb;
    }

    fn pa_step(&mut self, x: &[T], y: u8) {
        let loss = self.hinge_loss(x, y);
        if loss <= T::zero() {
            return;
        }
        // bias is the weight of a constant feature 1
        let sq = norm_sq(x) + T::one();
        let c = self.params.c;
        let tau = match self.params.kind {
            ModelKind::PaI => c.min(loss / sq),
            _ => loss / (sq + T::one() / (c + c)),
        };
        if !tau.is_finite() {
            return;
        }
        let s: T = signed(y);
        for (w, &v) in self.weights.iter_mut().zip(x) {
            *w += tau * s * v;
        }
        self.bias += tau * s;
    }

    /// Runs `epochs` passes of [`partial_fit`](Self::partial_fit) over the
    /// rows of `xs`, each pass in a fresh order drawn from `seed`.
    pub fn fit(&mut self, xs: &[Vec<T>], ys: &[u8], epochs: usize, seed: u64) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::InvalidInput("cannot fit on an empty data set".into()));
        }
        check_dim(xs.len(), ys.len())?;
        for (x, &y) in xs.iter().zip(ys) {
            check_dim(self.dim(), x.len())?;
            check_label(y)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..xs.len()).collect();
        for _ in 0..epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                self.update(&xs[i], ys[i]);
            }
        }
        Ok(())
    }

    pub fn predict_batch(&self, xs: &[Vec<T>]) -> Result<Vec<u8>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(kind: ModelKind, w: &[f64], b: f64) -> LinearModel<f64> {
        let mut m = LinearParams::new(kind).build(w.len()).unwrap();
        m.weights = w.to_vec();
        m.bias = b;
        m
    }

    #[test]
    fn decision_value_examples() {
        assert_eq!(model(ModelKind::Logit, &[0.0, 0.0], 0.0).decision_value(&[3.0, -7.0]).unwrap(), 0.0);
        assert_eq!(model(ModelKind::Logit, &[1.0, 0.0], 0.0).decision_value(&[2.0, 5.0]).unwrap(), 2.0);
        assert_eq!(model(ModelKind::Logit, &[1.0, 1.0], -1.0).decision_value(&[0.5, 0.5]).unwrap(), 0.0);
        assert!(model(ModelKind::Logit, &[1.0, 1.0], 0.0).decision_value(&[1.0]).is_err());
    }

    #[test]
    fn predict_uses_sign_with_ties_to_one() {
        let m = model(ModelKind::PaI, &[1.0], 0.0);
        assert_eq!(m.predict(&[2.0]).unwrap(), 1);
        assert_eq!(m.predict(&[-0.1]).unwrap(), 0);
        assert_eq!(m.predict(&[0.0]).unwrap(), 1);
    }

    #[test]
    fn pa_i_closed_form() {
        let mut m = LinearParams::new(ModelKind::PaI).with_c(1.0).build(2).unwrap();
        m.partial_fit(&[1.0, 0.0], 1).unwrap();
        assert_relative_eq!(m.weights[0], 0.5);
        assert_eq!(m.weights[1], 0.0);
        assert_relative_eq!(m.bias, 0.5);
        assert_eq!(m.step_count, 1);
    }

    #[test]
    fn pa_ii_closed_form() {
        let mut m = LinearParams::new(ModelKind::PaIi).with_c(1.0).build(2).unwrap();
        m.partial_fit(&[1.0, 0.0], 1).unwrap();
        assert_relative_eq!(m.weights[0], 0.4, max_relative = 1e-12);
        assert_relative_eq!(m.bias, 0.4, max_relative = 1e-12);
    }

    #[test]
    fn pa_is_passive_without_loss() {
        let mut m = model(ModelKind::PaI, &[2.0, 0.0], 0.0);
        m.partial_fit(&[1.0, 0.0], 1).unwrap();
        assert_eq!(m.weights, vec![2.0, 0.0]);
        assert_eq!(m.step_count, 1);
    }

    #[test]
    fn saturated_logit_only_shrinks() {
        let mut m = LinearParams::new(ModelKind::Logit)
            .with_alpha(0.01)
            .with_learning_rate0(0.1)
            .build(2)
            .unwrap();
        m.weights = vec![50.0, -50.0];
        let before = m.clone();
        m.partial_fit(&[1.0, -1.0], 1).unwrap();
        let eta = before.learning_rate();
        for j in 0..2 {
            assert_relative_eq!(m.weights[j], before.weights[j] * (1.0 - eta * 0.01), max_relative = 1e-12);
        }
        assert_relative_eq!(m.bias, 0.0, epsilon = 1e-30);
    }

    #[test]
    fn l1_subgradient_at_zero_is_zero() {
        let mut m = LinearParams::new(ModelKind::LinearSvm).with_penalty(Penalty::L1).with_alpha(0.5).build(3).unwrap();
        m.weights = vec![0.0, 2.0, -3.0];
        assert_eq!(m.penalty_gradient(), vec![0.0, 0.5, -0.5]);
        m.params.penalty = Penalty::ElasticNet;
        let g = m.penalty_gradient();
        assert_relative_eq!(g[1], 0.5 * (0.15 + 0.85 * 2.0));
    }

    #[test]
    fn learning_rate_schedule() {
        let mut m = LinearParams::new(ModelKind::Logit).with_alpha(0.01).with_learning_rate0(0.5).build(1).unwrap();
        assert_eq!(m.learning_rate(), 0.5);
        m.step_count = 10;
        assert_relative_eq!(m.learning_rate(), 0.5 / (1.0 + 0.5 * 0.01 * 10.0));
    }

    #[test]
    fn fit_with_zero_epochs_is_identity() {
        let mut m = LinearParams::new(ModelKind::Logit).build(2).unwrap();
        let before = m.clone();
        m.fit(&[vec![1.0, 1.0]], &[1], 0, 3).unwrap();
        assert_eq!(m, before);
    }

    #[test]
    fn fit_rejects_empty_and_bad_labels() {
        let mut m = LinearParams::<f64>::new(ModelKind::PaI).build(2).unwrap();
        assert!(m.fit(&[], &[], 10, 0).is_err());
        assert!(matches!(m.fit(&[vec![0.0, 1.0]], &[2], 1, 0), Err(Error::UnknownLabel(2))));
    }

    #[test]
    fn svm_separates_two_points() {
        let xs = vec![vec![-2.0, 0.5], vec![2.0, -0.5]];
        let ys = vec![0, 1];
        let mut m = LinearParams::new(ModelKind::LinearSvm).build(2).unwrap();
        m.fit(&xs, &ys, 100, 11).unwrap();
        assert_eq!(m.predict_batch(&xs).unwrap(), ys);
    }

    #[test]
    fn pa_i_learns_and() {
        let xs = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        let ys = vec![0, 0, 0, 1];
        let mut m = LinearParams::new(ModelKind::PaI).build(2).unwrap();
        m.fit(&xs, &ys, 10, 5).unwrap();
        assert_eq!(m.predict_batch(&xs).unwrap(), ys);
    }

    #[test]
    fn params_validation() {
        assert!(LinearParams::<f64>::new(ModelKind::PaI).with_c(0.0).build(2).is_err());
        assert!(LinearParams::<f64>::new(ModelKind::Logit).with_alpha(-1.0).build(2).is_err());
        assert!(LinearParams::<f64>::new(ModelKind::Logit).with_learning_rate0(0.0).build(2).is_err());
    }

    #[test]
    fn kind_parses() {
        assert_eq!("pa-ii".parse::<ModelKind>().unwrap(), ModelKind::PaIi);
        assert_eq!("LINEAR_SVM".parse::<ModelKind>().unwrap(), ModelKind::LinearSvm);
        assert!("tree".parse::<ModelKind>().is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut m = LinearParams::new(ModelKind::PaIi).with_c(2.0).build(2).unwrap();
        m.partial_fit(&[0.3, -1.0], 0).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(s.contains("\"PA_II\""));
        let back: LinearModel<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
