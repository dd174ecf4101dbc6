//! Axis-aligned hypercubes and the cooperation operators that reshape them.
//!
//! Every operation here is a pure function of its inputs. Bounds are closed:
//! a point lying on a face is inside the box. Two boxes that only share a face
//! have zero intersection volume and are treated as non-overlapping.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::{approx_eq, Scalar};

/// Default relative offset used when a bound is moved past an excluded point.
pub const DEFAULT_EPSILON_SCALE: f64 = 1e-6;

/// Relative tolerance under which two candidate cuts count as a tie.
const CUT_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Hypercube<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

/// Result of one agent pushing another.
#[derive(Clone, Debug, PartialEq)]
pub enum PushOutcome<T> {
    /// The pushee after retraction; it no longer intersects the pusher.
    Retracted(Hypercube<T>),
    /// No single-bound cut separates the boxes because the pushee lies inside
    /// the pusher in every dimension. The caller absorbs the pushee instead.
    Annihilate,
    /// The boxes did not overlap to begin with.
    NoOverlap,
}

/// Which bound of an interval a cut moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug)]
struct Cut<T> {
    dim: usize,
    side: Side,
    value: T,
    /// Width of the interval left in `dim` after the cut.
    kept: T,
}

impl<T: Scalar> Hypercube<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidInput("hypercube needs at least one dimension".into()));
        }
        check_dim(lower.len(), upper.len())?;
        if let Some(j) = (0..lower.len()).find(|&j| !(lower[j] < upper[j])) {
            return Err(Error::InvalidInput(format!(
                "bounds must satisfy lower < upper, dimension {j} has [{}, {}]",
                lower[j], upper[j]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// Box `[c_j - half_width, c_j + half_width]` in every dimension.
    pub fn around(center: &[T], half_width: T) -> Result<Self> {
        if !(half_width > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "R",
                reason: format!("initial radius must be positive, got {half_width}"),
            });
        }
        Self::new(
            center.iter().map(|&c| c - half_width).collect(),
            center.iter().map(|&c| c + half_width).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn width(&self, j: usize) -> T {
        self.upper[j] - self.lower[j]
    }

    pub fn center(&self) -> Vec<T> {
        let two = T::one() + T::one();
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (l + u) / two)
            .collect()
    }

    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, j| acc * self.width(j))
    }

    pub fn contains(&self, x: &[T]) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[T]) -> bool {
        x.iter()
            .enumerate()
            .all(|(j, &v)| self.lower[j] <= v && v <= self.upper[j])
    }

    /// `true` when `other` lies inside `self` (closed bounds).
    pub fn encloses(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && (0..self.dim()).all(|j| self.lower[j] <= other.lower[j] && other.upper[j] <= self.upper[j])
    }

    /// Grows the box about its center so that its volume is multiplied by `1 + alpha`.
    pub fn expand(&self, alpha: T) -> Result<Self> {
        if !(alpha >= T::zero()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("expansion factor must be non-negative, got {alpha}"),
            });
        }
        Ok(self.rescale(T::one() + alpha))
    }

    /// Shrinks the box about its center so that its volume is multiplied by `1 - alpha`.
    pub fn retract(&self, alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha < T::one()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("retraction factor must lie in [0, 1), got {alpha}"),
            });
        }
        Ok(self.rescale(T::one() - alpha))
    }

    fn rescale(&self, volume_ratio: T) -> Self {
        if volume_ratio == T::one() {
            return self.clone();
        }
        let p = T::from_usize(self.dim()).expect("dimension fits in a float");
        let k = volume_ratio.powf(T::one() / p);
        let two = T::one() + T::one();
        let (lower, upper) = (0..self.dim())
            .map(|j| {
                let c = (self.lower[j] + self.upper[j]) / two;
                let h = self.width(j) / two * k;
                (c - h, c + h)
            })
            .unzip();
        Self { lower, upper }
    }

    pub fn intersection_volume(&self, other: &Self) -> Result<T> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.intersection_volume_unchecked(other))
    }

    pub(crate) fn intersection_volume_unchecked(&self, other: &Self) -> T {
        (0..self.dim()).fold(T::one(), |acc, j| {
            let lo = self.lower[j].max(other.lower[j]);
            let hi = self.upper[j].min(other.upper[j]);
            acc * (hi - lo).max(T::zero())
        })
    }

    /// Intersection volume divided by the smaller of the two volumes.
    pub fn overlap_index(&self, other: &Self) -> Result<T> {
        let inter = self.intersection_volume(other)?;
        let smaller = self.volume().min(other.volume());
        Ok((inter / smaller).min(T::one()))
    }

    /// Smallest box containing both inputs.
    pub fn enclosing(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self {
            lower: self.lower.iter().zip(&other.lower).map(|(&a, &b)| a.min(b)).collect(),
            upper: self.upper.iter().zip(&other.upper).map(|(&a, &b)| a.max(b)).collect(),
        })
    }

    /// Euclidean distance from `x` to the closest point of the box.
    pub fn distance_to_point(&self, x: &[T]) -> Result<T> {
        check_dim(self.dim(), x.len())?;
        let sq = x.iter().enumerate().fold(T::zero(), |acc, (j, &v)| {
            let d = (self.lower[j] - v).max(v - self.upper[j]).max(T::zero());
            acc + d * d
        });
        Ok(sq.sqrt())
    }

    /// `self` pushes `pushee`: one bound of the pushee moves onto a face of
    /// `self` so the two no longer intersect. Among the admissible cuts the one
    /// removing the least pushee volume wins, ties going to the lowest
    /// dimension and then to the lower bound.
    pub fn push(&self, pushee: &Self) -> Result<PushOutcome<T>> {
        check_dim(self.dim(), pushee.dim())?;
        if self.intersection_volume_unchecked(pushee) <= T::zero() {
            return Ok(PushOutcome::NoOverlap);
        }
        let mut cuts = Vec::with_capacity(2 * self.dim());
        for j in 0..self.dim() {
            // pushee keeps the part above the pusher's upper face
            if self.upper[j] < pushee.upper[j] && self.upper[j] > pushee.lower[j] {
                cuts.push(Cut {
                    dim: j,
                    side: Side::Lower,
                    value: self.upper[j],
                    kept: pushee.upper[j] - self.upper[j],
                });
            }
            // or the part below the pusher's lower face
            if self.lower[j] > pushee.lower[j] && self.lower[j] < pushee.upper[j] {
                cuts.push(Cut {
                    dim: j,
                    side: Side::Upper,
                    value: self.lower[j],
                    kept: self.lower[j] - pushee.lower[j],
                });
            }
        }
        Ok(match pushee.best_cut(&cuts) {
            Some(cut) => PushOutcome::Retracted(pushee.apply_cut(cut)),
            None => PushOutcome::Annihilate,
        })
    }

    /// Moves one bound just past `x` so the box stops containing it. The
    /// offset is `epsilon_scale` times the side length in the cut dimension.
    /// Returns `None` when `x` is not inside the box.
    pub fn exclude_point(&self, x: &[T], epsilon_scale: T) -> Result<Option<Self>> {
        check_dim(self.dim(), x.len())?;
        if !(epsilon_scale > T::zero() && epsilon_scale < T::of(0.5)) {
            return Err(Error::InvalidParameter {
                name: "epsilon_scale",
                reason: format!("must lie in (0, 0.5), got {epsilon_scale}"),
            });
        }
        if !self.contains_unchecked(x) {
            return Ok(None);
        }
        let mut cuts = Vec::with_capacity(2 * self.dim());
        for (j, &v) in x.iter().enumerate() {
            let eps = epsilon_scale * self.width(j);
            let raised = v + eps;
            if raised < self.upper[j] {
                cuts.push(Cut { dim: j, side: Side::Lower, value: raised, kept: self.upper[j] - raised });
            }
            let lowered = v - eps;
            if lowered > self.lower[j] {
                cuts.push(Cut { dim: j, side: Side::Upper, value: lowered, kept: lowered - self.lower[j] });
            }
        }
        match self.best_cut(&cuts) {
            Some(cut) => Ok(Some(self.apply_cut(cut))),
            None => Err(Error::InvalidInput(
                "hypercube is too thin to exclude the point with the configured offset".into(),
            )),
        }
    }

    /// Candidate with the smallest removed volume; `cuts` must be listed in
    /// tie-break order (dimension ascending, lower side first).
    fn best_cut(&self, cuts: &[Cut<T>]) -> Option<Cut<T>> {
        let vol = self.volume();
        let removed = |c: &Cut<T>| vol - vol / self.width(c.dim) * c.kept;
        let tol = T::of(CUT_TIE_TOL);
        let mut best: Option<(Cut<T>, T)> = None;
        for &c in cuts {
            let r = removed(&c);
            match best {
                Some((_, br)) if r >= br || approx_eq(r, br, tol) => {}
                _ => best = Some((c, r)),
            }
        }
        best.map(|(c, _)| c)
    }

    fn apply_cut(&self, cut: Cut<T>) -> Self {
        let mut out = self.clone();
        match cut.side {
            Side::Lower => out.lower[cut.dim] = cut.value,
            Side::Upper => out.upper[cut.dim] = cut.value,
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube(lower: &[f64], upper: &[f64]) -> Hypercube<f64> {
        Hypercube::new(lower.to_vec(), upper.to_vec()).unwrap()
    }

    #[test]
    fn rejects_degenerate_bounds() {
        assert!(Hypercube::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Hypercube::<f64>::new(vec![], vec![]).is_err());
        assert!(Hypercube::new(vec![0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn volume_examples() {
        assert_eq!(cube(&[0.0, 0.0], &[1.0, 1.0]).volume(), 1.0);
        assert_eq!(cube(&[0.0, 0.0], &[2.0, 3.0]).volume(), 6.0);
        assert_eq!(cube(&[-1.0; 3], &[1.0; 3]).volume(), 8.0);
    }

    #[test]
    fn contains_is_closed() {
        let h = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert!(h.contains(&[0.5, 0.5]).unwrap());
        assert!(h.contains(&[0.0, 1.0]).unwrap());
        assert!(!h.contains(&[1.0001, 0.5]).unwrap());
        assert!(matches!(h.contains(&[0.5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn expand_examples() {
        let h = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(h.expand(0.0).unwrap(), h);
        let e = h.expand(0.1).unwrap();
        assert_relative_eq!(e.width(0), 1.1f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(e.center()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(e.volume(), 1.1, max_relative = 1e-9);
        let big = cube(&[0.0, 0.0], &[2.0, 2.0]).expand(1.0).unwrap();
        assert_relative_eq!(big.volume(), 8.0, max_relative = 1e-9);
        assert!(h.expand(-0.1).is_err());
    }

    #[test]
    fn retract_examples() {
        let h = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(h.retract(0.0).unwrap(), h);
        let r = h.retract(0.19).unwrap();
        assert_relative_eq!(r.volume(), 0.81, max_relative = 1e-9);
        assert_relative_eq!(r.width(1), 0.9, max_relative = 1e-12);
        let r3 = cube(&[0.0; 3], &[1.0; 3]).retract(0.271).unwrap();
        assert_relative_eq!(r3.width(2), 0.9, max_relative = 1e-12);
        assert!(h.retract(1.0).is_err());
    }

    #[test]
    fn intersection_and_overlap_examples() {
        let unit = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(unit.intersection_volume(&unit).unwrap(), 1.0);
        assert_eq!(unit.intersection_volume(&cube(&[2.0, 2.0], &[3.0, 3.0])).unwrap(), 0.0);
        let a = cube(&[0.0, 0.0], &[2.0, 1.0]);
        let b = cube(&[1.0, 0.0], &[3.0, 1.0]);
        assert_eq!(a.intersection_volume(&b).unwrap(), 1.0);
        assert_eq!(a.overlap_index(&b).unwrap(), 0.5);
        assert_eq!(unit.overlap_index(&unit).unwrap(), 1.0);
        // shared face only
        assert_eq!(unit.overlap_index(&cube(&[1.0, 0.0], &[2.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn push_examples() {
        let pusher = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(
            pusher.push(&cube(&[0.5, 0.0], &[1.5, 1.0])).unwrap(),
            PushOutcome::Retracted(cube(&[1.0, 0.0], &[1.5, 1.0]))
        );
        assert_eq!(
            pusher.push(&cube(&[0.9, 0.9], &[2.0, 2.0])).unwrap(),
            PushOutcome::Retracted(cube(&[1.0, 0.9], &[2.0, 2.0]))
        );
        assert_eq!(
            cube(&[0.0, 0.0], &[3.0, 3.0]).push(&cube(&[1.0, 1.0], &[2.0, 2.0])).unwrap(),
            PushOutcome::Annihilate
        );
        assert_eq!(
            pusher.push(&cube(&[2.0, 2.0], &[3.0, 3.0])).unwrap(),
            PushOutcome::NoOverlap
        );
    }

    #[test]
    fn push_keeps_the_larger_side_when_pushee_straddles() {
        let pusher = cube(&[0.0, -5.0], &[1.0, 5.0]);
        let pushee = cube(&[-0.5, 0.0], &[3.0, 1.0]);
        let PushOutcome::Retracted(r) = pusher.push(&pushee).unwrap() else {
            panic!("expected a retraction")
        };
        assert_eq!(r, cube(&[1.0, 0.0], &[3.0, 1.0]));
    }

    #[test]
    fn exclude_point_examples() {
        let h = cube(&[0.0, 0.0], &[1.0, 1.0]);
        let eps = DEFAULT_EPSILON_SCALE;

        let r = h.exclude_point(&[0.99, 0.5], eps).unwrap().unwrap();
        assert_relative_eq!(r.upper()[0], 0.99 - eps, epsilon = 1e-15);
        assert_eq!(r.lower(), h.lower());
        assert!(!r.contains(&[0.99, 0.5]).unwrap());

        let r = h.exclude_point(&[0.5, 0.01], eps).unwrap().unwrap();
        assert_relative_eq!(r.lower()[1], 0.01 + eps, epsilon = 1e-15);
        assert_eq!(r.upper(), h.upper());

        let r = h.exclude_point(&[0.5, 0.5], eps).unwrap().unwrap();
        assert_relative_eq!(r.lower()[0], 0.5 + eps, epsilon = 1e-15);
        assert_eq!(r.upper(), h.upper());
        assert_eq!(r.lower()[1], 0.0);

        assert_eq!(h.exclude_point(&[2.0, 0.5], eps).unwrap(), None);
    }

    #[test]
    fn enclosing_examples() {
        let h = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(h.enclosing(&h).unwrap(), h);
        assert_eq!(
            h.enclosing(&cube(&[2.0, 2.0], &[3.0, 3.0])).unwrap(),
            cube(&[0.0, 0.0], &[3.0, 3.0])
        );
        assert_eq!(
            cube(&[0.0, 0.0], &[1.0, 2.0]).enclosing(&cube(&[0.5, 1.0], &[0.8, 3.0])).unwrap(),
            cube(&[0.0, 0.0], &[1.0, 3.0])
        );
    }

    #[test]
    fn distance_examples() {
        let h = cube(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(h.distance_to_point(&[0.3, 0.3]).unwrap(), 0.0);
        assert_eq!(h.distance_to_point(&[2.0, 0.5]).unwrap(), 1.0);
        assert_relative_eq!(h.distance_to_point(&[2.0, 2.0]).unwrap(), 2f64.sqrt());
    }

    #[test]
    fn works_in_single_precision() {
        let h: Hypercube<f32> = Hypercube::new(vec![0.0, 0.0], vec![2.0, 3.0]).unwrap();
        assert_eq!(h.volume(), 6.0f32);
        assert!((h.expand(0.5).unwrap().volume() - 9.0).abs() < 1e-5);
    }
}
