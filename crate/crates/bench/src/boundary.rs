//! Decision-boundary lattices and the topology checks run on them.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use smapy::{Dataset, Engine, LinearModel};

use crate::error::BenchError;

pub const DEFAULT_STEP: f64 = 0.02;
/// Margin added around the data extent on every side.
pub const MARGIN: f64 = 0.5;

/// Anything that labels a 2-D point.
pub trait Classifier {
    fn classify(&self, x: &[f64]) -> Result<u8, BenchError>;
}

impl Classifier for LinearModel<f64> {
    fn classify(&self, x: &[f64]) -> Result<u8, BenchError> {
        Ok(self.predict(x)?)
    }
}

impl Classifier for Engine<f64> {
    fn classify(&self, x: &[f64]) -> Result<u8, BenchError> {
        Ok(self.predict(x)?)
    }
}

/// A trained model as stored on disk by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SavedModel {
    Linear(LinearModel<f64>),
    Smapy(Engine<f64>),
}

impl Classifier for SavedModel {
    fn classify(&self, x: &[f64]) -> Result<u8, BenchError> {
        match self {
            SavedModel::Linear(m) => m.classify(x),
            SavedModel::Smapy(e) => e.classify(x),
        }
    }
}

impl SavedModel {
    /// Observed data extent, when the model remembers it.
    pub fn extent(&self) -> Option<Extent> {
        match self {
            SavedModel::Smapy(e) if e.percepts().count > 0 && e.dim() == 2 => {
                let p = e.percepts();
                Some(Extent { min: [p.min[0], p.min[1]], max: [p.max[0], p.max[1]] })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extent {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Extent {
    pub fn of(data: &Dataset<f64>) -> Result<Self, BenchError> {
        if data.dim() != 2 {
            return Err(BenchError::Config(format!("boundary grids need 2-D data, got {} columns", data.dim())));
        }
        let mut e = Extent { min: [f64::INFINITY; 2], max: [f64::NEG_INFINITY; 2] };
        for r in &data.x {
            for (j, &v) in r.iter().enumerate() {
                e.min[j] = e.min[j].min(v);
                e.max[j] = e.max[j].max(v);
            }
        }
        Ok(e)
    }
}

/// Predicted labels on a regular lattice, row-major with `x1` varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryGrid {
    pub origin: [f64; 2],
    pub step: f64,
    pub cols: usize,
    pub rows: usize,
    pub labels: Vec<u8>,
}

/// Evaluates `model` on the lattice covering `extent` widened by [`MARGIN`].
pub fn boundary_grid<C: Classifier + ?Sized>(model: &C, extent: Extent, step: f64) -> Result<BoundaryGrid, BenchError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(BenchError::Config(format!("grid step must be positive, got {step}")));
    }
    let origin = [extent.min[0] - MARGIN, extent.min[1] - MARGIN];
    let count = |j: usize| ((extent.max[j] + MARGIN - origin[j]) / step + 1e-9).floor() as usize + 1;
    let (cols, rows) = (count(0), count(1));
    let mut labels = Vec::with_capacity(cols * rows);
    for r in 0..rows {
        for c in 0..cols {
            labels.push(model.classify(&[origin[0] + c as f64 * step, origin[1] + r as f64 * step])?);
        }
    }
    Ok(BoundaryGrid { origin, step, cols, rows, labels })
}

impl BoundaryGrid {
    pub fn point(&self, c: usize, r: usize) -> [f64; 2] {
        [self.origin[0] + c as f64 * self.step, self.origin[1] + r as f64 * self.step]
    }

    pub fn label(&self, c: usize, r: usize) -> u8 {
        self.labels[r * self.cols + c]
    }

    fn neighbours(&self, c: usize, r: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (c, r) = (c as isize, r as isize);
        [(c - 1, r), (c + 1, r), (c, r - 1), (c, r + 1)]
            .into_iter()
            .filter(|&(cc, rr)| cc >= 0 && rr >= 0 && (cc as usize) < self.cols && (rr as usize) < self.rows)
            .map(|(cc, rr)| (cc as usize, rr as usize))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,yhat\n");
        for r in 0..self.rows {
            for c in 0..self.cols {
                let [x1, x2] = self.point(c, r);
                let _ = writeln!(out, "{x1:.6},{x2:.6},{}", self.label(c, r));
            }
        }
        out
    }

    pub fn is_constant(&self) -> bool {
        self.labels.windows(2).all(|w| w[0] == w[1])
    }

    /// Class-1 cells with at least one class-0 4-neighbour.
    pub fn frontier(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.label(c, r) == 1 && self.neighbours(c, r).any(|(cc, rr)| self.label(cc, rr) == 0) {
                    out.push((c, r));
                }
            }
        }
        out
    }

    /// Largest perpendicular distance of a frontier cell to the total-least-
    /// squares line through all frontier cells; `None` without a frontier.
    pub fn frontier_line_residual(&self) -> Option<f64> {
        let pts: Vec<[f64; 2]> = self.frontier().into_iter().map(|(c, r)| self.point(c, r)).collect();
        if pts.is_empty() {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for p in &pts {
            let (dx, dy) = (p[0] - mx, p[1] - my);
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
        // principal direction of the 2x2 scatter matrix
        let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        let normal = [-theta.sin(), theta.cos()];
        pts.iter()
            .map(|p| ((p[0] - mx) * normal[0] + (p[1] - my) * normal[1]).abs())
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
    }

    /// The frontier is one straight band: every frontier cell lies within one
    /// step of a common line. A constant grid has no frontier and qualifies.
    pub fn is_straight_band(&self) -> bool {
        self.frontier_line_residual().is_none_or(|res| res < self.step)
    }

    fn nearest_cell(&self, x: [f64; 2]) -> Option<(usize, usize)> {
        let idx = |j: usize, n: usize| {
            let i = ((x[j] - self.origin[j]) / self.step).round();
            (i >= 0.0 && (i as usize) < n).then_some(i as usize)
        };
        Some((idx(0, self.cols)?, idx(1, self.rows)?))
    }

    /// Cells of the 4-connected same-label region containing `start`.
    fn component(&self, start: (usize, usize)) -> Vec<(usize, usize)> {
        let target = self.label(start.0, start.1);
        let mut seen = vec![false; self.labels.len()];
        let mut stack = vec![start];
        seen[start.1 * self.cols + start.0] = true;
        let mut out = Vec::new();
        while let Some((c, r)) = stack.pop() {
            out.push((c, r));
            for (cc, rr) in self.neighbours(c, r) {
                let k = rr * self.cols + cc;
                if !seen[k] && self.labels[k] == target {
                    seen[k] = true;
                    stack.push((cc, rr));
                }
            }
        }
        out
    }

    /// The region holding `point` is bounded by a closed frontier: it is
    /// not constant and its connected component never reaches the border.
    pub fn encloses(&self, point: [f64; 2]) -> bool {
        let Some(start) = self.nearest_cell(point) else {
            return false;
        };
        !self.is_constant()
            && self
                .component(start)
                .iter()
                .all(|&(c, r)| c > 0 && r > 0 && c + 1 < self.cols && r + 1 < self.rows)
    }

    pub fn label_at(&self, point: [f64; 2]) -> Option<u8> {
        self.nearest_cell(point).map(|(c, r)| self.label(c, r))
    }
}
