//! Two-dimensional toy data sets, z-scoring and CSV persistence.
//!
//! Generators follow the classic two-moons / concentric-circles layouts with
//! angles on a deterministic grid and seeded Gaussian noise. Class sizes are
//! `n / 2` and `n - n / 2`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Moons,
    Circles,
    Linear,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 3] = [DatasetKind::Moons, DatasetKind::Circles, DatasetKind::Linear];

    pub fn label(self) -> &'static str {
        match self {
            DatasetKind::Moons => "Moons",
            DatasetKind::Circles => "Circles",
            DatasetKind::Linear => "Linearly Separable",
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "moons" => Ok(DatasetKind::Moons),
            "circles" => Ok(DatasetKind::Circles),
            "linear" | "linearly_separable" | "linearly-separable" => Ok(DatasetKind::Linear),
            _ => Err(Error::InvalidInput(format!("unknown data set `{s}`"))),
        }
    }
}

/// Generator arguments, echoed next to generated files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub dataset: DatasetKind,
    pub n: usize,
    pub noise: f64,
    pub factor: f64,
    pub seed: u64,
    pub standardized: bool,
}

impl GeneratorSpec {
    /// Noise levels and circle factor of the reference experiment.
    pub fn reference(dataset: DatasetKind, n: usize, seed: u64) -> Self {
        let noise = match dataset {
            DatasetKind::Moons => 0.3,
            DatasetKind::Circles => 0.2,
            DatasetKind::Linear => 0.0,
        };
        Self { dataset, n, noise, factor: 0.5, seed, standardized: true }
    }

    pub fn generate<T: Scalar>(&self) -> Result<Dataset<T>> {
        let d = match self.dataset {
            DatasetKind::Moons => gen_moons(self.n, self.noise, self.seed)?,
            DatasetKind::Circles => gen_circles(self.n, self.noise, self.factor, self.seed)?,
            DatasetKind::Linear => gen_linear(self.n, self.seed)?,
        };
        if self.standardized {
            d.standardize()
        } else {
            Ok(d)
        }
    }
}

/// Per-feature mean and population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Scaler<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> Scaler<T> {
    pub fn inverse(&self, z: &[T]) -> Vec<T> {
        z.iter().enumerate().map(|(j, &v)| v * self.std[j] + self.mean[j]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Dataset<T> {
    pub x: Vec<Vec<T>>,
    pub y: Vec<u8>,
    pub scaler: Option<Scaler<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(x: Vec<Vec<T>>, y: Vec<u8>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidInput(format!("{} rows but {} labels", x.len(), y.len())));
        }
        let Some(p) = x.first().map(Vec::len) else {
            return Err(Error::InvalidInput("data set is empty".into()));
        };
        if p == 0 || x.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidInput("rows must share a non-zero width".into()));
        }
        if let Some(&bad) = y.iter().find(|&&c| c > 1) {
            return Err(Error::UnknownLabel(bad));
        }
        Ok(Self { x, y, scaler: None })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.y.iter().filter(|&&c| c == 1).count();
        [self.len() - ones, ones]
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> (Vec<Vec<T>>, Vec<u8>) {
        (idx.iter().map(|&i| self.x[i].clone()).collect(), idx.iter().map(|&i| self.y[i]).collect())
    }

    /// Z-scores every column with full-data statistics (population std).
    pub fn standardize(&self) -> Result<Self> {
        let n = T::from_usize(self.len()).expect("row count fits in a float");
        let p = self.dim();
        let mut mean = vec![T::zero(); p];
        let mut std = vec![T::zero(); p];
        for j in 0..p {
            mean[j] = self.x.iter().fold(T::zero(), |acc, r| acc + r[j]) / n;
            let var = self.x.iter().fold(T::zero(), |acc, r| acc + (r[j] - mean[j]).powi(2)) / n;
            std[j] = var.sqrt();
            if !(std[j] > T::zero()) {
                return Err(Error::InvalidInput(format!("column {j} has zero variance")));
            }
        }
        let x = self
            .x
            .iter()
            .map(|r| r.iter().enumerate().map(|(j, &v)| (v - mean[j]) / std[j]).collect())
            .collect();
        Ok(Self { x, y: self.y.clone(), scaler: Some(Scaler { mean, std }) })
    }

    /// Writes `x1,x2,...,y` rows with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        let _ = writeln!(out, "{},y", header.join(","));
        for (row, &label) in self.x.iter().zip(&self.y) {
            for v in row {
                let _ = write!(out, "{:.16e},", v.as_f64());
            }
            let _ = writeln!(out, "{label}");
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_csv(&fs::read_to_string(path)?, &path.display().to_string())
    }

    /// Parses CSV text; `origin` names the source in error messages.
    pub fn from_csv(text: &str, origin: &str) -> Result<Self> {
        let parse_err = |line: usize, reason: String| Error::Parse { path: origin.to_string(), line, reason };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 2 || cols.last() != Some(&"y") {
            return Err(parse_err(1, format!("header must end with a `y` label column, got `{header}`")));
        }
        let p = cols.len() - 1;
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (i, line) in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != p + 1 {
                return Err(parse_err(i + 1, format!("expected {} fields, found {}", p + 1, fields.len())));
            }
            let row = fields[..p]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map(T::of)
                        .map_err(|e| parse_err(i + 1, format!("bad number `{f}`: {e}")))
                })
                .collect::<Result<Vec<T>>>()?;
            let label = match fields[p] {
                "0" => 0,
                "1" => 1,
                other => return Err(parse_err(i + 1, format!("label must be 0 or 1, got `{other}`"))),
            };
            x.push(row);
            y.push(label);
        }
        Self::new(x, y)
    }
}

fn noise_source(noise: f64, seed: u64) -> Result<(ChaCha8Rng, Normal<f64>)> {
    let normal = Normal::new(0.0, noise).map_err(|e| Error::InvalidParameter {
        name: "noise",
        reason: format!("{e} (got {noise})"),
    })?;
    Ok((ChaCha8Rng::seed_from_u64(seed), normal))
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", reason: format!("need at least 2 points, got {n}") });
    }
    Ok(())
}

fn finish<T: Scalar>(points: Vec<[f64; 2]>, y: Vec<u8>) -> Result<Dataset<T>> {
    Dataset::new(points.into_iter().map(|p| vec![T::of(p[0]), T::of(p[1])]).collect(), y)
}

/// Evenly spaced values from `start` to `stop`, endpoint included.
fn linspace(start: f64, stop: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (stop - start) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| start + step * i as f64)
}

/// Upper half circle (class 0) interleaved with a shifted lower half circle (class 1).
pub fn gen_moons<T: Scalar>(n: usize, noise: f64, seed: u64) -> Result<Dataset<T>> {
    check_n(n)?;
    let (mut rng, normal) = noise_source(noise, seed)?;
    let n_outer = n / 2;
    let n_inner = n - n_outer;
    let mut pts: Vec<[f64; 2]> = linspace(0.0, std::f64::consts::PI, n_outer)
        .map(|t| [t.cos(), t.sin()])
        .chain(linspace(0.0, std::f64::consts::PI, n_inner).map(|t| [1.0 - t.cos(), 0.5 - t.sin()]))
        .collect();
    for p in &mut pts {
        p[0] += normal.sample(&mut rng);
        p[1] += normal.sample(&mut rng);
    }
    let y = std::iter::repeat_n(0, n_outer).chain(std::iter::repeat_n(1, n_inner)).collect();
    finish(pts, y)
}

/// Unit circle (class 0) around a circle of radius `factor` (class 1).
pub fn gen_circles<T: Scalar>(n: usize, noise: f64, factor: f64, seed: u64) -> Result<Dataset<T>> {
    check_n(n)?;
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::InvalidParameter { name: "factor", reason: format!("must lie in (0, 1), got {factor}") });
    }
    let (mut rng, normal) = noise_source(noise, seed)?;
    let n_outer = n / 2;
    let n_inner = n - n_outer;
    let ring = |count: usize, radius: f64| {
        (0..count).map(move |i| {
            let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
            [radius * t.cos(), radius * t.sin()]
        })
    };
    let mut pts: Vec<[f64; 2]> = ring(n_outer, 1.0).chain(ring(n_inner, factor)).collect();
    for p in &mut pts {
        p[0] += normal.sample(&mut rng);
        p[1] += normal.sample(&mut rng);
    }
    let y = std::iter::repeat_n(0, n_outer).chain(std::iter::repeat_n(1, n_inner)).collect();
    finish(pts, y)
}

/// Two unit-variance Gaussian blobs centred at `(-1.5, 0)` (class 0) and
/// `(1.5, 0)` (class 1); only the first variable carries information.
pub fn gen_linear<T: Scalar>(n: usize, seed: u64) -> Result<Dataset<T>> {
    check_n(n)?;
    let (mut rng, normal) = noise_source(1.0, seed)?;
    let n0 = n / 2;
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let mx = if i < n0 { -1.5 } else { 1.5 };
            [mx + normal.sample(&mut rng), normal.sample(&mut rng)]
        })
        .collect();
    let y = std::iter::repeat_n(0, n0).chain(std::iter::repeat_n(1, n - n0)).collect();
    finish(pts, y)
}
