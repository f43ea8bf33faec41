//! Grid and curve-sample containers plus the sample CSV format.
//!
//! A sample file has the grid coordinates on its first line and one curve
//! per following line, all comma separated:
//!
//! ```text
//! 0,0.5,1
//! 1,2,3
//! 2,2,2
//! ```
//!
//! Values are written with 17 significant digits so that a write/read round
//! trip is bit exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};

/// Ordered evaluation points on a compact interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
}

impl Grid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::ShapeMismatch(format!(
                "grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteValue { row: 0, col: i });
            }
        }
        if let Some(i) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonIncreasingGrid { index: i + 1 });
        }
        Ok(Self { points })
    }

    /// `t` equally spaced points from `a` to `b` inclusive.
    pub fn uniform(t: usize, a: f64, b: f64) -> Result<Self> {
        if t < 2 {
            return Err(Error::ShapeMismatch(format!("grid needs at least 2 points, got {t}")));
        }
        let step = (b - a) / (t - 1) as f64;
        let mut points: Vec<f64> = (0..t).map(|i| a + step * i as f64).collect();
        points[t - 1] = b;
        Self::new(points)
    }

    /// Equispaced grid on the unit interval, as used by the simulation models.
    pub fn unit(t: usize) -> Result<Self> {
        Self::uniform(t, 0.0, 1.0)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(a, b)`: the first and last coordinate.
    pub fn domain(&self) -> (f64, f64) {
        (self.points[0], self.points[self.points.len() - 1])
    }
}

/// A single function evaluated on a grid (estimates, standard errors, truths).
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Grid,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "curve has {} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(col) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { row: 0, col });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self> {
        let values = vec![value; grid.len()];
        Self::new(grid, values)
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&s| f(s)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub(crate) fn ensure_same_grid(&self, other: &Curve) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("curves live on different grids".into()));
        }
        Ok(())
    }
}

/// `N` curves observed on a common grid; row `n` of `values` is curve `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSample {
    grid: Grid,
    values: Array2<f64>,
}

impl FunctionalSample {
    pub fn new(grid: Grid, values: Array2<f64>) -> Result<Self> {
        let sample = Self { grid, values };
        sample.validate()?;
        Ok(sample)
    }

    /// Checks every invariant: shape, finiteness, `N >= 2`.
    ///
    /// The grid is validated on construction, but it is re-checked here so the
    /// function also reports on samples assembled from unchecked parts.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.grid.points.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonIncreasingGrid { index: i + 1 });
        }
        if self.values.ncols() != self.grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "sample has {} columns for a grid of {} points",
                self.values.ncols(),
                self.grid.len()
            )));
        }
        if self.values.nrows() < 2 {
            return Err(Error::TooFewCurves(self.values.nrows()));
        }
        for ((row, col), v) in self.values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Number of curves `N`.
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Number of grid points `T`.
    pub fn t(&self) -> usize {
        self.values.ncols()
    }

    pub fn curve(&self, n: usize) -> ArrayView1<'_, f64> {
        self.values.row(n)
    }

    pub(crate) fn map_values(&self, f: impl FnOnce(&mut Array2<f64>)) -> Result<Self> {
        let mut values = self.values.clone();
        f(&mut values);
        Self::new(self.grid.clone(), values)
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|cell| {
            let cell = cell.trim();
            cell.parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("{cell:?}: {e}"),
            })
        })
        .collect()
}

/// Parses the sample CSV format from a string.
pub fn parse_sample_csv(text: &str) -> Result<FunctionalSample> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (lineno, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let grid = Grid::new(parse_line(header, lineno)?)?;
    let t = grid.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (lineno, line) in lines {
        let row = parse_line(line, lineno)?;
        if row.len() != t {
            return Err(Error::ShapeMismatch(format!(
                "line {lineno} has {} values, grid has {t}",
                row.len()
            )));
        }
        data.extend(row);
        rows += 1;
    }
    let values = Array2::from_shape_vec((rows, t), data)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    FunctionalSample::new(grid, values)
}

pub fn read_sample_csv(path: impl AsRef<Path>) -> Result<FunctionalSample> {
    let text = fs::read_to_string(path)?;
    parse_sample_csv(&text)
}

/// Formats a float with 17 significant digits (round-trips exactly).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sample_to_csv(sample: &FunctionalSample) -> String {
    let mut out = String::new();
    let join = |out: &mut String, it: &mut dyn Iterator<Item = f64>| {
        let mut first = true;
        for v in it {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{}", fmt_f64(v));
        }
        out.push('\n');
    };
    join(&mut out, &mut sample.grid.points().iter().copied());
    for row in sample.values.rows() {
        join(&mut out, &mut row.iter().copied());
    }
    out
}

pub fn write_sample_csv(sample: &FunctionalSample, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, sample_to_csv(sample))?;
    Ok(())
}
