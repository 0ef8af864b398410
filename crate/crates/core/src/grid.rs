//! Uniform cell-centred grids, fields sampled on them, and the quadrature
//! toolkit the rest of the crate builds on.
//!
//! All integrals are midpoint-rule sums over cells. A [`Field`] is immutable
//! once built and always holds finite values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible resolution.
pub const MIN_CELLS: usize = 8;

/// Relative tolerance used when deciding whether a coordinate sits on a cell edge.
const EDGE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// `(0, x_max)`, truncation of the half-line with a physical boundary at 0.
    HalfLine,
    /// `(x_min, x_max)` with `x_min < 0 < x_max`, truncation of the real line.
    WholeLine,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
    kind: BoundaryKind,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, kind: BoundaryKind) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_cells < MIN_CELLS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_CELLS} cells, got {n_cells}")));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        let grid = Grid { x_min, x_max, n_cells, dx, kind };
        match kind {
            BoundaryKind::HalfLine if x_min != 0.0 => {
                Err(Error::InvalidGrid(format!("half-line grids start at 0, got x_min = {x_min}")))
            }
            BoundaryKind::WholeLine if !(x_min < 0.0 && 0.0 < x_max) => {
                Err(Error::InvalidGrid(format!("whole-line grids must straddle 0, got [{x_min}, {x_max}]")))
            }
            BoundaryKind::WholeLine if grid.edge_index(0.0).is_none() => {
                Err(Error::InvalidGrid("x = 0 must fall on a cell edge".into()))
            }
            _ => Ok(grid),
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Centre of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    /// Edge `j` in `0..=n_cells`; edge `j` is the left edge of cell `j`.
    pub fn edge(&self, j: usize) -> f64 {
        if j == self.n_cells {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx
        }
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Index of the edge located at `x`, if any.
    pub fn edge_index(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx;
        let j = s.round();
        if (s - j).abs() <= EDGE_TOL * s.abs().max(1.0) && j >= 0.0 && j <= self.n_cells as f64 {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Edge index of the origin. Always exists for a validated grid.
    pub fn zero_edge(&self) -> usize {
        self.edge_index(0.0).expect("validated grids carry an edge at 0")
    }

    /// Same grid with the resolution multiplied by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid::new(self.x_min, self.x_max, self.n_cells * factor, self.kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Norm {
    L1,
    L2,
    Linf,
}

/// Cell values of `u` or `P` at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.n_cells() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.n_cells(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value {} in cell {i}", values[i])));
        }
        if !time.is_finite() {
            return Err(Error::InvalidField(format!("non-finite time {time}")));
        }
        Ok(Field { grid, values, time })
    }

    pub fn zeros(grid: Grid, time: f64) -> Self {
        Field { grid, values: vec![0.0; grid.n_cells()], time }
    }

    /// Samples `f` at the cell centres.
    pub fn from_fn(grid: Grid, time: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        Field::new(grid, grid.centers().into_iter().map(f).collect(), time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn norm(&self, kind: Norm) -> f64 {
        norm_of(&self.values, self.grid.dx(), kind)
    }

    /// Midpoint approximation of the integral over the truncated domain.
    pub fn integral(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) * self.grid.dx()
    }

    /// `∫ x·f dx`.
    pub fn first_moment(&self) -> f64 {
        let g = self.grid;
        compensated_sum(self.values.iter().enumerate().map(|(i, v)| g.center(i) * v)) * g.dx()
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Field::new(self.grid, self.values.iter().map(|v| alpha * v).collect(), self.time)
    }

    /// Pointwise `self - other`; the result carries `self`'s time.
    pub fn difference(&self, other: &Field) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Field::new(self.grid, values, self.time)
    }

    /// Integral of `|f|` over `[lo, hi]` treating the field as piecewise constant.
    pub fn abs_integral_over(&self, lo: f64, hi: f64) -> Result<f64> {
        let g = self.grid;
        let slack = EDGE_TOL * g.length();
        if lo < g.x_min() - slack || hi > g.x_max() + slack || lo > hi {
            return Err(Error::WindowExceedsDomain { lo, hi, x_min: g.x_min(), x_max: g.x_max() });
        }
        let lo = lo.max(g.x_min());
        let hi = hi.min(g.x_max());
        let snap = |x: f64| g.edge_index(x).map(|j| g.edge(j)).unwrap_or(x);
        let (lo, hi) = (snap(lo), snap(hi));
        let first = (((lo - g.x_min()) / g.dx()).floor() as usize).min(g.n_cells() - 1);
        let mut whole = Vec::new();
        let mut partial = 0.0;
        for i in first..g.n_cells() {
            let (a, b) = (g.edge(i), g.edge(i + 1));
            if a >= hi {
                break;
            }
            if a >= lo && b <= hi {
                whole.push(self.values[i].abs());
            } else {
                let overlap = b.min(hi) - a.max(lo);
                if overlap > 0.0 {
                    partial += self.values[i].abs() * overlap;
                }
            }
        }
        Ok(compensated_sum(whole) * g.dx() + partial)
    }
}

/// Midpoint-rule norm of raw cell values.
pub fn norm_of(values: &[f64], dx: f64, kind: Norm) -> f64 {
    match kind {
        Norm::L1 => compensated_sum(values.iter().map(|v| v.abs())) * dx,
        Norm::L2 => (compensated_sum(values.iter().map(|v| v * v)) * dx).sqrt(),
        Norm::Linf => values.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
    }
}

pub fn norm(f: &Field, kind: Norm) -> f64 {
    f.norm(kind)
}

/// Restricted L¹ distances used by the stability estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowDistance {
    /// `‖u − v‖` over `(0, R)` or `(−R, R)`.
    pub lhs: f64,
    /// `‖u − v‖` over the window grown by `C·t`.
    pub rhs_window: f64,
}

/// Window bounds `(lo, hi)` of radius `r` for the grid's problem kind.
pub fn stability_window(grid: &Grid, r: f64) -> (f64, f64) {
    match grid.kind() {
        BoundaryKind::HalfLine => (0.0, r),
        BoundaryKind::WholeLine => (-r, r),
    }
}

pub fn l1_window_distance(u: &Field, v: &Field, r: f64, t: f64, c: f64) -> Result<WindowDistance> {
    let diff = u.difference(v)?;
    let (lo, hi) = stability_window(u.grid(), r);
    let (glo, ghi) = stability_window(u.grid(), r + c * t);
    Ok(WindowDistance { lhs: diff.abs_integral_over(lo, hi)?, rhs_window: diff.abs_integral_over(glo, ghi)? })
}

/// Neumaier-compensated summation.
pub fn compensated_sum(it: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut c = 0.0_f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}
