//! Admissible initial data: zero-mean, integrable, bounded, with a
//! square-integrable primitive.
//!
//! The analytic shapes are written as exact derivatives of a smooth
//! envelope, so `∫u₀ = 0` holds by construction and `P₀` is the envelope.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{compensated_sum, Field, Grid, Norm};
use crate::source;

/// Relative amplitude below which a sample counts as outside the support.
pub const SUPPORT_TOL: f64 = 1e-14;

/// Fraction of the domain, on each side, that must stay (numerically) empty.
pub const EDGE_MARGIN: f64 = 0.1;

/// Admissible |mean| relative to ‖u₀‖_∞.
pub const MEAN_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `d/dx [A·exp(−(x−x_c)²/σ²)]`
    GaussianDerivative,
    /// `d/dx [A·exp(−(x−x_c)²/σ²)·cos(k(x−x_c))]`
    ModulatedPacket,
    /// Tabulated `(x, u)` pairs, linearly interpolated and zero outside the table.
    Custom(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub shape: Shape,
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    pub wavenumber: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec { shape: Shape::GaussianDerivative, amplitude: 1.0, center: 0.0, width: 1.0, wavenumber: 0.0 }
    }
}

impl InitialSpec {
    pub fn gaussian_derivative(amplitude: f64, center: f64, width: f64) -> Self {
        InitialSpec { shape: Shape::GaussianDerivative, amplitude, center, width, wavenumber: 0.0 }
    }

    pub fn modulated_packet(amplitude: f64, center: f64, width: f64, wavenumber: f64) -> Self {
        InitialSpec { shape: Shape::ModulatedPacket, amplitude, center, width, wavenumber }
    }

    pub fn custom(points: Vec<(f64, f64)>) -> Self {
        InitialSpec { shape: Shape::Custom(points), ..InitialSpec::default() }
    }

    /// Reads a two-column `x u` table. Columns may be separated by whitespace
    /// or commas; blank lines and lines starting with `#` are ignored.
    pub fn from_table_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            let parse = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
            match cols.as_slice() {
                [x, u] => match (parse(x), parse(u)) {
                    (Some(x), Some(u)) => points.push((x, u)),
                    // a header row is tolerated only at the top
                    _ if points.is_empty() && lineno == 0 => continue,
                    _ => return Err(Error::format(path, format!("line {}: expected two numbers", lineno + 1))),
                },
                _ => return Err(Error::format(path, format!("line {}: expected two columns", lineno + 1))),
            }
        }
        if points.len() < 2 {
            return Err(Error::format(path, "need at least two samples"));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::format(path, "x column must be strictly increasing"));
        }
        Ok(InitialSpec::custom(points))
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0) && !matches!(self.shape, Shape::Custom(_)) {
            return Err(Error::InvalidSetup(format!("width must be positive, got {}", self.width)));
        }
        if !(self.amplitude.is_finite() && self.center.is_finite() && self.wavenumber.is_finite()) {
            return Err(Error::InvalidSetup("initial-data parameters must be finite".into()));
        }
        Ok(())
    }

    /// Closed-form value of `u₀` at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        let s = x - self.center;
        let sig2 = self.width * self.width;
        let env = self.amplitude * (-s * s / sig2).exp();
        match &self.shape {
            Shape::GaussianDerivative => -2.0 * s / sig2 * env,
            Shape::ModulatedPacket => {
                let ks = self.wavenumber * s;
                env * (-2.0 * s / sig2 * ks.cos() - self.wavenumber * ks.sin())
            }
            Shape::Custom(points) => interpolate(points, x),
        }
    }

    /// Closed-form primitive `P₀` (the envelope) for the analytic shapes.
    pub fn envelope(&self, x: f64) -> Option<f64> {
        let s = x - self.center;
        let env = self.amplitude * (-s * s / (self.width * self.width)).exp();
        match self.shape {
            Shape::GaussianDerivative => Some(env),
            Shape::ModulatedPacket => Some(env * (self.wavenumber * s).cos()),
            Shape::Custom(_) => None,
        }
    }

    /// Exact `‖P₀‖_{L²(ℝ)}` for the analytic shapes.
    pub fn envelope_l2(&self) -> Option<f64> {
        let a2 = self.amplitude * self.amplitude;
        let base = a2 * self.width * (std::f64::consts::PI / 2.0).sqrt();
        match self.shape {
            Shape::GaussianDerivative => Some(base.sqrt()),
            // cos² = (1 + cos 2ks)/2 against exp(−2s²/σ²)
            Shape::ModulatedPacket => {
                let k = self.wavenumber;
                let damp = (-(k * k) * self.width * self.width / 2.0).exp();
                Some((0.5 * base * (1.0 + damp)).sqrt())
            }
            Shape::Custom(_) => None,
        }
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let (first, last) = (points[0], points[points.len() - 1]);
    if x < first.0 || x > last.0 {
        return 0.0;
    }
    let k = points.partition_point(|p| p.0 <= x);
    if k == 0 {
        return first.1;
    }
    if k == points.len() {
        return last.1;
    }
    let (a, b) = (points[k - 1], points[k]);
    a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)
}

/// Samples `spec` at the cell centres and checks that the datum stays inside
/// the inner 80% of the domain.
pub fn generate(spec: &InitialSpec, grid: &Grid) -> Result<Field> {
    spec.validate()?;
    let u = Field::from_fn(*grid, 0.0, |x| spec.eval(x))?;
    let scale = match spec.shape {
        Shape::Custom(_) => u.norm(Norm::Linf),
        _ => spec.amplitude.abs(),
    };
    check_support(&u, scale)?;
    Ok(u)
}

fn check_support(u: &Field, scale: f64) -> Result<()> {
    let g = u.grid();
    let lo = g.x_min() + EDGE_MARGIN * g.length();
    let hi = g.x_max() - EDGE_MARGIN * g.length();
    let threshold = SUPPORT_TOL * scale;
    for (i, &v) in u.values().iter().enumerate() {
        let x = g.center(i);
        if (x < lo || x > hi) && v.abs() > threshold {
            return Err(Error::SupportViolation { x, value: v });
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// ‖P₀‖_{L²} with `P₀` accumulated from the left edge.
    pub p0_l2: f64,
    /// `∫u₀ dx` before projection.
    pub mean: f64,
}

/// Checks the zero-mean hypothesis and removes the residual quadrature drift
/// so that the discrete sum of the returned field vanishes.
pub fn validate_and_project(u0: &Field) -> Result<(Field, AdmissibilityReport)> {
    let dx = u0.grid().dx();
    let mean = u0.integral();
    let linf = u0.norm(Norm::Linf);
    let limit = MEAN_TOL * linf;
    if mean.abs() > limit {
        return Err(Error::NonZeroMean { mean, limit });
    }

    let mut v = u0.values().to_vec();
    let weight: f64 = compensated_sum(v.iter().map(|x| x.abs()));
    if weight > 0.0 {
        // spread the correction over the support, proportional to |u|
        for _ in 0..2 {
            let s = compensated_sum(v.iter().copied());
            for x in v.iter_mut() {
                *x -= s * x.abs() / weight;
            }
        }
        // then make the left-to-right running sum close at zero
        let imax = v.iter().enumerate().fold(0, |m, (i, x)| if x.abs() > v[m].abs() { i } else { m });
        for _ in 0..8 {
            let running: f64 = v.iter().sum();
            if running.abs() <= f64::EPSILON * weight {
                break;
            }
            v[imax] -= running;
        }
    }
    let projected = Field::new(*u0.grid(), v, u0.time())?;
    let p0 = source::primitive_from_left(&projected);
    let report = AdmissibilityReport {
        l1: projected.norm(Norm::L1),
        l2: projected.norm(Norm::L2),
        linf: projected.norm(Norm::Linf),
        p0_l2: p0.norm(Norm::L2),
        mean: mean / dx * dx,
    };
    Ok((projected, report))
}
