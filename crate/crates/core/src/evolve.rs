//! Time stepping for the viscous system and the `ε = 0` entropy scheme.
//!
//! Semi-discretisation per cell:
//!
//! ```text
//! du_i/dt = −(F_{i+1/2} − F_{i−1/2})/dx + γP_i + ε(u_{i+1} − 2u_i + u_{i−1})/dx²
//! ```
//!
//! with the Godunov flux of `f(u) = −u³/6`. Because `f' ≤ 0` everywhere the
//! Godunov flux is exactly `f(right state)`. Time integration is two-stage
//! SSP Runge–Kutta with `P` recomputed at each stage.

use serde::{Deserialize, Serialize};

use crate::bounds::{Auditor, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{BoundaryKind, Field, Grid};
use crate::source::{elliptic_state, primitive_state, EllipticSetup, Normalization, SourceState};

/// Guard in the advective CFL denominator.
pub const CFL_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    /// Half-line problem with `u(t, 0) = 0`.
    Ibvp,
    /// Whole-line problem.
    Cauchy,
}

impl ProblemKind {
    pub fn boundary(self) -> BoundaryKind {
        match self {
            ProblemKind::Ibvp => BoundaryKind::HalfLine,
            ProblemKind::Cauchy => BoundaryKind::WholeLine,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub gamma: f64,
    pub eps: f64,
    pub cfl: f64,
    pub t_final: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub kind: ProblemKind,
    pub snapshot_every: usize,
    pub normalization: Normalization,
    /// Multiplicative slack for the bound checks.
    pub tol: f64,
    /// States of `u` beyond the edges (whole line only; the half line uses 0).
    pub ghost_left: f64,
    pub ghost_right: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            gamma: 0.5,
            eps: 0.01,
            cfl: 0.5,
            t_final: 1.0,
            x_min: 0.0,
            x_max: 20.0,
            n_cells: 1024,
            kind: ProblemKind::Ibvp,
            snapshot_every: 1,
            normalization: Normalization::AnchorAtZero,
            tol: 0.02,
            ghost_left: 0.0,
            ghost_right: 0.0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSetup(m));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be ≥ 0, got {}", self.gamma));
        }
        if !(self.eps >= 0.0 && self.eps.is_finite()) {
            return bad(format!("epsilon must be ≥ 0, got {}", self.eps));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be ≥ 0, got {}", self.t_final));
        }
        if self.snapshot_every == 0 {
            return bad("snapshot_every must be ≥ 1".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be ≥ 0, got {}", self.tol));
        }
        if !(self.ghost_left.is_finite() && self.ghost_right.is_finite()) {
            return bad("ghost states must be finite".into());
        }
        if self.kind == ProblemKind::Ibvp && (self.ghost_left != 0.0 || self.ghost_right != 0.0) {
            return bad("half-line runs use zero ghost states".into());
        }
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.x_min, self.x_max, self.n_cells, self.kind.boundary())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let dx = (self.x_max - self.x_min) / self.n_cells as f64;
        if self.eps > 0.0 && dx > 2.0 * self.eps {
            w.push(format!(
                "cell Péclet number dx/eps = {:.3} exceeds 2; the central source stencil may oscillate, consider eps = 0",
                dx / self.eps
            ));
        }
        w
    }
}

/// Godunov flux for `f(u) = −u³/6`. Since `f` is non-increasing the Riemann
/// fan always moves left and the interface state is `b`.
pub fn godunov_flux(_a: f64, b: f64) -> f64 {
    flux(b)
}

pub fn flux(u: f64) -> f64 {
    -u * u * u / 6.0
}

/// Largest stable step for the explicit update.
pub fn cfl_dt(u: &[f64], eps: f64, dx: f64, cfl: f64) -> f64 {
    let speed = u.iter().fold(0.0_f64, |m, v| m.max(0.5 * v * v));
    let advective = dx / (speed + CFL_GUARD);
    let diffusive = if eps > 0.0 { dx * dx / (2.0 * eps) } else { f64::INFINITY };
    cfl * advective.min(diffusive)
}

/// Spatial operator and SSP-RK2 step for one configuration.
#[derive(Clone, Debug)]
pub struct Stepper {
    config: SolveConfig,
    grid: Grid,
    elliptic: Option<EllipticSetup>,
}

impl Stepper {
    pub fn new(config: &SolveConfig) -> Result<Self> {
        config.validate()?;
        let elliptic =
            if config.eps > 0.0 { Some(EllipticSetup::new(config.eps, config.normalization)?) } else { None };
        Ok(Stepper { config: config.clone(), grid: config.grid()?, elliptic })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn config(&self) -> &SolveConfig {
        &self.config
    }

    pub fn ghosts(&self) -> (f64, f64) {
        (self.config.ghost_left, self.config.ghost_right)
    }

    /// `P` for the state `u`.
    pub fn source(&self, u: &[f64]) -> Result<SourceState> {
        match &self.elliptic {
            Some(setup) => elliptic_state(u, &self.grid, setup),
            None => Ok(primitive_state(u, &self.grid, self.config.normalization, self.ghosts())),
        }
    }

    /// Right-hand side `L(u)` given the matching source.
    pub fn rhs(&self, u: &[f64], p: &SourceState) -> Vec<f64> {
        let n = u.len();
        let dx = self.grid.dx();
        let (gl, gr) = self.ghosts();
        let (gamma, eps) = (self.config.gamma, self.config.eps);
        let nu = eps / (dx * dx);
        (0..n)
            .map(|i| {
                let left = if i == 0 { gl } else { u[i - 1] };
                let right = if i + 1 == n { gr } else { u[i + 1] };
                let transport = -(godunov_flux(u[i], right) - godunov_flux(left, u[i])) / dx;
                let diffusion = if eps > 0.0 { nu * (right - 2.0 * u[i] + left) } else { 0.0 };
                transport + gamma * p.values[i] + diffusion
            })
            .collect()
    }

    /// Forward-Euler stage `u + dt·L(u)`.
    pub fn euler_stage(&self, u: &[f64], p: &SourceState, dt: f64) -> Vec<f64> {
        self.rhs(u, p).iter().zip(u).map(|(l, v)| v + dt * l).collect()
    }

    /// One SSP-RK2 step from `u` with its source `p` already evaluated.
    pub fn step_with(&self, u: &[f64], p: &SourceState, dt: f64) -> Result<Vec<f64>> {
        let u1 = self.euler_stage(u, p, dt);
        let p1 = self.source(&u1)?;
        let u2 = self.euler_stage(&u1, &p1, dt);
        Ok(u.iter().zip(&u2).map(|(a, b)| 0.5 * a + 0.5 * b).collect())
    }

    pub fn step(&self, u: &Field, dt: f64) -> Result<Field> {
        let p = self.source(u.values())?;
        let next = self.step_with(u.values(), &p, dt)?;
        Field::new(self.grid, next, u.time() + dt)
            .map_err(|_| Error::NonFinite { step: 0, time: u.time() + dt })
    }
}

/// `step` for a single configuration, building the stepper on the fly.
pub fn step(u: &Field, config: &SolveConfig, dt: f64) -> Result<Field> {
    Stepper::new(config)?.step(u, dt)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub u: Field,
    pub p: Field,
}

impl Snapshot {
    pub fn time(&self) -> f64 {
        self.u.time()
    }
}

/// Boundary trace surrogates at `x = 0` (half line only).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    /// Value in the first cell.
    pub first_cell: f64,
    /// Linear extrapolation `1.5u₀ − 0.5u₁` to the wall.
    pub extrapolated: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SolveConfig,
    pub snapshots: Vec<Snapshot>,
    /// One record per accepted step, starting with the initial state.
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub trace: Vec<TraceSample>,
    /// Step sizes; `dts[k]` advances from record `k` to `k + 1`.
    pub dts: Vec<f64>,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn grid(&self) -> Grid {
        *self.snapshots[0].u.grid()
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectories hold at least the initial snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }
}

/// Fraction of the domain on each side watched for mass reaching the edges.
const ESCAPE_BAND: f64 = 0.1;
const ESCAPE_TOL: f64 = 1e-8;

fn escape_level(u: &[f64], grid: &Grid) -> f64 {
    let band = ((ESCAPE_BAND * grid.n_cells() as f64).ceil() as usize).max(1);
    let n = u.len();
    u[..band].iter().chain(&u[n - band..]).fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Chooses the next step, splitting the remainder evenly instead of leaving
/// a sliver at the end.
fn next_dt(stable: f64, t: f64, t_final: f64) -> f64 {
    let remaining = t_final - t;
    if stable >= remaining {
        remaining
    } else if 2.0 * stable > remaining {
        0.5 * remaining
    } else {
        stable
    }
}

pub fn run(config: &SolveConfig, u0: &Field) -> Result<Trajectory> {
    let stepper = Stepper::new(config)?;
    let grid = *stepper.grid();
    if *u0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let dx = grid.dx();
    let half_line = grid.kind() == BoundaryKind::HalfLine;

    let mut u = u0.values().to_vec();
    let mut p = stepper.source(&u)?;
    let mut t = 0.0;
    let mut auditor = Auditor::new(config, &grid, &u);
    let mut warnings = config.warnings();
    let mut escaped = false;

    let mut traj = Trajectory {
        config: config.clone(),
        snapshots: Vec::new(),
        diagnostics: Vec::new(),
        trace: Vec::new(),
        dts: Vec::new(),
        warnings: Vec::new(),
    };

    let mut record = |traj: &mut Trajectory, step: usize, t: f64, u: &[f64], p: &SourceState, snap: bool| -> Result<()> {
        traj.diagnostics.push(auditor.observe(t, u, p));
        if half_line {
            traj.trace.push(TraceSample { t, first_cell: u[0], extrapolated: 1.5 * u[0] - 0.5 * u[1] });
        }
        if !escaped {
            let level = escape_level(u, &grid);
            let linf = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if level > ESCAPE_TOL * linf {
                escaped = true;
                warnings.push(format!(
                    "solution reaches the truncation edges at t = {t}: |u| = {level:e} within {}% of an edge",
                    ESCAPE_BAND * 100.0
                ));
            }
        }
        if snap {
            traj.snapshots.push(Snapshot {
                step,
                u: Field::new(grid, u.to_vec(), t)?,
                p: Field::new(grid, p.values.clone(), t)?,
            });
        }
        Ok(())
    };

    record(&mut traj, 0, t, &u, &p, true)?;
    let mut n = 0;
    // relative slack so that accumulated round-off never triggers an extra step
    while config.t_final - t > 1e-12 * config.t_final {
        let dt = next_dt(cfl_dt(&u, config.eps, dx, config.cfl), t, config.t_final);
        let next = stepper.step_with(&u, &p, dt)?;
        n += 1;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: n, time: t + dt });
        }
        t = if config.t_final - (t + dt) <= 1e-12 * config.t_final { config.t_final } else { t + dt };
        u = next;
        p = stepper.source(&u)?;
        traj.dts.push(dt);
        let last = t >= config.t_final;
        record(&mut traj, n, t, &u, &p, last || n % config.snapshot_every == 0)?;
    }
    traj.warnings = warnings;
    Ok(traj)
}
