//! The nonlocal source `P`.
//!
//! For `ε = 0` it is the primitive of `u` anchored at the origin. For
//! `ε > 0` it solves `−εP'' + P' = u` with central differences and
//! homogeneous Dirichlet data at the truncation edges.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{norm_of, BoundaryKind, Field, Grid, Norm};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// Decaying solve, then shifted so that `P(0) = 0`.
    #[default]
    AnchorAtZero,
    /// `P = 0` at both truncation edges.
    DecayBothEnds,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticSetup {
    pub eps: f64,
    pub normalization: Normalization,
}

impl EllipticSetup {
    pub fn new(eps: f64, normalization: Normalization) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::NonPositiveViscosity(eps));
        }
        Ok(EllipticSetup { eps, normalization })
    }

    fn check(&self, grid: &Grid) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::NonPositiveViscosity(self.eps));
        }
        if grid.kind() == BoundaryKind::HalfLine && self.normalization == Normalization::DecayBothEnds {
            return Err(Error::InvalidSetup("half-line sources are anchored at 0".into()));
        }
        Ok(())
    }
}

/// Source values on raw cells, with the ghost values that close the
/// difference stencils at the truncation edges.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceState {
    pub values: Vec<f64>,
    pub ghost_left: f64,
    pub ghost_right: f64,
    /// Constant subtracted to pin `P(0) = 0`; zero for decaying solves.
    pub anchor_gap: f64,
}

impl SourceState {
    pub fn zeros(n: usize) -> Self {
        SourceState { values: vec![0.0; n], ghost_left: 0.0, ghost_right: 0.0, anchor_gap: 0.0 }
    }

    /// One-sided slope across the left truncation edge.
    pub fn slope_left(&self, dx: f64) -> f64 {
        (self.values[0] - self.ghost_left) / dx
    }

    pub fn slope_right(&self, dx: f64) -> f64 {
        (self.ghost_right - self.values[self.values.len() - 1]) / dx
    }

    /// Slope across edge `j`.
    pub fn slope_at_edge(&self, j: usize, dx: f64) -> f64 {
        let v = &self.values;
        let below = if j == 0 { self.ghost_left } else { v[j - 1] };
        let above = if j == v.len() { self.ghost_right } else { v[j] };
        (above - below) / dx
    }

    /// Value on edge `j`, averaged from its neighbours.
    pub fn value_at_edge(&self, j: usize) -> f64 {
        let v = &self.values;
        let below = if j == 0 { self.ghost_left } else { v[j - 1] };
        let above = if j == v.len() { self.ghost_right } else { v[j] };
        0.5 * (below + above)
    }

    /// Central first differences at the cell centres.
    pub fn derivative(&self, dx: f64) -> Vec<f64> {
        central_difference(&self.values, self.ghost_left, self.ghost_right, dx)
    }

    pub fn second_derivative(&self, dx: f64) -> Vec<f64> {
        let v = &self.values;
        let n = v.len();
        let dx2 = dx * dx;
        (0..n)
            .map(|i| {
                let l = if i == 0 { self.ghost_left } else { v[i - 1] };
                let r = if i + 1 == n { self.ghost_right } else { v[i + 1] };
                (r - 2.0 * v[i] + l) / dx2
            })
            .collect()
    }

    pub fn energy_terms(&self, eps: f64, dx: f64) -> EnergyTerms {
        EnergyTerms {
            pxx_l2: norm_of(&self.second_derivative(dx), dx, Norm::L2),
            px_l2: norm_of(&self.derivative(dx), dx, Norm::L2),
            slope_left: self.slope_left(dx),
            slope_right: self.slope_right(dx),
            eps,
        }
    }
}

/// Solved source bound to its grid.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticSolution {
    pub field: Field,
    pub state: SourceState,
}

impl EllipticSolution {
    fn dx(&self) -> f64 {
        self.field.grid().dx()
    }

    pub fn anchor_gap(&self) -> f64 {
        self.state.anchor_gap
    }

    pub fn slope_left(&self) -> f64 {
        self.state.slope_left(self.dx())
    }

    pub fn slope_right(&self) -> f64 {
        self.state.slope_right(self.dx())
    }

    pub fn slope_at_edge(&self, j: usize) -> f64 {
        self.state.slope_at_edge(j, self.dx())
    }

    pub fn derivative(&self) -> Vec<f64> {
        self.state.derivative(self.dx())
    }

    pub fn second_derivative(&self) -> Vec<f64> {
        self.state.second_derivative(self.dx())
    }

    pub fn energy_terms(&self, eps: f64) -> EnergyTerms {
        self.state.energy_terms(eps, self.dx())
    }
}

/// Pieces of `ε²‖P''‖² + ε P'(0)² + ‖P'‖² = ‖u‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTerms {
    pub pxx_l2: f64,
    pub px_l2: f64,
    pub slope_left: f64,
    pub slope_right: f64,
    pub eps: f64,
}

impl EnergyTerms {
    /// Left side of the half-line identity.
    pub fn lhs(&self) -> f64 {
        let e = self.eps;
        e * e * self.pxx_l2 * self.pxx_l2 + e * self.slope_left * self.slope_left + self.px_l2 * self.px_l2
    }

    /// `|lhs − ‖u‖²| / ‖u‖²`, or the absolute gap when `u = 0`.
    pub fn relative_residual(&self, u_l2: f64) -> f64 {
        let rhs = u_l2 * u_l2;
        let gap = (self.lhs() - rhs).abs();
        if rhs > 0.0 {
            gap / rhs
        } else {
            gap
        }
    }
}

pub(crate) fn central_difference(v: &[f64], ghost_left: f64, ghost_right: f64, dx: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let l = if i == 0 { ghost_left } else { v[i - 1] };
            let r = if i + 1 == n { ghost_right } else { v[i + 1] };
            (r - l) / (2.0 * dx)
        })
        .collect()
}

/// Solves a tridiagonal system with partial pivoting (the LAPACK `gtsv`
/// scheme). `lower` and `upper` have length `n − 1`; `rhs` is overwritten
/// with the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    assert!(lower.len() + 1 == n && upper.len() + 1 == n && rhs.len() == n, "tridiagonal shape mismatch");
    let mut dl = lower.to_vec();
    let mut d = diag.to_vec();
    let mut du = upper.to_vec();
    // second superdiagonal created by row swaps
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let b = rhs;

    for i in 0..n.saturating_sub(1) {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                return Err(Error::SingularSystem(i));
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fact * du2[i];
            }
            du[i] = temp;
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - fact * b[i + 1];
        }
        dl[i] = 0.0;
    }
    if d[n - 1] == 0.0 {
        return Err(Error::SingularSystem(n - 1));
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    }
    Ok(())
}

/// Primitive sampled at the cell edges, zero at edge `anchor`.
pub(crate) fn primitive_edges(u: &[f64], dx: f64, anchor: usize) -> Vec<f64> {
    let n = u.len();
    let mut e = vec![0.0; n + 1];
    for j in anchor..n {
        e[j + 1] = e[j] + u[j] * dx;
    }
    for j in (0..anchor).rev() {
        e[j] = e[j + 1] - u[j] * dx;
    }
    e
}

pub(crate) fn primitive_centers(u: &[f64], dx: f64, anchor: usize) -> Vec<f64> {
    let e = primitive_edges(u, dx, anchor);
    e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// `∫_anchor^x u`, exact for the piecewise-constant field at every edge.
pub fn primitive(u: &Field, anchor: f64) -> Result<Field> {
    let g = *u.grid();
    let j = g.edge_index(anchor).ok_or(Error::AnchorOffEdge(anchor))?;
    Field::new(g, primitive_centers(u.values(), g.dx(), j), u.time())
}

/// Primitive accumulated from the left truncation edge.
pub fn primitive_from_left(u: &Field) -> Field {
    let g = *u.grid();
    Field::new(g, primitive_centers(u.values(), g.dx(), 0), u.time()).expect("finite input gives finite sums")
}

/// Decaying solution on raw values. Ghosts mirror the cell values, which
/// places `P = 0` on both outer edges.
pub(crate) fn solve_decaying(u: &[f64], dx: f64, eps: f64) -> Result<Vec<f64>> {
    let n = u.len();
    let a = -eps / (dx * dx) - 0.5 / dx;
    let b = 2.0 * eps / (dx * dx);
    let c = -eps / (dx * dx) + 0.5 / dx;
    let lower = vec![a; n - 1];
    let upper = vec![c; n - 1];
    let mut diag = vec![b; n];
    diag[0] = b - a;
    diag[n - 1] = b - c;
    let mut p = u.to_vec();
    solve_tridiagonal(&lower, &diag, &upper, &mut p)?;
    Ok(p)
}

/// Elliptic source on raw values.
pub fn elliptic_state(u: &[f64], grid: &Grid, setup: &EllipticSetup) -> Result<SourceState> {
    setup.check(grid)?;
    let mut p = solve_decaying(u, grid.dx(), setup.eps)?;
    let n = p.len();
    let (mut gl, mut gr) = (-p[0], -p[n - 1]);
    let mut gap = 0.0;
    if setup.normalization == Normalization::AnchorAtZero && grid.kind() == BoundaryKind::WholeLine {
        let k = grid.zero_edge();
        gap = 0.5 * (p[k - 1] + p[k]);
        p.iter_mut().for_each(|v| *v -= gap);
        gl -= gap;
        gr -= gap;
    }
    Ok(SourceState { values: p, ghost_left: gl, ghost_right: gr, anchor_gap: gap })
}

/// Exact primitive on raw values. `ghosts` are the states of `u` beyond the
/// truncation edges; they extend `P` by half a cell on each side.
pub fn primitive_state(u: &[f64], grid: &Grid, normalization: Normalization, ghosts: (f64, f64)) -> SourceState {
    let dx = grid.dx();
    let anchor = match (grid.kind(), normalization) {
        (BoundaryKind::WholeLine, Normalization::DecayBothEnds) => 0,
        _ => grid.zero_edge(),
    };
    let e = primitive_edges(u, dx, anchor);
    let n = u.len();
    SourceState {
        values: e.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
        ghost_left: e[0] - 0.5 * dx * ghosts.0,
        ghost_right: e[n] + 0.5 * dx * ghosts.1,
        anchor_gap: 0.0,
    }
}

pub fn solve_elliptic(u: &Field, setup: &EllipticSetup) -> Result<EllipticSolution> {
    let g = *u.grid();
    let state = elliptic_state(u.values(), &g, setup)?;
    Ok(EllipticSolution { field: Field::new(g, state.values.clone(), u.time())?, state })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimitiveSide {
    /// From the left truncation edge, standing in for `−∞`.
    FromLeft,
    /// From the origin.
    FromZero,
}

/// `F(x) = ∫ P` from the requested origin.
pub fn second_primitive(p: &Field, side: PrimitiveSide) -> Field {
    let g = *p.grid();
    let anchor = match side {
        PrimitiveSide::FromLeft => 0,
        PrimitiveSide::FromZero => g.zero_edge(),
    };
    Field::new(g, primitive_centers(p.values(), g.dx(), anchor), p.time()).expect("finite input gives finite sums")
}
