//! Discrete entropy residuals on computed trajectories.
//!
//! For a step `uⁿ → uⁿ⁺¹` of the two-stage scheme with Euler stage `u⁽¹⁾`,
//! the cell residual is
//!
//! ```text
//! R_i = [η(uⁿ⁺¹_i) − η(uⁿ_i)]/dt
//!     + ½[ΔQ(uⁿ) + ΔQ(u⁽¹⁾)]_i/dx
//!     − ½γ[η′(uⁿ_i)Pⁿ_i + η′(u⁽¹⁾_i)P⁽¹⁾_i]
//! ```
//!
//! with the numerical entropy flux `Q(a, b) = q(b) − ε(η(b) − η(a))/dx`
//! matching the upwind transport and central diffusion. Each Euler stage of
//! a monotone scheme satisfies the cell entropy inequality, so for `γ = 0`
//! the residual is non-positive up to round-off.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{CheckStatus, Margin};
use crate::error::{Error, Result};
use crate::evolve::{flux, Stepper, Trajectory};
use crate::grid::BoundaryKind;
use crate::source::SourceState;

/// Round-off multiplier for the residual floor.
const FLOOR_ULPS: f64 = 16.0;

/// Number of Kruzkov constants in the default audit grid.
pub const DEFAULT_KRUZKOV_POINTS: usize = 17;

pub trait EntropyPair: Sync {
    fn eta(&self, u: f64) -> f64;
    fn deta(&self, u: f64) -> f64;
    fn q(&self, u: f64) -> f64;

    /// Global Lipschitz constant of `η`, when it has one.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `η = |u − c|`, `q = −sgn(u − c)(u³ − c³)/6`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KruzkovPair {
    pub c: f64,
}

pub fn kruzkov_flux(u: f64, c: f64) -> f64 {
    -sgn(u - c) * (u * u * u - c * c * c) / 6.0
}

impl EntropyPair for KruzkovPair {
    fn eta(&self, u: f64) -> f64 {
        (u - self.c).abs()
    }

    fn deta(&self, u: f64) -> f64 {
        sgn(u - self.c)
    }

    fn q(&self, u: f64) -> f64 {
        kruzkov_flux(u, self.c)
    }

    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `η = (u − k)²` with `q(u) = −∫_k^u ξ²(ξ − k) dξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothEntropy {
    pub k: f64,
}

impl EntropyPair for SmoothEntropy {
    fn eta(&self, u: f64) -> f64 {
        (u - self.k) * (u - self.k)
    }

    fn deta(&self, u: f64) -> f64 {
        2.0 * (u - self.k)
    }

    fn q(&self, u: f64) -> f64 {
        let k = self.k;
        -((u.powi(4) - k.powi(4)) / 4.0 - k * (u.powi(3) - k.powi(3)) / 3.0)
    }
}

impl SmoothEntropy {
    /// `q(u) − q(0)` without the cancellation of the two `k⁴/12` terms.
    pub fn q_increment(&self, u: f64) -> f64 {
        u * u * u * (self.k / 3.0 - u / 4.0)
    }
}

/// Quantities of one step that every entropy needs.
struct StepStages {
    t: f64,
    dt: f64,
    u: Vec<f64>,
    p: SourceState,
    u1: Vec<f64>,
    p1: SourceState,
    next: Vec<f64>,
}

fn stages(traj: &Trajectory) -> Result<(Stepper, Vec<StepStages>)> {
    if traj.config.snapshot_every != 1 {
        return Err(Error::CadenceMismatch(traj.config.snapshot_every));
    }
    let stepper = Stepper::new(&traj.config)?;
    let snaps = &traj.snapshots;
    let out = snaps
        .par_windows(2)
        .zip(traj.dts.par_iter())
        .map(|(w, &dt)| {
            let u = w[0].u.values().to_vec();
            let p = stepper.source(&u)?;
            let u1 = stepper.euler_stage(&u, &p, dt);
            let p1 = stepper.source(&u1)?;
            Ok(StepStages { t: w[0].time(), dt, u, p, u1, p1, next: w[1].u.values().to_vec() })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((stepper, out))
}

/// Entropy flux divergence `ΔQ_i/dx` and its magnitude scale.
fn flux_divergence(e: &dyn EntropyPair, w: &[f64], ghosts: (f64, f64), eps: f64, dx: f64) -> (Vec<f64>, Vec<f64>) {
    let n = w.len();
    let at = |j: isize| -> f64 {
        if j < 0 {
            ghosts.0
        } else if j as usize >= n {
            ghosts.1
        } else {
            w[j as usize]
        }
    };
    // Q on edge j sits between cells j−1 and j
    let edge = |j: isize| -> (f64, f64) {
        let (a, b) = (at(j - 1), at(j));
        let (qb, da) = (e.q(b), eps * (e.eta(b) - e.eta(a)) / dx);
        (qb - da, qb.abs() + da.abs())
    };
    let mut div = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    let mut left = edge(0);
    for i in 0..n as isize {
        let right = edge(i + 1);
        div.push((right.0 - left.0) / dx);
        scale.push((right.1 + left.1) / dx);
        left = right;
    }
    (div, scale)
}

fn step_residual(
    e: &dyn EntropyPair,
    s: &StepStages,
    gamma: f64,
    eps: f64,
    dx: f64,
    ghosts: (f64, f64),
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (d0, s0) = flux_divergence(e, &s.u, ghosts, eps, dx);
    let (d1, s1) = flux_divergence(e, &s.u1, ghosts, eps, dx);
    let n = s.u.len();
    let mut r = Vec::with_capacity(n);
    let mut floor = Vec::with_capacity(n);
    let mut allowance = Vec::with_capacity(n);
    let lip = e.lipschitz().unwrap_or(0.0);
    for i in 0..n {
        let (a, b) = (e.eta(s.next[i]), e.eta(s.u[i]));
        let src0 = e.deta(s.u[i]) * s.p.values[i];
        let src1 = e.deta(s.u1[i]) * s.p1.values[i];
        r.push((a - b) / s.dt + 0.5 * (d0[i] + d1[i]) - 0.5 * gamma * (src0 + src1));
        // η is evaluated at states carrying round-off of order ε·|u|
        let states = (s.next[i].abs() + s.u[i].abs()) * (e.deta(s.next[i]).abs() + e.deta(s.u[i]).abs());
        let mag = (a.abs() + b.abs() + states) / s.dt + 0.5 * (s0[i] + s1[i]) + 0.5 * gamma * (src0.abs() + src1.abs());
        floor.push(FLOOR_ULPS * f64::EPSILON * mag + f64::MIN_POSITIVE);
        allowance.push(lip * gamma * (s.p.values[i].abs() + s.p1.values[i].abs()));
    }
    (r, floor, allowance)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyResidual {
    /// Largest positive part beyond the round-off floor.
    pub max_positive_part: f64,
    /// Largest positive part beyond floor plus the source allowance
    /// `L·γ(|Pⁿ_i| + |P⁽¹⁾_i|)`, for entropies with Lipschitz constant `L`.
    /// Zero for a scheme that is entropy stable stage by stage.
    pub max_excess: f64,
    /// Smallest residual (strongest dissipation) and where it occurred.
    pub min_residual: f64,
    /// `(step, cell)` of the largest residual.
    pub worst_at: (usize, usize),
    /// Step start times.
    pub times: Vec<f64>,
    /// `field[step][cell]`.
    pub field: Vec<Vec<f64>>,
}

fn residual_of(e: &dyn EntropyPair, stepper: &Stepper, stages: &[StepStages]) -> EntropyResidual {
    let config = stepper.config();
    let dx = stepper.grid().dx();
    let ghosts = stepper.ghosts();
    let mut out = EntropyResidual {
        max_positive_part: 0.0,
        max_excess: 0.0,
        min_residual: 0.0,
        worst_at: (0, 0),
        times: Vec::with_capacity(stages.len()),
        field: Vec::with_capacity(stages.len()),
    };
    let mut worst = f64::NEG_INFINITY;
    for (k, s) in stages.iter().enumerate() {
        let (r, floor, allowance) = step_residual(e, s, config.gamma, config.eps, dx, ghosts);
        for (i, ((&ri, &fi), &ai)) in r.iter().zip(&floor).zip(&allowance).enumerate() {
            if ri > worst {
                worst = ri;
                out.worst_at = (k, i);
            }
            out.max_positive_part = out.max_positive_part.max(ri - fi);
            out.max_excess = out.max_excess.max(ri - fi - ai);
            out.min_residual = out.min_residual.min(ri);
        }
        out.times.push(s.t);
        out.field.push(r);
    }
    out
}

/// Kruzkov residual for constant `c`. Needs a snapshot at every step.
pub fn interior_entropy_residual(traj: &Trajectory, c: f64) -> Result<EntropyResidual> {
    let (stepper, st) = stages(traj)?;
    Ok(residual_of(&KruzkovPair { c }, &stepper, &st))
}

/// Residual for any entropy pair.
pub fn entropy_residual(traj: &Trajectory, pair: &dyn EntropyPair) -> Result<EntropyResidual> {
    let (stepper, st) = stages(traj)?;
    Ok(residual_of(pair, &stepper, &st))
}

/// Default Kruzkov constants: `points` values spanning `[−‖u‖_∞, ‖u‖_∞]`.
pub fn kruzkov_grid(traj: &Trajectory, points: usize) -> Vec<f64> {
    let m = traj.diagnostics.iter().fold(0.0_f64, |m, r| m.max(r.u_linf));
    if points < 2 || m == 0.0 {
        return vec![0.0];
    }
    (0..points).map(|j| -m + 2.0 * m * j as f64 / (points - 1) as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KruzkovSweepRow {
    pub c: f64,
    pub max_positive_part: f64,
    pub max_excess: f64,
    pub min_residual: f64,
}

/// Largest positive part over a set of Kruzkov constants, in input order.
pub fn kruzkov_sweep(traj: &Trajectory, cs: &[f64]) -> Result<Vec<KruzkovSweepRow>> {
    let (stepper, st) = stages(traj)?;
    Ok(cs
        .par_iter()
        .map(|&c| {
            let r = residual_of(&KruzkovPair { c }, &stepper, &st);
            KruzkovSweepRow {
                c,
                max_positive_part: r.max_positive_part,
                max_excess: r.max_excess,
                min_residual: r.min_residual,
            }
        })
        .collect())
}

/// Boundary expression for one entropy and one trace value, as printed:
/// `q(τ) − q(0) − η′(0)·τ³/6`.
pub fn boundary_expression(e: &SmoothEntropy, tau: f64) -> f64 {
    e.q_increment(tau) - e.deta(0.0) * tau.powi(3) / 6.0
}

/// The same with the flux difference `f(τ) − f(0)` in place of `τ³/6`.
pub fn boundary_flux_expression(e: &SmoothEntropy, tau: f64) -> f64 {
    e.q_increment(tau) - e.deta(0.0) * (flux(tau) - flux(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub k: f64,
    /// Worst printed expression with the first-cell and extrapolated traces.
    pub printed_first_cell: f64,
    pub printed_extrapolated: f64,
    /// Worst flux-difference expression with the two traces.
    pub flux_first_cell: f64,
    pub flux_extrapolated: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    /// Largest printed expression over all times and entropies, first-cell trace.
    pub worst_violation: f64,
    /// The same for the flux-difference reading.
    pub worst_flux_form: f64,
    /// Round-off scale of the evaluated expressions.
    pub round_off: f64,
    pub rows: Vec<BoundaryRow>,
}

pub fn boundary_trace_check(traj: &Trajectory, entropies: &[SmoothEntropy]) -> Result<BoundaryReport> {
    if traj.grid().kind() != BoundaryKind::HalfLine {
        return Err(Error::NoBoundary);
    }
    let worst = |e: &SmoothEntropy, f: fn(&SmoothEntropy, f64) -> f64, pick: fn(&crate::evolve::TraceSample) -> f64| {
        traj.trace.iter().map(|s| f(e, pick(s))).fold(f64::NEG_INFINITY, f64::max)
    };
    let rows: Vec<BoundaryRow> = entropies
        .iter()
        .map(|e| BoundaryRow {
            k: e.k,
            printed_first_cell: worst(e, boundary_expression, |s| s.first_cell),
            printed_extrapolated: worst(e, boundary_expression, |s| s.extrapolated),
            flux_first_cell: worst(e, boundary_flux_expression, |s| s.first_cell),
            flux_extrapolated: worst(e, boundary_flux_expression, |s| s.extrapolated),
        })
        .collect();
    let worst_violation = rows.iter().map(|r| r.printed_first_cell).fold(f64::NEG_INFINITY, f64::max);
    let worst_flux_form = rows.iter().map(|r| r.flux_first_cell).fold(f64::NEG_INFINITY, f64::max);
    let mut scale = 0.0_f64;
    for e in entropies {
        for s in &traj.trace {
            for tau in [s.first_cell, s.extrapolated] {
                let terms = e.q_increment(tau).abs() + (e.deta(0.0) * tau.powi(3)).abs();
                scale = scale.max(terms);
            }
        }
    }
    let round_off = FLOOR_ULPS * f64::EPSILON * scale + f64::MIN_POSITIVE;
    Ok(BoundaryReport { worst_violation, worst_flux_form, round_off, rows })
}

/// Smooth entropies used by the boundary audit.
pub fn default_boundary_entropies() -> Vec<SmoothEntropy> {
    (-5..=5).map(|k| SmoothEntropy { k: k as f64 }).collect()
}

/// Pass/fail view of the entropy audits of one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyAudit {
    pub kruzkov: Vec<KruzkovSweepRow>,
    /// `entropy-interior`: largest excess over the Kruzkov grid, limit 0.
    pub interior: Margin,
    /// `entropy-boundary`: flux-difference reading of the wall condition.
    /// Skipped on the whole line.
    pub boundary: Margin,
    pub boundary_report: Option<BoundaryReport>,
}

impl EntropyAudit {
    pub fn passed(&self) -> bool {
        self.interior.status != CheckStatus::Fail && self.boundary.status != CheckStatus::Fail
    }
}

/// Runs the Kruzkov sweep over `points` constants and the wall check.
pub fn audit_entropy(traj: &Trajectory, points: usize) -> Result<EntropyAudit> {
    let kruzkov = kruzkov_sweep(traj, &kruzkov_grid(traj, points))?;
    let excess = kruzkov.iter().fold(0.0_f64, |m, r| m.max(r.max_excess));
    let interior = Margin::against("entropy-interior", excess, 0.0, 0.0);
    let (boundary, boundary_report) = match boundary_trace_check(traj, &default_boundary_entropies()) {
        Ok(r) => {
            let m = Margin::against("entropy-boundary", r.worst_flux_form.max(0.0), 0.0, r.round_off);
            (m, Some(r))
        }
        Err(Error::NoBoundary) => (Margin::skipped("entropy-boundary"), None),
        Err(e) => return Err(e),
    };
    Ok(EntropyAudit { kruzkov, interior, boundary, boundary_report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{run, ProblemKind, SolveConfig};
    use crate::grid::Field;
    use crate::initial::{generate, InitialSpec};
    use proptest::prelude::*;

    #[test]
    fn kruzkov_examples() {
        assert_eq!(kruzkov_flux(1.5, 1.5), 0.0);
        assert!((kruzkov_flux(2.0, 1.0) + 7.0 / 6.0).abs() < 1e-15);
        assert!((kruzkov_flux(0.0, 1.0) + 1.0 / 6.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn kruzkov_flux_is_continuous_at_the_kink(c in -3.0f64..3.0) {
            let h = 1e-7;
            prop_assert!(kruzkov_flux(c + h, c).abs() < 1e-6);
            prop_assert!(kruzkov_flux(c - h, c).abs() < 1e-6);
        }

        #[test]
        fn smooth_flux_matches_its_definition(u in -3.0f64..3.0, k in -3.0f64..3.0) {
            let e = SmoothEntropy { k };
            let h = 1e-4;
            let fd = (e.q(u + h) - e.q(u - h)) / (2.0 * h);
            let exact = -(u * u / 2.0) * e.deta(u);
            prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()));
        }
    }

    fn cauchy(n: usize, t: f64, snapshot_every: usize) -> SolveConfig {
        SolveConfig {
            gamma: 0.0,
            eps: 0.0,
            x_min: -2.0,
            x_max: 2.0,
            n_cells: n,
            t_final: t,
            kind: ProblemKind::Cauchy,
            snapshot_every,
            ..SolveConfig::default()
        }
    }

    #[test]
    fn cadence_is_enforced() {
        let config = cauchy(64, 0.1, 2);
        let traj = run(&config, &Field::zeros(config.grid().unwrap(), 0.0)).unwrap();
        assert!(matches!(interior_entropy_residual(&traj, 0.0), Err(Error::CadenceMismatch(2))));
    }

    #[test]
    fn zero_trajectory_has_no_residual() {
        let config = SolveConfig { t_final: 0.3, ..cauchy(64, 0.3, 1) };
        let traj = run(&config, &Field::zeros(config.grid().unwrap(), 0.0)).unwrap();
        for c in [-1.0, 0.5, 2.0] {
            let r = interior_entropy_residual(&traj, c).unwrap();
            assert_eq!(r.max_positive_part, 0.0);
            assert!(r.field.iter().flatten().all(|&v| v <= 0.0));
        }
    }

    fn riemann(n: usize, t: f64) -> Trajectory {
        let config = SolveConfig { ghost_right: 1.0, ..cauchy(n, t, 1) };
        let grid = config.grid().unwrap();
        let u0 = Field::from_fn(grid, 0.0, |x| if x < 0.0 { 0.0 } else { 1.0 }).unwrap();
        run(&config, &u0).unwrap()
    }

    #[test]
    fn shock_dissipates_entropy() {
        let traj = riemann(256, 0.5);
        let r = interior_entropy_residual(&traj, 0.5).unwrap();
        assert_eq!(r.max_positive_part, 0.0);
        // the cell straddling the shock carries clear dissipation at every step
        let last = r.field.last().unwrap();
        let min = last.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < -0.01, "{min}");
    }

    #[test]
    fn summed_weak_form_is_non_positive() {
        let traj = riemann(128, 0.4);
        let r = interior_entropy_residual(&traj, 0.3).unwrap();
        let g = traj.grid();
        let mut total = 0.0;
        for (k, row) in r.field.iter().enumerate() {
            let t = r.times[k];
            for (i, v) in row.iter().enumerate() {
                let x = g.center(i);
                let phi = (1.0 - x * x).max(0.0) * (1.0 - t);
                total += v * phi * g.dx() * traj.dts[k];
            }
        }
        assert!(total < 0.0);
    }

    #[test]
    fn smooth_residual_shrinks_under_refinement() {
        // smooth data, before any shock forms
        let mut worst = Vec::new();
        for n in [128, 256, 512] {
            let config = SolveConfig { x_min: -4.0, x_max: 4.0, ..cauchy(n, 0.2, 1) };
            let u0 = generate(&InitialSpec::gaussian_derivative(0.3, 0.0, 0.5), &config.grid().unwrap()).unwrap();
            let traj = run(&config, &u0).unwrap();
            let r = entropy_residual(&traj, &SmoothEntropy { k: 0.0 }).unwrap();
            worst.push(r.field.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())));
        }
        for w in worst.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order > 0.8, "{worst:?}");
        }
    }

    #[test]
    fn kruzkov_grid_spans_the_solution_range() {
        let traj = riemann(64, 0.2);
        let cs = kruzkov_grid(&traj, DEFAULT_KRUZKOV_POINTS);
        assert_eq!(cs.len(), 17);
        assert_eq!((cs[0], cs[16]), (-1.0, 1.0));
        let rows = kruzkov_sweep(&traj, &cs).unwrap();
        assert!(rows.iter().all(|r| r.max_positive_part == 0.0), "{rows:?}");
        assert_eq!(rows.iter().map(|r| r.c).collect::<Vec<_>>(), cs);
    }

    #[test]
    fn boundary_examples() {
        let e = SmoothEntropy { k: 0.0 };
        assert_eq!(boundary_expression(&e, 0.0), 0.0);
        for tau in [-2.0, -0.3, 0.7, 1.5] {
            // k = 0: both readings reduce to q(τ) − q(0) = −τ⁴/4
            assert!((boundary_expression(&e, tau) + tau.powi(4) / 4.0).abs() < 1e-14);
            assert!((boundary_flux_expression(&e, tau) + tau.powi(4) / 4.0).abs() < 1e-14);
        }
        for k in [-5.0, -1.0, 2.0, 5.0] {
            let e = SmoothEntropy { k };
            let tau: f64 = 0.8;
            assert!((boundary_flux_expression(&e, tau) + tau.powi(4) / 4.0).abs() < 1e-12);
            let printed = -tau.powi(4) / 4.0 + 2.0 * k * tau.powi(3) / 3.0;
            assert!((boundary_expression(&e, tau) - printed).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_check_needs_a_wall() {
        let traj = riemann(32, 0.1);
        assert!(matches!(boundary_trace_check(&traj, &[SmoothEntropy { k: 0.0 }]), Err(Error::NoBoundary)));

        let config = SolveConfig { gamma: 0.5, eps: 0.0, t_final: 0.2, x_max: 10.0, n_cells: 64, ..SolveConfig::default() };
        let zero = run(&config, &Field::zeros(config.grid().unwrap(), 0.0)).unwrap();
        let ks: Vec<SmoothEntropy> = (-5..=5).map(|k| SmoothEntropy { k: k as f64 }).collect();
        let report = boundary_trace_check(&zero, &ks).unwrap();
        assert_eq!(report.worst_violation, 0.0);
        assert_eq!(report.rows.len(), 11);
    }

    #[test]
    fn source_allowance_absorbs_kink_crossings() {
        let config = SolveConfig {
            gamma: 0.5,
            eps: 0.01,
            t_final: 0.5,
            x_max: 20.0,
            n_cells: 256,
            ..SolveConfig::default()
        };
        let grid = config.grid().unwrap();
        let u0 = generate(&InitialSpec::gaussian_derivative(1.0, 10.0, 1.0), &grid).unwrap();
        let traj = run(&config, &u0).unwrap();
        let audit = audit_entropy(&traj, DEFAULT_KRUZKOV_POINTS).unwrap();
        assert_eq!(audit.kruzkov.len(), DEFAULT_KRUZKOV_POINTS);
        // the source pushes cells across c, so the bare residual is positive somewhere
        assert!(audit.kruzkov.iter().any(|r| r.max_positive_part > 0.0));
        assert_eq!(audit.interior.actual, 0.0);
        assert_eq!(audit.boundary.status, CheckStatus::Pass);
        assert!(audit.passed());
    }

    #[test]
    fn whole_line_audit_skips_the_wall() {
        let audit = audit_entropy(&riemann(64, 0.2), 9).unwrap();
        assert_eq!(audit.boundary.status, CheckStatus::Skipped);
        assert!(audit.boundary_report.is_none());
        assert_eq!(audit.interior.status, CheckStatus::Pass);
    }

    proptest! {
        #[test]
        fn q_increment_matches_the_flux_difference(u in -3.0f64..3.0, k in -3.0f64..3.0) {
            let e = SmoothEntropy { k };
            let direct = e.q(u) - e.q(0.0);
            prop_assert!((e.q_increment(u) - direct).abs() <= 1e-12 * (1.0 + k.powi(4)));
        }
    }
}
