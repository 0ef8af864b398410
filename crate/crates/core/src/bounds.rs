//! Runtime audits of the a-priori estimates.
//!
//! Every step produces a [`DiagnosticsRecord`] holding the monitored norms
//! and one [`Margin`] per check. The set of checks is fixed by the problem
//! kind and `ε`, so every record of a run carries the same names.

use serde::Serialize;

use crate::evolve::{ProblemKind, SolveConfig, Trajectory};
use crate::grid::{compensated_sum, norm_of, BoundaryKind, Grid, Norm};
use crate::source::{EnergyTerms, SourceState};

/// Tolerance of the elliptic energy identity, a solver sentinel.
pub const ENERGY_IDENTITY_TOL: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Margin {
    pub name: &'static str,
    /// Right-hand side of the estimate (or the scale of an identity).
    pub bound: f64,
    /// Largest accepted value after tolerance.
    pub limit: f64,
    pub actual: f64,
    pub status: CheckStatus,
}

impl Margin {
    /// `actual ≤ bound·(1 + tol)`.
    pub(crate) fn inequality(name: &'static str, actual: f64, bound: f64, tol: f64) -> Self {
        Margin::against(name, actual, bound, bound * (1.0 + tol))
    }

    /// `|residual| ≤ tol·scale`.
    pub(crate) fn identity(name: &'static str, residual: f64, scale: f64, tol: f64) -> Self {
        Margin::against(name, residual.abs(), scale, tol * scale)
    }

    pub(crate) fn against(name: &'static str, actual: f64, bound: f64, limit: f64) -> Self {
        let status = if actual <= limit { CheckStatus::Pass } else { CheckStatus::Fail };
        Margin { name, bound, limit, actual, status }
    }

    pub(crate) fn skipped(name: &'static str) -> Self {
        Margin { name, bound: 0.0, limit: 0.0, actual: 0.0, status: CheckStatus::Skipped }
    }

    /// `actual / limit`, 0 when both vanish.
    pub fn ratio(&self) -> f64 {
        if self.actual == 0.0 {
            0.0
        } else {
            self.actual / self.limit
        }
    }
}

pub const CHECK_NAMES: [&str; 10] = [
    "l2-energy",
    "p-linf",
    "u-linf",
    "px-l2",
    "pxx-l2",
    "px-wall",
    "px-linf",
    "u-p",
    "mass-identity",
    "elliptic-energy",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub mass_identity_residual: f64,
    pub u_l1: f64,
    pub u_l2: f64,
    pub u_linf: f64,
    pub p_l2: f64,
    pub p_linf: f64,
    pub dp_l2: f64,
    /// `‖P‖² + ε²‖∂xP‖²`.
    pub g_energy: f64,
    pub p_mean: f64,
    pub first_moment: f64,
    pub u_p: f64,
    /// `u`, `∂xu` and `∂xP` on the edge at `x = 0`.
    pub u_at_zero: f64,
    pub ux_at_zero: f64,
    pub px_at_zero: f64,
    /// `ε·∂xP` leaving through the far truncation edge.
    pub truncation_flux: f64,
    pub anchor_gap: f64,
    pub margins: Vec<Margin>,
}

impl DiagnosticsRecord {
    pub fn margin(&self, name: &str) -> Option<&Margin> {
        self.margins.iter().find(|m| m.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Margin> {
        self.margins.iter().filter(|m| m.status == CheckStatus::Fail)
    }
}

/// Initial norms the estimates are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Baseline {
    pub u0_l2: f64,
    pub u0_linf: f64,
}

/// Time integrals accumulated by the trapezoid rule.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Accumulators {
    /// `∫₀ᵗ e^{−2γs}‖∂xu‖² ds`
    pub weighted_gradient: f64,
    /// `∫₀ᵗ ‖P‖_∞ ds`
    pub p_linf: f64,
}

/// `‖∂xu‖²` from forward differences over every edge, ghosts included.
pub fn gradient_energy(u: &[f64], ghosts: (f64, f64), dx: f64) -> f64 {
    let n = u.len();
    let at = |j: usize| if j == 0 { ghosts.0 } else if j > n { ghosts.1 } else { u[j - 1] };
    compensated_sum((0..=n).map(|j| {
        let d = (at(j + 1) - at(j)) / dx;
        d * d
    })) * dx
}

/// Evaluates every check for one state.
pub fn audit_step(
    t: f64,
    u: &[f64],
    p: &SourceState,
    grid: &Grid,
    config: &SolveConfig,
    baseline: &Baseline,
    acc: &Accumulators,
) -> DiagnosticsRecord {
    let dx = grid.dx();
    let (gamma, eps, tol) = (config.gamma, config.eps, config.tol);
    let viscous = eps > 0.0;
    let half_line = grid.kind() == BoundaryKind::HalfLine;
    let growth = (gamma * t).exp();

    let u_l1 = norm_of(u, dx, Norm::L1);
    let u_l2 = norm_of(u, dx, Norm::L2);
    let u_linf = norm_of(u, dx, Norm::Linf);
    let p_l2 = norm_of(&p.values, dx, Norm::L2);
    let p_linf = norm_of(&p.values, dx, Norm::Linf);
    let mass = compensated_sum(u.iter().copied()) * dx;
    let p_mean = compensated_sum(p.values.iter().copied()) * dx;
    let first_moment = compensated_sum(u.iter().enumerate().map(|(i, v)| grid.center(i) * v)) * dx;
    let u_p = compensated_sum(u.iter().zip(&p.values).map(|(a, b)| a * b)) * dx;

    // ∂xP is u itself for the exact primitive
    let dp = if viscous { p.derivative(dx) } else { u.to_vec() };
    let dp_l2 = norm_of(&dp, dx, Norm::L2);
    let dp_linf = norm_of(&dp, dx, Norm::Linf);
    let z = if half_line { 0 } else { grid.zero_edge() };
    let ghosts = (config.ghost_left, config.ghost_right);
    let u_edge = |j: usize| {
        let below = if j == 0 { ghosts.0 } else { u[j - 1] };
        let above = if j == u.len() { ghosts.1 } else { u[j] };
        (below, above)
    };
    let (ub, ua) = u_edge(z);
    let u_at_zero = 0.5 * (ub + ua);
    let ux_at_zero = (ua - ub) / dx;
    let px_at_zero = if viscous { p.slope_at_edge(z, dx) } else { u_at_zero };
    let truncation_flux = if viscous { eps * p.slope_right(dx) } else { 0.0 };

    let bound_l2 = growth * baseline.u0_l2;
    let mut margins = Vec::with_capacity(CHECK_NAMES.len());

    let dissipated = 2.0 * eps * (2.0 * gamma * t).exp() * acc.weighted_gradient;
    margins.push(Margin::inequality("l2-energy", (u_l2 * u_l2 + dissipated).sqrt(), bound_l2, tol));
    margins.push(Margin::inequality("p-linf", p_linf, (2.0 * growth * baseline.u0_l2 * p_l2).sqrt(), tol));
    margins.push(Margin::inequality("u-linf", u_linf, baseline.u0_linf + gamma * acc.p_linf, tol));
    margins.push(Margin::inequality("px-l2", dp_l2, bound_l2, tol));
    if viscous {
        let pxx_l2 = norm_of(&p.second_derivative(dx), dx, Norm::L2);
        margins.push(Margin::inequality("pxx-l2", eps * pxx_l2, bound_l2, tol));
        margins.push(Margin::inequality("px-wall", eps.sqrt() * px_at_zero.abs(), bound_l2, tol));
        margins.push(Margin::inequality("px-linf", eps.sqrt() * dp_linf, bound_l2, tol));
    } else {
        margins.extend(["pxx-l2", "px-wall", "px-linf"].map(Margin::skipped));
    }
    margins.push(Margin::inequality("u-p", u_p, u_l2 * u_l2, tol));

    let mass_identity_residual = match (viscous, half_line) {
        (true, true) => mass - eps * p.slope_left(dx),
        (true, false) => mass,
        (false, _) => 0.0,
    };
    if viscous {
        margins.push(Margin::identity("mass-identity", mass_identity_residual, u_l1, tol));
        let e = p.energy_terms(eps, dx);
        let residual = energy_identity_residual(&e, u_l2, half_line);
        margins.push(Margin::against("elliptic-energy", residual, u_l2 * u_l2, ENERGY_IDENTITY_TOL));
    } else {
        margins.push(Margin::skipped("mass-identity"));
        margins.push(Margin::skipped("elliptic-energy"));
    }

    DiagnosticsRecord {
        t,
        mass,
        mass_identity_residual,
        u_l1,
        u_l2,
        u_linf,
        p_l2,
        p_linf,
        dp_l2,
        g_energy: p_l2 * p_l2 + eps * eps * dp_l2 * dp_l2,
        p_mean,
        first_moment,
        u_p,
        u_at_zero,
        ux_at_zero,
        px_at_zero,
        truncation_flux,
        anchor_gap: p.anchor_gap,
        margins,
    }
}

/// Relative residual of the elliptic energy identity. The whole line drops
/// the wall term.
fn energy_identity_residual(e: &EnergyTerms, u_l2: f64, half_line: bool) -> f64 {
    if half_line {
        return e.relative_residual(u_l2);
    }
    let rhs = u_l2 * u_l2;
    let lhs = e.eps * e.eps * e.pxx_l2 * e.pxx_l2 + e.px_l2 * e.px_l2;
    if rhs > 0.0 {
        (lhs - rhs).abs() / rhs
    } else {
        (lhs - rhs).abs()
    }
}

/// Stateful wrapper that carries the time integrals from step to step.
#[derive(Clone, Debug)]
pub struct Auditor {
    config: SolveConfig,
    grid: Grid,
    baseline: Baseline,
    acc: Accumulators,
    /// `(t, e^{−2γt}‖∂xu‖², ‖P‖_∞)` at the previous observation.
    previous: Option<(f64, f64, f64)>,
}

impl Auditor {
    pub fn new(config: &SolveConfig, grid: &Grid, u0: &[f64]) -> Self {
        let dx = grid.dx();
        Auditor {
            config: config.clone(),
            grid: *grid,
            baseline: Baseline { u0_l2: norm_of(u0, dx, Norm::L2), u0_linf: norm_of(u0, dx, Norm::Linf) },
            acc: Accumulators::default(),
            previous: None,
        }
    }

    pub fn baseline(&self) -> &Baseline {
        &self.baseline
    }

    pub fn observe(&mut self, t: f64, u: &[f64], p: &SourceState) -> DiagnosticsRecord {
        let dx = self.grid.dx();
        let ghosts = (self.config.ghost_left, self.config.ghost_right);
        let w = (-2.0 * self.config.gamma * t).exp() * gradient_energy(u, ghosts, dx);
        let pl = norm_of(&p.values, dx, Norm::Linf);
        if let Some((t0, w0, pl0)) = self.previous {
            let h = t - t0;
            self.acc.weighted_gradient += 0.5 * h * (w0 + w);
            self.acc.p_linf += 0.5 * h * (pl0 + pl);
        }
        self.previous = Some((t, w, pl));
        audit_step(t, u, p, &self.grid, &self.config, &self.baseline, &self.acc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub evaluated: usize,
    pub failures: usize,
    /// Largest `actual / limit` over the run and the time it occurred.
    pub worst_ratio: f64,
    pub worst_t: f64,
    pub worst_actual: f64,
    pub worst_bound: f64,
    pub status: CheckStatus,
}

/// Integrals of `P` over the two half-lines at one snapshot, against the
/// first moment of `u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SourceIntegralRow {
    pub t: f64,
    pub negative_side: f64,
    pub positive_side: f64,
    pub total: f64,
    pub minus_first_moment: f64,
}

/// Boundary coefficient `a_ε(t)` in its cubic form and in the linear form
/// `(1/γ)(ε∂t∂xP + u/6 + ε∂xu)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryCoefficient {
    pub t: f64,
    pub cubic: f64,
    pub linear: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditSummary {
    pub kind: ProblemKind,
    pub checks: Vec<CheckSummary>,
    /// `sup_t ‖P‖_{L²}`.
    pub p_l2_sup: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub truncation_flux_max: f64,
    pub anchor_gap_max: f64,
    pub boundary_coefficient: Vec<BoundaryCoefficient>,
    pub source_integrals: Vec<SourceIntegralRow>,
}

impl AuditSummary {
    /// True iff no evaluated check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }
}

pub fn audit_trajectory(traj: &Trajectory) -> AuditSummary {
    let records = &traj.diagnostics;
    let mut checks: Vec<CheckSummary> = Vec::new();
    for name in CHECK_NAMES {
        let mut s = CheckSummary {
            name,
            evaluated: 0,
            failures: 0,
            worst_ratio: 0.0,
            worst_t: 0.0,
            worst_actual: 0.0,
            worst_bound: 0.0,
            status: CheckStatus::Skipped,
        };
        for r in records {
            let Some(m) = r.margin(name) else { continue };
            if m.status == CheckStatus::Skipped {
                continue;
            }
            s.evaluated += 1;
            if m.status == CheckStatus::Fail {
                s.failures += 1;
            }
            let ratio = m.ratio();
            if s.evaluated == 1 || ratio > s.worst_ratio {
                s.worst_ratio = ratio;
                s.worst_t = r.t;
                s.worst_actual = m.actual;
                s.worst_bound = m.bound;
            }
        }
        if s.evaluated > 0 {
            s.status = if s.failures == 0 { CheckStatus::Pass } else { CheckStatus::Fail };
        }
        checks.push(s);
    }

    let config = &traj.config;
    let mut boundary_coefficient = Vec::new();
    if config.kind == ProblemKind::Cauchy && config.gamma > 0.0 {
        for (k, w) in records.windows(2).enumerate() {
            let dt = traj.dts[k];
            let ptx = (w[1].px_at_zero - w[0].px_at_zero) / dt;
            let r = &w[1];
            let common = config.eps * ptx + config.eps * r.ux_at_zero;
            boundary_coefficient.push(BoundaryCoefficient {
                t: r.t,
                cubic: (common + r.u_at_zero.powi(3) / 6.0) / config.gamma,
                linear: (common + r.u_at_zero / 6.0) / config.gamma,
            });
        }
    }

    let mut source_integrals = Vec::new();
    if config.kind == ProblemKind::Cauchy {
        for s in &traj.snapshots {
            let g = s.p.grid();
            let z = g.zero_edge();
            let dx = g.dx();
            let v = s.p.values();
            let neg = compensated_sum(v[..z].iter().copied()) * dx;
            let pos = compensated_sum(v[z..].iter().copied()) * dx;
            source_integrals.push(SourceIntegralRow {
                t: s.time(),
                negative_side: neg,
                positive_side: pos,
                total: neg + pos,
                minus_first_moment: -s.u.first_moment(),
            });
        }
    }

    let fold_max = |f: fn(&DiagnosticsRecord) -> f64| records.iter().fold(0.0_f64, |m, r| m.max(f(r)));
    AuditSummary {
        kind: config.kind,
        checks,
        p_l2_sup: fold_max(|r| r.p_l2),
        mass_initial: records.first().map_or(0.0, |r| r.mass),
        mass_final: records.last().map_or(0.0, |r| r.mass),
        truncation_flux_max: fold_max(|r| r.truncation_flux.abs()),
        anchor_gap_max: fold_max(|r| r.anchor_gap.abs()),
        boundary_coefficient,
        source_integrals,
    }
}
