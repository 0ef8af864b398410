//! Multi-run studies: vanishing viscosity, grid refinement and the L¹
//! stability estimate.
//!
//! Runs inside a study are independent and execute on a rayon pool whose
//! size honours `SPE_THREADS`. Results are collected in input order, so
//! output never depends on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{cfl_dt, run, SolveConfig, Stepper};
use crate::grid::{stability_window, Field, Grid, Norm};
use crate::initial::{generate, validate_and_project, InitialSpec};

/// Environment variable that caps the worker count of sweeps.
pub const THREADS_ENV: &str = "SPE_THREADS";

/// Default ceiling for the fitted stability constant.
pub const DEFAULT_C_MAX: f64 = 50.0;

/// Spacing of the candidate stability constants.
pub const C_STEP: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SolveConfig,
    pub initial: InitialSpec,
    #[serde(default)]
    pub eps_values: Vec<f64>,
    #[serde(default)]
    pub n_values: Vec<usize>,
}

/// Runs `f` on a pool sized by `SPE_THREADS` (all cores when unset).
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
        Err(_) => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidSweep(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Generates and projects the datum for `config`.
pub fn prepare(spec: &InitialSpec, grid: &Grid) -> Result<Field> {
    let u0 = generate(spec, grid)?;
    Ok(validate_and_project(&u0)?.0)
}

fn final_state(config: &SolveConfig, u0: &Field) -> Result<(Field, Field)> {
    // only the endpoints are needed
    let config = SolveConfig { snapshot_every: usize::MAX, ..config.clone() };
    let traj = run(&config, u0)?;
    let last = traj.last();
    Ok((last.u.clone(), last.p.clone()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsRow {
    pub eps: f64,
    /// `‖u_ε − u₀‖_{L¹}` at the final time, against the `ε = 0` scheme.
    pub gap_u_l1: f64,
    pub gap_p_l1: f64,
    pub gap_p_linf: f64,
    pub mass: f64,
    pub u_linf: f64,
}

pub fn eps_sweep(spec: &SweepSpec) -> Result<Vec<EpsRow>> {
    let eps = &spec.eps_values;
    if eps.len() < 3 {
        return Err(Error::InvalidSweep("need at least three viscosities".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidSweep("viscosities must be positive".into()));
    }
    if eps.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidSweep("viscosities must be listed in descending order".into()));
    }
    let grid = spec.base.grid()?;
    let u0 = prepare(&spec.initial, &grid)?;
    let reference = SolveConfig { eps: 0.0, ..spec.base.clone() };
    with_pool(|| {
        let (u_ref, p_ref) = final_state(&reference, &u0)?;
        eps.par_iter()
            .map(|&e| {
                let (u, p) = final_state(&SolveConfig { eps: e, ..spec.base.clone() }, &u0)?;
                let du = u.difference(&u_ref)?;
                let dp = p.difference(&p_ref)?;
                Ok(EpsRow {
                    eps: e,
                    gap_u_l1: du.norm(Norm::L1),
                    gap_p_l1: dp.norm(Norm::L1),
                    gap_p_linf: dp.norm(Norm::Linf),
                    mass: u.integral(),
                    u_linf: u.norm(Norm::Linf),
                })
            })
            .collect()
    })?
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Order {
    Value(f64),
    /// Both errors vanish.
    Exact,
    /// Only the finer error vanishes.
    Unbounded,
}

/// `log₂(e_k / e_{k+1})` for successive errors under grid doubling.
pub fn observed_orders(errors: &[f64]) -> Vec<Order> {
    errors
        .windows(2)
        .map(|w| match (w[0] == 0.0, w[1] == 0.0) {
            (true, true) => Order::Exact,
            (false, true) => Order::Unbounded,
            _ => Order::Value((w[0] / w[1]).log2()),
        })
        .collect()
}

/// Cell averages of `fine` on a grid `factor` times coarser.
pub fn restrict(fine: &Field, coarse: &Grid) -> Result<Field> {
    let nf = fine.grid().n_cells();
    let nc = coarse.n_cells();
    if !nf.is_multiple_of(nc) || fine.grid().x_min() != coarse.x_min() || fine.grid().x_max() != coarse.x_max() {
        return Err(Error::GridMismatch);
    }
    let r = nf / nc;
    let v: Vec<f64> = fine.values().chunks(r).map(|c| c.iter().sum::<f64>() / r as f64).collect();
    Field::new(*coarse, v, fine.time())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RefineRow {
    pub n_cells: usize,
    /// L¹ distance to the restricted finest solution; `None` for the finest.
    pub error: Option<f64>,
    /// Order between this row and the next coarser-to-finer pair.
    pub order: Option<Order>,
}

pub fn refine_study(spec: &SweepSpec) -> Result<Vec<RefineRow>> {
    let ns = &spec.n_values;
    if ns.len() < 3 {
        return Err(Error::InvalidSweep("need at least three resolutions".into()));
    }
    if ns.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::InvalidSweep("each resolution must double the previous one".into()));
    }
    let finals = with_pool(|| {
        ns.par_iter()
            .map(|&n| {
                let config = SolveConfig { n_cells: n, ..spec.base.clone() };
                let u0 = prepare(&spec.initial, &config.grid()?)?;
                Ok(final_state(&config, &u0)?.0)
            })
            .collect::<Result<Vec<Field>>>()
    })??;
    let finest = finals.last().expect("at least three runs");
    let errors: Vec<f64> = finals[..finals.len() - 1]
        .iter()
        .map(|u| Ok(u.difference(&restrict(finest, u.grid())?)?.norm(Norm::L1)))
        .collect::<Result<_>>()?;
    let orders = observed_orders(&errors);
    Ok(ns
        .iter()
        .enumerate()
        .map(|(k, &n)| RefineRow { n_cells: n, error: errors.get(k).copied(), order: orders.get(k).copied() })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityResult {
    pub times: Vec<f64>,
    /// `‖u − v‖_{L¹}` over the fixed window of radius `R`.
    pub distance: Vec<f64>,
    /// Least certifying constant on the candidate grid, if any.
    pub fitted_c: Option<f64>,
    /// `Q(t)` for the fitted constant (or `C = 0` when none certifies).
    pub quotient: Vec<f64>,
    /// Largest candidate whose grown window still fits the domain.
    pub c_reachable: f64,
}

impl StabilityResult {
    pub fn certified(&self) -> bool {
        self.fitted_c.is_some()
    }
}

fn quotient(num: f64, den: f64) -> f64 {
    match (num == 0.0, den == 0.0) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        _ => num / den,
    }
}

/// Runs the pair `(u₀, v₀)` in lockstep and fits the least `C` with
/// `‖u − v‖_{L¹(window R)} ≤ e^{Ct}·‖u₀ − v₀‖_{L¹(window R + Ct)}`.
pub fn stability_pair(
    base: &SolveConfig,
    u_spec: &InitialSpec,
    v_spec: &InitialSpec,
    r: f64,
    c_max: f64,
) -> Result<StabilityResult> {
    let grid = base.grid()?;
    let u0 = prepare(u_spec, &grid)?;
    let v0 = prepare(v_spec, &grid)?;
    stability_pair_fields(base, &u0, &v0, r, c_max)
}

pub fn stability_pair_fields(
    base: &SolveConfig,
    u0: &Field,
    v0: &Field,
    r: f64,
    c_max: f64,
) -> Result<StabilityResult> {
    let stepper = Stepper::new(base)?;
    let grid = *stepper.grid();
    if *u0.grid() != grid || *v0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let d0 = u0.difference(v0)?;
    let t_final = base.t_final;
    let (lo, hi) = stability_window(&grid, r);
    if lo < grid.x_min() || hi > grid.x_max() {
        return Err(Error::WindowExceedsDomain { lo, hi, x_min: grid.x_min(), x_max: grid.x_max() });
    }

    let dx = grid.dx();
    let (mut u, mut v) = (u0.values().to_vec(), v0.values().to_vec());
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut distance = vec![d0.abs_integral_over(lo, hi)?];
    while t_final - t > 1e-12 * t_final {
        let stable = cfl_dt(&u, base.eps, dx, base.cfl).min(cfl_dt(&v, base.eps, dx, base.cfl));
        let remaining = t_final - t;
        let dt = if stable >= remaining {
            remaining
        } else if 2.0 * stable > remaining {
            0.5 * remaining
        } else {
            stable
        };
        u = stepper.step_with(&u, &stepper.source(&u)?, dt)?;
        v = stepper.step_with(&v, &stepper.source(&v)?, dt)?;
        let step = times.len();
        if u.iter().chain(&v).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { step, time: t + dt });
        }
        t = if t_final - (t + dt) <= 1e-12 * t_final { t_final } else { t + dt };
        let diff = Field::new(grid, u.iter().zip(&v).map(|(a, b)| a - b).collect(), t)?;
        times.push(t);
        distance.push(diff.abs_integral_over(lo, hi)?);
    }

    let candidates = (0..).map(|k| k as f64 * C_STEP).take_while(|&c| c <= c_max + 1e-9);
    let mut fitted = None;
    let mut c_reachable = 0.0;
    let mut fitted_q = None;
    for c in candidates {
        let (glo, ghi) = stability_window(&grid, r + c * t_final);
        if glo < grid.x_min() - 1e-12 || ghi > grid.x_max() + 1e-12 {
            break;
        }
        c_reachable = c;
        let q: Vec<f64> = times
            .iter()
            .zip(&distance)
            .map(|(&t, &d)| {
                let (a, b) = stability_window(&grid, r + c * t);
                Ok(quotient(d, d0.abs_integral_over(a, b)?))
            })
            .collect::<Result<_>>()?;
        let ok = q.iter().zip(&times).all(|(&q, &t)| q <= (c * t).exp() * (1.0 + 1e-12));
        if ok {
            fitted = Some(c);
            fitted_q = Some(q);
            break;
        }
    }
    let quotient = match fitted_q {
        Some(q) => q,
        None => times
            .iter()
            .zip(&distance)
            .map(|(_, &d)| quotient(d, d0.abs_integral_over(lo, hi).unwrap_or(0.0)))
            .collect(),
    };
    Ok(StabilityResult { times, distance, fitted_c: fitted, quotient, c_reachable })
}
