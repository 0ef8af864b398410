use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use spe_core::bounds::{audit_trajectory, AuditSummary, CheckStatus};
use spe_core::entropy::{audit_entropy, EntropyAudit};
use spe_core::evolve::{run, ProblemKind, Trajectory};
use spe_core::experiments::{eps_sweep, prepare, refine_study, stability_pair, with_pool, Order, SweepSpec};
use spe_core::io::{read_table, render_svg, write_snapshots, write_table, PlotKind, RunConfig, RunManifest, Series};

use crate::{Command, Kind, OutArgs, RunArgs};

pub fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Solve { run, out } => solve(&run, &out),
        Command::Audit { run, kruzkov_points, out } => audit(&run, kruzkov_points, out.as_deref()),
        Command::SweepEps { run, eps, out } => sweep(&run, eps, &out),
        Command::Refine { run, cells, out } => refine(&run, cells, &out),
        Command::Stability { run, factor, radius, c_max, out } => stability(&run, factor, radius, c_max, &out),
        Command::Plot { input, output, kind, x, y } => plot(&input, &output, kind, &x, &y),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut overrides = args.overrides();
    if let Some(t) = &args.table {
        // flag paths are relative to the working directory, not the run file
        let abs = std::path::absolute(t).with_context(|| format!("resolving {}", t.display()))?;
        overrides.retain(|(k, _)| k != "table");
        overrides.push(("table".into(), abs.display().to_string()));
    }
    Ok(spe_core::io::parse_config(args.config.as_deref(), &overrides)?)
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn simulate(config: &RunConfig) -> Result<Trajectory> {
    let grid = config.solve.grid()?;
    let u0 = prepare(&config.initial, &grid)?;
    let traj = run(&config.solve, &u0)?;
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }
    Ok(traj)
}

fn manifest(command: &str, config: &RunConfig, started: Instant) -> RunManifest {
    let mut m = RunManifest::new(command, config.echo());
    m.input_checksum = Some(config.checksum());
    m.wall_clock_seconds = started.elapsed().as_secs_f64();
    m
}

fn finish(mut m: RunManifest, dir: &Path, csvs: &[PathBuf], others: &[PathBuf], started: Instant) -> Result<()> {
    for p in csvs {
        m.add_csv(dir, p)?;
    }
    for p in others {
        m.add_file(dir, p)?;
    }
    m.wall_clock_seconds = started.elapsed().as_secs_f64();
    let path = dir.join("manifest.json");
    m.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn solve(args: &RunArgs, out: &OutArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let config = load(args)?;
    let traj = simulate(&config)?;
    let dir = &out.out;
    out_dir(dir)?;

    let snapshots = dir.join("snapshots.csv");
    write_snapshots(&snapshots, &traj.snapshots)?;
    let diagnostics = dir.join("diagnostics.csv");
    let header = [
        "t", "mass", "mass_identity_residual", "u_l1", "u_l2", "u_linf", "p_l2", "p_linf", "dp_l2", "g_energy",
        "p_mean", "first_moment", "u_p", "truncation_flux", "anchor_gap",
    ];
    let rows: Vec<Vec<String>> = traj
        .diagnostics
        .iter()
        .map(|r| {
            [
                r.t, r.mass, r.mass_identity_residual, r.u_l1, r.u_l2, r.u_linf, r.p_l2, r.p_linf, r.dp_l2,
                r.g_energy, r.p_mean, r.first_moment, r.u_p, r.truncation_flux, r.anchor_gap,
            ]
            .map(num)
            .to_vec()
        })
        .collect();
    write_table(&diagnostics, &header, &rows)?;
    let mut csvs = vec![snapshots, diagnostics];
    if config.solve.kind == ProblemKind::Ibvp {
        let trace = dir.join("trace.csv");
        let rows: Vec<Vec<String>> =
            traj.trace.iter().map(|s| vec![num(s.t), num(s.first_cell), num(s.extrapolated)]).collect();
        write_table(&trace, &["t", "first_cell", "extrapolated"], &rows)?;
        csvs.push(trace);
    }

    let mut svgs = Vec::new();
    if out.svg {
        let last = traj.last();
        let g = last.u.grid();
        let profile = |f: &spe_core::Field| -> Vec<(f64, f64)> {
            f.values().iter().enumerate().map(|(i, &v)| (g.center(i), v)).collect()
        };
        let path = dir.join("profile.svg");
        render_svg(
            &path,
            PlotKind::Profile,
            "x",
            "value",
            &[Series::new("u", profile(&last.u)), Series::new("P", profile(&last.p))],
        )?;
        svgs.push(path);
        let path = dir.join("mass.svg");
        let series = |name: &str, f: fn(&spe_core::bounds::DiagnosticsRecord) -> f64| {
            Series::new(name, traj.diagnostics.iter().map(|r| (r.t, f(r))).collect())
        };
        render_svg(&path, PlotKind::TimeSeries, "t", "value", &[series("mass", |r| r.mass), series("u_l2", |r| r.u_l2)])?;
        svgs.push(path);
    }
    let last = traj.diagnostics.last().expect("a run records its initial state");
    println!(
        "t = {}  steps = {}  mass = {:.6e}  |u|_L2 = {:.6e}  |u|_inf = {:.6e}  |P|_inf = {:.6e}",
        last.t,
        traj.dts.len(),
        last.mass,
        last.u_l2,
        last.u_linf,
        last.p_linf
    );
    finish(manifest("solve", &config, started), dir, &csvs, &svgs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn status(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "pass",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Skipped => "skipped",
    }
}

struct AuditRow {
    name: &'static str,
    status: CheckStatus,
    evaluated: usize,
    failures: usize,
    ratio: f64,
    t: f64,
    actual: f64,
    bound: f64,
}

fn audit_rows(bounds: &AuditSummary, entropy: &EntropyAudit) -> Vec<AuditRow> {
    let mut rows: Vec<AuditRow> = bounds
        .checks
        .iter()
        .map(|c| AuditRow {
            name: c.name,
            status: c.status,
            evaluated: c.evaluated,
            failures: c.failures,
            ratio: c.worst_ratio,
            t: c.worst_t,
            actual: c.worst_actual,
            bound: c.worst_bound,
        })
        .collect();
    for m in [&entropy.interior, &entropy.boundary] {
        let evaluated = usize::from(m.status != CheckStatus::Skipped);
        rows.push(AuditRow {
            name: m.name,
            status: m.status,
            evaluated,
            failures: usize::from(m.status == CheckStatus::Fail),
            ratio: m.ratio(),
            t: f64::NAN,
            actual: m.actual,
            bound: m.bound,
        });
    }
    rows
}

fn audit(args: &RunArgs, points: usize, out: Option<&Path>) -> Result<ExitCode> {
    let started = Instant::now();
    let mut config = load(args)?;
    if config.solve.snapshot_every != 1 {
        eprintln!("note: the audit needs every step; snapshot_every set to 1");
        config.solve.snapshot_every = 1;
    }
    let traj = simulate(&config)?;
    let bounds = audit_trajectory(&traj);
    let entropy = with_pool(|| audit_entropy(&traj, points))??;
    let rows = audit_rows(&bounds, &entropy);

    println!("{:<18} {:<8} {:>10} {:>9} {:>13} {:>13}", "check", "status", "ratio", "at t", "actual", "bound");
    for r in &rows {
        let t = if r.t.is_nan() { "-".to_string() } else { format!("{:.4}", r.t) };
        println!(
            "{:<18} {:<8} {:>10.4} {:>9} {:>13.6e} {:>13.6e}",
            r.name,
            status(r.status),
            r.ratio,
            t,
            r.actual,
            r.bound
        );
    }
    report_only(&bounds, &entropy);
    let failed = rows.iter().filter(|r| r.status == CheckStatus::Fail).count();

    if let Some(dir) = out {
        out_dir(dir)?;
        let path = dir.join("audit.csv");
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.name.to_string(),
                    status(r.status).to_lowercase(),
                    r.evaluated.to_string(),
                    r.failures.to_string(),
                    num(r.ratio),
                    if r.t.is_nan() { String::new() } else { num(r.t) },
                    num(r.actual),
                    num(r.bound),
                ]
            })
            .collect();
        write_table(
            &path,
            &["check", "status", "evaluated", "failures", "worst_ratio", "worst_t", "worst_actual", "worst_bound"],
            &table,
        )?;
        let mut csvs = vec![path];
        if !bounds.source_integrals.is_empty() {
            let path = dir.join("source_integrals.csv");
            let t: Vec<Vec<String>> = bounds
                .source_integrals
                .iter()
                .map(|s| [s.t, s.negative_side, s.positive_side, s.total, s.minus_first_moment].map(num).to_vec())
                .collect();
            write_table(&path, &["t", "p_negative", "p_positive", "p_total", "minus_first_moment"], &t)?;
            csvs.push(path);
        }
        let path = dir.join("kruzkov.csv");
        let t: Vec<Vec<String>> = entropy
            .kruzkov
            .iter()
            .map(|r| [r.c, r.max_positive_part, r.max_excess, r.min_residual].map(num).to_vec())
            .collect();
        write_table(&path, &["c", "max_positive_part", "max_excess", "min_residual"], &t)?;
        csvs.push(path);
        finish(manifest("audit", &config, started), dir, &csvs, &[], started)?;
    }

    if failed == 0 {
        println!("audit: PASS");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("audit: FAIL ({failed} checks)");
        Ok(ExitCode::from(1))
    }
}

fn report_only(bounds: &AuditSummary, entropy: &EntropyAudit) {
    println!("report only:");
    println!("  sup_t |P|_L2            {:.6e}", bounds.p_l2_sup);
    println!("  mass initial / final    {:.6e} / {:.6e}", bounds.mass_initial, bounds.mass_final);
    println!("  truncation flux (max)   {:.6e}", bounds.truncation_flux_max);
    let worst_pos = entropy.kruzkov.iter().fold(0.0_f64, |m, r| m.max(r.max_positive_part));
    println!("  kruzkov positive part   {worst_pos:.6e} (before source allowance)");
    if let Some(b) = &entropy.boundary_report {
        println!("  wall condition, printed {:.6e} (first cell)", b.worst_violation);
    }
    if bounds.kind == ProblemKind::Cauchy {
        println!("  anchor gap (max)        {:.6e}", bounds.anchor_gap_max);
        if let Some(last) = bounds.source_integrals.last() {
            println!(
                "  int P over x<0, x>0, R  {:.6e}, {:.6e}, {:.6e} at t = {}",
                last.negative_side, last.positive_side, last.total, last.t
            );
            println!("  -int x u                {:.6e}", last.minus_first_moment);
        }
        if let Some(a) = bounds.boundary_coefficient.last() {
            println!("  a_eps cubic / linear    {:.6e} / {:.6e} at t = {}", a.cubic, a.linear, a.t);
        }
    }
}

fn spec(config: &RunConfig, eps_values: Vec<f64>, n_values: Vec<usize>) -> SweepSpec {
    SweepSpec { base: config.solve.clone(), initial: config.initial.clone(), eps_values, n_values }
}

fn sweep(args: &RunArgs, eps: Vec<f64>, out: &OutArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let config = load(args)?;
    let rows = eps_sweep(&spec(&config, eps, Vec::new()))?;
    let dir = &out.out;
    out_dir(dir)?;
    println!("{:>10} {:>13} {:>13} {:>13} {:>13}", "eps", "gap_u_l1", "gap_p_l1", "gap_p_linf", "mass");
    for r in &rows {
        println!(
            "{:>10} {:>13.6e} {:>13.6e} {:>13.6e} {:>13.6e}",
            r.eps, r.gap_u_l1, r.gap_p_l1, r.gap_p_linf, r.mass
        );
    }
    let monotone = rows.windows(2).all(|w| w[1].gap_u_l1 < w[0].gap_u_l1);
    println!("gap decreases monotonically: {}", if monotone { "yes" } else { "no" });
    let path = dir.join("eps_sweep.csv");
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| [r.eps, r.gap_u_l1, r.gap_p_l1, r.gap_p_linf, r.mass, r.u_linf].map(num).to_vec())
        .collect();
    write_table(&path, &["eps", "gap_u_l1", "gap_p_l1", "gap_p_linf", "mass", "u_linf"], &table)?;
    let mut svgs = Vec::new();
    if out.svg {
        let p = dir.join("eps_sweep.svg");
        let s = |name: &str, f: fn(&spe_core::experiments::EpsRow) -> f64| {
            Series::new(name, rows.iter().map(|r| (r.eps, f(r))).collect())
        };
        render_svg(&p, PlotKind::LogLog, "eps", "gap", &[s("u L1", |r| r.gap_u_l1), s("P L1", |r| r.gap_p_l1)])?;
        svgs.push(p);
    }
    finish(manifest("sweep-eps", &config, started), dir, &[path], &svgs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn order_text(o: Option<Order>) -> String {
    match o {
        None => String::new(),
        Some(Order::Value(v)) => num(v),
        Some(Order::Exact) => "exact".into(),
        Some(Order::Unbounded) => "inf".into(),
    }
}

fn refine(args: &RunArgs, cells: Vec<usize>, out: &OutArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let config = load(args)?;
    let rows = refine_study(&spec(&config, Vec::new(), cells))?;
    let dir = &out.out;
    out_dir(dir)?;
    println!("{:>8} {:>13} {:>8}", "n", "error_l1", "order");
    for r in &rows {
        let e = r.error.map_or("reference".to_string(), |e| format!("{e:.6e}"));
        println!("{:>8} {:>13} {:>8}", r.n_cells, e, order_text(r.order));
    }
    let path = dir.join("refine.csv");
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.n_cells.to_string(), r.error.map(num).unwrap_or_default(), order_text(r.order)])
        .collect();
    write_table(&path, &["n_cells", "error_l1", "order"], &table)?;
    let mut svgs = Vec::new();
    if out.svg {
        let p = dir.join("refine.svg");
        let pts = rows.iter().filter_map(|r| r.error.map(|e| (r.n_cells as f64, e))).collect();
        render_svg(&p, PlotKind::LogLog, "n_cells", "error", &[Series::new("L1 error", pts)])?;
        svgs.push(p);
    }
    finish(manifest("refine", &config, started), dir, &[path], &svgs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn stability(args: &RunArgs, factor: f64, radius: f64, c_max: f64, out: &OutArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let config = load(args)?;
    let mut other = config.initial.clone();
    other.amplitude *= factor;
    let res = stability_pair(&config.solve, &config.initial, &other, radius, c_max)?;
    let dir = &out.out;
    out_dir(dir)?;
    match res.fitted_c {
        Some(c) => println!("fitted C = {c}"),
        None => println!("no C up to {} certifies the estimate on this domain", res.c_reachable),
    }
    let path = dir.join("stability.csv");
    let table: Vec<Vec<String>> = res
        .times
        .iter()
        .zip(&res.distance)
        .zip(&res.quotient)
        .map(|((&t, &d), &q)| vec![num(t), num(d), num(q)])
        .collect();
    write_table(&path, &["t", "distance_l1", "quotient"], &table)?;
    let mut svgs = Vec::new();
    if out.svg {
        let p = dir.join("stability.svg");
        let pts = res.times.iter().copied().zip(res.quotient.iter().copied()).collect();
        render_svg(&p, PlotKind::TimeSeries, "t", "Q(t)", &[Series::new("Q", pts)])?;
        svgs.push(p);
    }
    finish(manifest("stability", &config, started), dir, &[path], &svgs, started)?;
    Ok(ExitCode::SUCCESS)
}

fn plot(input: &Path, output: &Path, kind: Kind, x: &str, ys: &[String]) -> Result<ExitCode> {
    let table = read_table(input)?;
    let xs = table.column(x).with_context(|| format!("{} has no column `{x}`", input.display()))?;
    let times = table.column("t").filter(|_| x != "t");
    let mut series = Vec::new();
    for y in ys {
        let vs = table.column(y).with_context(|| format!("{} has no column `{y}`", input.display()))?;
        match &times {
            // snapshot files stack several profiles; split them by time
            Some(ts) => {
                let mut start = 0;
                while start < ts.len() {
                    let t = ts[start];
                    let end = start + ts[start..].iter().take_while(|&&s| s == t).count();
                    let pts = (start..end).map(|i| (xs[i], vs[i])).collect();
                    series.push(Series::new(format!("{y} t={t}"), pts));
                    start = end;
                }
            }
            None => series.push(Series::new(y.clone(), xs.iter().copied().zip(vs).collect())),
        }
    }
    let kind = match kind {
        Kind::Profile => PlotKind::Profile,
        Kind::TimeSeries => PlotKind::TimeSeries,
        Kind::LogLog => PlotKind::LogLog,
    };
    render_svg(output, kind, x, &ys.join(", "), &series)?;
    println!("wrote {}", output.display());
    Ok(ExitCode::SUCCESS)
}
