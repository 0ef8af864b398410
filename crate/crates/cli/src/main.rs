use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser)]
#[command(name = "spe", version, about = "Short pulse equation solver and audit tool")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write snapshots, diagnostics and a manifest.
    #[command(allow_negative_numbers = true)]
    Solve {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run with per-step snapshots and check every bound and entropy condition.
    /// Exits with status 1 if any evaluated check fails.
    #[command(allow_negative_numbers = true)]
    Audit {
        #[command(flatten)]
        run: RunArgs,
        /// Number of Kruzkov constants in the interior entropy sweep.
        #[arg(long, default_value_t = spe_core::entropy::DEFAULT_KRUZKOV_POINTS)]
        kruzkov_points: usize,
        /// Directory for audit.csv and the manifest. Nothing is written when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L¹ gap to the ε = 0 scheme over a descending list of viscosities.
    #[command(allow_negative_numbers = true)]
    SweepEps {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Self-convergence over a doubling list of cell counts.
    #[command(allow_negative_numbers = true)]
    Refine {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "cells", value_delimiter = ',', required = true)]
        cells: Vec<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fit the L¹ stability constant for the datum and a rescaled copy.
    #[command(allow_negative_numbers = true)]
    Stability {
        #[command(flatten)]
        run: RunArgs,
        /// Amplitude factor of the second datum.
        #[arg(long, default_value_t = 1.1)]
        factor: f64,
        /// Window radius: (0, R) on the half-line, (−R, R) on the whole line.
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = spe_core::experiments::DEFAULT_C_MAX)]
        c_max: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Render columns of a CSV file as an SVG line chart.
    Plot {
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Profile)]
        kind: Kind,
        #[arg(long, default_value = "x")]
        x: String,
        /// Columns to plot; each becomes one series.
        #[arg(long, value_delimiter = ',', default_value = "u")]
        y: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Profile,
    TimeSeries,
    LogLog,
}

/// Config file plus per-key overrides. Flags win over the file.
#[derive(Args, Clone, Default)]
struct RunArgs {
    /// `key = value` run file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    n_cells: Option<usize>,
    /// ibvp or cauchy
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// anchor or decay
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    ghost_left: Option<f64>,
    #[arg(long)]
    ghost_right: Option<f64>,
    /// gaussian-derivative, modulated-packet or custom
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    center: Option<f64>,
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    wavenumber: Option<f64>,
    /// Two-column (x, u) file for shape = custom.
    #[arg(long)]
    table: Option<PathBuf>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        let f = |v: Option<f64>| v.map(|x| x.to_string());
        let n = |v: Option<usize>| v.map(|x| x.to_string());
        put("gamma", f(self.gamma));
        put("epsilon", f(self.epsilon));
        put("cfl", f(self.cfl));
        put("t_final", f(self.t_final));
        put("x_min", f(self.x_min));
        put("x_max", f(self.x_max));
        put("n_cells", n(self.n_cells));
        put("kind", self.kind.clone());
        put("snapshot_every", n(self.snapshot_every));
        put("normalization", self.normalization.clone());
        put("tol", f(self.tol));
        put("ghost_left", f(self.ghost_left));
        put("ghost_right", f(self.ghost_right));
        put("shape", self.shape.clone());
        put("amplitude", f(self.amplitude));
        put("center", f(self.center));
        put("width", f(self.width));
        put("wavenumber", f(self.wavenumber));
        put("table", self.table.as_ref().map(|p| p.display().to_string()));
        out
    }
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Also write SVG plots next to the tables.
    #[arg(long)]
    svg: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
