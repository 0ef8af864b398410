//! Line-oriented `key = value` run files.
//!
//! ```text
//! # comment
//! gamma = 0.5
//! epsilon = 0.01
//! t_final = 2
//! x_min = 0
//! x_max = 20
//! n_cells = 1024
//! kind = ibvp
//! ```
//!
//! Unknown keys are rejected. Overrides (from command-line flags) are
//! applied after the file and win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evolve::{ProblemKind, SolveConfig};
use crate::initial::{InitialSpec, Shape};
use crate::source::Normalization;

const REQUIRED: [&str; 5] = ["gamma", "t_final", "x_min", "x_max", "n_cells"];

const KNOWN: [&str; 19] = [
    "gamma",
    "epsilon",
    "cfl",
    "t_final",
    "x_min",
    "x_max",
    "n_cells",
    "kind",
    "snapshot_every",
    "normalization",
    "tol",
    "ghost_left",
    "ghost_right",
    "shape",
    "amplitude",
    "center",
    "width",
    "wavenumber",
    "table",
];

/// Solver settings plus the initial datum.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub solve: SolveConfig,
    pub initial: InitialSpec,
    /// Raw key/value pairs after overrides, in key order.
    pub entries: BTreeMap<String, String>,
}

fn parse_lines(text: &str, origin: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{origin}:{}: expected `key = value`", k + 1)))?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("{origin}:{}: duplicate key `{key}`", k + 1)));
        }
    }
    Ok(map)
}

fn number<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("`{key}`: cannot parse {v:?}"))))
        .transpose()
}

/// Parses run-file text and applies `overrides` on top.
pub fn parse_config_str(text: &str, overrides: &[(String, String)]) -> Result<RunConfig> {
    parse_with(text, overrides, "config", None)
}

/// Reads a run file. Relative `table` paths resolve against the file's directory.
pub fn parse_config(path: Option<&Path>, overrides: &[(String, String)]) -> Result<RunConfig> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_with(&text, overrides, &p.display().to_string(), p.parent())
        }
        None => parse_with("", overrides, "flags", None),
    }
}

fn parse_with(text: &str, overrides: &[(String, String)], origin: &str, base: Option<&Path>) -> Result<RunConfig> {
    let mut map = parse_lines(text, origin)?;
    for (k, v) in overrides {
        map.insert(k.clone(), v.clone());
    }
    if let Some(unknown) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown key `{unknown}`")));
    }
    let missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !map.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
    }

    let d = SolveConfig::default();
    let x_min: f64 = number(&map, "x_min")?.unwrap_or(d.x_min);
    let x_max: f64 = number(&map, "x_max")?.unwrap_or(d.x_max);
    let inferred = if x_min == 0.0 { ProblemKind::Ibvp } else { ProblemKind::Cauchy };
    let kind = match map.get("kind").map(|s| s.to_ascii_lowercase()) {
        None => inferred,
        Some(k) => {
            let kind = match k.as_str() {
                "ibvp" | "half-line" => ProblemKind::Ibvp,
                "cauchy" | "whole-line" => ProblemKind::Cauchy,
                other => return Err(Error::Config(format!("`kind`: expected ibvp or cauchy, got {other:?}"))),
            };
            if kind != inferred {
                return Err(Error::Config(format!(
                    "kind = {k} conflicts with the domain [{x_min}, {x_max}]: ibvp needs x_min = 0, cauchy needs x_min < 0"
                )));
            }
            kind
        }
    };
    let normalization = match map.get("normalization").map(|s| s.to_ascii_lowercase()) {
        None => d.normalization,
        Some(s) if s == "anchor" || s == "anchor-at-zero" => Normalization::AnchorAtZero,
        Some(s) if s == "decay" || s == "decay-both-ends" => Normalization::DecayBothEnds,
        Some(s) => return Err(Error::Config(format!("`normalization`: expected anchor or decay, got {s:?}"))),
    };

    let solve = SolveConfig {
        gamma: number(&map, "gamma")?.unwrap_or(d.gamma),
        eps: number(&map, "epsilon")?.unwrap_or(0.0),
        cfl: number(&map, "cfl")?.unwrap_or(d.cfl),
        t_final: number(&map, "t_final")?.unwrap_or(d.t_final),
        x_min,
        x_max,
        n_cells: number(&map, "n_cells")?.unwrap_or(d.n_cells),
        kind,
        snapshot_every: number(&map, "snapshot_every")?.unwrap_or(d.snapshot_every),
        normalization,
        tol: number(&map, "tol")?.unwrap_or(d.tol),
        ghost_left: number(&map, "ghost_left")?.unwrap_or(0.0),
        ghost_right: number(&map, "ghost_right")?.unwrap_or(0.0),
    };
    solve.validate().map_err(|e| match e {
        Error::InvalidSetup(m) | Error::InvalidGrid(m) => Error::Config(m),
        other => other,
    })?;

    let center = number(&map, "center")?.unwrap_or(0.5 * (x_min + x_max));
    let amplitude = number(&map, "amplitude")?.unwrap_or(1.0);
    let width = number(&map, "width")?.unwrap_or(1.0);
    let wavenumber = number(&map, "wavenumber")?.unwrap_or(0.0);
    let initial = match map.get("shape").map(|s| s.to_ascii_lowercase()).as_deref() {
        None | Some("gaussian-derivative") => InitialSpec::gaussian_derivative(amplitude, center, width),
        Some("modulated-packet") => InitialSpec::modulated_packet(amplitude, center, width, wavenumber),
        Some("custom") => {
            let table = map.get("table").ok_or_else(|| Error::Config("shape = custom needs `table`".into()))?;
            let mut path = PathBuf::from(table);
            if path.is_relative() {
                if let Some(b) = base {
                    path = b.join(path);
                }
            }
            InitialSpec::from_table_file(&path)?
        }
        Some(other) => return Err(Error::Config(format!("`shape`: unknown shape {other:?}"))),
    };
    if map.contains_key("table") && !matches!(initial.shape, Shape::Custom(_)) {
        return Err(Error::Config("`table` is only used with shape = custom".into()));
    }
    Ok(RunConfig { solve, initial, entries: map })
}

impl RunConfig {
    /// Resolved keys as canonical `key = value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// SHA-256 of [`RunConfig::canonical`].
    pub fn checksum(&self) -> String {
        super::manifest::sha256_hex(self.canonical().as_bytes())
    }

    /// Config echo for manifests.
    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({ "solve": self.solve, "initial": self.initial, "entries": self.entries })
    }
}
