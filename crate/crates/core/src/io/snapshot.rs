//! CSV output. Numbers use Rust's shortest round-trip formatting, so a
//! re-read reproduces every value bitwise.

use std::path::Path;

use crate::error::{Error, Result};
use crate::evolve::Snapshot;
use crate::grid::Field;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Writes `(u, P)` pairs as rows `t,x,u,P`, one per snapshot and cell.
pub fn write_snapshot<'a>(path: &Path, frames: impl IntoIterator<Item = (&'a Field, &'a Field)>) -> Result<usize> {
    let mut w = writer(path)?;
    w.write_record(["t", "x", "u", "P"]).map_err(|e| csv_error(path, e))?;
    let mut rows = 0;
    for (u, p) in frames {
        if u.grid() != p.grid() {
            return Err(Error::GridMismatch);
        }
        let g = u.grid();
        let t = fmt(u.time());
        for (i, (a, b)) in u.values().iter().zip(p.values()).enumerate() {
            w.write_record([t.as_str(), &fmt(g.center(i)), &fmt(*a), &fmt(*b)]).map_err(|e| csv_error(path, e))?;
            rows += 1;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(rows)
}

/// Convenience wrapper over trajectory snapshots.
pub fn write_snapshots(path: &Path, snapshots: &[Snapshot]) -> Result<usize> {
    write_snapshot(path, snapshots.iter().map(|s| (&s.u, &s.p)))
}

/// Columns of one snapshot as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRows {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRows>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["t", "x", "u", "P"] {
        return Err(Error::format(path, "expected header t,x,u,P"));
    }
    let mut out: Vec<SnapshotRows> = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let parse = |j: usize| -> Result<f64> {
            rec.get(j)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::format(path, format!("row {}: bad number in column {}", k + 2, j + 1)))
        };
        let (t, x, u, p) = (parse(0)?, parse(1)?, parse(2)?, parse(3)?);
        match out.last_mut() {
            Some(s) if s.t.to_bits() == t.to_bits() => {
                s.x.push(x);
                s.u.push(u);
                s.p.push(p);
            }
            _ => out.push(SnapshotRows { t, x: vec![x], u: vec![u], p: vec![p] }),
        }
    }
    Ok(out)
}

/// Writes a numeric table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<usize> {
    let mut w = writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::format(path, "row width differs from header"));
        }
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(rows.len())
}

/// A numeric CSV table read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Reads a CSV file whose cells are all numeric. Empty cells read as NaN.
pub fn read_table(path: &Path) -> Result<Table> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header: Vec<String> = r.headers().map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                if s.is_empty() {
                    Ok(f64::NAN)
                } else {
                    s.parse::<f64>().map_err(|_| {
                        Error::format(path, format!("row {}: column `{}` is not numeric: {s:?}", k + 2, header[j]))
                    })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

/// Data rows and columns of a CSV file with a header.
pub fn csv_shape(path: &Path) -> Result<(usize, usize)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let cols = r.headers().map_err(|e| csv_error(path, e))?.len();
    let mut rows = 0;
    for rec in r.records() {
        rec.map_err(|e| csv_error(path, e))?;
        rows += 1;
    }
    Ok((rows, cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryKind, Grid};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_field_on_eight_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.csv");
        let g = Grid::new(0.0, 8.0, 8, BoundaryKind::HalfLine).unwrap();
        let z = Field::zeros(g, 0.0);
        assert_eq!(write_snapshot(&path, [(&z, &z)]).unwrap(), 8);
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,u,P");
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1..3], ["0,0.5,0,0", "0,1.5,0,0"]);
        let t = read_table(&path).unwrap();
        assert_eq!(t.header, ["t", "x", "u", "P"]);
        assert_eq!(t.column("x").unwrap()[7], 7.5);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let g = Grid::new(-3.0, 3.0, 1024, BoundaryKind::WholeLine).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let frames: Vec<(Field, Field)> = (0..3)
            .map(|k| {
                let u: Vec<f64> = (0..1024).map(|_| rng.random_range(-1.0..1.0) * 1e-5f64.powi(k)).collect();
                let p: Vec<f64> = (0..1024).map(|_| rng.random::<f64>() * 1e7).collect();
                (Field::new(g, u, 0.1 * k as f64).unwrap(), Field::new(g, p, 0.1 * k as f64).unwrap())
            })
            .collect();
        let rows = write_snapshot(&path, frames.iter().map(|(u, p)| (u, p))).unwrap();
        assert_eq!(rows, 3072);
        assert_eq!(csv_shape(&path).unwrap(), (3072, 4));
        let back = read_snapshots(&path).unwrap();
        assert_eq!(back.len(), 3);
        for (b, (u, p)) in back.iter().zip(&frames) {
            assert_eq!(b.t.to_bits(), u.time().to_bits());
            assert!(b.u.iter().zip(u.values()).all(|(a, c)| a.to_bits() == c.to_bits()));
            assert!(b.p.iter().zip(p.values()).all(|(a, c)| a.to_bits() == c.to_bits()));
            assert!(b.x.iter().enumerate().all(|(i, &x)| x == g.center(i)));
        }
    }

    #[test]
    fn io_errors_carry_the_path() {
        let g = Grid::new(0.0, 1.0, 8, BoundaryKind::HalfLine).unwrap();
        let z = Field::zeros(g, 0.0);
        let path = Path::new("/nonexistent-dir/out.csv");
        let err = write_snapshot(path, [(&z, &z)]).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
