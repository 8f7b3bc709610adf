//! On-disk formats: binary field snapshots with a JSON sidecar, and CSV tables.
//!
//! Snapshot layout (little endian): magic `BOF1`, `u64` n_points, `f64` L,
//! `f64` t, then n_points `f64` samples.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, RealField};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"BOF1";

/// Grid metadata written next to every snapshot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub format: String,
    pub n_points: usize,
    pub length: f64,
    pub dx: f64,
    pub t: f64,
    pub x_min: f64,
}

/// Formats a double with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn encode_snapshot(field: &RealField, t: f64) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(28 + 8 * grid.n_points());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&(grid.n_points() as u64).to_le_bytes());
    out.extend_from_slice(&grid.length().to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in field.samples() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_snapshot(bytes: &[u8]) -> std::result::Result<(RealField, f64), String> {
    if bytes.len() < 28 || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err("missing BOF1 header".into());
    }
    let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().unwrap() };
    let n = u64::from_le_bytes(word(4)) as usize;
    let length = f64::from_le_bytes(word(12));
    let t = f64::from_le_bytes(word(20));
    if bytes.len() != 28 + 8 * n {
        return Err(format!("expected {} bytes for {n} samples, found {}", 28 + 8 * n, bytes.len()));
    }
    let samples = (0..n).map(|j| f64::from_le_bytes(word(28 + 8 * j))).collect();
    let grid = Grid::new(length, n).map_err(|e| e.to_string())?;
    let field = RealField::new(grid, samples).map_err(|e| e.to_string())?;
    Ok((field, t))
}

/// Writes `path` and its `path.json` sidecar.
pub fn write_snapshot(path: &Path, field: &RealField, t: f64) -> Result<()> {
    fs::write(path, encode_snapshot(field, t))?;
    let grid = field.grid();
    let sidecar = SnapshotSidecar {
        format: "BOF1".into(),
        n_points: grid.n_points(),
        length: grid.length(),
        dx: grid.dx(),
        t,
        x_min: grid.x(0),
    };
    fs::write(sidecar_path(path), serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(RealField, f64)> {
    let bytes = fs::read(path)?;
    decode_snapshot(&bytes).map_err(|reason| Error::Snapshot { path: path.to_owned(), reason })
}

/// Numeric table written as CSV with 17 significant digits.
#[derive(Clone, Debug, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        CsvTable { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        w.write_all(self.render().as_bytes())?;
        w.flush()?;
        Ok(())
    }
}

/// `x,u` export of a field.
pub fn field_csv(field: &RealField) -> CsvTable {
    let mut table = CsvTable::new(["x", "u"]);
    for (j, &u) in field.samples().iter().enumerate() {
        table.push(vec![field.grid().x(j), u]);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn snapshot_header_layout() {
        let grid = Grid::new(8.0, 4).unwrap();
        let f = RealField::new(grid, vec![1.0, -2.0, 0.5, 3.25]).unwrap();
        let bytes = encode_snapshot(&f, 1.5);
        assert_eq!(&bytes[..4], b"BOF1");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 4);
        assert_eq!(f64::from_le_bytes(bytes[12..20].try_into().unwrap()), 8.0);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 1.5);
        assert_eq!(f64::from_le_bytes(bytes[36..44].try_into().unwrap()), -2.0);
        assert_eq!(bytes.len(), 28 + 32);
    }

    #[test]
    fn rejects_truncated_snapshots() {
        let grid = Grid::new(8.0, 4).unwrap();
        let f = RealField::zeros(&grid);
        let bytes = encode_snapshot(&f, 0.0);
        assert!(decode_snapshot(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_snapshot(b"BOF2").is_err());
    }

    #[test]
    fn snapshot_files_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.bof");
        let grid = Grid::new(16.0, 8).unwrap();
        let f = RealField::from_fn(&grid, |x| x.sin()).unwrap();
        write_snapshot(&path, &f, 2.0).unwrap();
        let (g, t) = read_snapshot(&path).unwrap();
        assert_eq!(g, f);
        assert_eq!(t, 2.0);
        let side: SnapshotSidecar =
            serde_json::from_str(&fs::read_to_string(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(side.n_points, 8);
        assert_eq!(side.dx, 2.0);
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let grid = Grid::new(4.0, 4).unwrap();
        let f = RealField::new(grid, vec![0.1, 1.0 / 3.0, 0.0, -2.0]).unwrap();
        let text = field_csv(&f).render();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,u"));
        let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
        assert_eq!(row[1], "3.3333333333333331e-1");
        assert_eq!(row[1].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    proptest! {
        #[test]
        fn snapshot_bytes_round_trip(samples in prop::collection::vec(-1e6..1e6f64, 8), t in -10.0..10.0f64) {
            let grid = Grid::new(3.0, 8).unwrap();
            let f = RealField::new(grid, samples).unwrap();
            let (g, s) = decode_snapshot(&encode_snapshot(&f, t)).unwrap();
            prop_assert_eq!(g, f);
            prop_assert_eq!(s, t);
        }

        #[test]
        fn csv_round_trips_doubles(v in prop::num::f64::NORMAL) {
            prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
