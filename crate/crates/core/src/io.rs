//! Point-file ingestion and result emission.
//!
//! Points are read from CSV (one point per row, optional non-numeric header
//! row) or from a packed little-endian binary cache: the 8-byte magic
//! `DPCPTS01`, `n` and `d` as `u64`, then `n * d` `f64` values row-major.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{DpcError, Result};
use crate::geometry::PointSet;
use crate::pipeline::DpcResult;

pub const BINARY_MAGIC: &[u8; 8] = b"DPCPTS01";

/// Reads a CSV or binary point file; the format is detected from the magic.
pub fn read_points(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| DpcError::io(path, e))?;
    let mut reader = BufReader::new(file);
    let head = reader.fill_buf().map_err(|e| DpcError::io(path, e))?;
    if head.starts_with(BINARY_MAGIC) {
        read_points_binary_from(reader, path)
    } else {
        read_points_csv_from(reader, path)
    }
}

/// Parses comma-separated rows. `path` only labels error messages.
pub fn read_points_csv_from<R: BufRead>(reader: R, path: &Path) -> Result<PointSet> {
    let parse_err = |line: usize, msg: String| DpcError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut coords = Vec::new();
    let mut dim = None;
    let mut row = Vec::new();
    let mut first_content = true;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| DpcError::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        row.clear();
        let mut bad_field = None;
        for field in line.split(',') {
            match field.trim().parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    bad_field = Some(field.trim().to_string());
                    break;
                }
            }
        }
        let header = std::mem::replace(&mut first_content, false);
        if let Some(field) = bad_field {
            if header {
                continue;
            }
            return Err(parse_err(lineno, format!("not a number: `{field}`")));
        }
        if let Some(k) = row.iter().position(|v| !v.is_finite()) {
            return Err(parse_err(lineno, format!("non-finite value in column {}", k + 1)));
        }
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_err(lineno, format!("expected {d} columns, found {}", row.len())));
            }
            Some(_) => {}
        }
        coords.extend_from_slice(&row);
    }
    let dim = dim.ok_or(DpcError::EmptyInput)?;
    PointSet::new(coords, dim)
}

fn read_points_binary_from<R: Read>(mut reader: R, path: &Path) -> Result<PointSet> {
    let io = |e| DpcError::io(path, e);
    let mut head = [0u8; 24];
    reader.read_exact(&mut head).map_err(io)?;
    let n = u64::from_le_bytes(head[8..16].try_into().expect("8 bytes")) as usize;
    let d = u64::from_le_bytes(head[16..24].try_into().expect("8 bytes")) as usize;
    let total = n.checked_mul(d).ok_or_else(|| DpcError::InvalidParams("binary header overflows".into()))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(io)?;
    if bytes.len() != total * 8 {
        return Err(DpcError::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: format!("expected {} payload bytes, found {}", total * 8, bytes.len()),
        });
    }
    let coords = bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    PointSet::new(coords, d)
}

pub fn write_points_binary(path: impl AsRef<Path>, points: &PointSet) -> Result<()> {
    let path = path.as_ref();
    let io = |e| DpcError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    w.write_all(BINARY_MAGIC).map_err(io)?;
    w.write_all(&(points.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(points.dim() as u64).to_le_bytes()).map_err(io)?;
    for c in points.coords() {
        w.write_all(&c.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes points as CSV using shortest round-trip decimal formatting.
pub fn write_points(path: impl AsRef<Path>, points: &PointSet) -> Result<()> {
    write_with(path.as_ref(), |w| {
        for p in points.iter() {
            let mut first = true;
            for c in p {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                write!(w, "{c}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// `id,label` rows in id order, ids 1-based, noise as -1.
pub fn write_labels(path: impl AsRef<Path>, result: &DpcResult) -> Result<()> {
    write_with(path.as_ref(), |w| write_labels_to(w, result))
}

pub fn write_labels_to<W: Write>(w: &mut W, result: &DpcResult) -> std::io::Result<()> {
    writeln!(w, "id,label")?;
    for (i, label) in result.labels.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, label)?;
    }
    Ok(())
}

/// `id,rho,delta` rows; unassigned dependent distances print as `inf`.
pub fn write_decision_graph(path: impl AsRef<Path>, result: &DpcResult) -> Result<()> {
    write_with(path.as_ref(), |w| write_decision_graph_to(w, result))
}

pub fn write_decision_graph_to<W: Write>(w: &mut W, result: &DpcResult) -> std::io::Result<()> {
    writeln!(w, "id,rho,delta")?;
    for (i, (rho, delta)) in result.rho.iter().zip(&result.delta).enumerate() {
        if delta.is_infinite() {
            writeln!(w, "{},{},inf", i + 1, rho)?;
        } else {
            writeln!(w, "{},{},{}", i + 1, rho, delta)?;
        }
    }
    Ok(())
}

fn write_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let io = |e| DpcError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    f(&mut w).map_err(io)?;
    w.flush().map_err(io)
}

/// Drops rows whose coordinates exactly repeat an earlier row. Surviving
/// points keep their relative order and are renumbered.
pub fn dedup(points: &PointSet) -> PointSet {
    let mut seen = HashSet::with_capacity(points.len());
    let mut coords = Vec::with_capacity(points.coords().len());
    for p in points.iter() {
        let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
        if seen.insert(key) {
            coords.extend_from_slice(p);
        }
    }
    PointSet::new(coords, points.dim()).expect("at least the first point survives")
}
