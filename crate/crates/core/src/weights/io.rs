//! Binary grid files: little-endian `u64` dimension d, then d `f64` lower
//! corner coordinates, d `f64` upper corner coordinates, the `f64` spacing,
//! and the node values as row-major `f64` (last axis fastest).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::SampledWeight;
use crate::error::{ensure, Result};
use crate::grid::Grid;

pub fn write_grid_file(path: &Path, h: &SampledWeight) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(h.dim() as u64).to_le_bytes())?;
    for v in h.grid.lo.iter().chain(&h.grid.hi()) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&h.grid.spacing.to_le_bytes())?;
    for v in &h.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_grid_file(path: &Path) -> Result<SampledWeight> {
    let mut r = BufReader::new(File::open(path)?);
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    let d = u64::from_le_bytes(b) as usize;
    ensure!(
        (1..=8).contains(&d),
        Parse,
        "grid file dimension {d} out of range"
    );
    let lo: Vec<f64> = (0..d).map(|_| read_f64(&mut r)).collect::<Result<_>>()?;
    let hi: Vec<f64> = (0..d).map(|_| read_f64(&mut r)).collect::<Result<_>>()?;
    let h = read_f64(&mut r)?;
    ensure!(
        h > 0.0 && h.is_finite(),
        Parse,
        "grid file spacing {h} invalid"
    );
    let mut shape = Vec::with_capacity(d);
    for k in 0..d {
        let n = (hi[k] - lo[k]) / h;
        ensure!(
            n >= -1e-9 && (n - n.round()).abs() < 1e-6,
            Parse,
            "box side {k} is not a multiple of the spacing"
        );
        shape.push(n.round() as usize + 1);
    }
    let grid = Grid::new(lo, h, shape)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    ensure!(
        bytes.len() == 8 * grid.len(),
        Parse,
        "grid file holds {} bytes of values, expected {}",
        bytes.len(),
        8 * grid.len()
    );
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    SampledWeight::new(grid, values)
}
