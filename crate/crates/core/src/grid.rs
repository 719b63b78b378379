//! Uniform node grids in R^d with node-centered cells.

use serde::Serialize;

use crate::error::{ensure, Result};

/// Nodes `lo + i·h` for multi-indices `0 <= i < shape`, stored row-major
/// (last axis fastest). Each node owns the cube of side `h` centered on it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub lo: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        ensure!(
            spacing > 0.0 && spacing.is_finite(),
            Domain,
            "grid spacing must be positive"
        );
        ensure!(
            lo.len() == shape.len() && !lo.is_empty(),
            Usage,
            "grid corner and shape disagree"
        );
        ensure!(shape.iter().all(|n| *n > 0), Usage, "empty grid axis");
        Ok(Grid { lo, spacing, shape })
    }

    /// Nodes on the lattice `h·Z^d` inside the box `[lo, hi]`.
    pub fn lattice_box(lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        ensure!(
            lo.len() == hi.len(),
            Usage,
            "box corners of different dimension"
        );
        let mut first = Vec::with_capacity(lo.len());
        let mut shape = Vec::with_capacity(lo.len());
        for (a, b) in lo.iter().zip(hi) {
            ensure!(b >= a, Usage, "box corner {a} above {b}");
            let i0 = (a / h - 1e-9).ceil();
            let i1 = (b / h + 1e-9).floor();
            ensure!(
                i1 >= i0,
                Resolution,
                "box side [{a}, {b}] holds no node of spacing {h}"
            );
            first.push(i0 * h);
            shape.push((i1 - i0) as usize + 1);
        }
        Grid::new(first, h, shape)
    }

    /// Lattice nodes in the cube `[-r, r]^d`.
    pub fn cube(d: usize, r: f64, h: f64) -> Result<Self> {
        Grid::lattice_box(&vec![-r; d], &vec![r; d], h)
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hi(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.shape)
            .map(|(a, n)| a + (*n as f64 - 1.0) * self.spacing)
            .collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim() as i32)
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + i as f64 * self.spacing
    }

    pub fn axis(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(k, i)| self.coord(k, *i))
            .collect()
    }

    /// Index range per axis of nodes within distance `r` of `c` along that axis.
    pub fn index_box(&self, c: &[f64], r: f64) -> Option<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let a = ((c[k] - r - self.lo[k]) / self.spacing - 1e-9)
                .ceil()
                .max(0.0);
            let b = ((c[k] + r - self.lo[k]) / self.spacing + 1e-9).floor();
            if b < a || a >= self.shape[k] as f64 || b < 0.0 {
                return None;
            }
            out.push((a as usize, (b as usize).min(self.shape[k] - 1)));
        }
        Some(out)
    }

    /// Flat indices of nodes in the open ball `B(c, r)`, in increasing order.
    pub fn nodes_in_ball(&self, c: &[f64], r: f64) -> Vec<usize> {
        let Some(bx) = self.index_box(c, r) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut idx: Vec<usize> = bx.iter().map(|(a, _)| *a).collect();
        let r2 = r * r;
        loop {
            let d2: f64 = idx
                .iter()
                .enumerate()
                .map(|(k, i)| (self.coord(k, *i) - c[k]).powi(2))
                .sum();
            if d2 < r2 {
                out.push(self.ravel(&idx));
            }
            // odometer increment, last axis fastest
            let mut k = self.dim();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if idx[k] < bx[k].1 {
                    idx[k] += 1;
                    break;
                }
                idx[k] = bx[k].0;
            }
        }
    }

    /// Offset, in whole cells, of `other`'s corner from ours when both lie on one lattice.
    pub fn lattice_offset(&self, other: &Grid) -> Option<Vec<i64>> {
        if self.dim() != other.dim() || (self.spacing - other.spacing).abs() > 1e-12 * self.spacing
        {
            return None;
        }
        let mut out = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let t = (other.lo[k] - self.lo[k]) / self.spacing;
            if (t - t.round()).abs() > 1e-6 {
                return None;
            }
            out.push(t.round() as i64);
        }
        Some(out)
    }
}
