use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::{flat_top, CapPartition, Tile};
use crate::error::{ensure, Result};
use crate::extension::FrequencyProfile;
use crate::quadrature::Rule1d;

/// Pieces lighter than this fraction of `‖f‖` are dropped.
pub const DROP_FRACTION: f64 = 1e-12;

/// Largest frequency grid, in nodes, accepted by [`decompose`].
pub const MAX_NODES: usize = 1 << 22;

/// Caps evaluated together in `Decomposition::sum`.
const SUM_BATCH: usize = 16;

/// Transition widths of the two flat-top partitions of unity, as fractions
/// of the cell spacing; each in (0, 1/2].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionParams {
    pub cap_transition: f64,
    pub spatial_transition: f64,
}

impl Default for PartitionParams {
    fn default() -> Self {
        PartitionParams {
            cap_transition: 0.25,
            spatial_transition: 0.25,
        }
    }
}

/// One wave packet `f_{θ,ν}`. Values are synthesized on demand.
#[derive(Debug, Clone, Serialize)]
pub struct Piece {
    pub tile: Tile,
    /// L² norm.
    pub mass: f64,
    #[serde(skip)]
    cap: Vec<usize>,
    #[serde(skip)]
    cell: Vec<usize>,
}

/// Partition data needed to rebuild pieces.
#[derive(Debug, Clone)]
struct Parts {
    m: usize,
    values: Vec<Complex64>,
    psi: Vec<Option<Window>>,
    /// η windows wrap around the period, so they are index lists.
    eta: Vec<Vec<(usize, f64)>>,
    phase: Vec<Complex64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decomposition {
    pub dim: usize,
    pub r: f64,
    pub delta: f64,
    /// Midpoint nodes per axis on [-1, 1].
    pub n: usize,
    pub caps: CapPartition,
    pub nu_spacing: f64,
    /// Translates per axis.
    pub nu_count: usize,
    pub params: PartitionParams,
    pub pieces: Vec<Piece>,
    /// Tiles whose piece fell below the drop threshold.
    pub dropped: usize,
    /// L² norm of everything dropped, up to orthogonality.
    pub dropped_mass: f64,
    pub f_norm: f64,
    #[serde(skip)]
    parts: Arc<Parts>,
}

fn midpoint_nodes(f: &FrequencyProfile, r: f64) -> Result<usize> {
    let n = f.axes[0].len();
    let h = 2.0 / n as f64;
    for a in &f.axes {
        let reference = Rule1d::midpoint(-1.0, 1.0, n);
        let same = a.len() == n
            && a.nodes
                .iter()
                .zip(&reference.nodes)
                .all(|(x, y)| (x - y).abs() < 1e-12)
            && a.weights.iter().all(|w| (w - h).abs() < 1e-15);
        ensure!(
            same,
            Grid,
            "wave packet decomposition needs equal midpoint rules on [-1, 1]"
        );
    }
    crate::extension::check_resolution(h, r)?;
    Ok(n)
}

fn fft_axes(data: &mut [Complex64], n: usize, m: usize, plan: &Arc<dyn Fft<f64>>) {
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..m {
        let stride = n.pow((m - 1 - axis) as u32);
        let outer = data.len() / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                plan.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

fn unravel(mut flat: usize, n: usize, m: usize) -> Vec<usize> {
    let mut idx = vec![0; m];
    for k in (0..m).rev() {
        idx[k] = flat % n;
        flat /= n;
    }
    idx
}

fn ravel(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, i| acc * n + i)
}

/// Odometer over the boxes `lens` (last axis fastest).
fn boxes(lens: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = lens.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0; lens.len()];
            for k in (0..lens.len()).rev() {
                idx[k] = flat % lens[k];
                flat /= lens[k];
            }
            idx
        })
        .collect()
}

/// Sparse one-dimensional weights: (first index, values).
#[derive(Debug, Clone)]
struct Window {
    start: usize,
    values: Vec<f64>,
}

impl Window {
    fn from_dense(v: &[f64]) -> Option<Self> {
        let first = v.iter().position(|x| *x != 0.0)?;
        let last = v.iter().rposition(|x| *x != 0.0)?;
        Some(Window {
            start: first,
            values: v[first..=last].to_vec(),
        })
    }
}

/// Splits `f` into tile pieces `f_{θ,ν} = (η_ν (ψ_θ f)^∨)^∧`.
///
/// `ψ_θ` is a flat-top partition of unity over caps of spacing `R^{-1/2}`
/// and `η_ν` a flat-top partition of unity on the period of the discrete
/// transform with cells on the lattice `R^{(1+δ)/2} Z^{d-1}`. The pieces
/// sum to `f` exactly. Multiplying by `η_ν` smears the frequency support of
/// `ψ_θ f` by about `R^{-(1+δ)/2}`, so pieces are concentrated on their cap
/// but not confined to it; see [`Decomposition::cap_leakage`].
pub fn decompose(
    f: &FrequencyProfile,
    r: f64,
    delta: f64,
    params: PartitionParams,
) -> Result<Decomposition> {
    ensure!(r >= 16.0, Domain, "wave packets need R >= 16, got {r}");
    ensure!(
        (0.0..1.0).contains(&delta),
        Domain,
        "δ = {delta} outside [0, 1)"
    );
    for t in [params.cap_transition, params.spatial_transition] {
        ensure!(
            t > 0.0 && t <= 0.5,
            Domain,
            "transition {t} outside (0, 1/2]"
        );
    }
    let d = f.dim;
    let m = d - 1;
    let n = midpoint_nodes(f, r)?;
    let total = n.pow(m as u32);
    ensure!(
        total <= MAX_NODES,
        Budget,
        "{total} frequency nodes exceed the cap {MAX_NODES}"
    );
    let h = 2.0 / n as f64;
    let caps = CapPartition::new(r.powf(-0.5), params.cap_transition);
    ensure!(
        caps.centers.len() >= 4,
        Domain,
        "R = {r} gives fewer than 4 caps per axis"
    );
    let f_norm = f.l2_norm();

    let omega: Vec<f64> = Rule1d::midpoint(-1.0, 1.0, n).nodes;
    let ncap = caps.centers.len();
    let mut psi_dense = vec![vec![0.0; n]; ncap];
    for (i, t) in omega.iter().enumerate() {
        for (j, v) in caps.weights(*t).into_iter().enumerate() {
            psi_dense[j][i] = v;
        }
    }
    let psi: Vec<Option<Window>> = psi_dense.iter().map(|v| Window::from_dense(v)).collect();

    // spatial grid of the transform and the per-axis η partition
    let period = 2.0 * PI / h;
    let y: Vec<f64> = (0..n)
        .map(|k| {
            let kf = if k < n.div_ceil(2) {
                k as f64
            } else {
                k as f64 - n as f64
            };
            2.0 * PI * kf / (n as f64 * h)
        })
        .collect();
    let w = r.powf((1.0 + delta) / 2.0);
    let mnu = (period / (2.0 * w)).ceil() as i64;
    let nus: Vec<f64> = (-mnu..=mnu).map(|k| k as f64 * w).collect();
    let periodic = |a: f64, b: f64| {
        let t = (a - b).rem_euclid(period);
        t.min(period - t)
    };
    let mut eta: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nus.len()];
    for k in 0..n {
        let raw: Vec<f64> = nus
            .iter()
            .map(|nu| flat_top(periodic(y[k], *nu) / w, params.spatial_transition))
            .collect();
        let s: f64 = raw.iter().sum();
        for (j, v) in raw.iter().enumerate() {
            if *v != 0.0 {
                eta[j].push((k, v / s));
            }
        }
    }
    let phase: Vec<Complex64> = y
        .iter()
        .map(|t| Complex64::from_polar(1.0, t * omega[0]))
        .collect();
    let parts = Arc::new(Parts {
        m,
        values: f.values.clone(),
        psi,
        eta,
        phase,
    });

    let threshold = DROP_FRACTION * f_norm;
    let inv = FftPlanner::<f64>::new().plan_fft_inverse(n);
    let nu_ids = boxes(&vec![nus.len(); m]);
    let results: Vec<(Vec<Piece>, usize, f64)> = boxes(&vec![ncap; m])
        .par_iter()
        .map(|theta| {
            let mut pieces = Vec::new();
            let (mut dropped, mut dropped2) = (0usize, 0.0f64);
            let Some(g) = parts.cap_transform(theta, n, h, &inv) else {
                return (pieces, 0, 0.0);
            };
            let center: Vec<f64> = theta.iter().map(|j| caps.centers[*j]).collect();
            let cn = center.iter().map(|c| c * c).sum::<f64>().sqrt();
            let omega_theta: Vec<f64> = center
                .iter()
                .map(|c| if cn > 1.0 { c / cn } else { *c })
                .collect();
            for nu_id in &nu_ids {
                let lists: Vec<&Vec<(usize, f64)>> = nu_id.iter().map(|j| &parts.eta[*j]).collect();
                let mut energy = 0.0;
                for sel in boxes(&lists.iter().map(|l| l.len()).collect::<Vec<_>>()) {
                    let idx: Vec<usize> = sel.iter().zip(&lists).map(|(s, l)| l[*s].0).collect();
                    let e: f64 = sel.iter().zip(&lists).map(|(s, l)| l[*s].1).product();
                    energy += (g[ravel(&idx, n)] * e).norm_sqr();
                }
                // Parseval: ‖(η_ν G)^∧‖² = Σ|η_ν G|² / (n h)^m with n h = 2
                let mass = (energy / 2f64.powi(m as i32)).sqrt();
                if mass < threshold {
                    dropped += 1;
                    dropped2 += mass * mass;
                    continue;
                }
                let tile = Tile {
                    theta: theta.iter().map(|j| caps.index_of(*j)).collect(),
                    nu_index: nu_id.iter().map(|j| *j as i64 - mnu).collect(),
                    omega: omega_theta.clone(),
                    nu: nu_id.iter().map(|j| nus[*j]).collect(),
                    r,
                    delta,
                };
                pieces.push(Piece {
                    tile,
                    mass,
                    cap: theta.clone(),
                    cell: nu_id.clone(),
                });
            }
            (pieces, dropped, dropped2)
        })
        .collect();

    let mut pieces = Vec::new();
    let (mut dropped, mut dropped2) = (0, 0.0);
    for (p, c, m2) in results {
        pieces.extend(p);
        dropped += c;
        dropped2 += m2;
    }
    Ok(Decomposition {
        dim: d,
        r,
        delta,
        n,
        caps,
        nu_spacing: w,
        nu_count: nus.len(),
        params,
        pieces,
        dropped,
        dropped_mass: dropped2.sqrt(),
        f_norm,
        parts,
    })
}

impl Parts {
    /// `(ψ_θ f)^∨` on the spatial grid, or `None` if `ψ_θ f` vanishes.
    fn cap_transform(
        &self,
        theta: &[usize],
        n: usize,
        h: f64,
        inv: &Arc<dyn Fft<f64>>,
    ) -> Option<Vec<Complex64>> {
        let m = self.m;
        let ps: Vec<&Window> = theta
            .iter()
            .map(|j| self.psi[*j].as_ref())
            .collect::<Option<_>>()?;
        let mut g = vec![Complex64::new(0.0, 0.0); n.pow(m as u32)];
        let mut any = false;
        for local in boxes(&ps.iter().map(|w| w.values.len()).collect::<Vec<_>>()) {
            let idx: Vec<usize> = local.iter().zip(&ps).map(|(l, w)| w.start + l).collect();
            let weight: f64 = local.iter().zip(&ps).map(|(l, w)| w.values[*l]).product();
            let flat = ravel(&idx, n);
            g[flat] = self.values[flat] * weight;
            any |= g[flat] != Complex64::new(0.0, 0.0);
        }
        if !any {
            return None;
        }
        fft_axes(&mut g, n, m, inv);
        let cell = h.powi(m as i32);
        for (flat, v) in g.iter_mut().enumerate() {
            let ph: Complex64 = unravel(flat, n, m).iter().map(|k| self.phase[*k]).product();
            *v *= ph * cell;
        }
        Some(g)
    }
}

impl Decomposition {
    fn cell(&self) -> f64 {
        (2.0 / self.n as f64).powi(self.dim as i32 - 1)
    }

    /// Sum of the selected pieces on the full frequency grid.
    pub fn sum(&self, pieces: &[usize]) -> Vec<Complex64> {
        let (n, m) = (self.n, self.dim - 1);
        let total = n.pow(m as u32);
        let h = 2.0 / n as f64;
        let mut by_cap: BTreeMap<&[usize], Vec<&[usize]>> = BTreeMap::new();
        for &i in pieces {
            let p = &self.pieces[i];
            by_cap.entry(&p.cap).or_default().push(&p.cell);
        }
        let mut planner = FftPlanner::<f64>::new();
        let inv = planner.plan_fft_inverse(n);
        let fwd = planner.plan_fft_forward(n);
        let parts = &self.parts;
        let by_cap: Vec<(&[usize], Vec<&[usize]>)> = by_cap.into_iter().collect();
        let one_cap = |(theta, cells): &(&[usize], Vec<&[usize]>)| {
            let mut local = vec![Complex64::new(0.0, 0.0); total];
            let Some(g) = parts.cap_transform(theta, n, h, &inv) else {
                return local;
            };
            // Σ_ν η_ν over the selected cells, times G
            let mut mask = vec![0.0; total];
            for cell in cells {
                let lists: Vec<&Vec<(usize, f64)>> = cell.iter().map(|j| &parts.eta[*j]).collect();
                for sel in boxes(&lists.iter().map(|l| l.len()).collect::<Vec<_>>()) {
                    let idx: Vec<usize> = sel.iter().zip(&lists).map(|(s, l)| l[*s].0).collect();
                    mask[ravel(&idx, n)] += sel
                        .iter()
                        .zip(&lists)
                        .map(|(s, l)| l[*s].1)
                        .product::<f64>();
                }
            }
            for (flat, v) in local.iter_mut().enumerate() {
                if mask[flat] != 0.0 {
                    // undo the phase of the first node before the forward transform
                    let ph: Complex64 = unravel(flat, n, m)
                        .iter()
                        .map(|k| parts.phase[*k].conj())
                        .product();
                    *v = g[flat] * mask[flat] * ph;
                }
            }
            fft_axes(&mut local, n, m, &fwd);
            let scale = 1.0 / 2f64.powi(m as i32);
            local.iter_mut().for_each(|v| *v *= scale);
            local
        };
        // fixed batches summed in cap order keep the result independent of the thread count
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        for batch in by_cap.chunks(SUM_BATCH) {
            let locals: Vec<Vec<Complex64>> = batch.par_iter().map(one_cap).collect();
            for l in locals {
                out.iter_mut().zip(&l).for_each(|(x, y)| *x += y);
            }
        }
        out
    }

    pub fn piece_values(&self, i: usize) -> Vec<Complex64> {
        self.sum(&[i])
    }

    pub fn l2(&self, values: &[Complex64]) -> f64 {
        (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.cell()).sqrt()
    }

    /// `‖Σ f_{θ,ν} - f‖ / ‖f‖`.
    pub fn reconstruction_error(&self, f: &FrequencyProfile) -> f64 {
        let all: Vec<usize> = (0..self.pieces.len()).collect();
        let s = self.sum(&all);
        let diff: Vec<Complex64> = s.iter().zip(&f.values).map(|(a, b)| a - b).collect();
        self.l2(&diff) / self.f_norm
    }

    /// `‖Σ_{T'} f_T‖² / Σ_{T'} ‖f_T‖²`.
    pub fn orthogonality_ratio(&self, pieces: &[usize]) -> f64 {
        let s = self.l2(&self.sum(pieces));
        let sq: f64 = pieces.iter().map(|i| self.pieces[*i].mass.powi(2)).sum();
        s * s / sq
    }

    /// Fraction of `‖f_{θ,ν}‖²` outside the cap cell `|ω_k - c_k| <= s`.
    pub fn cap_leakage(&self, i: usize) -> f64 {
        let p = &self.pieces[i];
        let values = self.piece_values(i);
        let m = self.dim - 1;
        let omega = Rule1d::midpoint(-1.0, 1.0, self.n).nodes;
        // a little slack keeps nodes on the cell edge inside
        let s = self.caps.spacing * (1.0 + 1e-9);
        let outside: f64 = values
            .iter()
            .enumerate()
            .filter(|(flat, _)| {
                unravel(*flat, self.n, m)
                    .iter()
                    .zip(&p.cap)
                    .any(|(k, j)| (omega[*k] - self.caps.centers[*j]).abs() > s)
            })
            .map(|(_, v)| v.norm_sqr())
            .sum();
        outside * self.cell() / (p.mass * p.mass)
    }

    /// The piece as a profile on the full grid.
    pub fn piece_profile(&self, i: usize) -> FrequencyProfile {
        let axes = vec![Rule1d::midpoint(-1.0, 1.0, self.n); self.dim - 1];
        FrequencyProfile {
            dim: self.dim,
            axes,
            values: self.piece_values(i),
            closed: None,
        }
    }

    pub fn find(&self, theta: &[i64], nu_index: &[i64]) -> Option<usize> {
        self.pieces
            .iter()
            .position(|p| p.tile.theta == theta && p.tile.nu_index == nu_index)
    }
}
