//! The paraboloid extension operator
//! `Ef(x) = ∫_{B^{d-1}} e^{i(x'·ω + x_d|ω|²)} f(ω) dω`, its sphere analogue,
//! weighted norms of `Ef` on grids, and parabolic rescaling.

mod profile;
mod scaling;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::grid::Grid;
use crate::quadrature::{Rule1d, SphereQuadrature};
use crate::weights::SampledWeight;

pub use profile::{FrequencyProfile, Profile, RuleSpec};
pub use scaling::{
    scaling_experiment, scaling_exponent, ScalingResult, ScalingRow, ScalingSpec, SLOPE_TOLERANCE,
};

/// Largest ambient dimension for grid-based field evaluation.
pub const MAX_FIELD_DIM: usize = 3;

/// Values of an extension at a set of points.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSample {
    pub dim: usize,
    /// Flattened evaluation points (`dim` coordinates each). Empty when `grid` is set.
    pub points: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Radius of the evaluation ball.
    pub r: f64,
    /// Frequency quadrature spacing used.
    pub spacing: f64,
    /// For grid fields: the grid, with `values` in its node order and
    /// `inside[i]` marking evaluated nodes (others hold zero).
    #[serde(skip)]
    pub grid: Option<Grid>,
    #[serde(skip)]
    pub inside: Vec<bool>,
}

impl FieldSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        match &self.grid {
            Some(g) => g.point(i),
            None => self.points[i * self.dim..(i + 1) * self.dim].to_vec(),
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// The phase-resolution rule `h_ω <= 1/(4 max|x|)`.
pub fn check_resolution(spacing: f64, x_max: f64) -> Result<()> {
    ensure!(
        spacing * 4.0 * x_max <= 1.0 + 1e-9,
        Resolution,
        "frequency spacing {spacing} too coarse for |x| up to {x_max} (need <= {})",
        1.0 / (4.0 * x_max)
    );
    Ok(())
}

fn phase(x: &[f64], w: &[f64]) -> f64 {
    let d = x.len();
    let w2: f64 = w.iter().map(|v| v * v).sum();
    x[..d - 1].iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + x[d - 1] * w2
}

/// Direct quadrature of `Ef` at each point.
pub fn extend(f: &FrequencyProfile, points: &[Vec<f64>]) -> Result<FieldSample> {
    let d = f.dim;
    ensure!(
        points.iter().all(|p| p.len() == d),
        Usage,
        "evaluation points must have {d} coordinates"
    );
    let x_max = points.iter().map(|p| norm(p)).fold(0.0, f64::max);
    check_resolution(f.spacing(), x_max)?;
    let nodes = f.weighted_nodes();
    let values = points
        .par_iter()
        .map(|x| {
            nodes
                .iter()
                .map(|(w, c)| c * Complex64::from_polar(1.0, phase(x, w)))
                .sum()
        })
        .collect();
    Ok(FieldSample {
        dim: d,
        points: points.concat(),
        values,
        r: x_max,
        spacing: f.spacing(),
        grid: None,
        inside: Vec::new(),
    })
}

/// `(g dσ)^∨(x) = ∫_{S^{d-1}} e^{i x·ω} g(ω) dσ(ω)` with the given sphere rule.
pub fn extend_sphere(
    g: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    quad: &SphereQuadrature,
    points: &[Vec<f64>],
) -> Result<FieldSample> {
    let d = quad.dim;
    ensure!(
        points.iter().all(|p| p.len() == d),
        Usage,
        "evaluation points must have {d} coordinates"
    );
    let x_max = points.iter().map(|p| norm(p)).fold(0.0, f64::max);
    quad.check_resolution(x_max.max(1.0), 1.0)?;
    let nodes: Vec<(&[f64], Complex64)> = (0..quad.len())
        .map(|i| (quad.node(i), g(quad.node(i)) * quad.weight))
        .collect();
    let values = points
        .par_iter()
        .map(|x| {
            nodes
                .iter()
                .map(|(w, c)| {
                    c * Complex64::from_polar(1.0, x.iter().zip(*w).map(|(a, b)| a * b).sum())
                })
                .sum()
        })
        .collect();
    Ok(FieldSample {
        dim: d,
        points: points.concat(),
        values,
        r: x_max,
        spacing: 2.0 * std::f64::consts::PI / quad.len() as f64,
        grid: None,
        inside: Vec::new(),
    })
}

/// `Ef` at the nodes of `grid` inside the closed ball `B_R`, restricted to
/// nodes with `mask[i]` when a mask is given. Separable evaluation plane by
/// plane in `x_d`; agrees with [`extend`] to rounding.
pub fn extend_grid(
    f: &FrequencyProfile,
    grid: &Grid,
    r: f64,
    mask: Option<&[bool]>,
) -> Result<FieldSample> {
    let d = f.dim;
    ensure!(
        grid.dim() == d,
        Grid,
        "grid dimension {} for a {d}-dimensional extension",
        grid.dim()
    );
    ensure!(
        (2..=MAX_FIELD_DIM).contains(&d),
        Budget,
        "grid evaluation capped at d <= {MAX_FIELD_DIM}"
    );
    if let Some(m) = mask {
        ensure!(
            m.len() == grid.len(),
            Usage,
            "mask length does not match the grid"
        );
    }
    let inside: Vec<bool> = (0..grid.len())
        .map(|i| norm(&grid.point(i)) <= r + 1e-12 && mask.is_none_or(|m| m[i]))
        .collect();
    let x_max = (0..grid.len())
        .filter(|&i| inside[i])
        .map(|i| norm(&grid.point(i)))
        .fold(0.0, f64::max);
    check_resolution(f.spacing(), x_max)?;

    let nt = grid.shape[d - 1];
    let plane = grid.len() / nt;
    let t_axis = grid.axis(d - 1);
    // weighted sample values and the phase factors along each transverse axis
    let wv: Vec<Complex64> = (0..f.node_count())
        .map(|i| f.values[i] * f.weight(i))
        .collect();
    let basis: Vec<Vec<Complex64>> = (0..d - 1)
        .map(|k| {
            let xs = grid.axis(k);
            let ws = &f.axes[k].nodes;
            xs.iter()
                .flat_map(|x| ws.iter().map(move |w| Complex64::from_polar(1.0, x * w)))
                .collect()
        })
        .collect();
    let w2: Vec<f64> = (0..f.node_count())
        .map(|i| f.node(i).iter().map(|v| v * v).sum())
        .collect();

    let planes: Vec<Option<Vec<Complex64>>> = (0..nt)
        .into_par_iter()
        .map(|it| {
            let needed = (0..plane).any(|j| inside[j * nt + it]);
            if !needed {
                return None;
            }
            let t = t_axis[it];
            let g: Vec<Complex64> = wv
                .iter()
                .zip(&w2)
                .map(|(c, s)| c * Complex64::from_polar(1.0, t * s))
                .collect();
            Some(contract(&g, f, grid, &basis))
        })
        .collect();

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (it, p) in planes.into_iter().enumerate() {
        if let Some(p) = p {
            for j in 0..plane {
                let i = j * nt + it;
                if inside[i] {
                    values[i] = p[j];
                }
            }
        }
    }
    Ok(FieldSample {
        dim: d,
        points: Vec::new(),
        values,
        r,
        spacing: f.spacing(),
        grid: Some(grid.clone()),
        inside,
    })
}

/// Output over the transverse grid axes (row-major) of `Σ_ω basis·g` for one plane.
fn contract(
    g: &[Complex64],
    f: &FrequencyProfile,
    grid: &Grid,
    basis: &[Vec<Complex64>],
) -> Vec<Complex64> {
    let d = f.dim;
    let n: Vec<usize> = f.axes.iter().map(Rule1d::len).collect();
    let m: Vec<usize> = (0..d - 1).map(|k| grid.shape[k]).collect();
    if d == 2 {
        return (0..m[0])
            .map(|a| {
                let row = &basis[0][a * n[0]..(a + 1) * n[0]];
                row.iter().zip(g).map(|(e, v)| e * v).sum()
            })
            .collect();
    }
    // d == 3: contract the second frequency axis, then the first
    let mut t = vec![Complex64::new(0.0, 0.0); n[0] * m[1]];
    for j1 in 0..n[0] {
        let gr = &g[j1 * n[1]..(j1 + 1) * n[1]];
        for b in 0..m[1] {
            let row = &basis[1][b * n[1]..(b + 1) * n[1]];
            t[j1 * m[1] + b] = row.iter().zip(gr).map(|(e, v)| e * v).sum();
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); m[0] * m[1]];
    for a in 0..m[0] {
        let row = &basis[0][a * n[0]..(a + 1) * n[0]];
        for (j1, e) in row.iter().enumerate() {
            let tr = &t[j1 * m[1]..(j1 + 1) * m[1]];
            for b in 0..m[1] {
                out[a * m[1] + b] += e * tr[b];
            }
        }
    }
    out
}

/// `(Σ |Ef|^p H h^d)^{1/p}` over the evaluated nodes of a grid field.
pub fn weighted_norm(field: &FieldSample, h: &SampledWeight, p: f64) -> Result<f64> {
    ensure!(p >= 1.0, Domain, "p = {p} must be at least 1");
    let grid = field
        .grid
        .as_ref()
        .ok_or_else(|| crate::Error::Grid("weighted norms need a grid field".into()))?;
    let hv = h.values_on(grid)?;
    let sum: f64 = (0..grid.len())
        .filter(|&i| field.inside[i])
        .map(|i| field.values[i].norm().powf(p) * hv[i])
        .sum();
    Ok((sum * grid.cell_volume()).powf(1.0 / p))
}

/// Unweighted `L^p` Riemann sum of a grid field.
pub fn lp_norm(field: &FieldSample, p: f64) -> Result<f64> {
    let grid = field
        .grid
        .as_ref()
        .ok_or_else(|| crate::Error::Grid("norms need a grid field".into()))?;
    weighted_norm(field, &SampledWeight::constant(grid.clone(), 1.0)?, p)
}

/// `T(x) = (x'/K + 2 x_d ω₀/K, x_d/K²)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineMap {
    pub k: f64,
    pub omega0: Vec<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        let xd = x[d - 1];
        let mut y: Vec<f64> = (0..d - 1)
            .map(|i| x[i] / self.k + 2.0 * xd * self.omega0[i] / self.k)
            .collect();
        y.push(xd / (self.k * self.k));
        y
    }
}

/// `g(ξ) = K^{-(d-1)/2} f(ω₀ + ξ/K)` and the map `T` with `|Ef(x)| = K^{-(d-1)/2} |Eg(Tx)|`.
///
/// A closed-form `f` is resampled on its own rule; otherwise the sample
/// nodes are carried through the change of variables.
pub fn parabolic_rescale(
    f: &FrequencyProfile,
    omega0: &[f64],
    k: f64,
) -> Result<(FrequencyProfile, AffineMap)> {
    let n = f.dim - 1;
    ensure!(omega0.len() == n, Usage, "ω₀ needs {n} coordinates");
    ensure!(
        k >= 2.0,
        Domain,
        "rescaling factor K = {k} must be at least 2"
    );
    ensure!(
        norm(omega0) + 1.0 / k <= 1.0 + 1e-12,
        Support,
        "B(ω₀, 1/K) leaves the unit ball"
    );
    let map = AffineMap {
        k,
        omega0: omega0.to_vec(),
    };
    let g = match &f.closed {
        Some(p) => {
            let (c, r) = p.support_ball(n);
            let dist = c
                .iter()
                .zip(omega0)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            ensure!(
                dist + r <= 1.0 / k + 1e-12,
                Support,
                "profile support B({c:?}, {r}) is not inside B(ω₀, 1/K)"
            );
            let q = Profile::Rescaled {
                inner: Box::new(p.clone()),
                omega0: omega0.to_vec(),
                k,
            };
            let values = (0..f.node_count()).map(|i| q.eval(&f.node(i))).collect();
            FrequencyProfile {
                dim: f.dim,
                axes: f.axes.clone(),
                values,
                closed: Some(q),
            }
        }
        None => {
            for i in 0..f.node_count() {
                if f.values[i] != Complex64::new(0.0, 0.0) {
                    let w = f.node(i);
                    let dist = w
                        .iter()
                        .zip(omega0)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    ensure!(
                        dist <= 1.0 / k + 1e-12,
                        Support,
                        "sample at {w:?} lies outside B(ω₀, 1/K)"
                    );
                }
            }
            let axes = f
                .axes
                .iter()
                .zip(omega0)
                .map(|(a, o)| Rule1d {
                    nodes: a.nodes.iter().map(|x| k * (x - o)).collect(),
                    weights: a.weights.iter().map(|w| k * w).collect(),
                    spacing: k * a.spacing,
                })
                .collect();
            let s = k.powf(-(n as f64) / 2.0);
            FrequencyProfile {
                dim: f.dim,
                axes,
                values: f.values.iter().map(|v| v * s).collect(),
                closed: None,
            }
        }
    };
    Ok((g, map))
}
