//! Sampled weights, their ball-growth certificates, and weights built from measures.

mod io;
mod recipe;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::fractal::FractalMeasure;
use crate::grid::Grid;

pub use io::{read_grid_file, write_grid_file};
pub use recipe::WeightRecipe;

/// A nonnegative function sampled on the nodes of a uniform grid; zero off the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledWeight {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl SampledWeight {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        ensure!(
            values.len() == grid.len(),
            Usage,
            "{} values for {} grid nodes",
            values.len(),
            grid.len()
        );
        ensure!(
            values.iter().all(|v| v.is_finite() && *v >= 0.0),
            Domain,
            "weight values must be finite and nonnegative"
        );
        Ok(SampledWeight { grid, values })
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        let n = grid.len();
        SampledWeight::new(grid, vec![c; n])
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.point(i)))
            .collect();
        SampledWeight::new(grid, values)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Riemann sum of the weight.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// ∫_{B(c, r)} H by summing every cell whose center lies in the open ball.
    pub fn ball_mass(&self, c: &[f64], r: f64) -> Result<f64> {
        ensure!(
            c.len() == self.dim(),
            Usage,
            "center dimension {} in a {}-dimensional weight",
            c.len(),
            self.dim()
        );
        ensure!(
            self.grid.spacing <= r / 8.0 * (1.0 + 1e-12),
            Resolution,
            "spacing {} too coarse for radius {r} (need h <= r/8)",
            self.grid.spacing
        );
        Ok(self.ball_mass_unchecked(c, r))
    }

    fn ball_mass_unchecked(&self, c: &[f64], r: f64) -> f64 {
        self.grid
            .nodes_in_ball(c, r)
            .iter()
            .map(|&i| self.values[i])
            .sum::<f64>()
            * self.grid.cell_volume()
    }

    /// This weight's values at the nodes of `target`. The grids must share a
    /// lattice, or `target` must refine this lattice by an integer factor
    /// (multilinear interpolation); nodes off this grid get zero.
    pub fn values_on(&self, target: &Grid) -> Result<Vec<f64>> {
        let d = self.dim();
        ensure!(
            target.dim() == d,
            Grid,
            "weight in dimension {d}, target grid in {}",
            target.dim()
        );
        if let Some(off) = self.grid.lattice_offset(target) {
            return Ok((0..target.len())
                .map(|i| {
                    let idx = target.unravel(i);
                    let mut src = Vec::with_capacity(d);
                    for k in 0..d {
                        let j = idx[k] as i64 + off[k];
                        if j < 0 || j >= self.grid.shape[k] as i64 {
                            return 0.0;
                        }
                        src.push(j as usize);
                    }
                    self.values[self.grid.ravel(&src)]
                })
                .collect());
        }
        let ratio = self.grid.spacing / target.spacing;
        let refine = ratio.round();
        ensure!(
            refine >= 2.0 && (ratio - refine).abs() < 1e-9,
            Grid,
            "weight spacing {} is not an integer multiple of field spacing {}",
            self.grid.spacing,
            target.spacing
        );
        for k in 0..d {
            let t = (target.lo[k] - self.grid.lo[k]) / target.spacing;
            ensure!(
                (t - t.round()).abs() < 1e-6,
                Grid,
                "grids are not aligned on axis {k}"
            );
        }
        Ok((0..target.len())
            .map(|i| self.interpolate(&target.point(i)))
            .collect())
    }

    /// Multilinear interpolation of the node values; zero outside the grid.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = Vec::with_capacity(d);
        let mut frac = Vec::with_capacity(d);
        for k in 0..d {
            let t = (x[k] - self.grid.lo[k]) / self.grid.spacing;
            let n = self.grid.shape[k] as f64;
            if t < -1e-9 || t > n - 1.0 + 1e-9 {
                return 0.0;
            }
            let i = t.floor().clamp(0.0, (n - 2.0).max(0.0));
            base.push(i as usize);
            frac.push((t - i).clamp(0.0, 1.0));
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = Vec::with_capacity(d);
            for k in 0..d {
                let up = (corner >> k) & 1 == 1;
                w *= if up { frac[k] } else { 1.0 - frac[k] };
                idx.push(if up {
                    (base[k] + 1).min(self.grid.shape[k] - 1)
                } else {
                    base[k]
                });
            }
            if w != 0.0 {
                acc += w * self.values[self.grid.ravel(&idx)];
            }
        }
        acc
    }

    /// The weight multiplied by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        SampledWeight::new(
            self.grid.clone(),
            self.values.iter().map(|v| v * c).collect(),
        )
    }
}

/// Sampled evidence that `∫_{B(x,r)} H <= C r^α` (or `μ(B(x,r)) <= C r^α`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrostmanCertificate {
    pub alpha: f64,
    pub constant: f64,
    pub radii: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    /// Largest mass / r^α over all samples.
    pub worst_ratio: f64,
    pub worst_center: Vec<f64>,
    pub worst_radius: f64,
    pub samples: usize,
    pub pass: bool,
}

impl FrostmanCertificate {
    pub(crate) fn from_ratios(
        alpha: f64,
        constant: f64,
        radii: &[f64],
        centers: &[Vec<f64>],
        pairs: &[(usize, usize)],
        ratios: &[f64],
    ) -> Self {
        let mut worst = 0usize;
        for (k, r) in ratios.iter().enumerate() {
            if *r > ratios[worst] {
                worst = k;
            }
        }
        let (worst_ratio, worst_center, worst_radius) = match pairs.get(worst) {
            Some(&(i, j)) => (ratios[worst], centers[i].clone(), radii[j]),
            None => (0.0, Vec::new(), 0.0),
        };
        FrostmanCertificate {
            alpha,
            constant,
            radii: radii.to_vec(),
            centers: centers.to_vec(),
            worst_ratio,
            worst_center,
            worst_radius,
            samples: ratios.len(),
            pass: worst_ratio <= constant,
        }
    }
}

/// Checks the ball condition of a sampled weight at every (center, radius) pair.
pub fn verify_weight(
    h: &SampledWeight,
    alpha: f64,
    c: f64,
    radii: &[f64],
    centers: &[Vec<f64>],
) -> Result<FrostmanCertificate> {
    ensure!(
        !radii.is_empty() && !centers.is_empty(),
        Usage,
        "no radii or no centers to test"
    );
    ensure!(
        radii.iter().all(|r| *r >= 1.0),
        Usage,
        "weight certificates use radii r >= 1"
    );
    let rmin = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = radii.iter().cloned().fold(0.0, f64::max);
    ensure!(
        h.grid.spacing <= rmin / 8.0 * (1.0 + 1e-12),
        Resolution,
        "spacing {} too coarse for radius {rmin} (need h <= r/8)",
        h.grid.spacing
    );
    let (lo, hi) = (h.grid.lo.clone(), h.grid.hi());
    for x in centers {
        ensure!(x.len() == h.dim(), Usage, "center dimension mismatch");
        let inside = (0..h.dim()).all(|k| x[k] >= lo[k] - rmax && x[k] <= hi[k] + rmax);
        ensure!(
            inside,
            Usage,
            "center {x:?} is farther than {rmax} from the weight's box"
        );
    }
    let pairs: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|i| (0..radii.len()).map(move |j| (i, j)))
        .collect();
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| h.ball_mass_unchecked(&centers[i], radii[j]) / radii[j].powf(alpha))
        .collect();
    Ok(FrostmanCertificate::from_ratios(
        alpha, c, radii, centers, &pairs, &ratios,
    ))
}

/// Dyadic radii used when none are given.
pub const DEFAULT_RADII: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

/// Lattice centers of spacing `step` over the weight's box, followed by `extra` points.
pub fn default_centers(h: &SampledWeight, step: f64, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (lo, hi) = (h.grid.lo.clone(), h.grid.hi());
    let counts: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| ((b - a) / step).floor() as usize + 1)
        .collect();
    let total: usize = counts.iter().product();
    let mut out = Vec::with_capacity(total + extra.len());
    for flat in 0..total {
        let mut rest = flat;
        let mut p = vec![0.0; lo.len()];
        for k in (0..lo.len()).rev() {
            p[k] = lo[k] + (rest % counts[k]) as f64 * step;
            rest /= counts[k];
        }
        out.push(p);
    }
    out.extend(extra.iter().cloned());
    out
}

/// Γ(n/2) for a positive integer n.
fn gamma_half(n: u32) -> f64 {
    let (mut g, mut x) = if n % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while x + 0.5 < n as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// The profile `c_d a^{-d} (1 - |x/a|²)³` on `|x| < a`: even, C², unit integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub dim: usize,
    pub radius: f64,
}

impl Bump {
    pub fn new(dim: usize, radius: f64) -> Self {
        Bump { dim, radius }
    }

    /// `∫_{B^d} (1 - |x|²)³ dx = 6 π^{d/2} / Γ(d/2 + 4)`.
    pub fn unit_mass(dim: usize) -> f64 {
        6.0 * PI.powf(dim as f64 / 2.0) / gamma_half(dim as u32 + 8)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let u: f64 = x.iter().map(|v| v * v).sum::<f64>() / (self.radius * self.radius);
        if u >= 1.0 {
            return 0.0;
        }
        (1.0 - u).powi(3) / (Bump::unit_mass(self.dim) * self.radius.powi(self.dim as i32))
    }
}

/// Bump radius and sampling spacing for [`weight_from_measure`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpSpec {
    pub radius: f64,
    pub spacing: f64,
}

impl Default for BumpSpec {
    fn default() -> Self {
        BumpSpec {
            radius: 1.0,
            spacing: 0.125,
        }
    }
}

/// `H(x) = R^α Σ_j m_j φ(x - R x_j)` with α the measure's claimed dimension,
/// sampled on the lattice `h·Z^d` over the dilated support plus the bump radius.
pub fn weight_from_measure(mu: &FractalMeasure, r: f64, bump: BumpSpec) -> Result<SampledWeight> {
    ensure!(r >= 1.0, Domain, "dilation R = {r} must be at least 1");
    let (lo, hi) = mu.bounding_box();
    let pad = bump.radius + bump.spacing;
    let lo: Vec<f64> = lo.iter().map(|v| r * v - pad).collect();
    let hi: Vec<f64> = hi.iter().map(|v| r * v + pad).collect();
    let grid = Grid::lattice_box(&lo, &hi, bump.spacing)?;
    weight_from_measure_on(mu, r, bump, grid)
}

/// As [`weight_from_measure`] on a caller-chosen grid, which must contain the support.
pub fn weight_from_measure_on(
    mu: &FractalMeasure,
    r: f64,
    bump: BumpSpec,
    grid: Grid,
) -> Result<SampledWeight> {
    ensure!(r >= 1.0, Domain, "dilation R = {r} must be at least 1");
    ensure!(
        grid.dim() == mu.dim,
        Grid,
        "grid dimension {} for a measure in dimension {}",
        grid.dim(),
        mu.dim
    );
    ensure!(bump.radius > 0.0, Domain, "bump radius must be positive");
    let (mlo, mhi) = mu.bounding_box();
    let (glo, ghi) = (grid.lo.clone(), grid.hi());
    for k in 0..mu.dim {
        let need_lo = r * mlo[k] - bump.radius;
        let need_hi = r * mhi[k] + bump.radius;
        ensure!(
            glo[k] <= need_lo + 1e-9 && ghi[k] >= need_hi - 1e-9,
            Support,
            "grid [{}, {}] on axis {k} misses the support [{need_lo}, {need_hi}]",
            glo[k],
            ghi[k]
        );
    }
    let phi = Bump::new(mu.dim, bump.radius);
    let scale = r.powf(mu.claimed_alpha);
    let mut values = vec![0.0; grid.len()];
    for (a, m) in mu.atoms.chunks_exact(mu.dim).zip(&mu.masses) {
        let y: Vec<f64> = a.iter().map(|v| r * v).collect();
        for i in grid.nodes_in_ball(&y, bump.radius) {
            let p = grid.point(i);
            let diff: Vec<f64> = p.iter().zip(&y).map(|(u, v)| u - v).collect();
            values[i] += scale * m * phi.eval(&diff);
        }
    }
    SampledWeight::new(grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Domination {
    /// ∫ |F|^p H
    pub lhs: f64,
    /// ∫ |F|^p
    pub rhs: f64,
    pub ratio: f64,
    /// Share of the windowed discrete spectrum outside the declared band.
    pub out_of_band: f64,
}

/// Largest out-of-band spectral share accepted as band-limited.
pub const BAND_TOLERANCE: f64 = 1e-3;

/// Compares `∫|F|^p H` with `∫|F|^p` on the weight's grid after checking
/// with a windowed DFT that F's spectrum lies in the ball of radius `band`.
pub fn banded_domination_check(
    f: &(dyn Fn(&[f64]) -> Complex64 + Sync),
    band: f64,
    h: &SampledWeight,
    p: f64,
) -> Result<Domination> {
    ensure!(p >= 1.0, Domain, "exponent p = {p} below 1");
    let grid = &h.grid;
    let samples: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|i| f(&grid.point(i)))
        .collect();
    let out_of_band = spectrum_outside(&samples, grid, band * 1.1);
    ensure!(
        out_of_band <= BAND_TOLERANCE,
        Support,
        "{out_of_band:.3e} of the spectrum lies outside the declared band {band}"
    );
    let dv = grid.cell_volume();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for (s, w) in samples.iter().zip(&h.values) {
        let a = s.norm().powf(p);
        lhs += a * w;
        rhs += a;
    }
    let (lhs, rhs) = (lhs * dv, rhs * dv);
    ensure!(rhs > 0.0, Domain, "F vanishes on the grid");
    Ok(Domination {
        lhs,
        rhs,
        ratio: lhs / rhs,
        out_of_band,
    })
}

/// Fraction of the Hann-windowed DFT energy at angular frequencies above `cut`,
/// with one window bin of slack per axis.
fn spectrum_outside(samples: &[Complex64], grid: &Grid, cut: f64) -> f64 {
    let d = grid.dim();
    let mut data: Vec<Complex64> = samples.to_vec();
    for (i, v) in data.iter_mut().enumerate() {
        let idx = grid.unravel(i);
        let w: f64 = (0..d)
            .map(|k| {
                let n = grid.shape[k] as f64;
                0.5 - 0.5 * (2.0 * PI * (idx[k] as f64 + 0.5) / n).cos()
            })
            .product();
        *v *= w;
    }
    fft_nd(&mut data, &grid.shape);
    let mut total = 0.0;
    let mut outside = 0.0;
    for (i, v) in data.iter().enumerate() {
        let idx = grid.unravel(i);
        let mut xi2 = 0.0;
        let mut slack2 = 0.0;
        for k in 0..d {
            let n = grid.shape[k] as i64;
            let j = idx[k] as i64;
            let signed = if j > n / 2 { j - n } else { j };
            let bin = 2.0 * PI / (n as f64 * grid.spacing);
            xi2 += (signed as f64 * bin).powi(2);
            slack2 += (2.0 * bin).powi(2);
        }
        let e = v.norm_sqr();
        total += e;
        if xi2.sqrt() > cut + slack2.sqrt() {
            outside += e;
        }
    }
    if total > 0.0 {
        outside / total
    } else {
        0.0
    }
}

/// In-place forward DFT along every axis of a row-major array.
pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize]) {
    fft_nd_dir(data, shape, false)
}

pub(crate) fn fft_nd_dir(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let d = shape.len();
    for axis in 0..d {
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let outer = data.len() / (n * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride] = *v;
                }
            }
        }
    }
}

/// `∫_{B(y0, r)} H*` for `H*(y) = K^{d-α} H(T^{-1} y)` with the parabolic map
/// `T(x) = (x'/K + 2 x_d ω₀/K, x_d/K²)`, computed on H's own nodes by the
/// change of variables `dy = K^{-(d+1)} dx`.
pub fn rescaled_ball_mass(
    h: &SampledWeight,
    alpha: f64,
    k: f64,
    omega0: &[f64],
    y0: &[f64],
    r: f64,
) -> Result<f64> {
    let d = h.dim();
    ensure!(
        omega0.len() + 1 == d && y0.len() == d,
        Usage,
        "ω₀ needs d-1 and y₀ d coordinates"
    );
    ensure!(k >= 1.0, Domain, "rescaling factor K = {k} below 1");
    let grid = &h.grid;
    let mut acc = 0.0;
    for (i, v) in h.values.iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        let x = grid.point(i);
        let xd = x[d - 1];
        let mut dist2 = (xd / (k * k) - y0[d - 1]).powi(2);
        for j in 0..d - 1 {
            dist2 += ((x[j] + 2.0 * xd * omega0[j]) / k - y0[j]).powi(2);
        }
        if dist2 <= r * r {
            acc += v;
        }
    }
    Ok(k.powf(d as f64 - alpha) * k.powi(-(d as i32 + 1)) * acc * grid.cell_volume())
}

/// `K` balls in x-space covering `T^{-1}(B(y₀, r))`; each has radius `c_ω K r`
/// with `c_ω = sqrt((1 + 2|ω₀|)² + 1)`.
pub fn rescaling_cover(k: usize, omega0: &[f64], y0: &[f64], r: f64) -> (Vec<Vec<f64>>, f64) {
    let d = y0.len();
    let kf = k as f64;
    let w = omega0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let radius = ((1.0 + 2.0 * w).powi(2) + 1.0).sqrt() * kf * r;
    let centers = (0..k)
        .map(|s| {
            // the preimage spans x_d in K²[y0_d - r, y0_d + r]; slice it into K pieces
            let xd = kf * kf * (y0[d - 1] - r) + (s as f64 + 0.5) * 2.0 * kf * r;
            let mut c: Vec<f64> = (0..d - 1)
                .map(|j| kf * y0[j] - 2.0 * xd * omega0[j])
                .collect();
            c.push(xd);
            c
        })
        .collect();
    (centers, radius)
}
