//! Atomic approximations of self-similar measures: Fourier transforms,
//! spherical averages, decay fits, energies and the truncated Mattila integral.

mod kdtree;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::fit::{fit_loglog, geometric};
use crate::quadrature::{Rule1d, SphereQuadrature};
use crate::weights::FrostmanCertificate;

pub use kdtree::KdTree;

/// Largest number of atoms a constructed measure may carry.
pub const MAX_ATOMS: usize = 1 << 22;

/// Product self-similar construction: `b` children of ratio `rho` per axis,
/// `depth` levels, on the first `axes` coordinates; the rest are zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CantorRecipe {
    pub b: usize,
    pub rho: f64,
    pub depth: usize,
    pub axes: usize,
    /// Translation applied after construction.
    pub shift: Vec<f64>,
}

impl CantorRecipe {
    /// Left endpoints of the level-one children in [0, 1].
    fn offsets(&self) -> Vec<f64> {
        (0..self.b)
            .map(|k| k as f64 * (1.0 - self.rho) / (self.b - 1) as f64)
            .collect()
    }

    /// Centers of the level-`depth` intervals of the one-dimensional factor.
    fn line_atoms(&self) -> Vec<f64> {
        let offs = self.offsets();
        let mut pts = vec![0.0];
        let mut scale = 1.0;
        for _ in 0..self.depth {
            pts = pts
                .iter()
                .flat_map(|p| offs.iter().map(move |o| p + scale * o))
                .collect();
            scale *= self.rho;
        }
        pts.iter().map(|p| p + 0.5 * scale).collect()
    }

    /// Fourier transform of the one-dimensional factor before shifting.
    fn line_fourier(&self, xi: f64, offs: &[f64]) -> Complex64 {
        let mut acc = Complex64::from_polar(1.0, -xi * 0.5 * self.rho.powi(self.depth as i32));
        let mut scale = 1.0;
        let inv_b = 1.0 / self.b as f64;
        for _ in 0..self.depth {
            let s: Complex64 = offs
                .iter()
                .map(|o| Complex64::from_polar(1.0, -xi * scale * o))
                .sum();
            acc *= s * inv_b;
            scale *= self.rho;
        }
        acc
    }
}

/// A probability measure with finitely many atoms.
#[derive(Debug, Clone, Serialize)]
pub struct FractalMeasure {
    pub dim: usize,
    /// Flattened atom coordinates, `dim` per atom.
    pub atoms: Vec<f64>,
    pub masses: Vec<f64>,
    pub claimed_alpha: f64,
    pub recipe: Option<CantorRecipe>,
}

impl FractalMeasure {
    pub fn new(dim: usize, atoms: Vec<f64>, masses: Vec<f64>, claimed_alpha: f64) -> Result<Self> {
        ensure!(dim >= 1, Domain, "dimension must be positive");
        ensure!(
            atoms.len() == dim * masses.len(),
            Usage,
            "atom coordinates do not match masses"
        );
        ensure!(!masses.is_empty(), Usage, "measure with no atoms");
        ensure!(
            masses.iter().all(|m| *m > 0.0),
            Domain,
            "atom masses must be positive"
        );
        let total: f64 = masses.iter().sum();
        ensure!(
            (total - 1.0).abs() <= 1e-12,
            Domain,
            "masses sum to {total}, not 1"
        );
        ensure!(claimed_alpha >= 0.0, Domain, "negative claimed dimension");
        Ok(FractalMeasure {
            dim,
            atoms,
            masses,
            claimed_alpha,
            recipe: None,
        })
    }

    pub fn point_mass(dim: usize, at: &[f64]) -> Self {
        assert_eq!(at.len(), dim);
        FractalMeasure {
            dim,
            atoms: at.to_vec(),
            masses: vec![1.0],
            claimed_alpha: 0.0,
            recipe: None,
        }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    /// Side of the smallest construction cell, or zero without a recipe.
    pub fn atom_scale(&self) -> f64 {
        self.recipe
            .as_ref()
            .map_or(0.0, |r| r.rho.powi(r.depth as i32))
    }

    /// Diameter of the atom set's bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for a in self.atoms.chunks_exact(self.dim) {
            for k in 0..self.dim {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(a[k]);
            }
        }
        (lo, hi)
    }

    pub fn translated(&self, v: &[f64]) -> Self {
        assert_eq!(v.len(), self.dim);
        let mut out = self.clone();
        for a in out.atoms.chunks_exact_mut(self.dim) {
            for k in 0..self.dim {
                a[k] += v[k];
            }
        }
        if let Some(r) = out.recipe.as_mut() {
            for k in 0..self.dim {
                r.shift[k] += v[k];
            }
        }
        out
    }

    /// Translate so the construction box (or the atoms' bounding box) is centered at the origin.
    pub fn centered(&self) -> Self {
        let v: Vec<f64> = match &self.recipe {
            Some(r) => (0..self.dim)
                .map(|k| {
                    if k < r.axes {
                        -0.5 - r.shift[k]
                    } else {
                        -r.shift[k]
                    }
                })
                .collect(),
            None => {
                let (lo, hi) = self.bounding_box();
                lo.iter().zip(&hi).map(|(a, b)| -0.5 * (a + b)).collect()
            }
        };
        self.translated(&v)
    }

    /// The same measure in a higher-dimensional space, extra coordinates zero.
    pub fn embedded(&self, dim: usize) -> Result<Self> {
        ensure!(
            dim >= self.dim,
            Domain,
            "cannot embed dimension {} into {dim}",
            self.dim
        );
        let mut atoms = Vec::with_capacity(dim * self.len());
        for a in self.atoms.chunks_exact(self.dim) {
            atoms.extend_from_slice(a);
            atoms.extend(std::iter::repeat(0.0).take(dim - self.dim));
        }
        let recipe = self.recipe.clone().map(|mut r| {
            r.shift.resize(dim, 0.0);
            r
        });
        Ok(FractalMeasure {
            dim,
            atoms,
            masses: self.masses.clone(),
            claimed_alpha: self.claimed_alpha,
            recipe,
        })
    }

    /// μ̂(ξ) = Σ m_j exp(-i ξ·x_j); uses the product formula when the
    /// measure carries a construction recipe.
    pub fn fourier(&self, xi: &[f64]) -> Complex64 {
        match &self.recipe {
            Some(r) => {
                let offs = r.offsets();
                let mut acc = Complex64::from_polar(1.0, -dot(xi, &r.shift));
                for &x in &xi[..r.axes] {
                    acc *= r.line_fourier(x, &offs);
                }
                acc
            }
            None => self.fourier_direct(xi),
        }
    }

    /// Direct atom sum, in atom order.
    pub fn fourier_direct(&self, xi: &[f64]) -> Complex64 {
        self.atoms
            .chunks_exact(self.dim)
            .zip(&self.masses)
            .map(|(a, m)| Complex64::from_polar(*m, -dot(xi, a)))
            .sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Product of `d` one-dimensional level-`n` approximations with `b` children
/// of ratio `rho`, uniform masses `b^{-dn}`, atoms at the level-`n` cell centers in [0, 1]^d.
pub fn cantor_measure(d: usize, b: usize, rho: f64, n: usize) -> Result<FractalMeasure> {
    ensure!(d >= 1, Domain, "dimension must be positive");
    ensure!(b >= 2, Domain, "need at least two children, got {b}");
    ensure!(
        rho > 0.0 && rho < 1.0,
        Domain,
        "contraction ratio {rho} outside (0, 1)"
    );
    ensure!(
        b as f64 * rho <= 1.0 + 1e-12,
        Domain,
        "children overlap: b·rho = {} > 1",
        b as f64 * rho
    );
    ensure!(n >= 1, Domain, "depth must be at least 1");
    let count = (b as f64).powf((d * n) as f64);
    ensure!(
        count <= MAX_ATOMS as f64,
        Budget,
        "{b}^({d}·{n}) atoms exceed the cap {MAX_ATOMS}"
    );
    let recipe = CantorRecipe {
        b,
        rho,
        depth: n,
        axes: d,
        shift: vec![0.0; d],
    };
    let line = recipe.line_atoms();
    let total = line.len().pow(d as u32);
    let mut atoms = Vec::with_capacity(total * d);
    for idx in 0..total {
        let mut rest = idx;
        let mut pt = vec![0.0; d];
        for k in (0..d).rev() {
            pt[k] = line[rest % line.len()];
            rest /= line.len();
        }
        atoms.extend(pt);
    }
    let claimed_alpha = d as f64 * (b as f64).ln() / (1.0 / rho).ln();
    Ok(FractalMeasure {
        dim: d,
        atoms,
        masses: vec![1.0 / total as f64; total],
        claimed_alpha,
        recipe: Some(recipe),
    })
}

/// Empirical Frostman constant: the largest `μ(B(x, r)) / r^claimed_alpha` over the samples.
pub fn frostman_check(
    mu: &FractalMeasure,
    radii: &[f64],
    centers: &[Vec<f64>],
    c: f64,
) -> Result<FrostmanCertificate> {
    ensure!(
        radii.iter().all(|r| *r > 0.0),
        Domain,
        "radii must be positive"
    );
    ensure!(
        centers.iter().all(|x| x.len() == mu.dim),
        Usage,
        "center dimension mismatch"
    );
    let tree = KdTree::new(mu);
    let alpha = mu.claimed_alpha;
    let pairs: Vec<(usize, usize)> = (0..centers.len())
        .flat_map(|i| (0..radii.len()).map(move |j| (i, j)))
        .collect();
    let ratios: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| tree.ball_mass(&centers[i], radii[j]) / radii[j].powf(alpha))
        .collect();
    Ok(FrostmanCertificate::from_ratios(
        alpha, c, radii, centers, &pairs, &ratios,
    ))
}

/// Every `stride`-th atom, as test centers.
pub fn atom_centers(mu: &FractalMeasure, max_count: usize) -> Vec<Vec<f64>> {
    let stride = mu.len().div_ceil(max_count.max(1)).max(1);
    (0..mu.len())
        .step_by(stride)
        .map(|i| mu.atom(i).to_vec())
        .collect()
}

/// Radii `scale·ratio^k` for `k = 0..` down to (and including) the atom scale.
pub fn radii_to_atom_scale(mu: &FractalMeasure, per_level: usize) -> Vec<f64> {
    let Some(r) = &mu.recipe else {
        return vec![1.0];
    };
    let floor = mu.atom_scale() * (1.0 - 1e-9);
    let factor = r.rho.powf(1.0 / per_level.max(1) as f64);
    let mut out = Vec::new();
    let mut x = 1.0;
    while x >= floor {
        out.push(x);
        x *= factor;
    }
    out
}

/// Quadrature estimate of ∫_{S^{d-1}} |μ̂(Rσ)|² dσ (unnormalized surface measure).
pub fn spherical_average(mu: &FractalMeasure, r: f64, quad: &SphereQuadrature) -> Result<f64> {
    ensure!(r > 0.0, Domain, "radius must be positive");
    ensure!(
        quad.dim == mu.dim,
        Usage,
        "sphere rule in dimension {} for a measure in dimension {}",
        quad.dim,
        mu.dim
    );
    quad.check_resolution(r, mu.diameter())?;
    let vals: Vec<f64> = (0..quad.len())
        .into_par_iter()
        .map(|i| {
            let xi: Vec<f64> = quad.node(i).iter().map(|s| r * s).collect();
            mu.fourier(&xi).norm_sqr()
        })
        .collect();
    Ok(quad.weight * vals.iter().sum::<f64>())
}

fn auto_quad(mu: &FractalMeasure, r: f64) -> Result<SphereQuadrature> {
    SphereQuadrature::auto(mu.dim, r, mu.diameter().max(1e-3))
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub r_values: Vec<f64>,
    pub averages: Vec<f64>,
    pub fitted_beta: f64,
    pub stderr: f64,
}

/// Largest frequency radius at which the atomic approximation is trusted.
pub fn max_valid_radius(mu: &FractalMeasure) -> f64 {
    let s = mu.atom_scale();
    if s > 0.0 {
        0.5 / s
    } else {
        f64::INFINITY
    }
}

/// Least-squares decay exponent of the spherical averages over a geometric R grid.
/// `nodes` fixes the sphere rule size; `None` picks the default rule per R.
pub fn decay_fit(
    mu: &FractalMeasure,
    r_min: f64,
    r_max: f64,
    count: usize,
    nodes: Option<usize>,
) -> Result<DecayFit> {
    ensure!(
        count >= 4,
        Usage,
        "decay fit needs at least 4 radii, got {count}"
    );
    ensure!(r_min > 0.0 && r_max > r_min, Usage, "need 0 < rmin < rmax");
    let limit = max_valid_radius(mu);
    ensure!(
        r_max <= limit,
        Resolution,
        "rmax = {r_max} exceeds the valid range {limit} of a depth-{} approximation",
        mu.recipe.as_ref().map_or(0, |r| r.depth)
    );
    let r_values = geometric(r_min, r_max, count);
    let averages: Vec<f64> = r_values
        .par_iter()
        .map(|&r| {
            let q = match nodes {
                Some(n) => SphereQuadrature::new(mu.dim, n)?,
                None => auto_quad(mu, r)?,
            };
            spherical_average(mu, r, &q)
        })
        .collect::<Result<_>>()?;
    ensure!(
        averages.iter().all(|a| *a > 0.0),
        Domain,
        "a spherical average vanished"
    );
    let f = fit_loglog(&r_values, &averages)?;
    Ok(DecayFit {
        r_values,
        averages,
        fitted_beta: -f.slope,
        stderr: f.stderr,
    })
}

/// Off-diagonal α-energy Σ_{i≠j} m_i m_j |x_i - x_j|^{-α}.
pub fn energy(mu: &FractalMeasure, alpha: f64) -> Result<f64> {
    ensure!(alpha > 0.0, Domain, "energy exponent must be positive");
    let d = mu.dim;
    let half = -0.5 * alpha;
    let rows: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let xi = mu.atom(i);
            let mut s = 0.0;
            for j in 0..mu.len() {
                if j == i {
                    continue;
                }
                let xj = &mu.atoms[j * d..(j + 1) * d];
                let r2: f64 = xi.iter().zip(xj).map(|(a, b)| (a - b).powi(2)).sum();
                s += mu.masses[j] * r2.powf(half);
            }
            mu.masses[i] * s
        })
        .collect();
    Ok(rows.iter().sum())
}

/// ∫_1^{R_max} (spherical average)² R^{d-1} dR by composite Gauss-Legendre.
pub fn mattila_integral(mu: &FractalMeasure, r_max: f64) -> Result<f64> {
    Ok(*mattila_cumulative(mu, &[r_max])?.last().unwrap())
}

/// The truncated Mattila integral at each of the increasing cutoffs `r_maxes`, in one sweep.
pub fn mattila_cumulative(mu: &FractalMeasure, r_maxes: &[f64]) -> Result<Vec<f64>> {
    ensure!(!r_maxes.is_empty(), Usage, "no cutoffs given");
    ensure!(r_maxes[0] >= 1.0, Usage, "cutoffs must be at least 1");
    ensure!(
        r_maxes.windows(2).all(|w| w[0] <= w[1]),
        Usage,
        "cutoffs must increase"
    );
    let limit = max_valid_radius(mu);
    let last = *r_maxes.last().unwrap();
    ensure!(
        last <= limit,
        Resolution,
        "cutoff {last} exceeds the valid range {limit}"
    );
    let diam = mu.diameter().max(1e-3);
    let d = mu.dim as i32;
    let mut out = Vec::with_capacity(r_maxes.len());
    let mut lo = 1.0;
    let mut total = 0.0;
    for &hi in r_maxes {
        if hi > lo {
            // the integrand oscillates on the scale 1/diam in R
            let panels = (((hi - lo) * diam / 2.0).ceil() as usize).max(1);
            let rule = Rule1d::gauss_panels(lo, hi, panels, 8);
            let vals: Vec<f64> = rule
                .nodes
                .par_iter()
                .map(|&r| {
                    let q = auto_quad(mu, r)?;
                    Ok(spherical_average(mu, r, &q)?.powi(2) * r.powi(d - 1))
                })
                .collect::<Result<_>>()?;
            total += vals
                .iter()
                .zip(&rule.weights)
                .map(|(v, w)| v * w)
                .sum::<f64>();
            lo = hi;
        }
        out.push(total);
    }
    Ok(out)
}

impl FractalMeasure {
    /// Parses `cantor:b,rho,n` (rho may be a fraction) or `point`.
    pub fn from_recipe(d: usize, spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "point" {
            return Ok(FractalMeasure::point_mass(d, &vec![0.0; d]));
        }
        let body = spec
            .strip_prefix("cantor:")
            .ok_or_else(|| Error::Parse(format!("unknown measure recipe {spec:?}")))?;
        let parts: Vec<&str> = body.split(',').map(str::trim).collect();
        ensure!(
            parts.len() == 3,
            Parse,
            "cantor recipe needs b,rho,n; got {body:?}"
        );
        let b: usize = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad b {:?}", parts[0])))?;
        let rho = parse_real(parts[1])?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad depth {:?}", parts[2])))?;
        cantor_measure(d, b, rho, n)
    }
}

/// A real number written as a decimal or a fraction `p/q`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
        let q: f64 = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
        ensure!(q != 0.0, Parse, "zero denominator in {s:?}");
        return Ok(p / q);
    }
    s.parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))
}
