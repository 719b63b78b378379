use rayon::prelude::*;
use serde::Serialize;

use super::{Decomposition, Polynomial, Tube};
use crate::error::{ensure, Error, Result};
use crate::rng::SplitMix64;

/// Gradient Gram determinants below this mark a singular point.
pub const SINGULAR_GRAM: f64 = 1e-9;

/// The common zero set of `P_1, ..., P_c` in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct Variety {
    pub dim: usize,
    pub polys: Vec<Polynomial>,
    pub degree: u32,
    grads: Vec<Vec<Polynomial>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves the small symmetric system `A x = b` by Gaussian elimination with pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn det(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut out = 1.0;
    for col in 0..n {
        let Some(piv) = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
        else {
            return 0.0;
        };
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            out = -out;
        }
        out *= a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    out
}

impl Variety {
    pub fn new(dim: usize, polys: Vec<Polynomial>) -> Result<Self> {
        ensure!(
            !polys.is_empty() && polys.len() < dim,
            Domain,
            "need 1 to d-1 = {} polynomials",
            dim - 1
        );
        ensure!(
            polys.iter().all(|p| p.nvars == dim),
            Usage,
            "polynomials must be in {dim} variables"
        );
        ensure!(
            polys.iter().all(|p| p.degree() >= 1),
            Domain,
            "constant polynomials do not cut out a variety"
        );
        let degree = polys.iter().map(Polynomial::degree).max().unwrap_or(0);
        let grads = polys.iter().map(Polynomial::gradient).collect();
        Ok(Variety {
            dim,
            polys,
            degree,
            grads,
        })
    }

    /// Polynomials separated by `;`.
    pub fn parse(dim: usize, s: &str) -> Result<Self> {
        let polys = s
            .split(';')
            .map(|t| Polynomial::parse(dim, t))
            .collect::<Result<Vec<_>>>()?;
        Variety::new(dim, polys)
    }

    pub fn codim(&self) -> usize {
        self.polys.len()
    }

    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.polys.iter().map(|p| p.eval(x)).collect()
    }

    pub fn jacobian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.grads
            .iter()
            .map(|g| g.iter().map(|p| p.eval(x)).collect())
            .collect()
    }

    /// `det(J Jᵀ) = |∇P_1 ∧ ... ∧ ∇P_c|²`.
    pub fn gram_det(&self, x: &[f64]) -> f64 {
        let j = self.jacobian(x);
        det(j
            .iter()
            .map(|a| j.iter().map(|b| dot(a, b)).collect())
            .collect())
    }

    /// Gauss-Newton descent with minimal-norm steps from `x` onto the zero set.
    pub fn project(&self, x: &[f64], max_iter: usize) -> Option<Vec<f64>> {
        let mut z = x.to_vec();
        for _ in 0..max_iter {
            let v = self.values(&z);
            let j = self.jacobian(&z);
            let gram: Vec<Vec<f64>> = j
                .iter()
                .map(|a| j.iter().map(|b| dot(a, b)).collect())
                .collect();
            let scale = 1.0 + norm(&z);
            if norm(&v) == 0.0 {
                return Some(z);
            }
            let a = solve(gram, v)?;
            let step: Vec<f64> = (0..self.dim)
                .map(|k| j.iter().zip(&a).map(|(row, c)| row[k] * c).sum())
                .collect();
            for k in 0..self.dim {
                z[k] -= step[k];
            }
            if !z.iter().all(|t| t.is_finite()) {
                return None;
            }
            if norm(&step) <= 1e-12 * scale {
                return Some(z);
            }
        }
        // accept a slow finish if the residual is at rounding level
        let v = self.values(&z);
        let g = self.jacobian(&z);
        let gn = g.iter().map(|r| norm(r)).fold(0.0, f64::max);
        (gn > 0.0 && norm(&v) / gn <= 1e-9 * (1.0 + norm(&z))).then_some(z)
    }

    /// Angle between the unit vector `g` and the tangent space at `z`.
    pub fn tangent_angle(&self, z: &[f64], g: &[f64]) -> Option<f64> {
        let j = self.jacobian(z);
        let gram: Vec<Vec<f64>> = j
            .iter()
            .map(|a| j.iter().map(|b| dot(a, b)).collect())
            .collect();
        let rhs: Vec<f64> = j.iter().map(|row| dot(row, g)).collect();
        let a = solve(gram, rhs.clone())?;
        let normal2: f64 = a.iter().zip(&rhs).map(|(x, y)| x * y).sum::<f64>().max(0.0);
        Some(normal2.sqrt().min(1.0).asin())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Tangent,
    NotTangent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TangencyOptions {
    /// Points on the core line.
    pub line_samples: usize,
    /// Extra points per core sample in the neighborhood of the tube.
    pub offset_samples: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for TangencyOptions {
    fn default() -> Self {
        TangencyOptions {
            line_samples: 33,
            offset_samples: 4,
            max_iter: 100,
            seed: 0,
        }
    }
}

/// A sampled tangency verdict; "any point" conditions are checked on samples only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangencyReport {
    pub verdict: Verdict,
    pub max_distance: f64,
    pub max_angle: f64,
    pub distance_bound: f64,
    pub angle_bound: f64,
    pub core_samples: usize,
    pub zero_samples: usize,
    pub singular_skipped: usize,
    pub failures: usize,
    pub sampled: bool,
}

/// Random unit vector orthogonal to the unit vector `g`.
fn orthogonal_unit(g: &[f64], rng: &mut SplitMix64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..g.len()).map(|_| rng.normal()).collect();
        let c = dot(&v, g);
        let u: Vec<f64> = v.iter().zip(g).map(|(a, b)| a - c * b).collect();
        let n = norm(&u);
        if n > 1e-6 {
            return u.iter().map(|x| x / n).collect();
        }
    }
}

/// Parameter range `[t0, t1]` of the core line inside `B_R`.
fn core_range(tube: &Tube) -> Option<(f64, f64)> {
    // |p + t v|² = R² with p = core(0), v = core(1) - core(0)
    let p = tube.core(0.0);
    let v: Vec<f64> = tube.core(1.0).iter().zip(&p).map(|(a, b)| a - b).collect();
    let (a, b, c) = (
        dot(&v, &v),
        2.0 * dot(&p, &v),
        dot(&p, &p) - tube.length * tube.length,
    );
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = disc.sqrt();
    Some(((-b - q) / (2.0 * a), (-b + q) / (2.0 * a)))
}

/// Distance from `z` to the core segment inside `B_R`.
fn segment_distance(tube: &Tube, range: (f64, f64), z: &[f64]) -> f64 {
    let p = tube.core(0.0);
    let v: Vec<f64> = tube.core(1.0).iter().zip(&p).map(|(a, b)| a - b).collect();
    let diff: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
    let t = (dot(&diff, &v) / dot(&v, &v)).clamp(range.0, range.1);
    norm(
        &tube
            .core(t)
            .iter()
            .zip(z)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>(),
    )
}

/// Whether the tube lies in `N_{E R^{1/2}} Z ∩ B_R` with direction within
/// `E R^{-1/2}` of `T_z Z` at sampled nonsingular zeros `z ∈ 2B_R` near the
/// tube. A zero counts as near when it lies within `2E R^{1/2} + R^{1/2+δ}`
/// of the core segment in `B_R`, which contains the `2E R^{1/2}`
/// neighborhood of the tube.
pub fn tangency_test(
    tube: &Tube,
    z: &Variety,
    e: f64,
    opts: TangencyOptions,
) -> Result<TangencyReport> {
    let d = z.dim;
    ensure!(
        tube.direction.len() == d,
        Usage,
        "tube in dimension {}, variety in {d}",
        tube.direction.len()
    );
    ensure!(e > 0.0, Domain, "E must be positive");
    ensure!(
        opts.line_samples >= 2,
        Usage,
        "need at least two core samples"
    );
    let r = tube.length;
    let dist_bound = e * r.sqrt();
    let angle_bound = e / r.sqrt();
    let mut rng = SplitMix64::new(opts.seed);
    let mut report = TangencyReport {
        verdict: Verdict::Inconclusive,
        max_distance: 0.0,
        max_angle: 0.0,
        distance_bound: dist_bound,
        angle_bound,
        core_samples: 0,
        zero_samples: 0,
        singular_skipped: 0,
        failures: 0,
        sampled: true,
    };
    let Some(range) = core_range(tube) else {
        return Ok(report);
    };
    let reach = 2.0 * dist_bound + tube.radius;
    let check_zero = |zz: &[f64], report: &mut TangencyReport| {
        if segment_distance(tube, range, zz) > reach * (1.0 + 1e-9) || norm(zz) > 2.0 * r {
            return;
        }
        if z.gram_det(zz) < SINGULAR_GRAM {
            report.singular_skipped += 1;
            return;
        }
        if let Some(a) = z.tangent_angle(zz, &tube.direction) {
            report.zero_samples += 1;
            report.max_angle = report.max_angle.max(a);
        }
    };
    for i in 0..opts.line_samples {
        let t = range.0 + (range.1 - range.0) * i as f64 / (opts.line_samples - 1) as f64;
        let x = tube.core(t);
        report.core_samples += 1;
        match z.project(&x, opts.max_iter) {
            Some(zz) => {
                let dist = norm(&zz.iter().zip(&x).map(|(a, b)| a - b).collect::<Vec<_>>());
                report.max_distance = report.max_distance.max(dist);
                check_zero(&zz, &mut report);
            }
            None => report.failures += 1,
        }
        for _ in 0..opts.offset_samples {
            let u = orthogonal_unit(&tube.direction, &mut rng);
            let rho = rng.uniform(0.0, reach);
            let y: Vec<f64> = x.iter().zip(&u).map(|(a, b)| a + rho * b).collect();
            if let Some(zz) = z.project(&y, opts.max_iter) {
                check_zero(&zz, &mut report);
            }
        }
    }
    if report.core_samples == 0 {
        return Ok(report);
    }
    if report.zero_samples == 0 && report.singular_skipped > 0 {
        return Err(Error::Domain(
            "no nonsingular zero found near the tube; transversality witness fails".into(),
        ));
    }
    report.verdict = if report.failures > 0 {
        Verdict::Inconclusive
    } else if report.max_distance <= dist_bound && report.max_angle <= angle_bound {
        Verdict::Tangent
    } else {
        Verdict::NotTangent
    };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    /// `(Σ ‖f_T‖²)^{1/2}` over tangent, non-tangent, and inconclusive tiles.
    pub mass_in: f64,
    pub mass_out: f64,
    pub mass_inconclusive: f64,
    pub tangent: usize,
    pub not_tangent: usize,
    pub inconclusive: usize,
    pub verdicts: Vec<Verdict>,
}

/// Splits the pieces by their tubes' tangency to `Z`.
pub fn concentration_test(
    dec: &Decomposition,
    z: &Variety,
    e: f64,
    opts: TangencyOptions,
) -> Result<ConcentrationReport> {
    let verdicts: Vec<Verdict> = dec
        .pieces
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let o = TangencyOptions {
                seed: crate::rng::mix(opts.seed ^ crate::rng::mix(i as u64)),
                ..opts
            };
            tangency_test(&Tube::new(p.tile.clone()), z, e, o).map(|r| r.verdict)
        })
        .collect::<Result<_>>()?;
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    for (p, v) in dec.pieces.iter().zip(&verdicts) {
        let k = match v {
            Verdict::Tangent => 0,
            Verdict::NotTangent => 1,
            Verdict::Inconclusive => 2,
        };
        sums[k] += p.mass * p.mass;
        counts[k] += 1;
    }
    Ok(ConcentrationReport {
        mass_in: sums[0].sqrt(),
        mass_out: sums[1].sqrt(),
        mass_inconclusive: sums[2].sqrt(),
        tangent: counts[0],
        not_tangent: counts[1],
        inconclusive: counts[2],
        verdicts,
    })
}
