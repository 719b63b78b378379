use num_complex::Complex64;
use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::quadrature::Rule1d;
use crate::rng::SplitMix64;

/// Closed-form frequency profiles on B^{d-1}; every profile vanishes outside the unit ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Profile {
    Constant(f64),
    /// `exp(-1/(1 - |ω-c|²/a²))`, C^∞ with support `B(c, a)`.
    Bump {
        center: Vec<f64>,
        radius: f64,
    },
    Gaussian {
        center: Vec<f64>,
        width: f64,
    },
    CapIndicator {
        center: Vec<f64>,
        radius: f64,
    },
    /// `e^{i v·ω} f(ω)`
    Modulated {
        inner: Box<Profile>,
        v: Vec<f64>,
    },
    /// `K^{-(d-1)/2} f(ω₀ + ξ/K)`
    Rescaled {
        inner: Box<Profile>,
        omega0: Vec<f64>,
        k: f64,
    },
    /// Sum of Gaussian bumps with complex coefficients.
    Sum(Vec<(Complex64, Profile)>),
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

impl Profile {
    pub fn eval(&self, w: &[f64]) -> Complex64 {
        if norm2(w) > 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.eval_raw(w)
    }

    fn eval_raw(&self, w: &[f64]) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        match self {
            Profile::Constant(c) => Complex64::new(*c, 0.0),
            Profile::Bump { center, radius } => {
                let u = dist2(w, center) / (radius * radius);
                if u >= 1.0 {
                    zero
                } else {
                    Complex64::new((-1.0 / (1.0 - u)).exp(), 0.0)
                }
            }
            Profile::Gaussian { center, width } => {
                Complex64::new((-dist2(w, center) / (2.0 * width * width)).exp(), 0.0)
            }
            Profile::CapIndicator { center, radius } => {
                if dist2(w, center) <= radius * radius {
                    Complex64::new(1.0, 0.0)
                } else {
                    zero
                }
            }
            Profile::Modulated { inner, v } => {
                let phase: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                inner.eval(w) * Complex64::from_polar(1.0, phase)
            }
            Profile::Rescaled { inner, omega0, k } => {
                let arg: Vec<f64> = omega0.iter().zip(w).map(|(o, x)| o + x / k).collect();
                inner.eval(&arg) * k.powf(-(w.len() as f64) / 2.0)
            }
            Profile::Sum(terms) => terms.iter().map(|(c, p)| c * p.eval(w)).sum(),
        }
    }

    /// A ball containing the support, if smaller than the unit ball.
    pub fn support_ball(&self, dim: usize) -> (Vec<f64>, f64) {
        let unit = (vec![0.0; dim], 1.0);
        match self {
            Profile::Bump { center, radius } | Profile::CapIndicator { center, radius } => {
                (center.clone(), *radius)
            }
            Profile::Modulated { inner, .. } => inner.support_ball(dim),
            Profile::Rescaled { inner, omega0, k } => {
                let (c, r) = inner.support_ball(dim);
                (
                    c.iter().zip(omega0).map(|(a, o)| k * (a - o)).collect(),
                    k * r,
                )
            }
            _ => unit,
        }
    }

    /// A smooth random profile: `terms` Gaussians of width 0.15 with centers
    /// in `B(0, 0.7)` and standard complex normal coefficients.
    pub fn random(dim: usize, seed: u64, terms: usize) -> Self {
        let mut g = SplitMix64::new(seed);
        let parts = (0..terms)
            .map(|_| {
                let c = g.in_ball(dim, 0.7);
                let z = Complex64::new(g.normal(), g.normal());
                (
                    z,
                    Profile::Gaussian {
                        center: c,
                        width: 0.15,
                    },
                )
            })
            .collect();
        Profile::Sum(parts)
    }

    /// Parses, for ambient dimension `dim`, `one`, `bump:c1[,c2],a`, `gauss:c1[,c2],w`, `cap:c1[,c2],a`, `random:seed`.
    pub fn parse(dim: usize, s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unknown profile recipe {s:?}"));
        if s == "one" || s == "constant" {
            return Ok(Profile::Constant(1.0));
        }
        let (kind, body) = s.split_once(':').ok_or_else(bad)?;
        if kind == "random" {
            let seed: u64 = body.trim().parse().map_err(|_| bad())?;
            return Ok(Profile::random(dim - 1, seed, 6));
        }
        let nums: Vec<f64> = body
            .split(',')
            .map(|t| crate::fractal::parse_real(t))
            .collect::<Result<_>>()?;
        ensure!(
            nums.len() == dim,
            Parse,
            "{kind} recipe needs {} center coordinates and a radius",
            dim - 1
        );
        let center = nums[..dim - 1].to_vec();
        let r = nums[dim - 1];
        ensure!(r > 0.0, Parse, "profile radius must be positive");
        match kind {
            "bump" => Ok(Profile::Bump { center, radius: r }),
            "gauss" => Ok(Profile::Gaussian { center, width: r }),
            "cap" => Ok(Profile::CapIndicator { center, radius: r }),
            _ => Err(bad()),
        }
    }
}

/// A frequency function sampled on a tensor rule over a box in R^{d-1}.
#[derive(Debug, Clone)]
pub struct FrequencyProfile {
    /// Ambient dimension d of the extension; samples live in R^{d-1}.
    pub dim: usize,
    pub axes: Vec<Rule1d>,
    /// Row-major over the axes, last axis fastest.
    pub values: Vec<Complex64>,
    pub closed: Option<Profile>,
}

/// Tensor rule choices over [-1, 1] per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RuleSpec {
    Midpoint { cells: usize },
    Gauss { panels: usize, order: usize },
}

impl RuleSpec {
    /// Gauss-Legendre panels of order 8 with mean spacing at most `1/(4 x_max)`.
    pub fn for_radius(x_max: f64) -> Self {
        let order = 8;
        let panels = ((8.0 * x_max.max(1.0) / order as f64).ceil() as usize).max(2);
        RuleSpec::Gauss { panels, order }
    }

    /// Midpoint cells at most `1/(4 x_max)` wide, an even count.
    pub fn midpoint_for_radius(x_max: f64) -> Self {
        let n = (8.0 * x_max.max(1.0)).ceil() as usize;
        RuleSpec::Midpoint { cells: n + n % 2 }
    }

    pub fn rule(&self, a: f64, b: f64) -> Rule1d {
        match *self {
            RuleSpec::Midpoint { cells } => Rule1d::midpoint(a, b, cells),
            RuleSpec::Gauss { panels, order } => Rule1d::gauss_panels(a, b, panels, order),
        }
    }
}

impl FrequencyProfile {
    /// Samples a closed form on `spec` over [-1, 1]^{d-1}.
    pub fn sample(profile: &Profile, dim: usize, spec: RuleSpec) -> Result<Self> {
        ensure!(
            (2..=4).contains(&dim),
            Domain,
            "extension supported for d = 2..4, got {dim}"
        );
        let axes = vec![spec.rule(-1.0, 1.0); dim - 1];
        let mut fp = FrequencyProfile {
            dim,
            axes,
            values: Vec::new(),
            closed: Some(profile.clone()),
        };
        fp.values = (0..fp.node_count())
            .map(|i| profile.eval(&fp.node(i)))
            .collect();
        Ok(fp)
    }

    /// Samples given directly on tensor axes; they must vanish outside the unit ball.
    pub fn from_samples(dim: usize, axes: Vec<Rule1d>, values: Vec<Complex64>) -> Result<Self> {
        ensure!(
            axes.len() + 1 == dim,
            Usage,
            "need d-1 = {} axes, got {}",
            dim - 1,
            axes.len()
        );
        let fp = FrequencyProfile {
            dim,
            axes,
            values,
            closed: None,
        };
        ensure!(
            fp.values.len() == fp.node_count(),
            Usage,
            "sample count does not match the axes"
        );
        for i in 0..fp.node_count() {
            if fp.values[i] != Complex64::new(0.0, 0.0) {
                ensure!(
                    norm2(&fp.node(i)) <= 1.0 + 1e-12,
                    Support,
                    "sample outside the unit ball at {:?}",
                    fp.node(i)
                );
            }
        }
        Ok(fp)
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            idx[k] = flat % self.axes[k].len();
            flat /= self.axes[k].len();
        }
        idx
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.index(flat)
            .iter()
            .enumerate()
            .map(|(k, i)| self.axes[k].nodes[*i])
            .collect()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.index(flat)
            .iter()
            .enumerate()
            .map(|(k, i)| self.axes[k].weights[*i])
            .product()
    }

    /// Largest per-axis node spacing.
    pub fn spacing(&self) -> f64 {
        self.axes.iter().map(|a| a.spacing).fold(0.0, f64::max)
    }

    pub fn integral(&self) -> Complex64 {
        (0..self.node_count())
            .map(|i| self.values[i] * self.weight(i))
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        (0..self.node_count())
            .map(|i| self.values[i].norm_sqr() * self.weight(i))
            .sum::<f64>()
            .sqrt()
    }

    /// `a·self + b·other` on identical nodes.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        ensure!(
            self.axes == other.axes,
            Grid,
            "profiles sampled on different rules"
        );
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(FrequencyProfile {
            dim: self.dim,
            axes: self.axes.clone(),
            values,
            closed: None,
        })
    }

    /// Nonzero samples as (node, weight·value) pairs.
    pub(crate) fn weighted_nodes(&self) -> Vec<(Vec<f64>, Complex64)> {
        (0..self.node_count())
            .filter(|&i| self.values[i] != Complex64::new(0.0, 0.0))
            .map(|i| (self.node(i), self.values[i] * self.weight(i)))
            .collect()
    }
}
