//! One-dimensional rules and equal-weight sphere rules.

use std::f64::consts::PI;

use crate::error::{ensure, Result};

/// Nodes and weights of an `n`-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// A tensor-ready one-dimensional rule on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Largest gap between consecutive nodes or between an end and a node,
    /// scaled so that the midpoint rule reports its cell size.
    pub spacing: f64,
}

impl Rule1d {
    /// Midpoint rule with `n` equal cells.
    pub fn midpoint(a: f64, b: f64, n: usize) -> Self {
        let h = (b - a) / n as f64;
        Rule1d {
            nodes: (0..n).map(|i| a + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
            spacing: h,
        }
    }

    /// Composite Gauss-Legendre: `panels` equal panels of `order` nodes each.
    /// The reported spacing is the mean node spacing `(b - a) / (panels * order)`.
    pub fn gauss_panels(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (gx, gw) = gauss_legendre(order);
        let width = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * width;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Rule1d {
            nodes,
            weights,
            spacing: width / order as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Composite Gauss-Legendre integral of `f` over [a, b].
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    Rule1d::gauss_panels(a, b, panels, order).integrate(f)
}

/// Equal-weight or trapezoid rule on the unit sphere of R^d (d = 2 or 3).
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub dim: usize,
    /// Flattened unit vectors, `dim` coordinates each.
    pub nodes: Vec<f64>,
    pub weight: f64,
}

impl SphereQuadrature {
    /// Periodic trapezoid rule on the circle.
    pub fn circle(n: usize) -> Self {
        let mut nodes = Vec::with_capacity(2 * n);
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            nodes.push(t.cos());
            nodes.push(t.sin());
        }
        SphereQuadrature {
            dim: 2,
            nodes,
            weight: 2.0 * PI / n as f64,
        }
    }

    /// Fibonacci lattice on S^2 with equal weights.
    pub fn fibonacci(n: usize) -> Self {
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut nodes = Vec::with_capacity(3 * n);
        for k in 0..n {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let t = golden * k as f64;
            nodes.push(r * t.cos());
            nodes.push(r * t.sin());
            nodes.push(z);
        }
        SphereQuadrature {
            dim: 3,
            nodes,
            weight: 4.0 * PI / n as f64,
        }
    }

    pub fn new(dim: usize, n: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::circle(n)),
            3 => Ok(Self::fibonacci(n)),
            _ => Err(crate::Error::Domain(format!(
                "sphere rules exist for d = 2, 3; got {dim}"
            ))),
        }
    }

    /// Smallest node count accepted for frequency radius `r` and support diameter `diam`.
    pub fn min_nodes(r: f64, diam: f64) -> usize {
        64usize.max((8.0 * r * diam).ceil() as usize)
    }

    /// Default rule: the trapezoid rule with a margin over the minimum on the
    /// circle, and about `16 (r diam)^2` Fibonacci points on S^2 since the
    /// equal-weight rule converges only algebraically.
    pub fn auto(dim: usize, r: f64, diam: f64) -> Result<Self> {
        let min = Self::min_nodes(r, diam);
        let n = match dim {
            2 => 2 * min,
            _ => min.max((16.0 * (r * diam).powi(2)).ceil() as usize),
        };
        Self::new(dim, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn check_resolution(&self, r: f64, diam: f64) -> Result<()> {
        let need = Self::min_nodes(r, diam);
        ensure!(
            self.len() >= need,
            Resolution,
            "sphere rule has {} nodes; radius {r} over diameter {diam} needs at least {need}",
            self.len()
        );
        Ok(())
    }
}
