use serde::Serialize;

use super::{weight_from_measure, BumpSpec, SampledWeight};
use crate::error::{ensure, Error, Result};
use crate::fractal::{cantor_measure, parse_real, MAX_ATOMS};
use crate::grid::Grid;

/// Named weight families for scaling experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum WeightRecipe {
    /// `H ≡ 1`.
    Uniform,
    /// Dilate of the centered uniform measure on the unit square of the
    /// hyperplane `x_d = 0` (`b = 2`, `ρ = 1/2` per axis), α = d - 1.
    PlaneCantor,
    /// Dilate of the centered `d`-fold product Cantor measure.
    Cantor { b: usize, rho: f64 },
}

impl WeightRecipe {
    /// Parses `uniform`, `plane-cantor`, or `cantor:b,rho`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "uniform" | "one" => return Ok(WeightRecipe::Uniform),
            "plane-cantor" => return Ok(WeightRecipe::PlaneCantor),
            _ => {}
        }
        if let Some(body) = s.strip_prefix("cantor:") {
            let parts: Vec<&str> = body.split(',').collect();
            ensure!(parts.len() == 2, Parse, "cantor weight recipe needs b,rho");
            let b = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad b in {s:?}")))?;
            return Ok(WeightRecipe::Cantor {
                b,
                rho: parse_real(parts[1])?,
            });
        }
        Err(Error::Parse(format!("unknown weight recipe {s:?}")))
    }

    pub fn alpha(&self, d: usize) -> f64 {
        match self {
            WeightRecipe::Uniform => d as f64,
            WeightRecipe::PlaneCantor => (d - 1) as f64,
            WeightRecipe::Cantor { b, rho } => d as f64 * (*b as f64).ln() / (1.0 / rho).ln(),
        }
    }

    /// Samples the weight at scale `R` on the lattice `h·Z^d`: over `[-R, R]^d`
    /// for the uniform weight, over the dilated support plus the bump radius
    /// otherwise. Measure depths are the smallest with atom gaps `R ρ^n <= h`.
    pub fn build(&self, d: usize, r: f64, h: f64) -> Result<SampledWeight> {
        let (axes, b, rho) = match self {
            WeightRecipe::Uniform => return SampledWeight::constant(Grid::cube(d, r, h)?, 1.0),
            WeightRecipe::PlaneCantor => {
                ensure!(d >= 2, Domain, "plane weights need d >= 2");
                (d - 1, 2, 0.5)
            }
            WeightRecipe::Cantor { b, rho } => (d, *b, *rho),
        };
        let mut n = 1;
        while r * rho.powi(n as i32) > h {
            n += 1;
        }
        let count = (b as f64).powi((axes * n) as i32);
        ensure!(
            count <= MAX_ATOMS as f64,
            Budget,
            "weight at R = {r} needs {count} atoms"
        );
        let mut mu = cantor_measure(axes, b, rho, n)?.centered();
        if axes < d {
            mu = mu.embedded(d)?;
        }
        weight_from_measure(
            &mu,
            r,
            BumpSpec {
                radius: 1.0,
                spacing: h,
            },
        )
    }
}
