//! Wave packets at scale R: tiles, tubes, decomposition of a frequency
//! profile into tile pieces, tangency to algebraic varieties, and the broad norm.

mod broad;
mod decompose;
mod poly;
mod variety;

use serde::Serialize;

pub use broad::{broad_norm, direction_net, BroadParams, BroadReport};
pub use decompose::{decompose, Decomposition, PartitionParams, Piece};
pub use poly::Polynomial;
pub use variety::{
    concentration_test, tangency_test, ConcentrationReport, TangencyOptions, TangencyReport,
    Variety, Verdict,
};

/// Frequency cap θ and spatial translate ν of a wave packet at scale R.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tile {
    /// Cap multi-index on the cap net.
    pub theta: Vec<i64>,
    /// Translate multi-index on the lattice `R^{(1+δ)/2} Z^{d-1}`.
    pub nu_index: Vec<i64>,
    /// Cap center ω_θ, in the closed unit ball.
    pub omega: Vec<f64>,
    pub nu: Vec<f64>,
    pub r: f64,
    pub delta: f64,
}

impl Tile {
    pub fn id(&self) -> String {
        let fmt = |v: &[i64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        format!("{}|{}", fmt(&self.theta), fmt(&self.nu_index))
    }
}

/// `G(θ) = (-2ω, 1) / |(-2ω, 1)|`.
pub fn direction(omega: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = omega.iter().map(|w| -2.0 * w).collect();
    g.push(1.0);
    let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    g.iter().map(|x| x / n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tube {
    pub tile: Tile,
    pub direction: Vec<f64>,
    /// `R^{1/2 + δ}`
    pub radius: f64,
    pub length: f64,
}

impl Tube {
    pub fn new(tile: Tile) -> Self {
        let radius = tile.r.powf(0.5 + tile.delta);
        Tube {
            direction: direction(&tile.omega),
            radius,
            length: tile.r,
            tile,
        }
    }

    /// The core-line point `(ν - 2tω, t)` at height `t`.
    pub fn core(&self, t: f64) -> Vec<f64> {
        let mut x: Vec<f64> = self
            .tile
            .nu
            .iter()
            .zip(&self.tile.omega)
            .map(|(n, w)| n - 2.0 * t * w)
            .collect();
        x.push(t);
        x
    }
}

/// `|x' + 2 x_d ω_θ - ν| <= R^{1/2+δ}` and `x ∈ B_R`.
pub fn tube_membership(x: &[f64], tube: &Tube) -> bool {
    let d = x.len();
    let xd = x[d - 1];
    let off: f64 = (0..d - 1)
        .map(|k| (x[k] + 2.0 * xd * tube.tile.omega[k] - tube.tile.nu[k]).powi(2))
        .sum::<f64>()
        .sqrt();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    off <= tube.radius && r2 <= tube.length * tube.length
}

/// C^∞ step: 1 for `u <= 0`, 0 for `u >= 1`, and `step(u) + step(1 - u) = 1`.
pub(crate) fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    b / (a + b)
}

/// Flat-top window for cells of unit spacing: 1 on `|u| <= 1/2 - τ`, 0 on
/// `|u| >= 1/2 + τ`. Translates by integers sum to 1.
pub(crate) fn flat_top(u: f64, transition: f64) -> f64 {
    smooth_step((u.abs() - (0.5 - transition)) / (2.0 * transition))
}

/// A smooth partition of unity on [-1, 1] with centers `j·s`, `|j| <= 1/s`,
/// made of flat-top windows with transition `τ s` on both sides of each
/// cell boundary. Each window vanishes at distance `(1/2 + τ) s` from its center.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapPartition {
    pub spacing: f64,
    pub transition: f64,
    pub centers: Vec<f64>,
}

impl CapPartition {
    /// Net spacing `1/⌈1/s⌉ <= s`, so that ±1 are centers.
    pub fn new(s: f64, transition: f64) -> Self {
        let m = (1.0 / s - 1e-9).ceil() as i64;
        let spacing = 1.0 / m as f64;
        CapPartition {
            spacing,
            transition,
            centers: (-m..=m).map(|j| j as f64 * spacing).collect(),
        }
    }

    pub fn index_of(&self, j: usize) -> i64 {
        j as i64 - (self.centers.len() as i64 - 1) / 2
    }

    /// `ψ_j(t)` for every center (zero for most).
    pub fn weights(&self, t: f64) -> Vec<f64> {
        let raw: Vec<f64> = self
            .centers
            .iter()
            .map(|c| flat_top((t - c) / self.spacing, self.transition))
            .collect();
        let total: f64 = raw.iter().sum();
        if total == 0.0 {
            return raw;
        }
        raw.iter().map(|v| v / total).collect()
    }
}

#[cfg(test)]
mod tests;
