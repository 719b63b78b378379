use serde::Serialize;

use super::{extend_grid, weighted_norm, FrequencyProfile, Profile, RuleSpec};
use crate::error::{ensure, Result};
use crate::exponents::{gamma0, int, rat, to_f64, Rational};
use crate::fit::fit_loglog;
use crate::weights::WeightRecipe;

/// Slack added to the theorem exponent before a fitted slope fails.
pub const SLOPE_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone)]
pub struct ScalingSpec {
    pub dim: usize,
    pub p: f64,
    pub alpha: Rational,
    pub radii: Vec<f64>,
    pub profile: Profile,
    pub weight: WeightRecipe,
    /// Field and weight grid spacing.
    pub spacing: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub r: f64,
    pub norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    pub slope: f64,
    pub stderr: f64,
    pub exponent: f64,
    pub pass: bool,
}

/// The exponent of `R` the estimates predict: `γ(3, α)` for `d = p = 3`,
/// and `1/2 - (d - α)/(2(d + 1))` for `p = 2`.
pub fn scaling_exponent(d: usize, p: f64, alpha: &Rational) -> Result<Rational> {
    if d == 3 && p == 3.0 {
        return gamma0(3, alpha);
    }
    ensure!(
        p == 2.0,
        Usage,
        "no predicted exponent for d = {d}, p = {p} (supported: p = 2, or d = p = 3)"
    );
    let d = d as i64;
    Ok(rat(1, 2) - (int(d) - alpha) / int(2 * (d + 1)))
}

/// Largest evaluation radius per dimension.
pub fn max_radius(d: usize) -> f64 {
    if d == 2 {
        256.0
    } else {
        64.0
    }
}

pub fn scaling_experiment(spec: &ScalingSpec) -> Result<ScalingResult> {
    let d = spec.dim;
    ensure!(
        (2..=3).contains(&d),
        Budget,
        "field evaluation is capped at d <= 3"
    );
    ensure!(
        spec.radii.len() >= 4,
        Usage,
        "need at least 4 radii, got {}",
        spec.radii.len()
    );
    ensure!(
        spec.radii.iter().all(|r| *r >= 1.0),
        Domain,
        "radii must be at least 1"
    );
    if let Some(r) = spec.radii.iter().find(|r| **r > max_radius(d)) {
        return Err(crate::Error::Budget(format!(
            "R = {r} exceeds the cap {} for d = {d}",
            max_radius(d)
        )));
    }
    let exponent = to_f64(&scaling_exponent(d, spec.p, &spec.alpha)?);
    let mut rows = Vec::with_capacity(spec.radii.len());
    for &r in &spec.radii {
        let h = spec.weight.build(d, r, spec.spacing)?;
        let mask: Vec<bool> = h.values.iter().map(|v| *v > 0.0).collect();
        let f = FrequencyProfile::sample(&spec.profile, d, RuleSpec::for_radius(r))?;
        let field = extend_grid(&f, &h.grid, r, Some(&mask))?;
        let norm = weighted_norm(&field, &h, spec.p)?;
        rows.push(ScalingRow { r, norm });
    }
    let rs: Vec<f64> = rows.iter().map(|x| x.r).collect();
    let ns: Vec<f64> = rows.iter().map(|x| x.norm).collect();
    let line = fit_loglog(&rs, &ns)?;
    Ok(ScalingResult {
        rows,
        slope: line.slope,
        stderr: line.stderr,
        exponent,
        pass: line.slope <= exponent + SLOPE_TOLERANCE,
    })
}
