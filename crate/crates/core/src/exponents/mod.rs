//! Exact evaluation of the restriction and decay exponents.
//!
//! Everything here is big-rational arithmetic: thresholds, the piecewise
//! exponents β, γ⁰ and γ_d, the dimension recursion for γ_m, the Mattila
//! criterion and the prior bounds the new exponents are compared against.
//! Intervals are half-open `(a, b]`; a breakpoint is evaluated on the piece
//! to its left.

mod piecewise;
mod rational;

pub use piecewise::{Piece, PiecewiseExponent};
pub use rational::{
    format_decimal, format_rational, int, parse_rational, rat, rational_grid, to_f64, Rational,
};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{ensure, Error, Result};

/// Largest ambient dimension accepted by the public entry points.
pub const MAX_DIM: i64 = 64;

fn check_dim(d: i64, min: i64) -> Result<()> {
    ensure!(d >= min, Domain, "dimension d = {d} must be at least {min}");
    ensure!(
        d <= MAX_DIM,
        Domain,
        "dimension d = {d} exceeds the cap {MAX_DIM}"
    );
    Ok(())
}

fn check_alpha(d: i64, alpha: &Rational) -> Result<()> {
    ensure!(
        alpha > &Rational::zero() && alpha <= &int(d),
        Domain,
        "alpha = {} outside (0, {d}]",
        format_rational(alpha)
    );
    Ok(())
}

/// `S_ℓ^d = Σ_{i=ℓ}^{d} 1/i`, zero when `ℓ > d`.
pub fn harmonic_sum(l: i64, d: i64) -> Rational {
    if l > d {
        return Rational::zero();
    }
    (l.max(1)..=d).map(|i| rat(1, i)).sum()
}

/// `p_d = 2d/(d-1)`, the Lebesgue exponent used throughout.
pub fn endpoint_exponent(d: i64) -> Rational {
    rat(2 * d, d - 1)
}

/// The crossover `#_d = 2d(d-2-S_4^d) / (2d-3-2S_4^d)` beyond which the narrow
/// part dominates.
pub fn sharp_threshold(d: i64) -> Result<Rational> {
    check_dim(d, 4)?;
    let s = harmonic_sum(4, d);
    let two = int(2);
    let dd = int(d);
    Ok(&two * &dd * (&dd - int(2) - &s) / (&two * &dd - int(3) - &two * &s))
}

fn affine(lo: Rational, hi: Rational, slope: Rational, intercept: Rational) -> Piece {
    Piece::new(lo, hi, slope, intercept)
}

/// Intervals `(d - ℓ/2, d - ℓ/2 + 1/2]` for `5 ≤ ℓ ≤ d`.
fn ell_interval(d: i64, l: i64) -> (Rational, Rational) {
    let lo = rat(2 * d - l, 2);
    let hi = rat(2 * d - l + 1, 2);
    (lo, hi)
}

/// β_d⁰ as printed (d ≥ 4).
pub fn beta0_piecewise(d: i64) -> Result<PiecewiseExponent> {
    check_dim(d, 4)?;
    let dd = int(d);
    let s4 = harmonic_sum(4, d);
    let sharp = sharp_threshold(d)?;
    let half = rat(1, 2);
    let mut pieces = vec![affine(
        Rational::zero(),
        rat(d, 2),
        rat(d - 1, d),
        Rational::zero(),
    )];
    for l in 5..=d {
        let (lo, hi) = ell_interval(d, l);
        let s = harmonic_sum(l, d);
        pieces.push(affine(
            lo,
            hi,
            (&dd - int(1) - &s) / &dd,
            -&half + rat(l - 1, 2 * d) + &s,
        ));
    }
    pieces.push(affine(
        int(d - 2),
        int(d - 1),
        (&dd - int(1) - &s4) / &dd,
        -&half + rat(3, 2 * d) + &s4,
    ));
    pieces.push(affine(
        int(d - 1),
        sharp.clone(),
        (int(2 * d - 3) - int(2) * &s4) / int(2 * d),
        rat(1, d) + &s4,
    ));
    pieces.push(affine(
        sharp,
        dd,
        Rational::zero(),
        rat((d - 1) * (d - 1), d),
    ));
    PiecewiseExponent::new(d, pieces)
}

/// The linear refined-Strichartz decay exponent `α - 1 + (d-α)/(d+1)` on `(0, d]`.
pub fn refined_strichartz_decay(d: i64) -> PiecewiseExponent {
    // α - 1 + (d - α)/(d + 1) = (d/(d+1))·α + (d/(d+1) - 1)
    let slope = rat(d, d + 1);
    let intercept = rat(d, d + 1) - int(1);
    PiecewiseExponent::new(d, vec![affine(Rational::zero(), int(d), slope, intercept)])
        .expect("single piece")
}

/// Lower bound for the spherical-average decay exponent β_d(α), d ≥ 3.
pub fn beta_lower_piecewise(d: i64) -> Result<PiecewiseExponent> {
    check_dim(d, 3)?;
    if d == 3 {
        return PiecewiseExponent::new(
            3,
            vec![
                affine(Rational::zero(), int(2), rat(2, 3), Rational::zero()),
                affine(int(2), rat(19, 9), Rational::zero(), rat(4, 3)),
                affine(rat(19, 9), int(3), rat(3, 4), rat(-1, 4)),
            ],
        );
    }
    beta0_piecewise(d)?.max(&refined_strichartz_decay(d))
}

pub fn beta_lower(d: i64, alpha: &Rational) -> Result<Rational> {
    check_dim(d, 3)?;
    check_alpha(d, alpha)?;
    beta_lower_piecewise(d)?.eval(alpha)
}

/// The sharp planar decay exponent β₂(α) on `(0, 2]`.
pub fn beta_planar_piecewise() -> PiecewiseExponent {
    PiecewiseExponent::new(
        2,
        vec![
            affine(Rational::zero(), rat(1, 2), int(1), Rational::zero()),
            affine(rat(1, 2), int(1), Rational::zero(), rat(1, 2)),
            affine(int(1), int(2), rat(1, 2), Rational::zero()),
        ],
    )
    .expect("tiling pieces")
}

/// Best known decay exponent: β₂ in the plane, the lower bound above for d ≥ 3.
pub fn decay_bound(d: i64, alpha: &Rational) -> Result<Rational> {
    check_dim(d, 2)?;
    check_alpha(d, alpha)?;
    if d == 2 {
        beta_planar_piecewise().eval(alpha)
    } else {
        beta_lower(d, alpha)
    }
}

/// γ_d⁰, the weighted restriction exponent at `p = 2d/(d-1)`.
pub fn gamma0_piecewise(d: i64) -> Result<PiecewiseExponent> {
    check_dim(d, 3)?;
    if d == 3 {
        return PiecewiseExponent::new(
            3,
            vec![
                affine(Rational::zero(), int(2), Rational::zero(), Rational::zero()),
                affine(int(2), int(3), rat(1, 3), rat(-2, 3)),
            ],
        );
    }
    let sharp = sharp_threshold(d)?;
    let mut pieces = broad_pieces(d, &sharp);
    pieces.push(affine(
        sharp,
        int(d),
        rat(d - 1, 2 * d),
        rat((d - 1) * (1 - d), 2 * d),
    ));
    PiecewiseExponent::new(d, pieces)
}

/// Shared pieces of γ⁰ and the broad exponent up to `top` (the last piece
/// starts at `d - 1`).
fn broad_pieces(d: i64, top: &Rational) -> Vec<Piece> {
    let dd = int(d);
    let s4 = harmonic_sum(4, d);
    let quarter = rat(1, 4);
    let half = rat(1, 2);
    let mut pieces = vec![affine(
        Rational::zero(),
        rat(d, 2),
        Rational::zero(),
        Rational::zero(),
    )];
    for l in 5..=d {
        let (lo, hi) = ell_interval(d, l);
        let s = harmonic_sum(l, d);
        pieces.push(affine(
            lo,
            hi,
            &s / (int(2) * &dd),
            &quarter - rat(l - 1, 4 * d) - &s * &half,
        ));
    }
    pieces.push(affine(
        int(d - 2),
        int(d - 1),
        &s4 / (int(2) * &dd),
        &quarter - rat(3, 4 * d) - &s4 * &half,
    ));
    pieces.push(affine(
        int(d - 1),
        top.clone(),
        (int(1) + int(2) * &s4) / (int(4) * &dd),
        rat(-1, 2 * d) - &s4 * &half,
    ));
    pieces
}

pub fn gamma0(d: i64, alpha: &Rational) -> Result<Rational> {
    check_dim(d, 3)?;
    check_alpha(d, alpha)?;
    gamma0_piecewise(d)?.eval(alpha)
}

/// Broad-norm exponent γ_d(α) at `p = 2d/(d-1)`, d ≥ 4.
pub fn gamma_broad_piecewise(d: i64) -> Result<PiecewiseExponent> {
    check_dim(d, 4)?;
    PiecewiseExponent::new(d, broad_pieces(d, &int(d)))
}

pub fn gamma_broad(d: i64, alpha: &Rational) -> Result<Rational> {
    check_dim(d, 4)?;
    check_alpha(d, alpha)?;
    gamma_broad_piecewise(d)?.eval(alpha)
}

/// `α/(2d²) - 1/(4d)`, the broad exponent on the middle range of α.
pub fn gamma_broad_middle(d: i64, alpha: &Rational) -> Rational {
    alpha / int(2 * d * d) - rat(1, 4 * d)
}

/// `-d/(4m) + 1/4`, the constraint coming from transverse cells.
pub fn transverse_constraint(d: i64, m: i64) -> Rational {
    rat(-d, 4 * m) + rat(1, 4)
}

/// `(1/2 - (d-α)/(2m))/m + γ_{m-1}(1 - 1/m)`, the tangent (algebraic) branch.
pub fn tangent_branch(d: i64, alpha: &Rational, m: i64, previous: &Rational) -> Rational {
    (rat(1, 2) - (int(d) - alpha) / int(2 * m)) / int(m) + previous * (int(1) - rat(1, m))
}

/// Base case of the dimension recursion at `m = 3`.
pub fn gamma3_base(d: i64, alpha: &Rational) -> Rational {
    let linear = alpha / int(18) - rat(5 * d, 36) + rat(1, 3);
    let bilinear = alpha / int(12) - rat(d, 6) + rat(1, 3);
    transverse_constraint(d, 3).max(linear.min(bilinear))
}

/// Runs the dimension recursion from the `m = 3` base up to `m`.
pub fn gamma_recursion(d: i64, alpha: &Rational, m: i64) -> Result<Rational> {
    check_dim(d, 4)?;
    check_alpha(d, alpha)?;
    ensure!((3..=d).contains(&m), Domain, "m = {m} outside [3, {d}]");
    let mut g = gamma3_base(d, alpha);
    for k in 4..=m {
        g = transverse_constraint(d, k).max(tangent_branch(d, alpha, k, &g));
    }
    Ok(g)
}

/// The recursion started from `γ_2 = -d/8 + 1/4`, valid for `α ∈ [d/2, (d+1)/2]`.
pub fn gamma_recursion_planar(d: i64, alpha: &Rational, m: i64) -> Result<Rational> {
    check_dim(d, 4)?;
    ensure!(
        alpha >= &rat(d, 2) && alpha <= &rat(d + 1, 2),
        Domain,
        "alpha = {} outside [d/2, (d+1)/2]",
        format_rational(alpha)
    );
    ensure!((2..=d).contains(&m), Domain, "m = {m} outside [2, {d}]");
    let mut g = transverse_constraint(d, 2);
    for k in 3..=m {
        g = transverse_constraint(d, k).max(tangent_branch(d, alpha, k, &g));
    }
    Ok(g)
}

/// Closed form of γ_m(α) for `3 ≤ m ≤ d` as stated for the full range of α.
pub fn gamma_m_closed(d: i64, alpha: &Rational, m: i64) -> Result<Rational> {
    check_dim(d, 4)?;
    check_alpha(d, alpha)?;
    ensure!((3..=d).contains(&m), Domain, "m = {m} outside [3, {d}]");
    let dd = int(d);
    let mm = int(m);
    let transverse = transverse_constraint(d, m);
    if alpha <= &rat(d, 2) {
        return Ok(transverse);
    }
    if alpha > &int(d - 1) {
        if m == 3 {
            return Ok(alpha / int(12) - rat(d, 6) + rat(1, 3));
        }
        let s = harmonic_sum(4, m);
        return Ok(
            (int(1) + int(2) * &s) * alpha / (int(4) * &mm) + rat(m - 1, 2 * m)
                - (int(1) + &s) * &dd / (int(2) * &mm),
        );
    }
    if alpha > &int(d - 2) {
        if m == 3 {
            return Ok(transverse);
        }
        let s = harmonic_sum(4, m);
        return Ok(&s * alpha / (int(2) * &mm) + rat(2 * m - 3, 4 * m)
            - (int(1) + int(2) * &s) * &dd / (int(4) * &mm));
    }
    for l in 5..=d {
        let (lo, hi) = ell_interval(d, l);
        if alpha > &lo && alpha <= &hi {
            if m <= l - 1 {
                return Ok(transverse);
            }
            let s = harmonic_sum(l, m);
            return Ok(&s * alpha / (int(2) * &mm) + rat(2 * m - l + 1, 4 * m)
                - (int(1) + int(2) * &s) * &dd / (int(4) * &mm));
        }
    }
    unreachable!("the ℓ-intervals tile (d/2, d-2]")
}

/// Closed form on the middle range `α ∈ [d/2, (d+1)/2]`, `2 ≤ m ≤ d`.
pub fn gamma_m_planar_closed(d: i64, alpha: &Rational, m: i64) -> Rational {
    if m < d {
        transverse_constraint(d, m)
    } else {
        gamma_broad_middle(d, alpha)
    }
}

/// Mattila's criterion `γ ≤ α(1/p + 1/2) - d/2`.
pub fn mattila_criterion(alpha: &Rational, p: &Rational, gamma: &Rational, d: i64) -> bool {
    gamma <= &mattila_rhs(alpha, p, d)
}

pub fn mattila_rhs(alpha: &Rational, p: &Rational, d: i64) -> Rational {
    alpha * (int(1) / p + rat(1, 2)) - rat(d, 2)
}

/// Smallest α satisfying Mattila's criterion when `γ(α) = slope·α + intercept`.
///
/// Returns `None` if the criterion can never hold for large α.
pub fn mattila_threshold(
    d: i64,
    p: &Rational,
    slope: &Rational,
    intercept: &Rational,
) -> Option<Rational> {
    let coeff = int(1) / p + rat(1, 2) - slope;
    if coeff <= Rational::zero() {
        return None;
    }
    Some((rat(d, 2) + intercept) / coeff)
}

/// Dimension threshold for positive-measure distance sets.
pub fn falconer_threshold(d: i64) -> Result<Rational> {
    check_dim(d, 3)?;
    if d == 3 {
        return Ok(rat(9, 5));
    }
    Ok(rat(d, 2) + rat(1, 4) + rat(d + 1, 4 * (2 * d + 1) * (d - 1)))
}

/// Narrow-part closure `γ ≥ (1-d)/2 + (α+1)/p`.
pub fn narrow_closure(gamma: &Rational, d: i64, alpha: &Rational, p: &Rational) -> bool {
    gamma >= &narrow_exponent(d, alpha, p)
}

pub fn narrow_exponent(d: i64, alpha: &Rational, p: &Rational) -> Rational {
    rat(1 - d, 2) + (alpha + int(1)) / p
}

/// Decay exponent implied by a weighted restriction estimate: `2(α/p - γ)`.
pub fn decay_from_restriction(alpha: &Rational, p: &Rational, gamma: &Rational) -> Rational {
    int(2) * (alpha / p - gamma)
}

/// Weighted L² exponent from linear refined Strichartz on an m-variety:
/// `1/2 - (d-α)/(2(m+1))`.
pub fn linear_l2_exponent(d: i64, alpha: &Rational, m: i64) -> Rational {
    rat(1, 2) - (int(d) - alpha) / int(2 * (m + 1))
}

/// Tomas–Stein plus Hölder: `α(d-1) / (2d(d+1))`.
pub fn tomas_stein_gamma(d: i64, alpha: &Rational) -> Rational {
    alpha * int(d - 1) / int(2 * d * (d + 1))
}

/// Previously known decay bounds, each reported only on its stated α-range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorBounds {
    #[serde(serialize_with = "ser_opt")]
    pub mattila: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub erdogan: Option<Rational>,
    #[serde(serialize_with = "ser_opt")]
    pub luca_rogers: Option<Rational>,
    /// Restriction exponent (not a decay bound).
    #[serde(serialize_with = "ser_rat")]
    pub tomas_stein_gamma: Rational,
}

impl PriorBounds {
    /// The decay bounds that apply at this α, by name.
    pub fn decay_bounds(&self) -> Vec<(&'static str, Rational)> {
        let mut out = Vec::new();
        if let Some(v) = &self.mattila {
            out.push(("mattila", v.clone()));
        }
        if let Some(v) = &self.erdogan {
            out.push(("erdogan", v.clone()));
        }
        if let Some(v) = &self.luca_rogers {
            out.push(("luca_rogers", v.clone()));
        }
        out
    }
}

pub fn prior_bounds(d: i64, alpha: &Rational) -> Result<PriorBounds> {
    check_dim(d, 3)?;
    check_alpha(d, alpha)?;
    let dd = int(d);
    let a = alpha;
    let mattila = if a <= &rat(d - 1, 2) {
        Some(a.clone())
    } else if a <= &rat(d, 2) {
        Some(rat(d - 1, 2))
    } else {
        None
    };
    let switch = rat(d, 2) + rat(2, 3) + rat(1, d);
    let erdogan =
        (a >= &rat(d, 2) && a <= &switch).then(|| a - int(1) + (int(d + 2) - int(2) * a) / int(4));
    let luca_rogers = (a >= &switch && a <= &dd).then(|| {
        let gap = &dd - a;
        a - int(1) + &gap * &gap / (int(d - 1) * (int(2 * d - 1) - a))
    });
    Ok(PriorBounds {
        mattila,
        erdogan,
        luca_rogers,
        tomas_stein_gamma: tomas_stein_gamma(d, a),
    })
}

/// New decay bound against all applicable prior bounds at one α.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundComparison {
    #[serde(serialize_with = "ser_rat")]
    pub alpha: Rational,
    #[serde(serialize_with = "ser_rat")]
    pub new_bound: Rational,
    #[serde(serialize_with = "ser_named")]
    pub prior_bounds: Vec<(&'static str, Rational)>,
    pub strictly_better: bool,
}

impl BoundComparison {
    pub fn best_prior(&self) -> Option<(&'static str, &Rational)> {
        self.prior_bounds
            .iter()
            .map(|(n, v)| (*n, v))
            .max_by(|a, b| a.1.cmp(b.1))
    }
}

/// Compares `beta_lower` with the prior decay bounds at α.
///
/// `strictly_better` is true iff the new bound exceeds every applicable prior
/// bound; with no applicable prior bound it is vacuously true.
pub fn compare_bounds(d: i64, alpha: &Rational) -> Result<BoundComparison> {
    let new_bound = beta_lower(d, alpha)?;
    let prior = prior_bounds(d, alpha)?.decay_bounds();
    let strictly_better = prior.iter().all(|(_, v)| &new_bound > v);
    Ok(BoundComparison {
        alpha: alpha.clone(),
        new_bound,
        prior_bounds: prior,
        strictly_better,
    })
}

/// One row of the exponent table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentRow {
    pub d: i64,
    pub alpha: Rational,
    pub beta_lower: Rational,
    pub gamma0: Rational,
    pub gamma_broad: Option<Rational>,
    pub mattila_ok: bool,
    pub comparison: BoundComparison,
}

pub fn exponent_row(d: i64, alpha: &Rational) -> Result<ExponentRow> {
    let beta = beta_lower(d, alpha)?;
    let g0 = gamma0(d, alpha)?;
    let gb = if d >= 4 {
        Some(gamma_broad(d, alpha)?)
    } else {
        None
    };
    let mattila_ok = mattila_criterion(alpha, &endpoint_exponent(d), &g0, d);
    let comparison = compare_bounds(d, alpha)?;
    Ok(ExponentRow {
        d,
        alpha: alpha.clone(),
        beta_lower: beta,
        gamma0: g0,
        gamma_broad: gb,
        mattila_ok,
        comparison,
    })
}

/// Outcome of checking the closed forms against the recursion on a grid.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RecursionReport {
    pub checked: usize,
    pub mismatches: Vec<String>,
}

impl RecursionReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks, at every α of the grid, that the closed forms for γ_m satisfy the
/// recursion with exact equality for `3 ≤ m ≤ d`, that `m = d` reproduces the
/// broad exponent, and that on the middle range the planar recursion
/// reproduces its closed form.
pub fn check_recursion(d: i64, alphas: &[Rational]) -> Result<RecursionReport> {
    check_dim(d, 4)?;
    let mut report = RecursionReport::default();
    let broad = gamma_broad_piecewise(d)?;
    let (mid_lo, mid_hi) = (rat(d, 2), rat(d + 1, 2));
    for a in alphas {
        let mut prev: Option<Rational> = None;
        for m in 3..=d {
            let closed = gamma_m_closed(d, a, m)?;
            let from_recursion = match &prev {
                None => gamma3_base(d, a),
                Some(p) => transverse_constraint(d, m).max(tangent_branch(d, a, m, p)),
            };
            report.checked += 1;
            if closed != from_recursion {
                report.mismatches.push(format!(
                    "d={d} alpha={} m={m}: closed {} vs recursion {}",
                    format_rational(a),
                    format_rational(&closed),
                    format_rational(&from_recursion)
                ));
            }
            prev = Some(closed);
        }
        let top = gamma_m_closed(d, a, d)?;
        if top != broad.eval(a)? {
            report.mismatches.push(format!(
                "d={d} alpha={}: gamma_d != broad exponent",
                format_rational(a)
            ));
        }
        if a >= &mid_lo && a <= &mid_hi {
            for m in 2..=d {
                report.checked += 1;
                let r = gamma_recursion_planar(d, a, m)?;
                if r != gamma_m_planar_closed(d, a, m) {
                    report.mismatches.push(format!(
                        "planar d={d} alpha={} m={m}: {}",
                        format_rational(a),
                        format_rational(&r)
                    ));
                }
            }
        }
    }
    Ok(report)
}

fn ser_rat<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}

fn ser_opt<S: serde::Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_some(&format_rational(r)),
        None => s.serialize_none(),
    }
}

fn ser_named<S: serde::Serializer>(
    v: &[(&'static str, Rational)],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(v.len()))?;
    for (k, r) in v {
        map.serialize_entry(k, &format_rational(r))?;
    }
    map.end()
}

/// Convenience for callers that only need an `Error` for a bad α string.
pub fn parse_alpha(d: i64, s: &str) -> Result<Rational> {
    let a = parse_rational(s)?;
    check_alpha(d, &a).map_err(|e| Error::Usage(e.to_string()))?;
    Ok(a)
}

impl ExponentRow {
    pub fn best_prior_value(&self) -> Option<Rational> {
        self.comparison.best_prior().map(|(_, v)| v.clone())
    }
}
