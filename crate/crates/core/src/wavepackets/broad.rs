use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{direction, CapPartition};
use crate::error::{ensure, Result};
use crate::extension::{extend_grid, FrequencyProfile};
use crate::weights::SampledWeight;

/// Largest number of direction tuples examined per ball.
pub const MAX_TUPLES: usize = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BroadParams {
    pub k: usize,
    pub a: usize,
    pub p: f64,
    /// Spacing of the candidate direction net; at most `1/(10K)`.
    pub net_spacing: f64,
    /// Transition width of the `1/K` cap partition, as a fraction of `1/K`.
    pub transition: f64,
}

impl BroadParams {
    pub fn new(k: usize, a: usize, p: f64) -> Self {
        BroadParams {
            k,
            a,
            p,
            net_spacing: 1.0 / (10.0 * k as f64),
            transition: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BroadReport {
    /// `(Σ_B min_V max_τ ∫_B |Ef_τ|^p H)^{1/p}`
    pub value: f64,
    /// `‖Ef‖_{L^p(B_R; H)}`
    pub full_norm: f64,
    /// `(Σ_τ ∫ |Ef_τ|^p H)^{1/p}`
    pub cap_sum: f64,
    pub balls: usize,
    pub caps: usize,
    pub net_size: usize,
    pub capture_sets: usize,
    pub tuples: usize,
}

/// Deterministic net on the closed upper half-sphere of R^d (d = 2, 3).
pub fn direction_net(d: usize, spacing: f64) -> Result<Vec<Vec<f64>>> {
    ensure!(spacing > 0.0, Domain, "net spacing must be positive");
    match d {
        2 => {
            let n = (PI / spacing).ceil() as usize;
            Ok((0..n)
                .map(|k| {
                    let t = PI * k as f64 / n as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect())
        }
        3 => {
            let rows = (PI / 2.0 / spacing).ceil() as usize;
            let mut out = Vec::new();
            for i in 0..=rows {
                let polar = PI / 2.0 * i as f64 / rows as f64;
                let count = ((2.0 * PI * polar.sin() / spacing).ceil() as usize).max(1);
                for j in 0..count {
                    let az = 2.0 * PI * j as f64 / count as f64;
                    out.push(vec![
                        polar.sin() * az.cos(),
                        polar.sin() * az.sin(),
                        polar.cos(),
                    ]);
                }
            }
            Ok(out)
        }
        _ => Err(crate::Error::Domain(format!(
            "direction nets exist for d = 2, 3; got {d}"
        ))),
    }
}

fn binom_multiset(n: usize, a: usize) -> f64 {
    // C(n + a - 1, a)
    (0..a).map(|i| (n + i) as f64 / (i + 1) as f64).product()
}

type Mask = Vec<u64>;

fn union(a: &Mask, b: &Mask) -> Mask {
    a.iter().zip(b).map(|(x, y)| x | y).collect()
}

fn contains(mask: &Mask, i: usize) -> bool {
    mask[i / 64] >> (i % 64) & 1 == 1
}

fn subset(a: &Mask, b: &Mask) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Unions of every multiset of `a` capture sets.
fn tuples(sets: &[Mask], a: usize, words: usize) -> Vec<Mask> {
    fn rec(sets: &[Mask], from: usize, left: usize, acc: Mask, out: &mut Vec<Mask>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in from..sets.len() {
            rec(sets, i, left - 1, union(&acc, &sets[i]), out);
        }
    }
    let mut out = Vec::new();
    rec(sets, 0, a, vec![0; words], &mut out);
    out
}

/// The broad norm over `K²`-cubes tiling `[-R, R]^d`, clipped to `B_R`: in
/// each cube the minimum over `A`-tuples of net lines of the largest
/// `∫ |Ef_τ|^p H` among `1/K`-caps `τ` at angle above `1/K` from every line.
pub fn broad_norm(
    f: &FrequencyProfile,
    r: f64,
    params: BroadParams,
    h: &SampledWeight,
) -> Result<BroadReport> {
    let BroadParams {
        k,
        a,
        p,
        net_spacing,
        transition,
    } = params;
    let d = f.dim;
    ensure!(k >= 2 && a >= 1, Domain, "need K >= 2 and A >= 1");
    ensure!(
        k <= 8 && a <= 3,
        Budget,
        "broad norm capped at K <= 8, A <= 3 (got K = {k}, A = {a})"
    );
    ensure!(p >= 1.0, Domain, "p = {p} below 1");
    ensure!(
        net_spacing <= 1.0 / (10.0 * k as f64) + 1e-15,
        Domain,
        "net spacing {net_spacing} above 1/(10K)"
    );
    ensure!(
        h.dim() == d,
        Grid,
        "weight dimension {} for a {d}-dimensional extension",
        h.dim()
    );
    let side = (k * k) as f64;
    let per_axis = 2.0 * r / side;
    ensure!(
        (per_axis - per_axis.round()).abs() < 1e-9 && per_axis >= 1.0,
        Usage,
        "K² = {side} does not divide the side 2R = {}",
        2.0 * r
    );
    let per_axis = per_axis.round() as usize;
    let grid = &h.grid;
    let cube_of = |x: &[f64]| -> usize {
        x.iter().fold(0usize, |acc, v| {
            let c = (((v + r) / side).floor().max(0.0) as usize).min(per_axis - 1);
            acc * per_axis + c
        })
    };
    let nballs = per_axis.pow(d as u32);
    let mask: Vec<bool> = h.values.iter().map(|v| *v > 0.0).collect();
    let cube_index: Vec<usize> = (0..grid.len()).map(|i| cube_of(&grid.point(i))).collect();

    // caps τ and their pieces
    let part = CapPartition::new(1.0 / k as f64, transition);
    let m = d - 1;
    let nc = part.centers.len();
    let weights: Vec<Vec<Vec<f64>>> = f
        .axes
        .iter()
        .map(|ax| ax.nodes.iter().map(|t| part.weights(*t)).collect())
        .collect();
    let mut directions = Vec::new();
    let mut integrals: Vec<Vec<f64>> = Vec::new(); // [cap][ball]
    let mut total = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut inside = vec![false; grid.len()];
    let cell = grid.cell_volume();
    for flat in 0..nc.pow(m as u32) {
        let mut tau = vec![0; m];
        let mut rest = flat;
        for kk in (0..m).rev() {
            tau[kk] = rest % nc;
            rest /= nc;
        }
        let values: Vec<Complex64> = (0..f.node_count())
            .map(|i| {
                let idx = f.index(i);
                let w: f64 = (0..m).map(|kk| weights[kk][idx[kk]][tau[kk]]).product();
                f.values[i] * w
            })
            .collect();
        if values.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
            continue;
        }
        let piece = FrequencyProfile {
            dim: d,
            axes: f.axes.clone(),
            values,
            closed: None,
        };
        let field = extend_grid(&piece, grid, r, Some(&mask))?;
        let mut per_ball = vec![0.0; nballs];
        for i in 0..grid.len() {
            if field.inside[i] {
                per_ball[cube_index[i]] += field.values[i].norm().powf(p) * h.values[i] * cell;
                total[i] += field.values[i];
                inside[i] = true;
            }
        }
        let center: Vec<f64> = tau.iter().map(|j| part.centers[*j]).collect();
        let cn = center.iter().map(|c| c * c).sum::<f64>().sqrt();
        let omega: Vec<f64> = center
            .iter()
            .map(|c| if cn > 1.0 { c / cn } else { *c })
            .collect();
        directions.push(direction(&omega));
        integrals.push(per_ball);
    }
    let ncaps = directions.len();
    let words = ncaps.div_ceil(64).max(1);

    // capture sets of the net lines, deduplicated and without dominated sets
    let net = direction_net(d, net_spacing)?;
    let limit = 1.0 / k as f64;
    let mut sets: Vec<Mask> = Vec::new();
    for v in &net {
        let mut s = vec![0u64; words];
        for (i, g) in directions.iter().enumerate() {
            let c: f64 = g
                .iter()
                .zip(v)
                .map(|(x, y)| x * y)
                .sum::<f64>()
                .abs()
                .min(1.0);
            if c.acos() <= limit {
                s[i / 64] |= 1 << (i % 64);
            }
        }
        sets.push(s);
    }
    sets.sort();
    sets.dedup();
    let maximal: Vec<Mask> = sets
        .iter()
        .enumerate()
        .filter(|(i, s)| {
            !sets
                .iter()
                .enumerate()
                .any(|(j, t)| j != *i && subset(s, t) && s != &t)
        })
        .map(|(_, s)| s.clone())
        .collect();
    let count = binom_multiset(maximal.len(), a);
    ensure!(
        count <= MAX_TUPLES as f64,
        Budget,
        "{count} direction tuples exceed the budget {MAX_TUPLES}"
    );
    let unions = tuples(&maximal, a, words);

    let mut sum = 0.0;
    for b in 0..nballs {
        let mut order: Vec<usize> = (0..ncaps).collect();
        order.sort_by(|&x, &y| integrals[y][b].total_cmp(&integrals[x][b]).then(x.cmp(&y)));
        let best = unions
            .iter()
            .map(|u| {
                order
                    .iter()
                    .find(|&&c| !contains(u, c))
                    .map_or(0.0, |&c| integrals[c][b])
            })
            .fold(f64::INFINITY, f64::min);
        sum += if best.is_finite() {
            best
        } else {
            order.first().map_or(0.0, |&c| integrals[c][b])
        };
    }
    let cap_sum: f64 = integrals.iter().flatten().sum();
    let full: f64 = (0..grid.len())
        .filter(|&i| inside[i])
        .map(|i| total[i].norm().powf(p) * h.values[i] * cell)
        .sum();
    Ok(BroadReport {
        value: sum.powf(1.0 / p),
        full_norm: full.powf(1.0 / p),
        cap_sum: cap_sum.powf(1.0 / p),
        balls: nballs,
        caps: ncaps,
        net_size: net.len(),
        capture_sets: maximal.len(),
        tuples: unions.len(),
    })
}
