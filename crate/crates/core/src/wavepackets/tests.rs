use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::extension::{extend_grid, FrequencyProfile, Profile, RuleSpec};
use crate::rng::SplitMix64;
use crate::Grid;

fn sample2(p: &Profile, r: f64) -> FrequencyProfile {
    FrequencyProfile::sample(p, 2, RuleSpec::midpoint_for_radius(r)).unwrap()
}

/// Share of the grid-summed `|E f_T|²` over `B_R` inside the tube of `T`.
fn tube_fraction(dec: &Decomposition, i: usize) -> f64 {
    let r = dec.r;
    let grid = Grid::cube(2, r, 0.5).unwrap();
    let field = extend_grid(&dec.piece_profile(i), &grid, r, None).unwrap();
    let tube = Tube::new(dec.pieces[i].tile.clone());
    let (mut inside, mut total) = (0.0, 0.0);
    for j in 0..grid.len() {
        if field.inside[j] {
            let m = field.values[j].norm_sqr();
            total += m;
            if tube_membership(&grid.point(j), &tube) {
                inside += m;
            }
        }
    }
    inside / total
}

fn random_subsets(n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut g = SplitMix64::new(seed);
    (0..count)
        .map(|_| (0..n).filter(|_| g.next_f64() < 0.5).collect())
        .collect()
}

fn tile(omega: Vec<f64>, nu: Vec<f64>, r: f64, delta: f64) -> Tile {
    let k = omega.len();
    Tile {
        theta: vec![0; k],
        nu_index: vec![0; k],
        omega,
        nu,
        r,
        delta,
    }
}

#[test]
fn reconstruction_random_profile_2d() {
    let r = 256.0;
    let f = sample2(&Profile::random(1, 3, 6), r);
    let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
    assert!(dec.reconstruction_error(&f) <= 1e-6);
    assert!(dec.dropped_mass <= 1e-10 * dec.f_norm);
}

#[test]
fn reconstruction_3d() {
    let r = 16.0;
    let f = FrequencyProfile::sample(
        &Profile::random(2, 5, 6),
        3,
        RuleSpec::midpoint_for_radius(r),
    )
    .unwrap();
    let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
    let err = dec.reconstruction_error(&f);
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn orthogonality_random_subsets() {
    let r = 256.0;
    for (seed, f) in [
        (1, sample2(&Profile::random(1, 3, 6), r)),
        (2, sample2(&Profile::Constant(1.0), r)),
    ] {
        let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
        for sub in random_subsets(dec.pieces.len(), 20, seed) {
            let q = dec.orthogonality_ratio(&sub);
            assert!((0.5..=2.0).contains(&q), "ratio {q}");
        }
    }
}

#[test]
fn sum_is_independent_of_thread_count() {
    let r = 64.0;
    let f = sample2(&Profile::random(1, 17, 6), r);
    let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
    let all: Vec<usize> = (0..dec.pieces.len()).collect();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| dec.sum(&all))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn masses_match_synthesized_pieces() {
    let r = 64.0;
    let f = sample2(&Profile::random(1, 8, 4), r);
    let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
    for i in (0..dec.pieces.len()).step_by(97) {
        let direct = dec.l2(&dec.piece_values(i));
        assert!((direct - dec.pieces[i].mass).abs() <= 1e-9 * dec.f_norm);
    }
}

#[test]
fn single_dominant_tile() {
    // A phase-space cell of the tile lattice has area R^{δ/2}; a packet fits
    // inside one only when that is large, hence large R and δ here.
    let (r, delta): (f64, f64) = (4096.0, 0.99);
    let params = PartitionParams {
        cap_transition: 0.1,
        spatial_transition: 0.1,
    };
    let s = 1.0 / r.sqrt();
    let sigma = 0.0024;
    let mut f = sample2(
        &Profile::Gaussian {
            center: vec![0.0],
            width: sigma,
        },
        r,
    );
    for i in 0..f.node_count() {
        if f.node(i)[0].abs() > s / 2.0 {
            f.values[i] = Complex64::new(0.0, 0.0);
        }
    }
    let dec = decompose(&f, r, delta, params).unwrap();
    let total: f64 = dec.pieces.iter().map(|p| p.mass * p.mass).sum();
    let i = dec.find(&[0], &[0]).unwrap();
    let share = dec.pieces[i].mass.powi(2) / total;
    let best = dec.pieces.iter().map(|p| p.mass).fold(0.0, f64::max);
    eprintln!("dominant share {share:.5}");
    assert_eq!(best, dec.pieces[i].mass);
    assert!(share >= 0.99, "dominant share {share}");
}

#[test]
fn tube_concentration_of_single_tile() {
    // At R = 256, δ = 0.05 the tube radius R^{1/2+δ} is close to the spatial
    // spread forced by a 1/16 frequency cap, so the share stays well short of 1.
    let r = 256.0;
    let f = sample2(&Profile::Constant(1.0), r);
    let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
    let i = dec.find(&[0], &[0]).unwrap();
    let share = tube_fraction(&dec, i);
    eprintln!("tube share {share:.3}");
    assert!(share >= 0.5, "tube share {share}");
    let leak = dec.cap_leakage(i);
    assert!(leak < 1.0 && leak >= 0.0);
}

#[test]
fn tile_count_at_256() {
    let (r, delta): (f64, f64) = (256.0, 0.05);
    let f = sample2(
        &Profile::Gaussian {
            center: vec![0.0],
            width: 0.15,
        },
        r,
    );
    let dec = decompose(&f, r, delta, PartitionParams::default()).unwrap();
    // tubes meeting B_R have |ν| <= R
    let heavy: Vec<&Piece> = dec
        .pieces
        .iter()
        .filter(|p| p.mass >= 1e-3 * dec.f_norm && p.tile.nu[0].abs() <= r)
        .collect();
    let mut caps: Vec<&Vec<i64>> = heavy.iter().map(|p| &p.tile.theta).collect();
    caps.sort();
    caps.dedup();
    let shadow = 2 * (r / dec.nu_spacing).floor() as usize + 1;
    let model = r.powf(0.5) * r.powf(0.5 * (1.0 - delta));
    assert!(heavy.len() <= caps.len() * shadow);
    for v in [heavy.len() as f64, (caps.len() * shadow) as f64] {
        assert!(v <= 4.0 * model && v >= model / 4.0, "{v} vs {model}");
    }
}

#[test]
fn decompose_preconditions() {
    let f = sample2(&Profile::Constant(1.0), 64.0);
    assert!(matches!(
        decompose(&f, 8.0, 0.05, PartitionParams::default()),
        Err(crate::Error::Domain(_))
    ));
    let g =
        FrequencyProfile::sample(&Profile::Constant(1.0), 2, RuleSpec::for_radius(64.0)).unwrap();
    assert!(matches!(
        decompose(&g, 64.0, 0.05, PartitionParams::default()),
        Err(crate::Error::Grid(_))
    ));
    let coarse = sample2(&Profile::Constant(1.0), 16.0);
    assert!(decompose(&coarse, 64.0, 0.05, PartitionParams::default()).is_err());
    let bad = PartitionParams {
        cap_transition: 0.7,
        spatial_transition: 0.25,
    };
    assert!(decompose(&f, 64.0, 0.05, bad).is_err());
}

#[test]
fn cap_partition_sums_to_one() {
    let p = CapPartition::new(1.0 / 16.0, 0.25);
    for k in 0..=400 {
        let t = -1.0 + 2.0 * k as f64 / 400.0;
        let w = p.weights(t);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().filter(|v| **v > 0.0).count() <= 2);
    }
    assert_eq!(p.centers.len(), 33);
    assert_eq!(p.weights(0.0)[16], 1.0);
}

#[test]
fn tube_membership_examples() {
    let r = 256.0;
    let tube = Tube::new(tile(vec![0.0], vec![0.0], r, 0.05));
    for k in 0..=20 {
        let xd = -r + 2.0 * r * k as f64 / 20.0;
        assert!(tube_membership(&[0.0, xd], &tube));
    }
    let t = Tube::new(tile(vec![0.3], vec![5.0], r, 0.05));
    let xd = 40.0;
    let x1 = 5.0 - 2.0 * xd * 0.3 + 2.0 * t.radius;
    assert!(!tube_membership(&[x1, xd], &t));
    assert!(tube_membership(&[x1 - 1.5 * t.radius, xd], &t));
    assert!(!tube_membership(&[0.0, 1.5 * r], &tube));
}

#[test]
fn direction_formula_random_caps() {
    let mut g = SplitMix64::new(11);
    for _ in 0..100 {
        let d = if g.next_f64() < 0.5 { 2 } else { 3 };
        let omega: Vec<f64> = loop {
            let w: Vec<f64> = (0..d - 1).map(|_| g.uniform(-1.0, 1.0)).collect();
            if w.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                break w;
            }
        };
        let v = direction(&omega);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..d - 1 {
            assert!((v[k] / v[d - 1] + 2.0 * omega[k]).abs() < 1e-12);
        }
        assert!(v[d - 1] > 0.0);
    }
}

#[test]
fn polynomial_parsing() {
    let p = Polynomial::parse(3, "x3 - x1^2 - 1/2*x2^2").unwrap();
    assert_eq!(p.degree(), 2);
    assert_eq!(p.eval(&[1.0, 2.0, 5.0]), 2.0);
    let q = Polynomial::parse(3, &p.to_string()).unwrap();
    assert_eq!(p, q);
    let r = Polynomial::parse(2, "(x1 + x2)^2 - 2x1*x2").unwrap();
    assert_eq!(r, Polynomial::parse(2, "x1^2 + x2^2").unwrap());
    assert_eq!(
        Polynomial::parse(1, "0.5*x1 + 3/4").unwrap().eval(&[2.0]),
        1.75
    );
    for bad in ["x4", "x1/x2", "x1^-1", "(x1", "x1 +", "y", "x0", "x1/0"] {
        assert!(Polynomial::parse(3, bad).is_err(), "{bad}");
    }
    let grad = p.gradient();
    assert_eq!(grad[0].eval(&[3.0, 0.0, 0.0]), -6.0);
    assert_eq!(grad[1].eval(&[0.0, 3.0, 0.0]), -3.0);
}

#[test]
fn perpendicular_tube_is_not_tangent() {
    let r = 256.0;
    let z = Variety::parse(2, "x2").unwrap();
    let tube = Tube::new(tile(vec![0.0], vec![0.0], r, 0.05));
    for e in [0.5, 1.0, 4.0] {
        let rep = tangency_test(&tube, &z, e, TangencyOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::NotTangent);
        assert!((rep.max_angle - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(rep.sampled);
    }
}

#[test]
fn contained_tube_is_tangent() {
    let (r, delta): (f64, f64) = (256.0, 0.05);
    let z = Variety::parse(3, "x1").unwrap();
    let tube = Tube::new(tile(vec![0.0, 0.3], vec![0.0, 7.0], r, delta));
    let rep = tangency_test(&tube, &z, r.powf(delta), TangencyOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Tangent);
    assert!(rep.max_distance < 1e-9 && rep.max_angle < 1e-9);
    assert!(rep.zero_samples > 0);
}

/// Real roots of `a s³ + c s + e = 0` (`a > 0`), by the trigonometric or
/// Cardano formula.
fn depressed_cubic_roots(a: f64, c: f64, e: f64) -> Vec<f64> {
    let (p, q) = (c / a, e / a);
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        vec![(-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt()]
    } else {
        let m = 2.0 * (-p / 3.0).sqrt();
        let phi = ((3.0 * q / (p * m)).clamp(-1.0, 1.0)).acos() / 3.0;
        (0..3)
            .map(|k| m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .collect()
    }
}

/// Tangency of a tube to the parabola `x1 = x2²/L`, from closed-form
/// distances and a dense sweep of its parametrization `s ↦ (s²/L, s)`.
fn parabola_oracle(tube: &Tube, l: f64, e: f64) -> (f64, f64, bool) {
    let r = tube.length;
    let (nu, w) = (tube.tile.nu[0], tube.tile.omega[0]);
    let dist_to = |p: [f64; 2]| {
        // stationary points of (s²/L - p1)² + (s - p2)²
        depressed_cubic_roots(2.0 / (l * l), 1.0 - 2.0 * p[0] / l, -p[1])
            .into_iter()
            .map(|s| ((s * s / l - p[0]).powi(2) + (s - p[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min)
    };
    // core segment (ν - 2tω, t) inside B_R
    let a = 1.0 + 4.0 * w * w;
    let b = -4.0 * nu * w;
    let c = nu * nu - r * r;
    let q = (b * b - 4.0 * a * c).sqrt();
    let (t0, t1) = ((-b - q) / (2.0 * a), (-b + q) / (2.0 * a));
    let n = 4000;
    let max_dist = (0..=n)
        .map(|k| {
            let t = t0 + (t1 - t0) * k as f64 / n as f64;
            dist_to([nu - 2.0 * t * w, t])
        })
        .fold(0.0, f64::max);
    let reach = 2.0 * e * r.sqrt() + tube.radius;
    let g = &tube.direction;
    let mut max_angle: f64 = 0.0;
    let m = 200_000;
    for k in 0..=m {
        let s = -2.0 * r + 4.0 * r * k as f64 / m as f64;
        let zp = [s * s / l, s];
        if zp[0].hypot(zp[1]) > 2.0 * r {
            continue;
        }
        let t = ((zp[0] - nu) * (-2.0 * w) + zp[1]) / a;
        let t = t.clamp(t0, t1);
        if (zp[0] - (nu - 2.0 * t * w)).hypot(zp[1] - t) > reach {
            continue;
        }
        let tn = (2.0 * s / l).hypot(1.0);
        let cos = ((g[0] * 2.0 * s / l + g[1]) / tn).abs().min(1.0);
        max_angle = max_angle.max(cos.acos());
    }
    let tangent = max_dist <= e * r.sqrt() && max_angle <= e / r.sqrt();
    (max_dist, max_angle, tangent)
}

#[test]
fn parabola_graph_oracle_cases() {
    // Tubes are never horizontal, so the parabola is written as a graph over x2.
    let (r, delta): (f64, f64) = (256.0, 0.05);
    let l = r.powf(1.5);
    let z = Variety::parse(2, &format!("x1 - 1/{l}*x2^2")).unwrap();
    let cases: [(f64, f64, f64); 10] = [
        (0.0, 0.0, 5.0),
        (0.0, 0.0, 2.0),
        (0.0, 100.0, 2.0),
        (-1.0 / 32.0, -4.0, 6.0),
        (-1.0 / 32.0, -4.0, 1.0),
        (1.0 / 16.0, 0.0, 3.0),
        (0.2, 0.0, 2.0),
        (0.0, 30.0, 8.0),
        (-1.0 / 64.0, -1.0, 4.0),
        (0.5, 50.0, 1.0),
    ];
    let mut verdicts = Vec::new();
    for (w, nu, e) in cases {
        let tube = Tube::new(tile(vec![w], vec![nu], r, delta));
        let (od, oa, ot) = parabola_oracle(&tube, l, e);
        let rep = tangency_test(
            &tube,
            &z,
            e,
            TangencyOptions {
                line_samples: 65,
                offset_samples: 8,
                ..Default::default()
            },
        )
        .unwrap();
        eprintln!(
            "ω {w:.4} ν {nu} E {e}: dist {:.3}/{od:.3} (≤ {:.1}) angle {:.4}/{oa:.4} (≤ {:.4}) oracle {ot} got {:?}",
            rep.max_distance, rep.distance_bound, rep.max_angle, rep.angle_bound, rep.verdict
        );
        // sampled maxima never exceed the oracle's, up to projection accuracy
        assert!(rep.max_distance <= od * (1.0 + 1e-3) + 1e-9);
        assert!(rep.max_angle <= oa + 1e-9);
        assert!((rep.max_distance - od).abs() <= 0.02 * od + 1e-6);
        let expected = if ot {
            Verdict::Tangent
        } else {
            Verdict::NotTangent
        };
        assert_eq!(rep.verdict, expected);
        verdicts.push(ot);
    }
    assert!(verdicts.iter().any(|v| *v) && verdicts.iter().any(|v| !*v));
}

#[test]
fn tangency_rejects_bad_input() {
    let z = Variety::parse(3, "x1").unwrap();
    let tube = Tube::new(tile(vec![0.0], vec![0.0], 64.0, 0.05));
    assert!(tangency_test(&tube, &z, 1.0, TangencyOptions::default()).is_err());
    let t3 = Tube::new(tile(vec![0.0, 0.0], vec![0.0, 0.0], 64.0, 0.05));
    assert!(tangency_test(&t3, &z, 0.0, TangencyOptions::default()).is_err());
    // x1² vanishes to second order: every zero is singular
    let sing = Variety::parse(3, "x1^2").unwrap();
    assert!(matches!(
        tangency_test(&t3, &sing, 1.0, TangencyOptions::default()),
        Err(crate::Error::Domain(_))
    ));
}

#[test]
fn concentration_of_tangent_packets() {
    // Gaussian packets on the plateaus of caps -1, 0, 1 with spatial center
    // 0: the tiles they occupy have tubes tangent to {x1 = 0}. Each packet
    // needs plateau half-width times spatial reach of about 21 for its tails
    // to stay below 1e-6 of the squared mass, which forces large R and E.
    let r: f64 = 4096.0;
    let params = PartitionParams {
        cap_transition: 0.1,
        spatial_transition: 0.5,
    };
    let s = 1.0 / r.sqrt();
    let a = (0.5 - params.cap_transition) * s;
    let sigma = a / 6.0;
    let packets: Vec<(Complex64, Profile)> = [(-1.0, 0.7), (0.0, 1.0), (1.0, -0.4)]
        .iter()
        .map(|(j, z)| {
            (
                Complex64::new(*z, 0.3),
                Profile::Gaussian {
                    center: vec![j * s],
                    width: sigma,
                },
            )
        })
        .collect();
    let mut f = sample2(&Profile::Sum(packets), r);
    for i in 0..f.node_count() {
        let t = f.node(i)[0];
        if ((t / s).round() * s - t).abs() > a || t.abs() > 1.5 * s {
            f.values[i] = Complex64::new(0.0, 0.0);
        }
    }
    let dec = decompose(&f, r, 0.05, params).unwrap();
    let z = Variety::parse(2, "x1").unwrap();
    let e = 60.0;
    let rep = concentration_test(&dec, &z, e, TangencyOptions::default()).unwrap();
    let out = rep.mass_out / dec.f_norm;
    assert!(out <= 1e-3, "{out}");
    eprintln!(
        "tangent packets: out {out:.2e}, inconclusive {:.2e}",
        rep.mass_inconclusive / dec.f_norm
    );
    // tubes that miss B_R are inconclusive
    assert!(rep.tangent > 0 && rep.mass_inconclusive <= 1e-3 * dec.f_norm);
    // the same packets cross {x2 = 0} at large angles
    let across = Variety::parse(2, "x2").unwrap();
    let rep = concentration_test(&dec, &across, e, TangencyOptions::default()).unwrap();
    assert_eq!(rep.mass_in, 0.0);
}

#[test]
fn concentration_of_transverse_tile() {
    // a single piece whose tube crosses {x2 = 0} at a right angle
    let r = 256.0;
    let g = sample2(&Profile::Constant(1.0), r);
    let dec = decompose(&g, r, 0.05, PartitionParams::default()).unwrap();
    let i = dec.find(&[0], &[0]).unwrap();
    let f = dec.piece_profile(i);
    let z = Variety::parse(2, "x2").unwrap();
    let rep = concentration_test(
        &decompose(&f, r, 0.05, PartitionParams::default()).unwrap(),
        &z,
        1.0,
        TangencyOptions::default(),
    )
    .unwrap();
    eprintln!("transverse: in {:.2e} out {:.3}", rep.mass_in, rep.mass_out);
    assert!(rep.mass_in <= 1e-12 * f.l2_norm());
    assert_eq!(rep.tangent, 0);
}

#[test]
fn concentration_masses_consistent() {
    let r = 128.0;
    let f = sample2(&Profile::random(1, 21, 6), r);
    let dec = decompose(&f, r, 0.05, PartitionParams::default()).unwrap();
    let z = Variety::parse(2, "x1 - 1/64*x2^2 + 3").unwrap();
    let rep = concentration_test(&dec, &z, 2.0, TangencyOptions::default()).unwrap();
    let sq = rep.mass_in.powi(2) + rep.mass_out.powi(2) + rep.mass_inconclusive.powi(2);
    let all: Vec<usize> = (0..dec.pieces.len()).collect();
    let sum = dec.l2(&dec.sum(&all)).powi(2);
    let ratio = sum / sq;
    assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    assert_eq!(
        rep.tangent + rep.not_tangent + rep.inconclusive,
        dec.pieces.len()
    );
}

fn uniform_weight(r: f64, h: f64, value: f64) -> crate::SampledWeight {
    let grid = Grid::cube(2, r, h).unwrap();
    let n = grid.len();
    crate::SampledWeight {
        grid,
        values: vec![value; n],
    }
}

#[test]
fn broad_norm_single_cap_vanishes() {
    let r = 16.0;
    let k = 4;
    let f = sample2(
        &Profile::Bump {
            center: vec![0.5],
            radius: 0.05,
        },
        r,
    );
    let h = uniform_weight(r, 0.5, 1.0);
    let rep = broad_norm(&f, r, BroadParams::new(k, 1, 2.0), &h).unwrap();
    assert!(
        rep.value <= 1e-6 * rep.full_norm,
        "{} vs {}",
        rep.value,
        rep.full_norm
    );
    assert!(rep.full_norm > 0.0);
}

#[test]
fn broad_norm_two_caps() {
    let r = 16.0;
    let f = sample2(
        &Profile::Sum(vec![
            (
                Complex64::new(1.0, 0.0),
                Profile::Bump {
                    center: vec![-0.5],
                    radius: 0.05,
                },
            ),
            (
                Complex64::new(0.5, 0.0),
                Profile::Bump {
                    center: vec![0.5],
                    radius: 0.05,
                },
            ),
        ]),
        r,
    );
    let h = uniform_weight(r, 0.5, 1.0);
    let rep = broad_norm(&f, r, BroadParams::new(4, 1, 2.0), &h).unwrap();
    let small = sample2(
        &Profile::Sum(vec![(
            Complex64::new(0.5, 0.0),
            Profile::Bump {
                center: vec![0.5],
                radius: 0.05,
            },
        )]),
        r,
    );
    let one = broad_norm(&small, r, BroadParams::new(4, 1, 2.0), &h).unwrap();
    let q = rep.value / one.full_norm;
    assert!((0.25..=4.0).contains(&q), "{q}");
    assert!(rep.value <= rep.cap_sum * (1.0 + 1e-12));
}

#[test]
fn broad_norm_budget_and_divisibility() {
    let f = sample2(&Profile::Constant(1.0), 16.0);
    let h = uniform_weight(16.0, 0.5, 1.0);
    assert!(matches!(
        broad_norm(&f, 16.0, BroadParams::new(16, 1, 2.0), &h),
        Err(crate::Error::Budget(_))
    ));
    assert!(matches!(
        broad_norm(&f, 16.0, BroadParams::new(2, 4, 2.0), &h),
        Err(crate::Error::Budget(_))
    ));
    assert!(matches!(
        broad_norm(&f, 16.0, BroadParams::new(3, 1, 2.0), &h),
        Err(crate::Error::Usage(_))
    ));
}

#[test]
fn direction_net_cover() {
    for d in [2, 3] {
        let net = direction_net(d, 0.05).unwrap();
        let mut g = SplitMix64::new(4);
        for _ in 0..200 {
            let mut v: Vec<f64> = (0..d).map(|_| g.normal()).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            let best = net
                .iter()
                .map(|u| {
                    u.iter()
                        .zip(&v)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
                        .abs()
                        .min(1.0)
                        .acos()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best <= 0.05, "{best}");
        }
    }
}

#[test]
fn broad_norm_monotone() {
    let r = 8.0;
    let mut g = SplitMix64::new(9);
    for trial in 0..20 {
        let f = sample2(&Profile::random(1, 100 + trial, 4), r);
        let h1v: Vec<f64> = (0..Grid::cube(2, r, 0.5).unwrap().len())
            .map(|_| g.next_f64())
            .collect();
        let grid = Grid::cube(2, r, 0.5).unwrap();
        let h1 = crate::SampledWeight {
            grid: grid.clone(),
            values: h1v.clone(),
        };
        let h2 = crate::SampledWeight {
            grid,
            values: h1v.iter().map(|v| v + g.next_f64()).collect(),
        };
        let k = 2;
        let a1 = broad_norm(&f, r, BroadParams::new(k, 1, 3.0), &h1).unwrap();
        let a2 = broad_norm(&f, r, BroadParams::new(k, 2, 3.0), &h1).unwrap();
        let b1 = broad_norm(&f, r, BroadParams::new(k, 1, 3.0), &h2).unwrap();
        assert!(a2.value <= a1.value * (1.0 + 1e-12));
        assert!(a1.value <= b1.value * (1.0 + 1e-12));
        assert!(a1.value <= a1.cap_sum * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reconstruction_is_exact(seed in 0u64..1000, delta in 0.0f64..0.5) {
        let r = 64.0;
        let f = sample2(&Profile::random(1, seed, 3), r);
        let dec = decompose(&f, r, delta, PartitionParams::default()).unwrap();
        prop_assert!(dec.reconstruction_error(&f) <= 1e-6);
    }

    #[test]
    fn membership_matches_inequality(w in -1.0f64..1.0, nu in -50.0f64..50.0, x1 in -300.0f64..300.0, xd in -300.0f64..300.0) {
        let r = 256.0;
        let t = Tube::new(tile(vec![w], vec![nu], r, 0.05));
        let inside = (x1 + 2.0 * xd * w - nu).abs() <= t.radius && x1.hypot(xd) <= r;
        prop_assert_eq!(tube_membership(&[x1, xd], &t), inside);
    }
}
