use serde_json::{json, Value};
use wfr_core::exponents::{
    check_recursion, decay_bound, exponent_row, format_decimal, format_rational, int, parse_alpha,
    parse_rational, prior_bounds, rat, to_f64, Rational,
};
use wfr_core::extension::{scaling_experiment, ScalingSpec};
use wfr_core::fractal::{atom_centers, decay_fit, max_valid_radius, parse_real};
use wfr_core::wavepackets::{
    broad_norm, concentration_test, decompose, BroadParams, PartitionParams, TangencyOptions,
};
use wfr_core::weights::{
    default_centers, read_grid_file, verify_weight, weight_from_measure, BumpSpec,
};
use wfr_core::{
    Error, FractalMeasure, FrequencyProfile, Profile, Result, RuleSpec, Variety, Verdict,
    WeightRecipe,
};

use crate::args::{DecayArgs, ExponentsArgs, ScalingArgs, WavepacketArgs, WeightsArgs};
use crate::output::{jnum, num, Outcome, Table};
use crate::plot;

/// Largest number of α values in one table.
pub const MAX_TABLE_ROWS: usize = 200_000;

fn decimal(r: &Rational) -> String {
    format_decimal(r, 12)
}

fn list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_real)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Usage(format!("bad list {s:?}: {e}")))
}

/// `start:end:step`; the start is kept when it is a valid α.
fn table_grid(d: i64, spec: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Usage(format!(
            "--table wants start:end:step, got {spec:?}"
        )));
    }
    let lo = parse_rational(parts[0])?;
    let hi = parse_rational(parts[1])?;
    let step = parse_rational(parts[2])?;
    if step <= int(0) || hi <= lo {
        return Err(Error::Usage(format!(
            "--table {spec:?}: need start < end and step > 0"
        )));
    }
    if hi > int(d) || lo < int(0) {
        return Err(Error::Usage(format!("--table {spec:?} leaves (0, {d}]")));
    }
    let count = to_f64(&((&hi - &lo) / &step));
    if count > MAX_TABLE_ROWS as f64 {
        return Err(Error::Budget(format!(
            "--table {spec:?} has {count:.0} rows, above {MAX_TABLE_ROWS}"
        )));
    }
    // start + k step, keeping the start only when positive and the end only when on the grid
    let mut out = Vec::new();
    let mut a = if lo > int(0) { lo.clone() } else { &lo + &step };
    while a <= hi {
        out.push(a.clone());
        a += &step;
    }
    Ok(out)
}

pub fn exponents(a: &ExponentsArgs) -> Result<Outcome> {
    let d = a.d;
    let alphas = match (&a.alpha, &a.table) {
        (Some(s), _) => vec![parse_alpha(d, s)?],
        (None, Some(t)) => table_grid(d, t)?,
        (None, None) => table_grid(d, &format!("0:{d}:1/10"))?,
    };
    let mut table = Table::new(&[
        "d",
        "alpha",
        "alpha_pq",
        "beta_lower",
        "beta_lower_pq",
        "gamma0",
        "gamma0_pq",
        "gamma_broad",
        "gamma_broad_pq",
        "mattila_ok",
        "best_prior",
        "best_prior_pq",
        "strictly_better",
    ]);
    let mut rows = Vec::with_capacity(alphas.len());
    for alpha in &alphas {
        let row = exponent_row(d, alpha)?;
        let opt = |r: &Option<Rational>| r.as_ref().map(decimal).unwrap_or_default();
        let opt_pq = |r: &Option<Rational>| r.as_ref().map(format_rational).unwrap_or_default();
        let best = row.best_prior_value();
        table.push(vec![
            d.to_string(),
            decimal(alpha),
            format_rational(alpha),
            decimal(&row.beta_lower),
            format_rational(&row.beta_lower),
            decimal(&row.gamma0),
            format_rational(&row.gamma0),
            opt(&row.gamma_broad),
            opt_pq(&row.gamma_broad),
            row.mattila_ok.to_string(),
            opt(&best),
            opt_pq(&best),
            row.comparison.strictly_better.to_string(),
        ]);
        let mut j = json!({
            "d": d,
            "alpha": format_rational(alpha),
            "beta_lower": format_rational(&row.beta_lower),
            "gamma0": format_rational(&row.gamma0),
            "gamma_broad": row.gamma_broad.as_ref().map(format_rational),
            "mattila_ok": row.mattila_ok,
            "best_prior": row.comparison.best_prior().map(|(n, v)| json!({"name": n, "value": format_rational(v)})),
            "strictly_better": row.comparison.strictly_better,
        });
        if a.compare_prior {
            j["prior_bounds"] =
                serde_json::to_value(prior_bounds(d, alpha)?).expect("plain fields");
        }
        rows.push(j);
    }
    let mut out = Outcome::new("exponents", table);
    out.set("rows", rows);
    if a.check_recursion {
        let rep = check_recursion(d, &alphas)?;
        if !rep.ok() {
            out.fail(format!("{} recursion mismatches", rep.mismatches.len()));
        }
        out.set(
            "recursion",
            json!({"checked": rep.checked, "ok": rep.ok(), "mismatches": rep.mismatches}),
        );
    }
    Ok(out)
}

/// Exact stand-in for a floating α, rounded to 1e-9.
fn rational_of(x: f64) -> Rational {
    let scale = 1_000_000_000i64;
    rat((x * scale as f64).round() as i64, scale)
}

pub fn weights(a: &WeightsArgs) -> Result<Outcome> {
    let radii = list(&a.radii)?;
    let (h, default_alpha, extra, source) = if let Some(path) = &a.grid_file {
        let h = read_grid_file(path)?;
        (h, None, Vec::new(), format!("file:{}", path.display()))
    } else {
        let recipe = a.recipe.as_deref().unwrap_or("uniform");
        let d =
            a.d.ok_or_else(|| Error::Usage("--d is required with a recipe".into()))?;
        if !(1..=3).contains(&d) {
            return Err(Error::Usage(format!(
                "weights are sampled for d = 1, 2, 3; got {d}"
            )));
        }
        if let Some(m) = recipe.strip_prefix("from-measure:") {
            let mu = FractalMeasure::from_recipe(d, m)?;
            let h = weight_from_measure(
                &mu,
                a.r,
                BumpSpec {
                    radius: 1.0,
                    spacing: a.spacing,
                },
            )?;
            let extra: Vec<Vec<f64>> = atom_centers(&mu, 256)
                .into_iter()
                .map(|p| p.iter().map(|v| v * a.r).collect())
                .collect();
            (h, Some(mu.claimed_alpha), extra, recipe.to_string())
        } else {
            let w = WeightRecipe::parse(recipe)?;
            (
                w.build(d, a.r, a.spacing)?,
                Some(w.alpha(d)),
                Vec::new(),
                recipe.to_string(),
            )
        }
    };
    let alpha = match (&a.alpha, default_alpha) {
        (Some(s), _) => parse_real(s)?,
        (None, Some(x)) => x,
        (None, None) => return Err(Error::Usage("--alpha is required with --grid-file".into())),
    };
    if a.center_step <= 0.0 {
        return Err(Error::Usage("--center-step must be positive".into()));
    }
    let centers = default_centers(&h, a.center_step, &extra);
    let mut table = Table::new(&["radius", "worst_ratio", "constant", "pass"]);
    let mut worst: Option<(f64, Vec<f64>, f64)> = None;
    let mut per_radius = Vec::new();
    for &r in &radii {
        let cert = verify_weight(&h, alpha, a.constant, &[r], &centers)?;
        table.push(vec![
            num(r),
            num(cert.worst_ratio),
            num(a.constant),
            cert.pass.to_string(),
        ]);
        per_radius.push(json!({"radius": jnum(r), "worst_ratio": jnum(cert.worst_ratio), "worst_center": cert.worst_center}));
        if worst.as_ref().is_none_or(|w| cert.worst_ratio > w.0) {
            worst = Some((cert.worst_ratio, cert.worst_center.clone(), r));
        }
    }
    let (ratio, center, radius) = worst.unwrap_or((0.0, Vec::new(), 0.0));
    let mut out = Outcome::new("weights", table);
    if ratio > a.constant {
        out.fail(format!(
            "ball B({center:?}, {radius}) has mass {ratio} r^alpha > {} r^alpha",
            a.constant
        ));
    }
    out.set("source", source);
    out.set(
        "certificate",
        json!({
            "alpha": jnum(alpha),
            "constant": jnum(a.constant),
            "radii": radii.iter().map(|r| jnum(*r)).collect::<Vec<_>>(),
            "centers": centers.len(),
            "samples": centers.len() * radii.len(),
            "worst_ratio": jnum(ratio),
            "worst_center": center,
            "worst_radius": jnum(radius),
            "pass": ratio <= a.constant,
            "sampled": true,
        }),
    );
    out.set("per_radius", per_radius);
    out.set("integral", jnum(h.integral()));
    Ok(out)
}

pub fn decay(a: &DecayArgs) -> Result<Outcome> {
    if !(2..=3).contains(&a.d) {
        return Err(Error::Usage(format!(
            "decay experiments run in d = 2, 3; got {}",
            a.d
        )));
    }
    let mu = FractalMeasure::from_recipe(a.d, &a.recipe)?;
    let (alpha, alpha_exact) = match &a.alpha_claimed {
        Some(s) => (parse_real(s)?, parse_rational(s).ok()),
        None => (mu.claimed_alpha, None),
    };
    let alpha_rat = alpha_exact.unwrap_or_else(|| rational_of(alpha));
    let bound = if alpha_rat <= int(0) {
        int(0)
    } else {
        decay_bound(a.d as i64, &alpha_rat)?
    };
    let tolerance = a.tolerance.unwrap_or(if a.d == 2 { 0.15 } else { 0.2 });
    let fit = decay_fit(&mu, a.rmin, a.rmax, a.count, a.quad_nodes)?;
    let mut table = Table::new(&["R", "average", "log_R", "log_average"]);
    for (r, v) in fit.r_values.iter().zip(&fit.averages) {
        table.push(vec![num(*r), num(*v), num(r.ln()), num(v.ln())]);
    }
    let mut out = Outcome::new("decay", table);
    let floor = to_f64(&bound) - tolerance;
    if fit.fitted_beta < floor {
        out.fail(format!(
            "fitted beta {} below bound {} - {tolerance}",
            fit.fitted_beta,
            format_rational(&bound)
        ));
    }
    out.set("fitted_beta", jnum(fit.fitted_beta));
    out.set("stderr", jnum(fit.stderr));
    out.set("bound_beta", jnum(to_f64(&bound)));
    out.set("bound_beta_exact", format_rational(&bound));
    out.set("tolerance", jnum(tolerance));
    out.set("alpha", jnum(alpha));
    out.set("atoms", mu.len());
    out.set("max_valid_radius", jnum(max_valid_radius(&mu)));
    if a.plot {
        out.svg = Some(plot::render(&out.table)?);
    }
    Ok(out)
}

/// Profile recipes, with `random` drawing its seed from the run seed.
fn profile(d: usize, s: &str, seed: u64) -> Result<Profile> {
    if s.trim() == "random" {
        return Ok(Profile::random(d - 1, seed, 6));
    }
    Profile::parse(d, s)
}

pub fn extend_scaling(a: &ScalingArgs, seed: u64) -> Result<Outcome> {
    if !(2..=3).contains(&a.d) {
        return Err(Error::Usage(format!(
            "extend-scaling runs in d = 2, 3; got {}",
            a.d
        )));
    }
    let spec = ScalingSpec {
        dim: a.d,
        p: a.p,
        alpha: parse_rational(&a.alpha)?,
        radii: list(&a.radii)?,
        profile: profile(a.d, &a.f, seed)?,
        weight: WeightRecipe::parse(&a.weight)?,
        spacing: a.spacing,
    };
    let res = scaling_experiment(&spec)?;
    let mut table = Table::new(&["R", "norm", "log_R", "log_norm"]);
    for row in &res.rows {
        table.push(vec![
            num(row.r),
            num(row.norm),
            num(row.r.ln()),
            num(row.norm.ln()),
        ]);
    }
    let mut out = Outcome::new("extend-scaling", table);
    if !res.pass {
        out.fail(format!(
            "slope {} above the exponent {} plus tolerance",
            res.slope, res.exponent
        ));
    }
    out.set("slope", jnum(res.slope));
    out.set("stderr", jnum(res.stderr));
    out.set("exponent", jnum(res.exponent));
    out.set("tolerance", jnum(wfr_core::extension::SLOPE_TOLERANCE));
    if a.plot {
        out.svg = Some(plot::render(&out.table)?);
    }
    Ok(out)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Tangent => "tangent",
        Verdict::NotTangent => "not_tangent",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn join(v: &[i64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Reconstruction error above this fails the run.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-6;

pub fn wavepackets(a: &WavepacketArgs, seed: u64) -> Result<Outcome> {
    if !(2..=3).contains(&a.d) {
        return Err(Error::Usage(format!(
            "wave packets are built in d = 2, 3; got {}",
            a.d
        )));
    }
    let f = FrequencyProfile::sample(
        &profile(a.d, &a.f, seed)?,
        a.d,
        RuleSpec::midpoint_for_radius(a.r),
    )?;
    let params = PartitionParams {
        cap_transition: a.cap_transition,
        spatial_transition: a.spatial_transition,
    };
    let dec = decompose(&f, a.r, a.delta, params)?;
    let z = Variety::parse(a.d, &a.variety)?;
    let opts = TangencyOptions {
        line_samples: a.line_samples,
        seed,
        ..TangencyOptions::default()
    };
    let conc = concentration_test(&dec, &z, a.e, opts)?;
    let recon = dec.reconstruction_error(&f);

    let mut table = Table::new(&["id", "theta", "nu_index", "mass", "verdict"]);
    let mut tiles = Vec::new();
    for (p, v) in dec.pieces.iter().zip(&conc.verdicts) {
        if p.mass < a.min_mass * dec.f_norm {
            continue;
        }
        table.push(vec![
            p.tile.id(),
            join(&p.tile.theta),
            join(&p.tile.nu_index),
            num(p.mass),
            verdict_name(*v).to_string(),
        ]);
        tiles.push(json!({"id": p.tile.id(), "mass": jnum(p.mass), "verdict": verdict_name(*v)}));
    }
    let mut out = Outcome::new("wavepackets", table);
    if recon > RECONSTRUCTION_TOLERANCE {
        out.fail(format!(
            "reconstruction error {recon} above {RECONSTRUCTION_TOLERANCE}"
        ));
    }
    out.set("reconstruction_error", jnum(recon));
    out.set("f_norm", jnum(dec.f_norm));
    out.set("pieces", dec.pieces.len());
    out.set("dropped", dec.dropped);
    out.set("dropped_mass", jnum(dec.dropped_mass));
    out.set("caps", dec.caps.centers.len());
    out.set("nu_spacing", jnum(dec.nu_spacing));
    out.set("variety", z_display(&z));
    out.set(
        "concentration",
        json!({
            "E": jnum(a.e),
            "mass_tangent": jnum(conc.mass_in),
            "mass_not_tangent": jnum(conc.mass_out),
            "mass_inconclusive": jnum(conc.mass_inconclusive),
            "tangent": conc.tangent,
            "not_tangent": conc.not_tangent,
            "inconclusive": conc.inconclusive,
            "sampled": true,
        }),
    );
    out.set("tiles", tiles);

    if let Some(k) = a.broad_k {
        let p = a.p.unwrap_or(2.0 * a.d as f64 / (a.d as f64 - 1.0));
        let h = WeightRecipe::parse(&a.weight)?.build(a.d, a.r, a.spacing)?;
        let mut reports = Vec::new();
        let mut prev: Option<(usize, f64)> = None;
        let mut a_values: Vec<usize> = list(&a.broad_a)?.into_iter().map(|x| x as usize).collect();
        a_values.sort_unstable();
        a_values.dedup();
        for av in a_values {
            let rep = broad_norm(&f, a.r, BroadParams::new(k, av, p), &h)?;
            if let Some((pa, pv)) = prev {
                if rep.value > pv {
                    out.fail(format!(
                        "broad norm grew from A = {pa} to A = {av}: {pv} -> {}",
                        rep.value
                    ));
                }
            }
            prev = Some((av, rep.value));
            let mut j = serde_json::to_value(&rep).expect("plain fields");
            j["A"] = av.into();
            j["K"] = k.into();
            j["p"] = jnum(p);
            reports.push(j);
        }
        out.set("broad", reports);
    }
    Ok(out)
}

fn z_display(z: &Variety) -> Value {
    z.polys
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .into()
}
