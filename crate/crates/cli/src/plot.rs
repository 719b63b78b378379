//! Self-contained SVG plots of CSV artifacts.

use std::fmt::Write as _;
use std::path::Path;

use wfr_core::exponents::{
    beta_lower_piecewise, format_rational, gamma0_piecewise, gamma_broad_piecewise, to_f64,
    Rational,
};
use wfr_core::fit::fit_loglog;
use wfr_core::{Error, Result};

use crate::output::Table;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

pub fn read_csv(path: &Path) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        rows.push(rec.iter().map(str::to_string).collect());
    }
    Ok(Table { header, rows })
}

/// Picks the plot from the columns: log-log for tables with `log_R`, exponent
/// curves for tables with `alpha` and `beta_lower`.
pub fn render(t: &Table) -> Result<String> {
    if t.header.iter().all(|h| h.is_empty()) || t.rows.is_empty() {
        return Err(Error::Usage("empty CSV, nothing to plot".into()));
    }
    let has = |c: &str| t.header.iter().any(|h| h == c);
    if has("R") && has("log_R") {
        let y = t
            .header
            .iter()
            .find(|h| !h.starts_with("log_") && h.as_str() != "R")
            .ok_or_else(|| Error::Usage("log-log table without a value column".into()))?
            .clone();
        return loglog(t, &y);
    }
    if has("d") && has("alpha") && has("beta_lower") {
        return exponent_curves(t);
    }
    Err(Error::Usage(format!(
        "missing columns: need R, log_R and a value column, or d, alpha, beta_lower; got {}",
        t.header.join(", ")
    )))
}

/// Reads `csv`, renders it, and writes the SVG; nothing is written on error.
pub fn plot_file(csv: &Path, output: &Path) -> Result<()> {
    let svg = render(&read_csv(csv)?)?;
    std::fs::write(output, svg).map_err(|e| Error::Io(format!("{}: {e}", output.display())))
}

fn column(t: &Table, name: &str) -> Result<Vec<String>> {
    let k = t
        .header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Usage(format!("missing column {name}")))?;
    t.rows
        .iter()
        .map(|r| {
            r.get(k)
                .cloned()
                .ok_or_else(|| Error::Parse(format!("short row in column {name}")))
        })
        .collect()
}

fn numbers(t: &Table, name: &str) -> Result<Vec<f64>> {
    column(t, name)?
        .iter()
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("column {name}: not a number: {s:?}")))
        })
        .collect()
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn padded(mut x0: f64, mut x1: f64, mut y0: f64, mut y1: f64) -> Self {
        if x1 <= x0 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        if y1 <= y0 {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let (px, py) = (0.05 * (x1 - x0), 0.08 * (y1 - y0));
        Frame {
            x0: x0 - px,
            x1: x1 + px,
            y0: y0 - py,
            y1: y1 + py,
        }
    }

    fn sx(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(s, "<rect x=\"{l}\" y=\"{t}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>", r - l, b - t);
    let _ = writeln!(
        s,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        (l + r) / 2.0,
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {:.2})\">{}</text>",
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(ylabel)
    );
    let _ = f;
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 8.0)
        .unwrap_or(10.0 * mag);
    let mut out = Vec::new();
    let mut v = (lo / step).ceil() * step;
    while v <= hi + 1e-12 * span {
        out.push(if v.abs() < 1e-12 * span { 0.0 } else { v });
        v += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// `log y` against `log x` with the least-squares line and its slope.
fn loglog(t: &Table, ycol: &str) -> Result<String> {
    let xs = numbers(t, "R")?;
    let ys = numbers(t, ycol)?;
    let fit = fit_loglog(&xs, &ys)?;
    let lx: Vec<f64> = xs.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.log10()).collect();
    let fmin = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let fmax = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::padded(fmin(&lx), fmax(&lx), fmin(&ly), fmax(&ly));
    let mut s = String::new();
    header(&mut s, &format!("{ycol} against R (log-log)"));
    for v in ticks(f.x0, f.x1) {
        let x = f.sx(v);
        let _ = writeln!(
            s,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#ddd\"/>",
            TOP,
            HEIGHT - BOTTOM
        );
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
            HEIGHT - BOTTOM + 16.0,
            tick_label(10f64.powf(v))
        );
    }
    for v in ticks(f.y0, f.y1) {
        let y = f.sy(v);
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>",
            WIDTH - RIGHT
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{}</text>",
            LEFT - 6.0,
            y + 4.0,
            tick_label(v)
        );
    }
    axes(&mut s, &f, "R", ycol);
    // the fit is in natural logs; the slope is base-independent
    let line = |x: f64| {
        (fit.intercept + fit.slope * x * std::f64::consts::LN_10) / std::f64::consts::LN_10
    };
    let (a, b) = (fmin(&lx), fmax(&lx));
    let _ = writeln!(
        s,
        "<line class=\"fit\" x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" stroke-width=\"1.5\"/>",
        f.sx(a),
        f.sy(line(a)),
        f.sx(b),
        f.sy(line(b)),
        COLORS[1]
    );
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{}\"/>",
            f.sx(*x),
            f.sy(*y),
            COLORS[0]
        );
    }
    let _ = writeln!(
        s,
        "<text class=\"slope\" data-slope=\"{:?}\" x=\"{:.2}\" y=\"{:.2}\">slope = {:.4} ± {:.4}</text>",
        fit.slope,
        LEFT + 12.0,
        TOP + 20.0,
        fit.slope,
        fit.stderr
    );
    s.push_str("</svg>\n");
    Ok(s)
}

/// Union of the breakpoints of β, γ⁰ and, for d ≥ 4, the broad exponent.
pub fn exponent_breakpoints(d: i64) -> Result<Vec<Rational>> {
    let mut out = beta_lower_piecewise(d)?.breakpoints();
    out.extend(gamma0_piecewise(d)?.breakpoints());
    if d >= 4 {
        out.extend(gamma_broad_piecewise(d)?.breakpoints());
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// β, γ⁰ and the broad exponent against α with breakpoint markers.
fn exponent_curves(t: &Table) -> Result<String> {
    let ds = column(t, "d")?;
    let d: i64 = ds[0]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad d {:?}", ds[0])))?;
    if ds.iter().any(|v| v.trim() != ds[0].trim()) {
        return Err(Error::Usage("exponent table mixes dimensions".into()));
    }
    let alpha = numbers(t, "alpha")?;
    let mut curves: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
    for name in ["beta_lower", "gamma0", "gamma_broad"] {
        let Ok(col) = column(t, name) else { continue };
        let pts: Vec<(f64, f64)> = alpha
            .iter()
            .zip(&col)
            .filter(|(_, v)| !v.trim().is_empty())
            .map(|(a, v)| {
                v.trim()
                    .parse::<f64>()
                    .map(|y| (*a, y))
                    .map_err(|_| Error::Parse(format!("column {name}: {v:?}")))
            })
            .collect::<Result<_>>()?;
        if !pts.is_empty() {
            curves.push((name, pts));
        }
    }
    let ys: Vec<f64> = curves
        .iter()
        .flat_map(|(_, p)| p.iter().map(|q| q.1))
        .collect();
    let ymin = ys.iter().cloned().fold(0.0, f64::min);
    let ymax = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::padded(0.0, d as f64, ymin, ymax);
    let mut s = String::new();
    header(&mut s, &format!("Exponents for d = {d}"));
    for v in ticks(f.y0, f.y1) {
        let y = f.sy(v);
        let _ = writeln!(
            s,
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#eee\"/>",
            WIDTH - RIGHT
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            y + 4.0,
            tick_label(v)
        );
    }
    for k in 0..=d {
        let x = f.sx(k as f64);
        let _ = writeln!(
            s,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{k}</text>",
            HEIGHT - BOTTOM + 16.0
        );
    }
    for b in exponent_breakpoints(d)? {
        let x = f.sx(to_f64(&b));
        let label = format_rational(&b);
        let _ = writeln!(
            s,
            "<line class=\"breakpoint\" data-alpha=\"{label}\" x1=\"{x:.2}\" y1=\"{TOP}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>",
            HEIGHT - BOTTOM
        );
        let _ = writeln!(s, "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555\">{label}</text>", TOP - 4.0);
    }
    axes(&mut s, &f, "alpha", "exponent");
    for (k, (name, pts)) in curves.iter().enumerate() {
        let path: Vec<String> = pts
            .iter()
            .map(|(a, y)| format!("{:.2},{:.2}", f.sx(*a), f.sy(*y)))
            .collect();
        let _ = writeln!(
            s,
            "<polyline class=\"curve\" data-name=\"{name}\" points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>",
            path.join(" "),
            COLORS[k % COLORS.len()]
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"{}\">{name}</text>",
            LEFT + 12.0,
            TOP + 18.0 + 16.0 * k as f64,
            COLORS[k % COLORS.len()]
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
