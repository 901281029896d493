//! Deterministic SVG figures: samples-to-convergence against S, and mean
//! error against timestep at one lattice size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::aggregate::{read_summary_csv, SummaryRow};
use super::experiment::{nearest_size, CellKey};
use super::HarnessError;

/// Per learner, one `(timestep, mean_error)` curve per seed.
pub type CurveSet = BTreeMap<String, Vec<Vec<(u64, f64)>>>;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
/// Sample points per averaged curve.
const CURVE_POINTS: usize = 400;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        Self {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open_svg(out: &mut String, title: &str, frame: &Frame, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(out, r#"<g class="axes" stroke="black">"#);
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#
    );
    let _ = writeln!(
        out,
        r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/>"#
    );
    out.push_str("</g>\n<g class=\"ticks\">\n");
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = frame.x.0 + f * (frame.x.1 - frame.x.0);
        let px = frame.px(xv);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(xv)
        );
        let yv = frame.y.0 + f * (frame.y.1 - frame.y.0);
        let py = frame.py(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn no_data(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<text class="no-data" x="{:.2}" y="{:.2}" text-anchor="middle" font-size="16" fill="gray">no data</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0
    );
}

fn legend_entry(out: &mut String, index: usize, label: &str, color: &str) {
    let y = TOP + 10.0 + 20.0 * index as f64;
    let x = WIDTH - RIGHT + 15.0;
    let _ = writeln!(
        out,
        r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
        x + 20.0,
        x + 26.0,
        y + 4.0,
        escape(label)
    );
}

fn polyline(out: &mut String, frame: &Frame, pts: &[(f64, f64)], color: &str) {
    out.push_str("<polyline fill=\"none\" stroke-width=\"2\" stroke=\"");
    out.push_str(color);
    out.push_str("\" points=\"");
    for (i, &(x, y)) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", frame.px(x), frame.py(y));
    }
    out.push_str("\"/>\n");
}

/// Mean samples-to-convergence against S, one series per learner with at
/// least one converged size, error bars of one standard deviation.
pub fn figure_a(summary: &[SummaryRow]) -> String {
    let mut series: BTreeMap<&str, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for row in summary {
        if let Some(m) = row.mean_samples {
            series.entry(&row.learner).or_default().push((
                row.states as f64,
                m,
                row.std_samples.unwrap_or(0.0),
            ));
        }
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    let all = series.values().flatten();
    let x_lo = all.clone().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = all.clone().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_hi = all.map(|p| p.1 + p.2).fold(0.0, f64::max);
    let frame = if series.is_empty() {
        Frame::new((0.0, 1.0), (0.0, 1.0))
    } else {
        Frame::new((x_lo, x_hi), (0.0, y_hi * 1.05))
    };
    let mut out = String::new();
    open_svg(
        &mut out,
        "Samples to ε-optimality vs state-space size",
        &frame,
        "states S",
        "samples to convergence",
    );
    if series.is_empty() {
        no_data(&mut out);
    }
    for (i, (learner, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<g class="series" data-learner="{}">"#,
            escape(learner)
        );
        let line: Vec<(f64, f64)> = pts.iter().map(|p| (p.0, p.1)).collect();
        polyline(&mut out, &frame, &line, color);
        for &(x, m, sd) in pts {
            let (px, py) = (frame.px(x), frame.py(m));
            let _ = writeln!(
                out,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{px:.2}" cy="{py:.2}" r="3.5" fill="{color}"/>"#,
                frame.py(m - sd),
                frame.py(m + sd)
            );
        }
        out.push_str("</g>\n");
        legend_entry(&mut out, i, learner, color);
    }
    out.push_str("</svg>\n");
    out
}

/// Value of a step curve at `t`, holding the last value past the end.
fn value_at(curve: &[(u64, f64)], t: f64) -> f64 {
    let idx = curve.partition_point(|p| (p.0 as f64) <= t);
    curve[idx.saturating_sub(1)].1
}

/// Seed-averaged mean-error curves against timestep at lattice size
/// `states`, with dashed lines at `±epsilon`. Each curve is resampled at a
/// fixed number of evenly spaced timesteps; shorter runs hold their last value.
pub fn figure_b(curves: &CurveSet, states: usize, epsilon: f64) -> String {
    let nonempty: BTreeMap<&str, Vec<&Vec<(u64, f64)>>> = curves
        .iter()
        .map(|(l, cs)| {
            (
                l.as_str(),
                cs.iter().filter(|c| !c.is_empty()).collect::<Vec<_>>(),
            )
        })
        .filter(|(_, cs)| !cs.is_empty())
        .collect();
    let t_max = nonempty
        .values()
        .flatten()
        .filter_map(|c| c.last().map(|p| p.0))
        .max()
        .unwrap_or(0) as f64;
    let grid: Vec<f64> = (0..=CURVE_POINTS)
        .map(|i| t_max * i as f64 / CURVE_POINTS as f64)
        .collect();
    let averaged: Vec<(&str, Vec<(f64, f64)>)> = nonempty
        .iter()
        .map(|(l, cs)| {
            let pts = grid
                .iter()
                .map(|&t| {
                    let sum: f64 = cs.iter().map(|c| value_at(c, t)).sum();
                    (t, sum / cs.len() as f64)
                })
                .collect();
            (*l, pts)
        })
        .collect();
    let ys = averaged.iter().flat_map(|(_, p)| p.iter().map(|q| q.1));
    let y_lo = ys.clone().fold(-epsilon, f64::min);
    let y_hi = ys.fold(epsilon, f64::max);
    let frame = if averaged.is_empty() {
        Frame::new((0.0, 1.0), (-epsilon, epsilon))
    } else {
        Frame::new((0.0, t_max), (y_lo, y_hi + 0.05 * (y_hi - y_lo)))
    };
    let mut out = String::new();
    open_svg(
        &mut out,
        &format!("Mean error vs samples (S = {states})"),
        &frame,
        "timestep",
        "mean error vs oracle",
    );
    for level in [epsilon, -epsilon] {
        let py = frame.py(level);
        let _ = writeln!(
            out,
            r#"<line class="epsilon" x1="{LEFT:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="gray" stroke-dasharray="5,4"/>"#,
            WIDTH - RIGHT
        );
    }
    if averaged.is_empty() {
        no_data(&mut out);
    }
    for (i, (learner, pts)) in averaged.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            out,
            r#"<g class="series" data-learner="{}">"#,
            escape(learner)
        );
        polyline(&mut out, &frame, pts, color);
        out.push_str("</g>\n");
        legend_entry(&mut out, i, learner, color);
    }
    out.push_str("</svg>\n");
    out
}

fn read_trace_points(path: &Path) -> Result<Vec<(u64, f64)>, HarnessError> {
    let malformed = |message: String| HarnessError::Malformed {
        path: path.display().to_string(),
        message,
    };
    let mut reader = csv::Reader::from_path(path)?;
    let mut pts = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let t = rec.get(0).and_then(|v| v.parse().ok());
        let e = rec.get(1).and_then(|v| v.parse().ok());
        match (t, e) {
            (Some(t), Some(e)) => pts.push((t, e)),
            _ => return Err(malformed(format!("bad trace row {rec:?}"))),
        }
    }
    Ok(pts)
}

/// Parses `<learner>_<S>_<seed>`; learner labels may contain underscores.
fn parse_stem(stem: &str) -> Option<CellKey> {
    let mut parts = stem.rsplitn(3, '_');
    let seed = parts.next()?.parse().ok()?;
    let states = parts.next()?.parse().ok()?;
    let learner = parts.next()?.to_string();
    Some(CellKey {
        learner,
        states,
        seed,
    })
}

/// Regenerates both figures from an experiment output directory.
pub fn plot_dir(dir: &Path) -> Result<(), HarnessError> {
    let summary = read_summary_csv(&dir.join("summary.csv"))?;
    let config_path = dir.join("config.json");
    let config: serde_json::Value = serde_json::from_str(&fs::read_to_string(&config_path)?)?;
    let missing = |field: &str| HarnessError::Malformed {
        path: config_path.display().to_string(),
        message: format!("missing {field}"),
    };
    let epsilon = config["config"]["experiment"]["epsilon"]
        .as_f64()
        .ok_or_else(|| missing("config.experiment.epsilon"))?;
    let wanted = config["figure_b_size"]
        .as_u64()
        .ok_or_else(|| missing("figure_b_size"))? as usize;

    let mut traces: BTreeMap<CellKey, Vec<(u64, f64)>> = BTreeMap::new();
    let traces_dir = dir.join("traces");
    if traces_dir.is_dir() {
        for entry in fs::read_dir(&traces_dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("csv") {
                continue;
            }
            let Some(key) = path
                .file_stem()
                .and_then(|s| s.to_str())
                .and_then(parse_stem)
            else {
                continue;
            };
            traces.insert(key, read_trace_points(&path)?);
        }
    }
    let sizes: Vec<usize> = summary.iter().map(|r| r.states).collect();
    let states = nearest_size(sizes, wanted).unwrap_or(wanted);
    let mut curves = CurveSet::new();
    for (key, pts) in traces.into_iter().filter(|(k, _)| k.states == states) {
        curves.entry(key.learner).or_default().push(pts);
    }
    let plots = dir.join("plots");
    fs::create_dir_all(&plots)?;
    fs::write(plots.join("figure_a.svg"), figure_a(&summary))?;
    fs::write(
        plots.join("figure_b.svg"),
        figure_b(&curves, states, epsilon),
    )?;
    Ok(())
}
