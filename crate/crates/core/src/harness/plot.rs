//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::output::SweepRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Use a log x axis in the right-hand panel.
    pub log_x: bool,
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 50.0;
const GAP: f64 = 90.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        Axis { lo, hi, log }
    }

    /// Position in [0, 1], or None when the value cannot be shown.
    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log { (v > 0.0).then(|| v.log10())? } else { v };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn tick_label(&self, f: f64) -> String {
        let v = self.lo + f * (self.hi - self.lo);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.3e}")
        }
    }
}

fn polyline(out: &mut String, pts: &[(f64, f64)], style: &str) {
    let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, coords.join(" "));
}

fn panel(out: &mut String, rows: &[SweepRow], spec: &PlotSpec, x0: f64, log: bool) {
    let xs = Axis::fit(rows.iter().map(|r| r.sweep), log && spec.log_x);
    let ys = Axis::fit(rows.iter().flat_map(|r| [r.mean_abs_error, r.theory]), log);
    let to_px = |x: f64, y: f64| -> Option<(f64, f64)> {
        Some((x0 + xs.frac(x)? * PANEL_W, MARGIN_T + (1.0 - ys.frac(y)?) * PANEL_H))
    };
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{MARGIN_T}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let px = x0 + f * PANEL_W;
        let py = MARGIN_T + (1.0 - f) * PANEL_H;
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            MARGIN_T + PANEL_H + 15.0,
            xs.tick_label(f)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{py:.2}" font-size="10" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            ys.tick_label(f)
        );
    }
    let scale = if log { "log" } else { "linear" };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{} ({scale})</text>"#,
        x0 + PANEL_W / 2.0,
        MARGIN_T + PANEL_H + 35.0,
        spec.x_label
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">{} ({scale})</text>"#,
        x0,
        MARGIN_T - 8.0,
        spec.y_label
    );
    let measured: Vec<_> = rows.iter().filter_map(|r| to_px(r.sweep, r.mean_abs_error)).collect();
    let theory: Vec<_> = rows.iter().filter_map(|r| to_px(r.sweep, r.theory)).collect();
    polyline(out, &theory, r#"stroke="red" stroke-dasharray="6,4""#);
    polyline(out, &measured, r#"stroke="blue""#);
    for (x, y) in measured {
        let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="blue"/>"#);
    }
}

/// Two panels of measured (blue) and predicted (red, dashed) error: linear
/// axes on the left, log axes on the right.
pub fn render_svg(rows: &[SweepRow], spec: &PlotSpec) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::InvalidParameter("no rows to plot".into()));
    }
    let width = MARGIN_L + 2.0 * PANEL_W + GAP + 30.0;
    let height = MARGIN_T + PANEL_H + 70.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN_L}" y="20" font-size="14">{}</text>"#, escape(&spec.title));
    panel(&mut out, rows, spec, MARGIN_L, false);
    panel(&mut out, rows, spec, MARGIN_L + PANEL_W + GAP, true);
    let ly = height - 12.0;
    let _ = writeln!(
        out,
        r#"<line x1="{MARGIN_L}" y1="{ly}" x2="{}" y2="{ly}" stroke="blue"/><text x="{}" y="{}" font-size="11">measured</text>"#,
        MARGIN_L + 20.0,
        MARGIN_L + 25.0,
        ly + 4.0
    );
    let _ = writeln!(
        out,
        r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="red" stroke-dasharray="6,4"/><text x="{}" y="{}" font-size="11">theory</text>"#,
        MARGIN_L + 110.0,
        MARGIN_L + 130.0,
        MARGIN_L + 135.0,
        ly + 4.0
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_plot(rows: &[SweepRow], spec: &PlotSpec, path: &Path) -> Result<()> {
    fs::write(path, render_svg(rows, spec)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_both_curves_and_is_deterministic() {
        let rows: Vec<SweepRow> = (1..=4)
            .map(|i| SweepRow {
                sweep: i as f64,
                mean_abs_error: 1.0 / i as f64,
                std_error: 0.01,
                theory: 1.1 / i as f64,
                n: 10,
            })
            .collect();
        let spec = PlotSpec { title: "t <x>".into(), x_label: "d".into(), y_label: "err".into(), log_x: true };
        let a = render_svg(&rows, &spec).unwrap();
        assert_eq!(a, render_svg(&rows, &spec).unwrap());
        assert!(a.starts_with("<svg"));
        assert_eq!(a.matches("<polyline").count(), 4);
        assert!(a.contains("(log)"));
        assert!(a.contains("t &lt;x&gt;"));
        assert!(render_svg(&[], &spec).is_err());
    }
}
