//! A small SVG chart writer: axes with ticks, polylines, scatter points and
//! dashed reference curves.

use std::fmt::Write as _;

use anyhow::{bail, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 190.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Scatter,
    Dashed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Legend entries beyond this many are dropped.
    pub legend_limit: usize,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - pad, hi + pad)
    }
}

impl Chart {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Chart {
        Chart { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: vec![], legend_limit: 12 }
    }

    pub fn push(&mut self, name: &str, points: Vec<(f64, f64)>, style: Style) {
        self.series.push(Series { name: name.into(), points, style });
    }

    /// Renders to SVG text; byte-for-byte deterministic in the input.
    pub fn render(&self) -> Result<String> {
        let pts = || self.series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
        if pts().next().is_none() {
            bail!("chart {:?} has no finite points", self.title);
        }
        let (x0, x1) = padded(pts().map(|p| p.0).fold(f64::INFINITY, f64::min), pts().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
        let (y0, y1) = padded(pts().map(|p| p.1).fold(f64::INFINITY, f64::min), pts().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max));
        let pw = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_TOP + ph - (y - y0) / (y1 - y0) * ph;

        let mut out = String::new();
        writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#)?;
        writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
        writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, MARGIN_LEFT + pw / 2.0, escape(&self.title))?;
        writeln!(
            out,
            r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        )?;
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (sx(xv), sy(yv));
            writeln!(out, r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#888"/>"##, MARGIN_TOP + ph, MARGIN_TOP + ph + 5.0)?;
            writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_TOP + ph + 18.0, fmt_tick(xv))?;
            writeln!(out, r##"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT}" y2="{py:.2}" stroke="#888"/>"##, MARGIN_LEFT - 5.0)?;
            writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN_LEFT - 8.0, py + 4.0, fmt_tick(yv))?;
        }
        writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, MARGIN_LEFT + pw / 2.0, HEIGHT - 10.0, escape(&self.x_label))?;
        writeln!(
            out,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            MARGIN_TOP + ph / 2.0,
            escape(&self.y_label)
        )?;

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let finite: Vec<(f64, f64)> = s.points.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
            match s.style {
                Style::Scatter => {
                    for (x, y) in &finite {
                        writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(*x), sy(*y))?;
                    }
                }
                Style::Line | Style::Dashed => {
                    let coords: Vec<String> = finite.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
                    let dash = if s.style == Style::Dashed { r#" stroke-dasharray="6 4""# } else { "" };
                    writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, coords.join(" "))?;
                }
            }
            if k < self.legend_limit {
                let ly = MARGIN_TOP + 10.0 + 16.0 * k as f64;
                let lx = WIDTH - MARGIN_RIGHT + 12.0;
                writeln!(out, r#"<rect x="{lx}" y="{:.2}" width="12" height="4" fill="{color}"/>"#, ly - 4.0)?;
                writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, lx + 18.0, ly + 2.0, escape(&s.name))?;
            }
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministically() {
        let mut c = Chart::new("t", "x", "y");
        c.push("a", vec![(1.0, 2.0), (2.0, 3.0)], Style::Line);
        c.push("b", vec![(1.5, 2.5)], Style::Scatter);
        c.push("<ref>", vec![(1.0, 1.0), (2.0, 4.0)], Style::Dashed);
        let a = c.render().unwrap();
        assert_eq!(a, c.render().unwrap());
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert!(a.contains("stroke-dasharray") && a.contains("<circle") && a.contains("&lt;ref&gt;"));
    }

    #[test]
    fn empty_chart_is_an_error() {
        let mut c = Chart::new("t", "x", "y");
        assert!(c.render().is_err());
        c.push("nan", vec![(f64::NAN, 1.0)], Style::Line);
        assert!(c.render().is_err());
    }

    #[test]
    fn single_point_gets_a_range() {
        let mut c = Chart::new("t", "x", "y");
        c.push("a", vec![(4.0, 2.0)], Style::Scatter);
        assert!(!c.render().unwrap().contains("NaN"));
    }
}
