//! Minimal self-contained SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Overrides the palette colour.
    pub color: Option<String>,
    pub closed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, color: None, closed: false }
    }
}

#[derive(Clone, Copy, PartialEq)]
pub enum Axes {
    LogLog,
    /// Linear with equal scales, for drawing shapes.
    Equal,
    /// Linear x, logarithmic y.
    SemiLogY,
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub axes: Axes,
    pub series: Vec<Series>,
    /// Legend is drawn only for charts with few series.
    pub legend: bool,
}

fn tf(axes: Axes, (x, y): (f64, f64)) -> Option<(f64, f64)> {
    let p = match axes {
        Axes::LogLog => (x.log10(), y.log10()),
        Axes::SemiLogY => (x, y.log10()),
        _ => (x, y),
    };
    (p.0.is_finite() && p.1.is_finite()).then_some(p)
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.round() as i64)
    } else {
        format!("{:.3}", v)
    }
}

impl Chart {
    pub fn render(&self) -> String {
        let pts: Vec<Vec<(f64, f64)>> =
            self.series.iter().map(|s| s.points.iter().filter_map(|&p| tf(self.axes, p)).collect()).collect();
        let (mut x0, mut x1) = bounds(pts.iter().flatten().map(|p| p.0));
        let (mut y0, mut y1) = bounds(pts.iter().flatten().map(|p| p.1));
        if self.axes == Axes::LogLog {
            (x0, x1, y0, y1) = (x0.floor(), x1.ceil(), y0.floor(), y1.ceil());
        }
        let (pw, ph) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
        if self.axes == Axes::Equal {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            (x0, x1) = (cx - 0.5 * scale * pw, cx + 0.5 * scale * pw);
            (y0, y1) = (cy - 0.5 * scale * ph, cy + 0.5 * scale * ph);
        }
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ =
            writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{MARGIN}" y="{MARGIN}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        let (log_x, log_y) = (self.axes == Axes::LogLog, matches!(self.axes, Axes::LogLog | Axes::SemiLogY));
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
            let (xp, yp) = (sx(xv), sy(yv));
            let _ = writeln!(s, r##"<line x1="{xp:.2}" y1="{}" x2="{xp:.2}" y2="{}" stroke="#ddd"/>"##, MARGIN, HEIGHT - MARGIN);
            let _ = writeln!(s, r##"<line x1="{}" y1="{yp:.2}" x2="{}" y2="{yp:.2}" stroke="#ddd"/>"##, MARGIN, WIDTH - MARGIN);
            let _ = writeln!(
                s,
                r#"<text x="{xp:.2}" y="{}" text-anchor="middle">{}</text>"#,
                HEIGHT - MARGIN + 16.0,
                tick_label(xv, log_x)
            );
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
                MARGIN - 4.0,
                yp + 4.0,
                tick_label(yv, log_y)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (k, (series, p)) in self.series.iter().zip(&pts).enumerate() {
            if p.is_empty() {
                continue;
            }
            let color = series.color.clone().unwrap_or_else(|| PALETTE[k % PALETTE.len()].to_string());
            let coords: Vec<String> = p.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
            let tag = if series.closed { "polygon" } else { "polyline" };
            let _ = writeln!(s, r#"<{tag} points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" "));
            if p.len() <= 12 {
                for &(x, y) in p {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(x), sy(y));
                }
            }
            if self.legend {
                let ly = MARGIN + 16.0 + 16.0 * k as f64;
                let lx = WIDTH - MARGIN - 150.0;
                let _ =
                    writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
                let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.label));
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Blue-to-red colour for position `t ∈ [0, 1]`.
pub fn ramp_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    format!("rgb({},{},{})", (40.0 + 200.0 * t) as u8, 60, (220.0 - 180.0 * t) as u8)
}
