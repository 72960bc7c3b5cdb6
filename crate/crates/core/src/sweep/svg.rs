//! Standalone SVG figures: heatmaps with dashed boundary overlays and line
//! plots. Colors use a fixed `[0, 1]` scale so figures compare across runs.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const NAN_COLOR: &str = "#bdbdbd";

/// Perceptually ordered anchors (dark blue to yellow), evenly spaced on [0, 1].
const STOPS: [(u8, u8, u8); 5] = [
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
];

/// Hex color for `x` on the fixed `[0, 1]` map; values are clamped and NaN is gray.
pub fn color(x: f64) -> String {
    if x.is_nan() {
        return NAN_COLOR.to_owned();
    }
    let x = x.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let lerp = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * f).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!(
        "#{:02x}{:02x}{:02x}",
        lerp(a.0, b.0),
        lerp(a.1, b.1),
        lerp(a.2, b.2)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Cell edges around sorted-or-not axis values, by index.
fn cell_edges(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let half = |a: f64, b: f64| 0.5 * (b - a);
            let left = if i > 0 {
                half(values[i - 1], values[i])
            } else if n > 1 {
                half(values[0], values[1])
            } else {
                0.5
            };
            let right = if i + 1 < n {
                half(values[i], values[i + 1])
            } else if n > 1 {
                half(values[n - 2], values[n - 1])
            } else {
                0.5
            };
            (values[i] - left, values[i] + right)
        })
        .collect()
}

/// Linear map from data to pixels.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new(d0: f64, d1: f64, p0: f64, p1: f64) -> Self {
        let (d0, d1) = if d1 > d0 {
            (d0, d1)
        } else {
            (d0 - 0.5, d0 + 0.5)
        };
        Self { d0, d1, p0, p1 }
    }

    fn at(&self, x: f64) -> f64 {
        self.p0 + (x - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

fn header(out: &mut String, title: &str) {
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
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + 0.5 * (WIDTH - LEFT - RIGHT),
        escape(title)
    );
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect()
}

fn tick_label(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

fn axes(out: &mut String, xs: Scale, ys: Scale, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in ticks(xs.d0, xs.d1) {
        let px = xs.at(t);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 19.0,
            tick_label(t)
        );
    }
    for t in ticks(ys.d0, ys.d1) {
        let py = ys.at(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        0.5 * (x0 + x1),
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{:.2}" text-anchor="middle" transform="rotate(-90 22 {:.2})">{}</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1),
        escape(ylabel)
    );
}

fn colorbar(out: &mut String) {
    let (x, w, top, bottom) = (WIDTH - RIGHT + 30.0, 18.0, TOP, HEIGHT - BOTTOM);
    let bands = 50;
    let h = (bottom - top) / bands as f64;
    for i in 0..bands {
        let v = (i as f64 + 0.5) / bands as f64;
        let y = bottom - (i + 1) as f64 * h;
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w}" height="{:.2}" fill="{}"/>"#,
            h + 0.5,
            color(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<rect x="{x:.2}" y="{top}" width="{w}" height="{:.2}" fill="none" stroke="black"/>"#,
        bottom - top
    );
    for v in [0.0, 0.5, 1.0] {
        let y = bottom - v * (bottom - top);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + w + 5.0,
            y + 4.0,
            tick_label(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">L̄</text>"#,
        x + 0.5 * w,
        top - 8.0
    );
}

/// Heatmap of `grid[i1][i2]` over `(x, y)` with dashed `boundary` polylines.
///
/// `x` runs horizontally and indexes the outer dimension of `grid`.
pub fn render_heatmap(
    title: &str,
    xlabel: &str,
    x: &[f64],
    ylabel: &str,
    y: &[f64],
    grid: &[Vec<f64>],
    boundary: &[Vec<[f64; 2]>],
) -> String {
    let xe = cell_edges(x);
    let ye = cell_edges(y);
    let (xmin, xmax) = xe
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| {
            (a.min(e.0), b.max(e.1))
        });
    let (ymin, ymax) = ye
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), e| {
            (a.min(e.0), b.max(e.1))
        });
    let xs = Scale::new(xmin, xmax, LEFT, WIDTH - RIGHT);
    let ys = Scale::new(ymin, ymax, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    header(&mut out, title);
    for (i, &(xa, xb)) in xe.iter().enumerate() {
        for (j, &(ya, yb)) in ye.iter().enumerate() {
            let v = grid
                .get(i)
                .and_then(|r| r.get(j))
                .copied()
                .unwrap_or(f64::NAN);
            let (px, py) = (xs.at(xa.min(xb)), ys.at(ya.max(yb)));
            let (w, h) = ((xs.at(xb) - xs.at(xa)).abs(), (ys.at(ya) - ys.at(yb)).abs());
            let _ = writeln!(
                out,
                r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                w + 0.3,
                h + 0.3,
                color(v)
            );
        }
    }
    for line in boundary.iter().filter(|l| l.len() >= 2) {
        let pts: Vec<String> = line
            .iter()
            .map(|p| format!("{:.2},{:.2}", xs.at(p[0]), ys.at(p[1])))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="white" stroke-width="2" stroke-dasharray="6,4"/>"#,
            pts.join(" ")
        );
    }
    axes(&mut out, xs, ys, xlabel, ylabel);
    colorbar(&mut out);
    out.push_str("</svg>\n");
    out
}

/// Line plot of `(x, y)` points on a fixed `y ∈ [0, 1]` range, with dashed
/// vertical markers at `vlines`. NaN points break the line.
pub fn render_line_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    points: &[(f64, f64)],
    vlines: &[f64],
    markers: bool,
) -> String {
    let (xmin, xmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
            (a.min(p.0), b.max(p.0))
        });
    let (xmin, xmax) = if xmin.is_finite() {
        (xmin, xmax)
    } else {
        (0.0, 1.0)
    };
    let xs = Scale::new(xmin, xmax, LEFT, WIDTH - RIGHT);
    let ys = Scale::new(0.0, 1.0, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    header(&mut out, title);
    for &v in vlines.iter().filter(|v| (xs.d0..=xs.d1).contains(*v)) {
        let px = xs.at(v);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="gray" stroke-width="1.5" stroke-dasharray="6,4"/>"#,
            HEIGHT - BOTTOM
        );
    }
    let mut segments: Vec<Vec<String>> = vec![Vec::new()];
    for &(x, y) in points {
        if y.is_finite() {
            segments.last_mut().expect("non-empty").push(format!(
                "{:.2},{:.2}",
                xs.at(x),
                ys.at(y.clamp(0.0, 1.0))
            ));
        } else if !segments.last().expect("non-empty").is_empty() {
            segments.push(Vec::new());
        }
    }
    for seg in segments.iter().filter(|s| !s.is_empty()) {
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1f4e99" stroke-width="1.5"/>"##,
            seg.join(" ")
        );
    }
    if markers {
        for &(x, y) in points.iter().filter(|p| p.1.is_finite()) {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#c0392b"/>"##,
                xs.at(x),
                ys.at(y.clamp(0.0, 1.0))
            );
        }
    }
    axes(&mut out, xs, ys, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}
