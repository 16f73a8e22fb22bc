//! Minimal SVG line charts for metrics logs. Output is a pure function of the
//! input, so identical logs give identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{rotate_to_frame, Vec2};
use crate::metrics::MetricsTable;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;
const MAX_POINTS: usize = 2000;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: Option<&'static str>,
    pub dashed: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            color: None,
            dashed: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Same scale on both axes (for trajectories).
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in series.iter().flat_map(|s| s.points.iter()) {
        if x.is_finite() && y.is_finite() {
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
    }
    if !b.0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    let pad = |lo: f64, hi: f64| {
        if hi - lo < 1e-12 {
            let w = lo.abs().max(1.0) * 0.05;
            (lo - w, hi + w)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = pad(b.0, b.1);
    let (y0, y1) = pad(b.2, b.3);
    (x0, x1, y0, y1)
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let m = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    pub fn to_svg(&self) -> String {
        let (mut x0, mut x1, mut y0, mut y1) = bounds(&self.series);
        let pw = WIDTH - MARGIN_L - MARGIN_R;
        let ph = HEIGHT - MARGIN_T - MARGIN_B;
        if self.equal_aspect {
            let scale = ((x1 - x0) / pw).max((y1 - y0) / ph);
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            x0 = cx - scale * pw / 2.0;
            x1 = cx + scale * pw / 2.0;
            y0 = cy - scale * ph / 2.0;
            y1 = cy + scale * ph / 2.0;
        }
        let px = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| MARGIN_T + ph - (y - y0) / (y1 - y0) * ph;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            MARGIN_L + pw / 2.0,
            escape(&self.title)
        );
        for t in ticks(x0, x1) {
            let x = px(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                MARGIN_T,
                MARGIN_T + ph,
                MARGIN_T + ph + 16.0,
                label(t)
            );
        }
        for t in ticks(y0, y1) {
            let y = py(t);
            let _ = writeln!(
                svg,
                r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_L,
                MARGIN_L + pw,
                MARGIN_L - 6.0,
                y + 4.0,
                label(t)
            );
        }
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_L + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = s.color.unwrap_or(PALETTE[k % PALETTE.len()]);
            let stride = s.points.len().div_ceil(MAX_POINTS).max(1);
            let mut pts = String::new();
            for (j, &(x, y)) in s.points.iter().enumerate() {
                if (j % stride == 0 || j + 1 == s.points.len()) && x.is_finite() && y.is_finite() {
                    let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
                }
            }
            let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.3"{dash}/>"#,
                pts.trim_end()
            );
            let ly = MARGIN_T + 14.0 + 18.0 * k as f64;
            let lx = MARGIN_L + pw + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
                lx + 22.0,
                lx + 28.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_svg()).map_err(|e| Error::io(path, e))
    }
}

fn col(table: &MetricsTable, name: &str) -> Vec<f64> {
    table.column(name).expect("column present in a parsed table")
}

fn time_series(table: &MetricsTable, field: &str) -> Vec<Series> {
    let t = col(table, "t");
    (1..=table.n_agents)
        .map(|i| {
            let v = col(table, &format!("a{i}_{field}"));
            Series::new(format!("agent {i}"), t.iter().copied().zip(v).collect())
        })
        .collect()
}

fn trajectory(table: &MetricsTable) -> Chart {
    let mut series = Vec::new();
    for i in 1..=table.n_agents {
        let x = col(table, &format!("a{i}_x"));
        let y = col(table, &format!("a{i}_y"));
        series.push(Series::new(format!("agent {i}"), x.into_iter().zip(y).collect()));
    }
    for j in 1..=table.n_vehicles {
        let x = col(table, &format!("t{j}_x"));
        let y = col(table, &format!("t{j}_y"));
        let mut s = Series::new(if j == 1 { "convoy".to_string() } else { String::new() }, x.into_iter().zip(y).collect());
        s.color = Some("#404040");
        series.push(s);
    }
    if let Some(last) = table.rows.last() {
        let get = |name: &str| last[table.header.iter().position(|h| h == name).unwrap()];
        let center = Vec2::new(get("orbit_cx"), get("orbit_cy"));
        let (theta, a, b) = (get("orbit_theta"), get("orbit_a"), get("orbit_b"));
        let pts = (0..=360)
            .map(|k| {
                let u = (k as f64).to_radians();
                let p = center + rotate_to_frame(Vec2::new(a * u.cos(), b * u.sin()), -theta);
                (p.x, p.y)
            })
            .collect();
        let mut s = Series::new("final orbit", pts);
        s.color = Some("black");
        s.dashed = true;
        series.push(s);
    }
    Chart {
        title: "Trajectories".into(),
        x_label: "x (m)".into(),
        y_label: "y (m)".into(),
        equal_aspect: true,
        series,
    }
}

/// Writes the six standard panels for a metrics log into `out_dir`.
pub fn plot_metrics(table: &MetricsTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let panel = |title: &str, field: &str, y_label: &str| Chart {
        title: title.into(),
        x_label: "t (s)".into(),
        y_label: y_label.into(),
        equal_aspect: false,
        series: time_series(table, field),
    };
    let charts = [
        ("trajectory.svg", trajectory(table)),
        ("gamma.svg", panel("Level-set value", "gamma", "gamma")),
        ("spacing_error.svg", panel("Spacing error", "ds", "D_s (rad)")),
        ("speed.svg", panel("Speed command", "v_cmd", "V (m/s)")),
        ("turn_rate.svg", panel("Turn-rate command", "omega_cmd", "omega (rad/s)")),
        ("altitude.svg", panel("Altitude", "z", "z (m)")),
    ];
    let mut paths = Vec::new();
    for (name, chart) in charts {
        let path = out_dir.join(name);
        chart.write(&path)?;
        paths.push(path);
    }
    Ok(paths)
}
