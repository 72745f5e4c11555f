//! Static SVG line charts. Output depends only on the data, so repeated
//! runs write identical files.

use std::fmt::Write as _;

use pfdsim::engine::TransientResult;
use pfdsim::experiments::ExperimentReport;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const TICKS: usize = 5;
const MAX_POINTS: usize = 2000;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

/// Line chart of `series`. `x_labels` replaces numeric x ticks with text
/// labels at the given positions.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
    x_labels: Option<&[(f64, String)]>,
) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = match x_labels {
        Some(labels) if !labels.is_empty() => range(labels.iter().map(|l| l.0)),
        _ => range(all().map(|p| p.0)),
    };
    let (y0, y1) = range(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let y = y0 + f * (y1 - y0);
        let py = sy(y);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick(y)
        );
    }
    let x_ticks: Vec<(f64, String)> = match x_labels {
        Some(labels) => labels.to_vec(),
        None => (0..=TICKS)
            .map(|k| {
                let x = x0 + k as f64 / TICKS as f64 * (x1 - x0);
                (x, tick(x))
            })
            .collect(),
    };
    for (x, label) in &x_ticks {
        let px = sx(*x);
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 18.0,
            escape(label)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 14.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let stride = s.points.len().div_ceil(MAX_POINTS).max(1);
        let mut pts = String::new();
        for (j, (x, y)) in s.points.iter().enumerate() {
            if j % stride == 0 || j + 1 == s.points.len() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(*x), sy(*y));
            }
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        );
        if s.points.len() <= 32 {
            for (x, y) in &s.points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    sx(*x),
                    sy(*y)
                );
            }
        }
        let ly = TOP + 16.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-2 && v.abs() < 1e4) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// A, B, UP and DN against time (ns).
pub fn waveforms(result: &TransientResult) -> pfdsim::Result<String> {
    let mut series = Vec::new();
    for name in ["A", "B", "UP", "DN"] {
        let w = result.waveform(name)?;
        series.push(Series {
            name: name.to_string(),
            points: w
                .time
                .iter()
                .zip(w.values)
                .map(|(t, v)| (t * 1e9, *v))
                .collect(),
        });
    }
    Ok(line_chart(
        "PFD waveforms",
        "time (ns)",
        "voltage (V)",
        &series,
        None,
    ))
}

fn metric_series(
    rows: &[ExperimentReport],
    name: &str,
    x: impl Fn(&ExperimentReport) -> f64,
    y: impl Fn(&ExperimentReport) -> Option<f64>,
) -> Vec<Series> {
    vec![Series {
        name: name.to_string(),
        points: rows
            .iter()
            .filter_map(|r| y(r).map(|v| (x(r), v)))
            .collect(),
    }]
}

/// Rise time, power and any measured searches against width.
pub fn width_plots(rows: &[ExperimentReport]) -> Vec<(String, String)> {
    let w = |r: &ExperimentReport| r.point.width * 1e9;
    let mut out = vec![
        (
            "plot_rise_time.svg".to_string(),
            line_chart(
                "Output rise time vs width",
                "width (nm)",
                "rise time (ps)",
                &metric_series(rows, "rise time", w, |r| r.up_rise_time.map(|t| t * 1e12)),
                None,
            ),
        ),
        (
            "plot_power.svg".to_string(),
            line_chart(
                "Average power vs width",
                "width (nm)",
                "power (uW)",
                &metric_series(rows, "power", w, |r| Some(r.avg_power * 1e6)),
                None,
            ),
        ),
    ];
    if rows.iter().any(|r| r.f_max.is_some()) {
        out.push((
            "plot_fmax.svg".to_string(),
            line_chart(
                "f_max vs width",
                "width (nm)",
                "f_max (GHz)",
                &metric_series(rows, "f_max", w, |r| r.f_max.map(|f| f * 1e-9)),
                None,
            ),
        ));
    }
    if rows.iter().any(|r| r.dead_zone.is_some()) {
        out.push((
            "plot_dead_zone.svg".to_string(),
            line_chart(
                "Dead zone vs width",
                "width (nm)",
                "dead zone (ps)",
                &metric_series(rows, "dead zone", w, |r| r.dead_zone.map(|d| d * 1e12)),
                None,
            ),
        ));
    }
    out
}

/// Rise time per corner, in row order.
pub fn corner_plot(rows: &[ExperimentReport]) -> String {
    let labels: Vec<(f64, String)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (i as f64, r.point.corner.name.to_string()))
        .collect();
    let series = vec![Series {
        name: "rise time".to_string(),
        points: rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.up_rise_time.map(|t| (i as f64, t * 1e12)))
            .collect(),
    }];
    line_chart(
        "Output rise time per corner",
        "corner",
        "rise time (ps)",
        &series,
        Some(&labels),
    )
}
