//! SVG line plots of mean regret with a standard-error band.

use std::fmt::Write;

use super::run::{mean_trace, RegretTrace};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MAX_POINTS: usize = 1000;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// One plotted series: the mean over all traces sharing `(alg, env)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Groups traces by `(alg, env)` in order of first appearance.
pub fn group_series(traces: &[RegretTrace]) -> Vec<Series> {
    let mut keys: Vec<(String, String)> = Vec::new();
    for t in traces {
        let key = (t.label.alg.clone(), t.label.env.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(alg, env)| {
            let members: Vec<&RegretTrace> = traces
                .iter()
                .filter(|t| t.label.alg == alg && t.label.env == env)
                .collect();
            let (mean, std_error) = mean_trace(&members);
            Series {
                name: format!("{alg} / {env}"),
                mean,
                std_error,
            }
        })
        .collect()
}

fn nice_ticks(max: f64) -> Vec<f64> {
    if max <= 0.0 {
        return vec![0.0, 1.0];
    }
    let raw = max / 5.0;
    let magnitude = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * magnitude)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * magnitude);
    let count = (max / step).ceil() as usize;
    (0..=count).map(|i| i as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn sample_indices(len: usize) -> Vec<usize> {
    if len <= MAX_POINTS {
        return (0..len).collect();
    }
    let mut idx: Vec<usize> = (0..MAX_POINTS)
        .map(|i| i * (len - 1) / (MAX_POINTS - 1))
        .collect();
    idx.dedup();
    idx
}

/// Renders the traces as a standalone SVG document.
pub fn emit_plot(traces: &[RegretTrace], title: &str) -> String {
    let series = group_series(traces);
    let x_max = series.iter().map(|s| s.mean.len()).max().unwrap_or(0).max(1) as f64;
    let y_top = series
        .iter()
        .flat_map(|s| s.mean.iter().zip(&s.std_error).map(|(m, e)| m + e))
        .fold(0.0, f64::max);
    let y_ticks = nice_ticks(y_top);
    let y_max = *y_ticks.last().unwrap();
    let x_ticks = nice_ticks(x_max);
    let x_axis_max = *x_ticks.last().unwrap();
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |step: f64| LEFT + step / x_axis_max * plot_w;
    let py = |v: f64| TOP + plot_h - v / y_max * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        LEFT + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<g class="axes" stroke="black" fill="none"><line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{:.1}"/></g>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h,
        TOP + plot_h
    );
    for &tx in &x_ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            px(tx),
            TOP + plot_h + 18.0,
            tx
        );
    }
    for &ty in &y_ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            LEFT - 6.0,
            py(ty) + 4.0,
            ty
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13">step</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 {:.1})">cumulative regret</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let idx = sample_indices(s.mean.len());
        let upper: Vec<String> = idx
            .iter()
            .map(|&j| format!("{:.2},{:.2}", px((j + 1) as f64), py(s.mean[j] + s.std_error[j])))
            .collect();
        let lower: Vec<String> = idx
            .iter()
            .rev()
            .map(|&j| format!("{:.2},{:.2}", px((j + 1) as f64), py((s.mean[j] - s.std_error[j]).max(0.0))))
            .collect();
        let line: Vec<String> = idx
            .iter()
            .map(|&j| format!("{:.2},{:.2}", px((j + 1) as f64), py(s.mean[j])))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="band" points="{} {}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            line.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            svg,
            r#"<g class="legend"><line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text></g>"#,
            lx + 18.0,
            lx + 24.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
