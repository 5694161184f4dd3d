//! Minimal self-contained SVG line chart for iteration traces: deviation
//! and envelope against the step index, log scale on the vertical axis.

use crate::engine::IterationTrace;

const W: f64 = 860.0;
const H: f64 = 520.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 50.0;
const FLOOR: f64 = 1e-18;

fn polyline(points: &[(f64, f64)], style: &str) -> String {
    if points.is_empty() {
        return String::new();
    }
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.2},{y:.2}"))
        .collect();
    format!("<polyline points=\"{}\" {} />\n", coords.join(" "), style)
}

/// Renders the trace as a standalone SVG document.
pub fn render_trace_svg(trace: &IterationTrace) -> String {
    let steps = trace.steps.len().max(1) as f64;
    let mut ymax: f64 = FLOOR * 10.0;
    for s in &trace.steps {
        ymax = ymax.max(s.deviation);
        if let Some(e) = s.envelope {
            ymax = ymax.max(e);
        }
    }
    let log_max = ymax.max(FLOOR).log10().ceil();
    let log_min = FLOOR.log10();
    let plot_w = W - MARGIN_L - MARGIN_R;
    let plot_h = H - MARGIN_T - MARGIN_B;
    let x_of = |step: f64| MARGIN_L + (step / steps) * plot_w;
    let y_of = |v: f64| {
        let lv = v.max(FLOOR).log10().clamp(log_min, log_max);
        MARGIN_T + (log_max - lv) / (log_max - log_min) * plot_h
    };

    let dev: Vec<(f64, f64)> = trace
        .steps
        .iter()
        .map(|s| (x_of(s.step as f64), y_of(s.deviation)))
        .collect();
    let env: Vec<(f64, f64)> = trace
        .steps
        .iter()
        .filter_map(|s| s.envelope.map(|e| (x_of(s.step as f64), y_of(e))))
        .collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    // axes
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN_B
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - MARGIN_B,
        W - MARGIN_R,
        H - MARGIN_B
    ));
    // decade gridlines and labels
    let mut decade = log_max;
    while decade >= log_min {
        let y = y_of(10.0_f64.powf(decade));
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_L}\" y1=\"{y:.1}\" x2=\"{}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>\n",
            W - MARGIN_R
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">1e{}</text>\n",
            MARGIN_L - 6.0,
            y + 4.0,
            decade as i64
        ));
        decade -= ((log_max - log_min) / 9.0).max(1.0).round();
    }
    // x labels
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let step = (steps * frac).round();
        let x = x_of(step);
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            H - MARGIN_B + 18.0,
            step as i64
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">step</text>\n",
        MARGIN_L + plot_w / 2.0,
        H - 12.0
    ));
    svg.push_str(&polyline(&dev, "fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\""));
    svg.push_str(&polyline(
        &env,
        "fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.2\" stroke-dasharray=\"6 3\"",
    ));
    // legend
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"#1f77b4\">deviation</text>\n",
        W - MARGIN_R - 150.0,
        MARGIN_T + 8.0
    ));
    if !env.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"#d62728\">envelope</text>\n",
            W - MARGIN_R - 150.0,
            MARGIN_T + 24.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
