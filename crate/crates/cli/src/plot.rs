//! Hand-written SVG for the two plots.

use std::fmt::Write;

use playtest_core::eval::GroundTruthRecord;
use playtest_core::stats::{SweepCell, F3_NAMES};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn open(svg: &mut String, header: &str, title: &str) {
    let comment = header.replace("--", "- -");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<!-- {comment} -->");
    let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{title}</text>",
        (LEFT + W - RIGHT) / 2.0
    );
}

fn axes(svg: &mut String, f: &Frame, xlabel: &str, ylabel: &str, yticks: &[f64]) {
    let (x0, x1, y0, y1) = (f.px(f.x.0), f.px(f.x.1), f.py(f.y.0), f.py(f.y.1));
    let _ = writeln!(
        svg,
        "<rect x=\"{x0}\" y=\"{y1}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        x1 - x0,
        y0 - y1
    );
    for i in 0..=5 {
        let v = f.x.0 + (f.x.1 - f.x.0) * f64::from(i) / 5.0;
        let x = f.px(v);
        let _ = writeln!(svg, "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>", y0 + 5.0);
        let _ = writeln!(svg, "<text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{v:.2}</text>", y0 + 18.0);
    }
    for &v in yticks {
        let y = f.py(v);
        let _ = writeln!(svg, "<line x1=\"{}\" y1=\"{y}\" x2=\"{x0}\" y2=\"{y}\" stroke=\"black\"/>", x0 - 5.0);
        let _ = writeln!(
            svg,
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#dddddd\"/>"
        );
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{v:.3}</text>", x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>",
        (x0 + x1) / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{ylabel}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

const SERIES: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Correlation against best-run fraction, one line per feature.
pub fn sweep_svg(cells: &[SweepCell], header: &str) -> String {
    let mut svg = String::new();
    open(&mut svg, header, "Spearman correlation with truth pass rate");
    let frame = Frame { x: (0.0, 1.0), y: (-1.0, 1.0) };
    axes(&mut svg, &frame, "best-run fraction", "rho", &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    for (k, (name, colour)) in F3_NAMES.iter().zip(SERIES).enumerate() {
        let mut pts: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.feature == *name)
            .filter_map(|c| c.rho.map(|r| (c.fraction, r)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.len() > 1 {
            let path: Vec<String> = pts
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>",
                path.join(" ")
            );
        }
        for &(x, y) in &pts {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{colour}\"/>",
                frame.px(x),
                frame.py(y)
            );
        }
        let ly = TOP + 20.0 + 22.0 * k as f64;
        let lx = W - RIGHT + 16.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{colour}\" stroke-width=\"2\"/>",
            lx + 20.0
        );
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\">{name}</text>", lx + 26.0, ly + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Three-stop gradient from dark purple through teal to yellow.
fn level_colour(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 3] = [(68.0, 1.0, 84.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let i = (t.floor() as usize).min(1);
    let u = t - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Pass rate against churn rate, coloured by position in the level sequence.
pub fn scatter_svg(truth: &[GroundTruthRecord], header: &str) -> String {
    let mut svg = String::new();
    open(&mut svg, header, "Pass rate against churn rate");
    let top = truth.iter().map(|t| t.churn_rate).fold(0.0, f64::max);
    let ymax = if top > 0.0 { top * 1.1 } else { 1.0 };
    let frame = Frame { x: (0.0, 1.0), y: (0.0, ymax) };
    let ticks: Vec<f64> = (0..=4).map(|i| ymax * f64::from(i) / 4.0).collect();
    axes(&mut svg, &frame, "pass rate", "churn rate", &ticks);
    let last = truth.len().saturating_sub(1).max(1) as f64;
    for (i, t) in truth.iter().enumerate() {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"5\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.5\"><title>level {}</title></circle>",
            frame.px(t.pass_rate),
            frame.py(t.churn_rate),
            level_colour(i as f64 / last),
            t.level_id
        );
    }
    let lx = W - RIGHT + 24.0;
    let steps = 20;
    let bar = H - TOP - BOTTOM - 40.0;
    for s in 0..steps {
        let y = TOP + 20.0 + bar * f64::from(s) / f64::from(steps);
        let _ = writeln!(
            svg,
            "<rect x=\"{lx}\" y=\"{y:.2}\" width=\"16\" height=\"{:.2}\" fill=\"{}\"/>",
            bar / f64::from(steps) + 0.5,
            level_colour(f64::from(s) / f64::from(steps - 1))
        );
    }
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\">first level</text>", lx + 22.0, TOP + 30.0);
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\">last level</text>", lx + 22.0, TOP + 20.0 + bar);
    svg.push_str("</svg>\n");
    svg
}
