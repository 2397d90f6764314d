use std::fmt::Write as _;

use anyhow::bail;

use crate::commands::{BandsReport, ButterflyReport, Report};
use crate::config::RunConfig;
use crate::output::metadata_line;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 50.0;

pub fn render(config: &RunConfig, report: &Report) -> anyhow::Result<String> {
    let body = match report {
        Report::Bands(r) => bands(r),
        Report::Butterfly(r) => butterfly(r),
        _ => bail!("svg output is only available for `bands` and `butterfly`"),
    };
    // `--` may not appear inside an XML comment
    let meta = metadata_line(config)?.replace("--", "- -");
    Ok(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<!-- {meta} -->\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    ))
}

/// Maps data ranges onto the plot area, y growing upwards.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
        Frame { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(out, "<rect x=\"{l}\" y=\"{t}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>", r - l, b - t);
        let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\">{x_label}</text>", WIDTH / 2.0, HEIGHT - 15.0);
        let _ = writeln!(
            out,
            "<text x=\"15\" y=\"{}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 15 {})\">{y_label}</text>",
            HEIGHT / 2.0,
            HEIGHT / 2.0
        );
        for (value, anchor, x, y) in [
            (self.x.0, "start", l, b + 18.0),
            (self.x.1, "end", r, b + 18.0),
        ] {
            let _ = writeln!(out, "<text x=\"{x}\" y=\"{y}\" text-anchor=\"{anchor}\" font-size=\"11\">{value:.3}</text>");
        }
        for (value, y) in [(self.y.0, b), (self.y.1, t + 10.0)] {
            let _ = writeln!(out, "<text x=\"{}\" y=\"{y}\" text-anchor=\"end\" font-size=\"11\">{value:.3}</text>", l - 4.0);
        }
    }
}

fn bands(r: &BandsReport) -> String {
    let mut out = String::new();
    let ks = r.samples.iter().map(|s| s.k);
    let x = (ks.clone().fold(f64::INFINITY, f64::min), ks.fold(f64::NEG_INFINITY, f64::max));
    let y = r.bands.hull().unwrap_or((0.0, 1.0));
    let frame = Frame::new(x, y);
    frame.axes(&mut out, "k", "E");
    let count = r.samples.first().map_or(0, |s| s.energies.len());
    for j in 0..count {
        let mut points = String::new();
        for s in &r.samples {
            let _ = write!(points, "{:.3},{:.3} ", frame.px(s.k), frame.py(s.energies[j]));
        }
        let _ = writeln!(out, "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>", points.trim_end());
    }
    out
}

fn butterfly(r: &ButterflyReport) -> String {
    let mut out = String::new();
    let hulls = r.rows.iter().filter_map(|row| row.bands.hull());
    let y = (
        hulls.clone().map(|h| h.0).fold(f64::INFINITY, f64::min),
        hulls.map(|h| h.1).fold(f64::NEG_INFINITY, f64::max),
    );
    // energy across, flux up
    let frame = Frame::new(if y.0.is_finite() { y } else { (0.0, 1.0) }, (0.0, 1.0));
    frame.axes(&mut out, "E", "flux p/q");
    for row in &r.rows {
        let py = frame.py(row.alpha);
        for &(lo, hi) in row.bands.intervals() {
            // keep point-like bands visible
            let (x0, x1) = (frame.px(lo), frame.px(hi).max(frame.px(lo) + 0.5));
            let _ = writeln!(out, "<line x1=\"{x0:.3}\" y1=\"{py:.3}\" x2=\"{x1:.3}\" y2=\"{py:.3}\" stroke=\"black\" stroke-width=\"1\"/>");
        }
    }
    out
}
