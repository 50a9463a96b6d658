//! Self-contained SVG plots of trajectory channels.
//!
//! One polyline per selected channel over the record index, with numeric
//! axis ticks and a color legend. Output bytes are a pure function of the
//! input.

use crate::gaitgen::GaitTrajectory;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("unknown channel '{0}'")]
    UnknownChannel(String),
    #[error("need at least 2 records to plot, got {0}")]
    TooFewRecords(usize),
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Renders the selected channels as an SVG document.
///
/// `selector` is a comma-separated list of channel names; the shorthand
/// `com` expands to `com_x,com_y`.
pub fn emit_plot(traj: &GaitTrajectory, selector: &str) -> Result<String, PlotError> {
    let n = traj.records.len();
    if n < 2 {
        return Err(PlotError::TooFewRecords(n));
    }
    let channels = traj.channels();
    let mut selected: Vec<(String, &Vec<f64>)> = Vec::new();
    for raw in selector.split(',') {
        let name = raw.trim();
        let expanded: Vec<&str> = match name {
            "com" => vec!["com_x", "com_y"],
            other => vec![other],
        };
        for want in expanded {
            let (name, values) = channels
                .iter()
                .find(|(n, _)| n == want)
                .ok_or_else(|| PlotError::UnknownChannel(want.to_string()))?;
            selected.push((name.clone(), values));
        }
    }

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, values) in &selected {
        for &v in values.iter() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |i: usize| MARGIN_LEFT + plot_w * i as f64 / (n - 1) as f64;
    let y_of = |v: f64| MARGIN_TOP + plot_h * (1.0 - (v - lo) / (hi - lo));

    let title: Vec<&str> = selected.iter().map(|(n, _)| n.as_str()).collect();
    let mut svg = String::new();
    write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        title.join(", ")
    )
    .unwrap();

    // Axes.
    write!(
        svg,
        "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
    )
    .unwrap();

    // Ticks: five per axis.
    for k in 0..5 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_of(v);
        write!(
            svg,
            "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{xt}\" y=\"{yt}\" text-anchor=\"end\">{v:.4}</text>\n",
            x0 = MARGIN_LEFT - 4.0,
            x1 = MARGIN_LEFT,
            xt = MARGIN_LEFT - 8.0,
            yt = y + 4.0,
        )
        .unwrap();

        let i = (n - 1) * k / 4;
        let x = x_of(i);
        write!(
            svg,
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{yt}\" text-anchor=\"middle\">{i}</text>\n",
            y0 = HEIGHT - MARGIN_BOTTOM,
            y1 = HEIGHT - MARGIN_BOTTOM + 4.0,
            yt = HEIGHT - MARGIN_BOTTOM + 18.0,
        )
        .unwrap();
    }
    writeln!(
        svg,
        "<text x=\"{x}\" y=\"{y}\" text-anchor=\"middle\">record</text>",
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 12.0,
    )
    .unwrap();

    for (c, (name, values)) in selected.iter().enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{},{}", x_of(i), y_of(v)))
            .collect();
        write!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n\
             <text x=\"{x}\" y=\"{y}\" fill=\"{color}\">{name}</text>\n",
            points.join(" "),
            x = MARGIN_LEFT + 8.0,
            y = MARGIN_TOP + 16.0 + 16.0 * c as f64,
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
