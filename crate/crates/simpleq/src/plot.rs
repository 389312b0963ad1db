//! Static SVG line plots: the energy-per-density curve (log-10 x axis) and
//! the convexity profile. Output is deterministic byte-for-byte for equal
//! input: fixed canvas, fixed decimal formatting, no timestamps.

use crate::analysis::EnergyCurve;
use crate::error::{Result, SimpleqError};

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 24.0;
const MARGIN_B: f64 = 56.0;

fn fnum(x: f64) -> String {
    format!("{x:.3}")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn sx(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (W - MARGIN_L - MARGIN_R)
    }
    fn sy(&self, y: f64) -> f64 {
        H - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (H - MARGIN_T - MARGIN_B)
    }
}

/// Decade gridline positions (log10 values) inside [x0, x1].
fn decades(x0: f64, x1: f64) -> Vec<i64> {
    let lo = x0.ceil() as i64;
    let hi = x1.floor() as i64;
    (lo..=hi).collect()
}

fn line_plot(
    points: &[(f64, f64)],
    x_label: &str,
    y_label: &str,
    guides: &[(f64, &str)],
) -> Result<String> {
    if points.len() < 2 {
        return Err(SimpleqError::TooFewPoints {
            context: "svg plot".into(),
            needed: 2,
            got: points.len(),
        });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let x0 = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x1 = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut y0 = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut y1 = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for (g, _) in guides {
        y0 = y0.min(*g);
        y1 = y1.max(*g);
    }
    let pad = 0.06 * (y1 - y0).max(1e-12);
    let frame = Frame {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" \
         viewBox=\"0 0 {W} {H}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for d in decades(frame.x0, frame.x1) {
        let x = frame.sx(d as f64);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#cccccc\" stroke-width=\"1\" class=\"major-x\"/>\n",
            fnum(x),
            fnum(MARGIN_T),
            fnum(x),
            fnum(H - MARGIN_B)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" \
             font-family=\"monospace\">1e{d}</text>\n",
            fnum(x),
            fnum(H - MARGIN_B + 18.0)
        ));
    }
    for (g, label) in guides {
        let y = frame.sy(*g);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbbbbb\" \
             stroke-dasharray=\"6 4\" stroke-width=\"1\"/>\n",
            fnum(MARGIN_L),
            fnum(y),
            fnum(W - MARGIN_R),
            fnum(y)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"monospace\">{label}</text>\n",
            fnum(W - MARGIN_R - 60.0),
            fnum(y - 5.0)
        ));
    }

    // axes
    svg.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        fnum(MARGIN_L),
        fnum(MARGIN_T),
        fnum(W - MARGIN_L - MARGIN_R),
        fnum(H - MARGIN_T - MARGIN_B)
    ));

    let mut path = String::from("<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"");
    for (x, y) in xs.iter().zip(&ys) {
        path.push_str(&fnum(frame.sx(*x)));
        path.push(',');
        path.push_str(&fnum(frame.sy(*y)));
        path.push(' ');
    }
    path.push_str("\"/>\n");
    svg.push_str(&path);

    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"monospace\">{x_label}</text>\n",
        fnum(MARGIN_L + 0.5 * (W - MARGIN_L - MARGIN_R)),
        fnum(H - 12.0)
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" font-family=\"monospace\" \
         transform=\"rotate(-90 16 {})\">{y_label}</text>\n",
        fnum(0.5 * H),
        fnum(0.5 * H)
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Fig-1 style: e / (4 pi rho) against rho on a log axis, with the dilute
/// (a/2) and dense (1) guides.
pub fn curve_svg(curve: &EnergyCurve) -> Result<String> {
    let points: Vec<(f64, f64)> = curve
        .rows
        .iter()
        .map(|r| (r.rho, r.e_over_4pi_rho))
        .collect();
    let a2 = curve.scattering_length / 2.0;
    line_plot(
        &points,
        "rho",
        "e / (4 pi rho)",
        &[(a2, "a/2"), (1.0, "1")],
    )
}

/// Fig-2 style: (1/4 pi) d^2(rho e)/d rho^2 against rho on a log axis.
pub fn convexity_svg(profile: &[(f64, f64)], a: f64) -> Result<String> {
    line_plot(
        profile,
        "rho",
        "(1/4pi) d2(rho e)",
        &[(a, "a"), (2.0, "2")],
    )
}
