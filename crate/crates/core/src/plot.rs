//! Minimal deterministic SVG rendering for effect curves, PDP/ICE bundles and
//! dependence heatmaps. Output is plain XML built with fixed formatting, so
//! identical inputs produce byte-identical files.

use crate::explain::{DependenceCurve, DependenceSurface, IceBundle};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

struct Scale {
    min: f64,
    max: f64,
    lo_px: f64,
    hi_px: f64,
}

impl Scale {
    fn map(&self, v: f64) -> f64 {
        if self.max == self.min {
            return (self.lo_px + self.hi_px) / 2.0;
        }
        self.lo_px + (v - self.min) / (self.max - self.min) * (self.hi_px - self.lo_px)
    }
}

fn polyline(xs: &[f64], ys: &[f64], sx: &Scale, sy: &Scale, style: &str) -> String {
    let points: Vec<String> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| format!("{},{}", fmt(sx.map(*x)), fmt(sy.map(*y))))
        .collect();
    format!("<polyline fill=\"none\" {} points=\"{}\"/>\n", style, points.join(" "))
}

fn svg_open(title: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{title}</text>\n",
        WIDTH / 2.0
    )
}

fn axes(sx: &Scale, sy: &Scale) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(HEIGHT - MARGIN),
        fmt(WIDTH - MARGIN),
        fmt(HEIGHT - MARGIN)
    ));
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(MARGIN),
        fmt(HEIGHT - MARGIN)
    ));
    for (v, anchor) in [(sx.min, "start"), (sx.max, "end")] {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(sx.map(v)),
            fmt(HEIGHT - MARGIN + 16.0),
            fmt(v)
        ));
    }
    for v in [sy.min, sy.max] {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(MARGIN - 6.0),
            fmt(sy.map(v) + 4.0),
            fmt(v)
        ));
    }
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    (lo, hi)
}

/// Line chart of a single curve, e.g. a spline effect curve.
pub fn curve_svg(title: &str, points: &[(f64, f64)]) -> String {
    let (x_lo, x_hi) = bounds(points.iter().map(|p| p.0));
    let (y_lo, y_hi) = bounds(points.iter().map(|p| p.1));
    let sx = Scale { min: x_lo, max: x_hi, lo_px: MARGIN, hi_px: WIDTH - MARGIN };
    let sy = Scale { min: y_lo, max: y_hi, lo_px: HEIGHT - MARGIN, hi_px: MARGIN };
    let mut out = svg_open(title);
    out.push_str(&axes(&sx, &sy));
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    out.push_str(&polyline(&xs, &ys, &sx, &sy, "stroke=\"black\" stroke-width=\"2\""));
    out.push_str("</svg>\n");
    out
}

/// Combined plot: thin grey ICE curves underneath a thick black PDP line.
pub fn pdp_ice_svg(title: &str, pdp: &DependenceCurve, ice: Option<&IceBundle>) -> String {
    let mut y_values: Vec<f64> = pdp.values.clone();
    if let Some(bundle) = ice {
        y_values.extend(bundle.curves.iter().flatten().copied());
    }
    let (x_lo, x_hi) = bounds(pdp.grid.iter().copied());
    let (y_lo, y_hi) = bounds(y_values.into_iter());
    let sx = Scale { min: x_lo, max: x_hi, lo_px: MARGIN, hi_px: WIDTH - MARGIN };
    let sy = Scale { min: y_lo, max: y_hi, lo_px: HEIGHT - MARGIN, hi_px: MARGIN };
    let mut out = svg_open(title);
    out.push_str(&axes(&sx, &sy));
    if let Some(bundle) = ice {
        for curve in &bundle.curves {
            out.push_str(&polyline(
                &bundle.grid,
                curve,
                &sx,
                &sy,
                "stroke=\"#bbbbbb\" stroke-width=\"0.6\"",
            ));
        }
    }
    out.push_str(&polyline(&pdp.grid, &pdp.values, &sx, &sy, "stroke=\"black\" stroke-width=\"3\""));
    out.push_str("</svg>\n");
    out
}

/// Linear two-color gradient from blue (low) to yellow (high).
fn heat_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(33.0, 253.0), lerp(102.0, 231.0), lerp(172.0, 37.0))
}

/// Heatmap of a 2-D dependence surface.
pub fn surface_svg(title: &str, surface: &DependenceSurface) -> String {
    let (v_lo, v_hi) = bounds(surface.values.iter().flatten().copied());
    let g1 = surface.grid1.len();
    let g2 = surface.grid2.len();
    let cell_w = (WIDTH - 2.0 * MARGIN) / g1 as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / g2 as f64;
    let mut out = svg_open(title);
    for (i, _) in surface.grid1.iter().enumerate() {
        for (j, _) in surface.grid2.iter().enumerate() {
            let t = (surface.values[i][j] - v_lo) / (v_hi - v_lo);
            let x = MARGIN + i as f64 * cell_w;
            // grid2 grows upward on the plot.
            let y = HEIGHT - MARGIN - (j + 1) as f64 * cell_h;
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                fmt(x),
                fmt(y),
                fmt(cell_w + 0.5),
                fmt(cell_h + 0.5),
                heat_color(t)
            ));
        }
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{} \u{2192}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0,
        surface.features.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{} \u{2192}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        surface.features.1
    ));
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureName;

    #[test]
    fn svg_is_well_formed_and_deterministic() {
        let points: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (i as f64 * 0.3).sin())).collect();
        let a = curve_svg("effect", &points);
        let b = curve_svg("effect", &points);
        assert_eq!(a, b);
        assert!(a.starts_with("<?xml"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<svg").count(), 1);
        assert_eq!(a.matches("</svg>").count(), 1);
    }

    #[test]
    fn pdp_ice_styles() {
        let pdp = DependenceCurve {
            feature: FeatureName::Elo,
            grid: vec![0.0, 1.0, 2.0],
            values: vec![0.3, 0.5, 0.7],
        };
        let ice = IceBundle {
            feature: FeatureName::Elo,
            grid: vec![0.0, 1.0, 2.0],
            curves: vec![vec![0.2, 0.4, 0.6], vec![0.4, 0.6, 0.8]],
        };
        let svg = pdp_ice_svg("Elo", &pdp, Some(&ice));
        assert_eq!(svg.matches("#bbbbbb").count(), 2);
        assert_eq!(svg.matches("stroke-width=\"3\"").count(), 1);
    }

    #[test]
    fn heatmap_covers_grid() {
        let surface = DependenceSurface {
            features: (FeatureName::Elo, FeatureName::Age30),
            grid1: vec![0.0, 1.0, 2.0],
            grid2: vec![0.0, 1.0],
            values: vec![vec![0.1, 0.2], vec![0.3, 0.4], vec![0.5, 0.6]],
        };
        let svg = surface_svg("heat", &surface);
        assert_eq!(svg.matches("<rect").count(), 1 + 6); // background + cells
        assert!(svg.contains(&heat_color(0.0)));
        assert!(svg.contains(&heat_color(1.0)));
    }
}
