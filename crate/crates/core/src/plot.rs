//! SVG and CSV export of regions.

use crate::region::{CellSet, DiskAlgebraRegion};
use crate::C64;
use std::fmt::Write as _;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

enum Layer {
    Cells(CellSet),
    Disks(DiskAlgebraRegion),
    Points(Vec<C64>),
}

/// A complex-plane figure built from layers, rendered to SVG.
#[derive(Default)]
pub struct Figure {
    title: String,
    layers: Vec<(String, Layer)>,
}

type Bounds = (f64, f64, f64, f64);

fn grow(b: Bounds, lo: C64, hi: C64) -> Bounds {
    (b.0.min(lo.re), b.1.min(lo.im), b.2.max(hi.re), b.3.max(hi.im))
}

impl Figure {
    pub fn new(title: impl Into<String>) -> Self {
        Figure { title: title.into(), layers: Vec::new() }
    }

    pub fn cells(mut self, label: impl Into<String>, c: &CellSet) -> Self {
        self.layers.push((label.into(), Layer::Cells(c.clone())));
        self
    }

    pub fn disks(mut self, label: impl Into<String>, d: &DiskAlgebraRegion) -> Self {
        self.layers.push((label.into(), Layer::Disks(d.clone())));
        self
    }

    pub fn points(mut self, label: impl Into<String>, p: &[C64]) -> Self {
        self.layers.push((label.into(), Layer::Points(p.to_vec())));
        self
    }

    fn bounds(&self) -> Bounds {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (_, l) in &self.layers {
            match l {
                Layer::Cells(c) => {
                    let r = c.h / 2.0 + c.delta;
                    for (j, i0, i1) in c.runs() {
                        b = grow(b, c.center(i0, j) - C64::new(r, r), c.center(i1, j) + C64::new(r, r));
                    }
                }
                Layer::Disks(d) => {
                    // the upper disks bound the set; fall back to the lower ones
                    let set = if d.upper.is_empty() { &d.lower } else { &d.upper };
                    if let Some(&(c, r)) = set.iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
                        b = grow(b, C64::new(c - r, -r), C64::new(c + r, r));
                    }
                }
                Layer::Points(p) => {
                    for z in p {
                        b = grow(b, *z, *z);
                    }
                }
            }
        }
        if !b.0.is_finite() {
            return (-1.0, -1.0, 1.0, 1.0);
        }
        let pad = 0.05 * (b.2 - b.0).max(b.3 - b.1).max(1e-9);
        (b.0 - pad, b.1 - pad, b.2 + pad, b.3 + pad)
    }

    /// Render to an SVG document; imaginary axis points up.
    pub fn to_svg(&self) -> String {
        let (x0, y0, x1, y1) = self.bounds();
        let (w, h) = (x1 - x0, y1 - y0);
        let px = 640.0;
        let py = (px * h / w).clamp(160.0, 1280.0);
        let sx = px / w;
        let sy = py / h;
        let tx = |x: f64| (x - x0) * sx;
        let ty = |y: f64| (y1 - y) * sy;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {px:.0} {:.0}">"#,
            px,
            py + 40.0,
            py + 40.0
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        if x0 < 0.0 && x1 > 0.0 {
            let _ = writeln!(s, r##"<line x1="{0:.2}" y1="0" x2="{0:.2}" y2="{py:.2}" stroke="#999" stroke-width="0.5"/>"##, tx(0.0));
        }
        if y0 < 0.0 && y1 > 0.0 {
            let _ = writeln!(s, r##"<line x1="0" y1="{0:.2}" x2="{px:.2}" y2="{0:.2}" stroke="#999" stroke-width="0.5"/>"##, ty(0.0));
        }
        for (k, (label, layer)) in self.layers.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let _ = writeln!(s, r#"<g id="layer{k}"><title>{}</title>"#, escape(label));
            match layer {
                Layer::Cells(c) => {
                    let hh = c.h / 2.0 + c.delta;
                    for (j, i0, i1) in c.runs() {
                        let a = c.center(i0, j) - C64::new(hh, -hh);
                        let b = c.center(i1, j) + C64::new(hh, -hh);
                        let _ = writeln!(
                            s,
                            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{color}" fill-opacity="0.35"/>"#,
                            tx(a.re),
                            ty(a.im),
                            (b.re - a.re) * sx,
                            (a.im - b.im) * sy
                        );
                    }
                }
                Layer::Disks(d) => {
                    for (c, r, dash) in d.upper.iter().map(|&(c, r)| (c, r, "")).chain(d.lower.iter().map(|&(c, r)| (c, r, r#" stroke-dasharray="4 3""#))) {
                        let _ = writeln!(
                            s,
                            r#"<ellipse cx="{:.3}" cy="{:.3}" rx="{:.3}" ry="{:.3}" fill="none" stroke="{color}" stroke-width="0.6"{dash}/>"#,
                            tx(c),
                            ty(0.0),
                            r * sx,
                            r * sy
                        );
                    }
                }
                Layer::Points(p) => {
                    for z in p {
                        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="1.2" fill="{color}"/>"#, tx(z.re), ty(z.im));
                    }
                }
            }
            let _ = writeln!(s, r#"<text x="8" y="{:.0}" font-size="11" fill="{color}">{}</text></g>"#, py + 14.0 + 12.0 * (k % 2) as f64, escape(label));
        }
        let _ = writeln!(s, r#"<text x="{:.0}" y="{:.0}" font-size="12" text-anchor="end">{}</text>"#, px - 8.0, py + 34.0, escape(&self.title));
        s.push_str("</svg>\n");
        s
    }
}

/// Polyline chart of `(x, y)` samples with a zero reference line.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, pts: &[(f64, f64)]) -> String {
    let (w, h, m) = (560.0, 300.0, 44.0);
    let x0 = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x1 = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y1 = pts.iter().map(|p| p.1).filter(|v| v.is_finite()).fold(0.0, f64::max);
    let y0 = pts.iter().map(|p| p.1).filter(|v| v.is_finite()).fold(0.0, f64::min);
    let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 1.0, x0 + 1.0) };
    let (y0, y1) = if y1 > y0 { (y0, y1 * 1.05) } else { (-1.0, 1.0) };
    let tx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let ty = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<line x1="{m}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#999"/>"##, ty(0.0), w - m);
    let path: Vec<String> = pts.iter().filter(|p| p.1.is_finite()).map(|p| format!("{:.2},{:.2}", tx(p.0), ty(p.1))).collect();
    let _ = writeln!(s, r##"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"##, path.join(" "), PALETTE[0]);
    let _ = writeln!(s, r#"<text x="{:.0}" y="{:.0}" font-size="11" text-anchor="middle">{}</text>"#, w / 2.0, h - 10.0, escape(xlabel));
    let _ = writeln!(s, r#"<text x="12" y="{:.0}" font-size="11" transform="rotate(-90 12 {:.0})" text-anchor="middle">{}</text>"#, h / 2.0, h / 2.0, escape(ylabel));
    let _ = writeln!(s, r#"<text x="{:.0}" y="18" font-size="12" text-anchor="middle">{}</text>"#, w / 2.0, escape(title));
    let _ = writeln!(s, r#"<text x="{m}" y="{:.0}" font-size="10">{x0:.3}</text><text x="{:.0}" y="{:.0}" font-size="10" text-anchor="end">{x1:.3}</text>"#, h - m + 14.0, w - m, h - m + 14.0);
    let _ = writeln!(s, r#"<text x="{:.0}" y="{:.0}" font-size="10" text-anchor="end">{y1:.3}</text>"#, m - 4.0, ty(y1) + 4.0);
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Boundary cell centers as `re,im` rows, with the cover radius in the header.
pub fn boundary_csv(c: &CellSet) -> String {
    let mut s = format!("# epsilon={}\nre,im\n", c.cell_radius());
    for (i, j) in c.boundary() {
        let z = c.center(i, j);
        let _ = writeln!(s, "{},{}", z.re, z.im);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_contains_every_layer() {
        let c = CellSet::rasterize_balls(&[C64::new(1.0, 0.5), C64::new(1.0, -0.5)], 0.2, 0.05, 0.0).unwrap();
        let svg = Figure::new("demo")
            .cells("cover", &c)
            .disks("bound", &DiskAlgebraRegion::disk(1.0, 1.0))
            .points("samples", &[C64::new(0.0, 0.0)])
            .to_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("layer0") && svg.contains("layer1") && svg.contains("layer2"));
        assert!(svg.contains("<rect x=") && svg.contains("<ellipse"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn csv_lists_boundary() {
        let c = CellSet::rasterize_balls(&[C64::new(0.0, 0.0)], 0.3, 0.1, 0.0).unwrap();
        let csv = boundary_csv(&c);
        assert_eq!(csv.lines().count(), 2 + c.boundary().len());
    }
}
