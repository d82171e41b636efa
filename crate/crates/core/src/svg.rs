//! Standalone SVG snapshots of planar configurations.

use std::fmt::Write;

use crate::config::{ArcSet, Config};
use crate::duality::DualSite;
use crate::error::{Error, Result};
use crate::lattice::{Arc, Lattice, Site};

#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    /// Pixels per lattice unit; 0 picks a size from the region.
    pub scale: f64,
    /// Primal path to draw over the arcs.
    pub path: Option<Vec<Site>>,
    /// Dual cycle to draw over the arcs.
    pub circuit: Option<Vec<DualSite>>,
}

struct Frame {
    scale: f64,
    lo: (i32, i32),
    hi: (i32, i32),
}

impl Frame {
    fn new(lattice: &Lattice, scale: f64) -> Result<Self> {
        let region = lattice.region().filter(|r| r.is_planar()).ok_or(Error::NotPlanar)?;
        let (lo, hi) = region.bounds();
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1) as f64;
        let scale = if scale > 0.0 { scale } else { (640.0 / (span + 2.0)).clamp(4.0, 48.0) };
        Ok(Frame { scale, lo: (lo[0], lo[1]), hi: (hi[0], hi[1]) })
    }

    fn x(&self, x: f64) -> f64 {
        (x - self.lo.0 as f64 + 1.0) * self.scale
    }

    fn y(&self, y: f64) -> f64 {
        (self.hi.1 as f64 - y + 1.0) * self.scale
    }

    fn size(&self) -> (f64, f64) {
        (
            (self.hi.0 - self.lo.0 + 2) as f64 * self.scale,
            (self.hi.1 - self.lo.1 + 2) as f64 * self.scale,
        )
    }
}

fn render(lattice: &Lattice, arcs: impl Iterator<Item = Arc>, opts: &SvgOptions) -> Result<String> {
    let f = Frame::new(lattice, opts.scale)?;
    let (w, h) = f.size();
    let mut s = String::new();
    let stroke = (f.scale / 16.0).max(0.75);
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(
        s,
        r##"<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto-start-reverse"><path d="M0,0 L10,5 L0,10 z" fill="#333"/></marker></defs>"##
    )
    .unwrap();
    writeln!(
        s,
        "<style>.arc{{stroke:#333;stroke-width:{stroke:.2}}}.path{{fill:none;stroke:#d33;stroke-width:{:.2}}}.circuit{{fill:none;stroke:#27c;stroke-width:{:.2}}}</style>",
        2.5 * stroke,
        2.5 * stroke
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    // arcs stop short of the head so arrowheads do not overlap the next site
    let trim = 0.18;
    for arc in arcs {
        let (a, b) = (arc.from(), arc.to());
        let (ax, ay) = (a.x as f64, a.y as f64);
        let (dx, dy) = ((b.x - a.x) as f64, (b.y - a.y) as f64);
        writeln!(
            s,
            r#"<line class="arc" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" marker-end="url(#arrow)"/>"#,
            f.x(ax + trim * dx),
            f.y(ay + trim * dy),
            f.x(ax + (1.0 - trim) * dx),
            f.y(ay + (1.0 - trim) * dy)
        )
        .unwrap();
    }
    writeln!(
        s,
        r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="#d33"/>"##,
        f.x(0.0),
        f.y(0.0),
        2.0 * stroke
    )
    .unwrap();
    if let Some(path) = &opts.path {
        let pts: Vec<String> =
            path.iter().map(|p| format!("{:.2},{:.2}", f.x(p.x as f64), f.y(p.y as f64))).collect();
        writeln!(s, r#"<polyline class="path" points="{}"/>"#, pts.join(" ")).unwrap();
    }
    if let Some(cycle) = &opts.circuit {
        let pts: Vec<String> = cycle
            .iter()
            .map(|d| {
                let (x, y) = d.point();
                format!("{:.2},{:.2}", f.x(x), f.y(y))
            })
            .collect();
        writeln!(s, r#"<polygon class="circuit" points="{}"/>"#, pts.join(" ")).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// One arrow per edge.
pub fn render_config(config: &Config, opts: &SvgOptions) -> Result<String> {
    render(config.lattice(), config.arcs(), opts)
}

/// One arrow per present arc.
pub fn render_arcs(arcs: &ArcSet, opts: &SvgOptions) -> Result<String> {
    render(arcs.lattice(), arcs.arcs(), opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{sample_config, ModelSpec, Region};

    fn coords(line: &str) -> [f64; 4] {
        ["x1", "y1", "x2", "y2"].map(|k| {
            let start = line.find(&format!("{k}=\"")).unwrap() + k.len() + 2;
            let end = start + line[start..].find('"').unwrap();
            line[start..end].parse().unwrap()
        })
    }

    #[test]
    fn outward_config_points_away() {
        let c = sample_config(ModelSpec::HModel { p: 1.0 }, Region::Box { n: 4 }, 0).unwrap();
        let svg = render_config(&c, &SvgOptions { scale: 10.0, ..Default::default() }).unwrap();
        // origin at pixel (50, 50)
        let lines: Vec<&str> = svg.lines().filter(|l| l.contains("class=\"arc\"")).collect();
        assert_eq!(lines.len(), 144);
        for l in lines {
            let [x1, y1, x2, y2] = coords(l);
            let r = |x: f64, y: f64| (x - 50.0).powi(2) + (y - 50.0).powi(2);
            assert!(r(x2, y2) > r(x1, y1), "{l}");
        }
    }

    #[test]
    fn slab_is_rejected() {
        let c = sample_config(ModelSpec::Grimmett3DSlab { p: 0.6 }, Region::SlabBox { n: 2 }, 0).unwrap();
        assert_eq!(render_config(&c, &SvgOptions::default()), Err(Error::NotPlanar));
    }
}
