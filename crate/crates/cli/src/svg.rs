//! Line-art SVG of a shock polar in the downstream velocity plane.

use std::fmt::Write;

use ssrr_core::polar::{DeflectionRoot, Polar};
use ssrr_core::Vec2;

const SIZE: f64 = 640.0;
const PAD: f64 = 40.0;

struct Frame {
    lo: Vec2,
    scale: f64,
}

impl Frame {
    fn fit(points: &[Vec2]) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
        let centre = (lo + hi) * 0.5;
        Frame {
            lo: centre - Vec2::new(span, span) * 0.5,
            scale: (SIZE - 2.0 * PAD) / span,
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        let q = (p - self.lo) * self.scale;
        (PAD + q.x, SIZE - PAD - q.y)
    }
}

fn marker(out: &mut String, f: &Frame, p: Vec2, r: f64, class: &str, title: &str) {
    let (x, y) = f.map(p);
    let _ = writeln!(
        out,
        r#"  <circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="{r}"><title>{title} ({:.6}, {:.6})</title></circle>"#,
        p.x, p.y
    );
}

/// Polar branch, upstream velocity, `N`, critical and sonic points, and
/// any wall-parallel roots.
pub fn polar_svg(polar: &Polar, roots: &[DeflectionRoot], wall_dir: Option<Vec2>) -> String {
    let curve = polar.branch_curve();
    let mut pts = curve.clone();
    pts.push(polar.upstream.v);
    let f = Frame::fit(&pts);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(
        out,
        "  <title>shock polar, gamma = {}, L = {:.6}</title>",
        polar.upstream.gas.gamma(),
        polar.mach
    );
    out.push_str(concat!(
        "  <style>polyline{fill:none;stroke:#1f4e79;stroke-width:1.5}",
        " line{stroke:#888;stroke-dasharray:4 3}",
        " .upstream{fill:#000} .normal{fill:#c00000} .critical{fill:#e69f00}",
        " .sonic{fill:#009e73} .root{fill:none;stroke:#cc79a7;stroke-width:2}</style>\n"
    ));
    let _ = writeln!(out, r#"  <rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);

    if let Some(w) = wall_dir {
        // ray from xi through the wall direction, where wall-parallel z_d lie
        let reach = pts.iter().map(|p| (*p - polar.xi).norm()).fold(0.0, f64::max);
        let (x1, y1) = f.map(polar.xi);
        let (x2, y2) = f.map(polar.xi + w.normalized() * reach);
        let _ = writeln!(out, r#"  <line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#);
    }

    out.push_str("  <polyline points=\"");
    for (k, p) in curve.iter().enumerate() {
        let (x, y) = f.map(*p);
        if k > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{x:.3},{y:.3}");
    }
    out.push_str("\"/>\n");

    marker(&mut out, &f, polar.upstream.v, 4.0, "upstream", "v_I");
    marker(&mut out, &f, polar.normal_point.v_d, 4.0, "normal", "N");
    for c in &polar.critical {
        marker(&mut out, &f, c.point.v_d, 3.5, "critical", "critical");
    }
    for s in &polar.sonic {
        marker(&mut out, &f, s.point.v_d, 3.5, "sonic", "sonic");
    }
    for r in roots {
        marker(&mut out, &f, r.point.v_d, 6.0, "root", r.shock_type.label.as_str());
    }
    out.push_str("</svg>\n");
    out
}
