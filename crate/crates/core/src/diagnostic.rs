//! Minimum-principle diagnostics for a sampled potential on a labeled grid.
//!
//! A solution with a weak-type reflected shock attains its global minimum
//! over the elliptic region only at the reflection point. The checks here
//! look for the discrete signatures that exclude a minimum everywhere else:
//! positive outward slope on the opposite wall `B` and on the arc `P`, zero
//! normal slope on the reflection wall `A`, continuity with the upstream
//! potential on the shock `S`, and the normal-shock monotonicity
//! contradiction at shock minima.
//!
//! Fields are assumed to be given in the observer frame where the
//! downstream velocity vanishes at the reflection point.

use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::f64_17;
use crate::gas::GasModel;
use crate::geom::Vec2;
use crate::shock::{normal_jump, UpstreamData};

pub const FIELD_MAGIC: &str = "SSRR-FIELD 1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeLabel {
    #[serde(rename = "I")]
    Interior,
    #[serde(rename = "O")]
    Outside,
    #[serde(rename = "A")]
    WallA,
    #[serde(rename = "B")]
    WallB,
    #[serde(rename = "S")]
    Shock,
    #[serde(rename = "P")]
    Arc,
    #[serde(rename = "R")]
    Corner,
}

impl NodeLabel {
    pub fn as_char(self) -> char {
        match self {
            NodeLabel::Interior => 'I',
            NodeLabel::Outside => 'O',
            NodeLabel::WallA => 'A',
            NodeLabel::WallB => 'B',
            NodeLabel::Shock => 'S',
            NodeLabel::Arc => 'P',
            NodeLabel::Corner => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            'I' => NodeLabel::Interior,
            'O' => NodeLabel::Outside,
            'A' => NodeLabel::WallA,
            'B' => NodeLabel::WallB,
            'S' => NodeLabel::Shock,
            'P' => NodeLabel::Arc,
            'R' => NodeLabel::Corner,
            _ => return None,
        })
    }
}

/// Potential samples on a uniform grid; node `k = j * nx + i` sits at
/// `origin + (i dx, j dy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    nx: usize,
    ny: usize,
    origin: Vec2,
    dx: f64,
    dy: f64,
    values: Vec<f64>,
    mask: Vec<NodeLabel>,
    upstream: UpstreamData,
    xi_r: Vec2,
    /// Gauge constant added to the upstream potential.
    psi_offset: f64,
    corner: usize,
}

impl GridField {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        nx: usize,
        ny: usize,
        origin: Vec2,
        spacing: (f64, f64),
        values: Vec<f64>,
        mask: Vec<NodeLabel>,
        upstream: UpstreamData,
        xi_r: Vec2,
    ) -> Result<Self> {
        Self::with_offset(nx, ny, origin, spacing, values, mask, upstream, xi_r, 0.0)
    }

    #[allow(clippy::too_many_arguments)]
    fn with_offset(
        nx: usize,
        ny: usize,
        origin: Vec2,
        (dx, dy): (f64, f64),
        values: Vec<f64>,
        mask: Vec<NodeLabel>,
        upstream: UpstreamData,
        xi_r: Vec2,
        psi_offset: f64,
    ) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if nx < 3 || ny < 3 {
            return bad(format!("grid {nx}x{ny} too small"));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return bad(format!("spacing ({dx}, {dy}) must be positive"));
        }
        if values.len() != nx * ny || mask.len() != nx * ny {
            return bad(format!(
                "expected {} nodes, got {} values and {} labels",
                nx * ny,
                values.len(),
                mask.len()
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return bad(format!("non-finite value at node {k}"));
        }
        let corners: Vec<usize> = (0..mask.len()).filter(|&k| mask[k] == NodeLabel::Corner).collect();
        if corners.len() != 1 {
            return bad(format!("expected exactly one corner node, found {}", corners.len()));
        }
        let field = GridField {
            nx,
            ny,
            origin,
            dx,
            dy,
            values,
            mask,
            upstream,
            xi_r,
            psi_offset,
            corner: corners[0],
        };
        field.check_interior_connected()?;
        Ok(field)
    }

    fn check_interior_connected(&self) -> Result<()> {
        let interior: Vec<usize> = (0..self.len())
            .filter(|&k| self.mask[k] == NodeLabel::Interior)
            .collect();
        let Some(&start) = interior.first() else {
            return Err(Error::InvalidInput("no interior nodes".into()));
        };
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut count = 0;
        while let Some(k) = stack.pop() {
            count += 1;
            let (i, j) = self.ij(k);
            for (di, dj) in NEIGHBOURS_8 {
                if let Some(n) = self.index(i as isize + di, j as isize + dj) {
                    if !seen[n] && self.mask[n] == NodeLabel::Interior {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        if count != interior.len() {
            return Err(Error::InvalidInput(format!(
                "interior nodes not connected ({count} of {} reachable)",
                interior.len()
            )));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.dx, self.dy)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[NodeLabel] {
        &self.mask
    }

    pub fn upstream(&self) -> &UpstreamData {
        &self.upstream
    }

    pub fn xi_r(&self) -> Vec2 {
        self.xi_r
    }

    pub fn psi_offset(&self) -> f64 {
        self.psi_offset
    }

    pub fn corner(&self) -> usize {
        self.corner
    }

    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx, k / self.nx)
    }

    pub fn index(&self, i: isize, j: isize) -> Option<usize> {
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| j as usize * self.nx + i as usize)
    }

    pub fn position(&self, k: usize) -> Vec2 {
        let (i, j) = self.ij(k);
        self.origin + Vec2::new(i as f64 * self.dx, j as f64 * self.dy)
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    pub fn label(&self, k: usize) -> NodeLabel {
        self.mask[k]
    }

    /// Upstream potential `psi_I(xi)` including the gauge offset.
    pub fn psi_upstream(&self, xi: Vec2) -> f64 {
        self.upstream.psi(xi) + self.psi_offset
    }

    /// Same field with `c` added to every sample and to the upstream potential.
    pub fn with_constant_added(&self, c: f64) -> Self {
        let mut f = self.clone();
        f.values.iter_mut().for_each(|v| *v += c);
        f.psi_offset += c;
        f
    }

    /// Same geometry with new samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::with_offset(
            self.nx,
            self.ny,
            self.origin,
            (self.dx, self.dy),
            values,
            self.mask.clone(),
            self.upstream,
            self.xi_r,
            self.psi_offset,
        )
    }

    fn inside(&self, i: isize, j: isize) -> Option<usize> {
        self.index(i, j).filter(|&k| self.mask[k] != NodeLabel::Outside)
    }

    /// First derivative along one axis and a second-difference magnitude,
    /// from central or one-sided second-order stencils of in-domain nodes.
    fn axis_derivative(&self, k: usize, axis: usize) -> Option<(f64, f64)> {
        let (i, j) = self.ij(k);
        let (i, j) = (i as isize, j as isize);
        let (di, dj, h) = if axis == 0 { (1, 0, self.dx) } else { (0, 1, self.dy) };
        let at = |s: isize| self.inside(i + s * di, j + s * dj).map(|n| self.values[n]);
        let f0 = self.values[k];
        match (at(-2), at(-1), at(1), at(2)) {
            (_, Some(m1), Some(p1), _) => Some(((p1 - m1) / (2.0 * h), (p1 - 2.0 * f0 + m1).abs() / (h * h))),
            (_, _, Some(p1), Some(p2)) => Some((
                (-3.0 * f0 + 4.0 * p1 - p2) / (2.0 * h),
                (f0 - 2.0 * p1 + p2).abs() / (h * h),
            )),
            (Some(m2), Some(m1), _, _) => Some((
                (3.0 * f0 - 4.0 * m1 + m2) / (2.0 * h),
                (f0 - 2.0 * m1 + m2).abs() / (h * h),
            )),
            _ => None,
        }
    }

    /// Finite-difference gradient, when both axes have a usable stencil.
    pub fn gradient(&self, k: usize) -> Option<Vec2> {
        Some(Vec2::new(self.axis_derivative(k, 0)?.0, self.axis_derivative(k, 1)?.0))
    }

    /// Derivative along the unit vector `n` with a second-difference bound,
    /// using only the axes `n` actually has components on.
    pub fn directional_derivative(&self, k: usize, n: Vec2) -> Option<(f64, f64)> {
        let mut d = 0.0;
        let mut second: f64 = 0.0;
        for (axis, c) in [(0, n.x), (1, n.y)] {
            if c.abs() > 1e-12 {
                let (g, s) = self.axis_derivative(k, axis)?;
                d += c * g;
                second = second.max(s);
            }
        }
        Some((d, second))
    }

    /// Outward unit normal from the offsets towards outside or off-grid
    /// neighbours (4-neighbourhood first, then the diagonals).
    pub fn outward_normal(&self, k: usize) -> Option<Vec2> {
        let (i, j) = self.ij(k);
        for set in [&NEIGHBOURS_8[..4], &NEIGHBOURS_8[4..]] {
            let mut n = Vec2::ZERO;
            for &(di, dj) in set {
                if self.inside(i as isize + di, j as isize + dj).is_none() {
                    n += Vec2::new(di as f64 * self.dx, dj as f64 * self.dy).normalized();
                }
            }
            if n.norm() > 1e-12 {
                return Some(n.normalized());
            }
        }
        None
    }

    fn nodes_with(&self, label: NodeLabel) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.mask[k] == label).collect()
    }

    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{FIELD_MAGIC}")?;
        writeln!(
            w,
            "{} {} {} {} {} {}",
            self.nx,
            self.ny,
            f64_17(self.origin.x),
            f64_17(self.origin.y),
            f64_17(self.dx),
            f64_17(self.dy)
        )?;
        write!(
            w,
            "{} {} {} {} {} {}",
            f64_17(self.upstream.gas.gamma()),
            f64_17(self.upstream.rho),
            f64_17(self.upstream.v.x),
            f64_17(self.upstream.v.y),
            f64_17(self.xi_r.x),
            f64_17(self.xi_r.y)
        )?;
        if self.psi_offset != 0.0 {
            write!(w, " {}", f64_17(self.psi_offset))?;
        }
        writeln!(w)?;
        for (v, l) in self.values.iter().zip(&self.mask) {
            writeln!(w, "{} {}", f64_17(*v), l.as_char())?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn parse<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    msg: format!("unexpected end of file, expected {what}"),
                }),
            }
        };
        let num = |s: &str, line: usize| -> Result<f64> {
            s.parse::<f64>().map_err(|e| Error::Parse {
                line,
                msg: format!("{s:?}: {e}"),
            })
        };

        let (ln, magic) = next("header")?;
        if magic.trim_end() != FIELD_MAGIC {
            return Err(Error::Parse {
                line: ln,
                msg: format!("expected {FIELD_MAGIC:?}"),
            });
        }
        let (ln, dims) = next("grid line")?;
        let t: Vec<&str> = dims.split_whitespace().collect();
        if t.len() != 6 {
            return Err(Error::Parse {
                line: ln,
                msg: "expected `nx ny x0 y0 dx dy`".into(),
            });
        }
        let int = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: ln,
                msg: format!("{s:?}: {e}"),
            })
        };
        let (nx, ny) = (int(t[0])?, int(t[1])?);
        let origin = Vec2::new(num(t[2], ln)?, num(t[3], ln)?);
        let spacing = (num(t[4], ln)?, num(t[5], ln)?);

        let (ln, state) = next("state line")?;
        let t: Vec<&str> = state.split_whitespace().collect();
        if t.len() != 6 && t.len() != 7 {
            return Err(Error::Parse {
                line: ln,
                msg: "expected `gamma rho_I vIx vIy xirx xiry`".into(),
            });
        }
        let p: Vec<f64> = t.iter().map(|s| num(s, ln)).collect::<Result<_>>()?;
        let gas = GasModel::new(p[0]).map_err(|e| Error::Parse {
            line: ln,
            msg: e.to_string(),
        })?;
        let upstream = UpstreamData::new(gas, p[1], Vec2::new(p[2], p[3])).map_err(|e| Error::Parse {
            line: ln,
            msg: e.to_string(),
        })?;
        let xi_r = Vec2::new(p[4], p[5]);
        let offset = p.get(6).copied().unwrap_or(0.0);

        let n = nx.checked_mul(ny).ok_or_else(|| Error::Parse {
            line: 2,
            msg: "grid too large".into(),
        })?;
        let mut values = Vec::with_capacity(n);
        let mut mask = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = next("node line")?;
            let mut it = line.split_whitespace();
            let (Some(v), Some(l), None) = (it.next(), it.next(), it.next()) else {
                return Err(Error::Parse {
                    line: ln,
                    msg: "expected `psi label`".into(),
                });
            };
            values.push(num(v, ln)?);
            let label = l
                .chars()
                .next()
                .filter(|_| l.len() == 1)
                .and_then(NodeLabel::from_char)
                .ok_or_else(|| Error::Parse {
                    line: ln,
                    msg: format!("unknown label {l:?}"),
                })?;
            mask.push(label);
        }
        if let Ok((ln, extra)) = next("") {
            if !extra.trim().is_empty() {
                return Err(Error::Parse {
                    line: ln,
                    msg: "trailing data".into(),
                });
            }
        }
        Self::with_offset(nx, ny, origin, spacing, values, mask, upstream, xi_r, offset)
    }

    pub fn from_text(s: &str) -> Result<Self> {
        Self::parse(s.as_bytes())
    }
}

const NEIGHBOURS_8: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub node: usize,
    pub i: usize,
    pub j: usize,
    pub label: NodeLabel,
    pub kind: ExtremumKind,
    /// Strictly below (above) every in-domain 8-neighbour; `false` marks a plateau.
    pub strict: bool,
    /// Attains the global minimum (maximum) value.
    pub global: bool,
    pub value: f64,
}

/// Discrete local extrema over in-domain 8-neighbourhoods, in node order.
pub fn find_extrema(field: &GridField) -> Vec<Extremum> {
    let domain: Vec<usize> = (0..field.len())
        .filter(|&k| field.mask[k] != NodeLabel::Outside)
        .collect();
    let gmin = domain.iter().map(|&k| field.values[k]).fold(f64::INFINITY, f64::min);
    let gmax = domain
        .iter()
        .map(|&k| field.values[k])
        .fold(f64::NEG_INFINITY, f64::max);
    domain
        .par_iter()
        .flat_map_iter(|&k| {
            let (i, j) = field.ij(k);
            let v = field.values[k];
            let (mut lower, mut higher, mut equal) = (false, false, false);
            for (di, dj) in NEIGHBOURS_8 {
                if let Some(n) = field.inside(i as isize + di, j as isize + dj) {
                    let w = field.values[n];
                    lower |= w < v;
                    higher |= w > v;
                    equal |= w == v;
                }
            }
            let mut out = Vec::new();
            let mk = |kind, strict, global| Extremum {
                node: k,
                i,
                j,
                label: field.mask[k],
                kind,
                strict,
                global,
                value: v,
            };
            if !lower {
                out.push(mk(ExtremumKind::Min, !equal, v == gmin));
            }
            if !higher {
                out.push(mk(ExtremumKind::Max, !equal, v == gmax));
            }
            out
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Outward normal derivative on wall `B` not positive.
    WallBSign,
    /// Normal derivative on wall `A` exceeds its tolerance.
    WallANonzero,
    /// Outward normal derivative on the arc not positive.
    ArcSign,
    /// Shock sample differs from the upstream potential.
    ShockResidual,
    /// Local minimum on the shock contradicting normal-shock monotonicity.
    ShockMinimum,
    /// Strict local minimum away from the reflection point.
    LocalMinimum,
    /// The global minimum is not attained at the reflection point alone.
    CornerNotMinimum,
    ConstantField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub detail: String,
}

impl Violation {
    fn at(field: &GridField, k: usize, kind: ViolationKind, detail: String) -> Self {
        let (i, j) = field.ij(k);
        Violation {
            kind,
            node: k,
            i,
            j,
            value: field.values[k],
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalCheck {
    pub node: usize,
    pub label: NodeLabel,
    pub normal: Vec2,
    /// `None` when the stencil is insufficient.
    pub derivative: Option<f64>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallReport {
    pub checks: Vec<NormalCheck>,
    pub unchecked: Vec<usize>,
    pub violations: Vec<Violation>,
}

fn normal_checks(field: &GridField, labels: &[NodeLabel]) -> Vec<NormalCheck> {
    let h = field.dx.max(field.dy);
    (0..field.len())
        .into_par_iter()
        .filter(|&k| labels.contains(&field.mask[k]))
        .map(|k| {
            let normal = field.outward_normal(k).unwrap_or(Vec2::ZERO);
            let d = field.directional_derivative(k, normal).filter(|_| normal != Vec2::ZERO);
            let floor = 1e-12 * (1.0 + field.values[k].abs());
            NormalCheck {
                node: k,
                label: field.mask[k],
                normal,
                derivative: d.map(|(d, _)| d),
                tol: d.map_or(floor, |(_, s)| (10.0 * h * s).max(floor)),
            }
        })
        .collect()
}

fn wall_report(field: &GridField, labels: &[NodeLabel]) -> WallReport {
    let checks = normal_checks(field, labels);
    let mut unchecked = Vec::new();
    let mut violations = Vec::new();
    for c in &checks {
        let Some(d) = c.derivative else {
            unchecked.push(c.node);
            continue;
        };
        match c.label {
            NodeLabel::WallB if !(d > 0.0) => violations.push(Violation::at(
                field,
                c.node,
                ViolationKind::WallBSign,
                format!("outward derivative {d:e} <= 0"),
            )),
            NodeLabel::WallA if d.abs() > c.tol => violations.push(Violation::at(
                field,
                c.node,
                ViolationKind::WallANonzero,
                format!("normal derivative {d:e} exceeds {:e}", c.tol),
            )),
            NodeLabel::Arc if !(d > 0.0) => violations.push(Violation::at(
                field,
                c.node,
                ViolationKind::ArcSign,
                format!("outward derivative {d:e} <= 0"),
            )),
            _ => {}
        }
    }
    WallReport {
        checks,
        unchecked,
        violations,
    }
}

/// Normal derivatives on both walls: positive outward on `B`, zero within
/// `10 h` times the local second difference on `A`.
pub fn check_wall_signs(field: &GridField) -> Result<WallReport> {
    if field.nodes_with(NodeLabel::WallA).is_empty() && field.nodes_with(NodeLabel::WallB).is_empty() {
        return Err(Error::InvalidInput("field has no wall nodes".into()));
    }
    Ok(wall_report(field, &[NodeLabel::WallA, NodeLabel::WallB]))
}

/// Outward normal derivative on arc nodes must be positive.
pub fn check_arc(field: &GridField) -> Result<WallReport> {
    if field.nodes_with(NodeLabel::Arc).is_empty() {
        return Err(Error::InvalidInput("field has no arc nodes".into()));
    }
    Ok(wall_report(field, &[NodeLabel::Arc]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockMinimumCheck {
    pub node: usize,
    pub tangential: Option<f64>,
    pub normal: Option<f64>,
    /// Offset of the level line through the node from the one through the
    /// reflection point, along `v_I`.
    pub offset: f64,
    /// Predicted downstream normal velocity at the node and at the corner.
    pub vn_node: Option<f64>,
    pub vn_corner: Option<f64>,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockReport {
    pub max_residual: f64,
    pub tol: f64,
    pub minima: Vec<ShockMinimumCheck>,
    pub violations: Vec<Violation>,
}

/// Downstream normal velocity behind a straight shock normal to `v_I`
/// whose upstream normal pseudo-velocity is `zn_u`.
fn predicted_vn(up: &UpstreamData, zn_u: f64) -> Option<f64> {
    let (_, zn_d) = normal_jump(&up.gas, up.rho, zn_u).ok()?;
    Some(up.v.norm() - (zn_u - zn_d))
}

fn shock_minimum_check(field: &GridField, k: usize) -> ShockMinimumCheck {
    let up = &field.upstream;
    let n = field.outward_normal(k).unwrap_or(Vec2::ZERO);
    let normal = field.directional_derivative(k, n).map(|d| d.0);
    let tangential = field.directional_derivative(k, n.perp()).map(|d| d.0);
    let speed = up.v.norm();
    let n_hat = up.v / speed;
    let offset = (field.values[k] - field.psi_upstream(field.xi_r)) / speed;
    let zn0 = speed - field.xi_r.dot(n_hat);
    let vn_node = predicted_vn(up, zn0 - offset);
    let vn_corner = predicted_vn(up, zn0);
    let below_corner = field.values[k] < field.values[field.corner];
    let excluded = below_corner && matches!((vn_node, vn_corner), (Some(a), Some(b)) if a < b);
    ShockMinimumCheck {
        node: k,
        tangential,
        normal,
        offset,
        vn_node,
        vn_corner,
        excluded,
    }
}

/// Continuity with the upstream potential on shock nodes, and the
/// monotonicity contradiction at shock nodes that are local minima.
pub fn check_shock_nodes(field: &GridField) -> Result<ShockReport> {
    let nodes = field.nodes_with(NodeLabel::Shock);
    if nodes.is_empty() {
        return Err(Error::InvalidInput("field has no shock nodes".into()));
    }
    Ok(shock_report(field, &nodes, &find_extrema(field)))
}

fn shock_report(field: &GridField, nodes: &[usize], extrema: &[Extremum]) -> ShockReport {
    let scale = field.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + scale);
    let mut violations = Vec::new();
    let mut max_residual: f64 = 0.0;
    for &k in nodes {
        let res = (field.values[k] - field.psi_upstream(field.position(k))).abs();
        max_residual = max_residual.max(res);
        if res > tol {
            violations.push(Violation::at(
                field,
                k,
                ViolationKind::ShockResidual,
                format!("|psi - psi_I| = {res:e}"),
            ));
        }
    }
    let minima: Vec<ShockMinimumCheck> = extrema
        .iter()
        .filter(|e| e.kind == ExtremumKind::Min && e.strict && e.label == NodeLabel::Shock)
        .map(|e| shock_minimum_check(field, e.node))
        .collect();
    for m in &minima {
        let detail = if m.excluded {
            format!(
                "minimum excluded: predicted normal velocity {:e} below corner value {:e}",
                m.vn_node.unwrap_or(f64::NAN),
                m.vn_corner.unwrap_or(f64::NAN)
            )
        } else {
            "minimum on shock not excluded by monotonicity".to_string()
        };
        violations.push(Violation::at(field, m.node, ViolationKind::ShockMinimum, detail));
    }
    ShockReport {
        max_residual,
        tol,
        minima,
        violations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConsistentWeak,
    ViolatesMinimumPrinciple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumReport {
    pub verdict: Verdict,
    pub global_minimum: Vec<usize>,
    pub corner: usize,
    pub extrema: Vec<Extremum>,
    pub plateaus: Vec<usize>,
    pub unchecked: Vec<usize>,
    pub max_shock_residual: Option<f64>,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl MinimumReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per violation.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict: {:?}", self.verdict);
        for v in &self.violations {
            let _ = writeln!(s, "  {:?} at ({}, {}): {}", v.kind, v.i, v.j, v.detail);
        }
        s
    }
}

/// Runs every applicable check; `consistent_weak` iff the unique global
/// minimum is the reflection point and no check reports a violation.
pub fn minimum_report(field: &GridField) -> MinimumReport {
    let extrema = find_extrema(field);
    let mut violations = Vec::new();
    let mut unchecked = Vec::new();
    let mut notes = Vec::new();

    let walls = wall_report(field, &[NodeLabel::WallA, NodeLabel::WallB, NodeLabel::Arc]);
    violations.extend(walls.violations);
    unchecked.extend(walls.unchecked);

    let b_nodes = field.nodes_with(NodeLabel::WallB);
    let v_i = field.upstream.v;
    if b_nodes
        .iter()
        .filter_map(|&k| field.outward_normal(k))
        .any(|n| v_i.norm() > 0.0 && n.dot(v_i).abs() < 1e-9 * v_i.norm())
    {
        notes.push("v_I perpendicular to the opposite wall normal: the wall-B sign argument does not apply".into());
    }

    let shock_nodes = field.nodes_with(NodeLabel::Shock);
    let max_shock_residual = if shock_nodes.is_empty() {
        None
    } else {
        let r = shock_report(field, &shock_nodes, &extrema);
        violations.extend(r.violations);
        Some(r.max_residual)
    };

    for e in &extrema {
        if e.kind == ExtremumKind::Min && e.strict && e.node != field.corner && e.label != NodeLabel::Shock {
            violations.push(Violation::at(
                field,
                e.node,
                ViolationKind::LocalMinimum,
                format!("strict local minimum on {:?} node", e.label),
            ));
        }
    }
    let plateaus: Vec<usize> = extrema.iter().filter(|e| !e.strict).map(|e| e.node).collect();

    let domain: Vec<usize> = (0..field.len())
        .filter(|&k| field.mask[k] != NodeLabel::Outside)
        .collect();
    let gmin = domain.iter().map(|&k| field.values[k]).fold(f64::INFINITY, f64::min);
    let gmax = domain
        .iter()
        .map(|&k| field.values[k])
        .fold(f64::NEG_INFINITY, f64::max);
    let global_minimum: Vec<usize> = domain.iter().copied().filter(|&k| field.values[k] == gmin).collect();
    if gmin == gmax {
        violations.push(Violation::at(
            field,
            field.corner,
            ViolationKind::ConstantField,
            "field is constant".into(),
        ));
    } else if global_minimum != [field.corner] {
        let at: Vec<String> = global_minimum.iter().map(|&k| format!("{:?}", field.ij(k))).collect();
        violations.push(Violation::at(
            field,
            field.corner,
            ViolationKind::CornerNotMinimum,
            format!("global minimum {gmin:e} attained at {}", at.join(" ")),
        ));
    }
    violations.sort_by_key(|v| (v.node, v.kind as u8));
    unchecked.sort_unstable();

    MinimumReport {
        verdict: if violations.is_empty() {
            Verdict::ConsistentWeak
        } else {
            Verdict::ViolatesMinimumPrinciple
        },
        global_minimum,
        corner: field.corner,
        extrema,
        plateaus,
        unchecked,
        max_shock_residual,
        violations,
        notes,
    }
}

/// Synthetic fields for exercising the diagnostics.
pub mod synth {
    use super::*;

    /// Weak-type-like corner: wall `A` along `+x` from the reflection point,
    /// straight shock at angle `theta`, opposite wall `B` on the last column.
    /// Inside, `psi = psi_R + eps r cos(beta phi)`; shock nodes carry the
    /// upstream potential, which matches it along the shock line.
    #[derive(Debug, Clone, Copy, PartialEq)]
    pub struct WeakFieldParams {
        pub n: usize,
        pub length: f64,
        pub x_r: f64,
        pub beta: f64,
        pub epsilon: f64,
        pub normal_speed: f64,
        pub gamma: f64,
        pub rho: f64,
    }

    impl Default for WeakFieldParams {
        fn default() -> Self {
            WeakFieldParams {
                n: 65,
                length: 1.0,
                x_r: 0.25,
                beta: 0.8,
                epsilon: 0.1,
                normal_speed: 3.0,
                gamma: 1.4,
                rho: 1.0,
            }
        }
    }

    impl WeakFieldParams {
        pub fn spacing(&self) -> f64 {
            self.length / (self.n - 1) as f64
        }

        /// Shock angle, fixed at 45 degrees so the diagonal nodes lie on it.
        pub fn theta(&self) -> f64 {
            std::f64::consts::FRAC_PI_4
        }

        pub fn xi_r(&self) -> Vec2 {
            Vec2::new(self.x_r, 0.0)
        }

        pub fn upstream(&self) -> Result<UpstreamData> {
            let th = self.theta();
            let e_theta = Vec2::from_angle(th);
            let n_r = Vec2::new(th.sin(), -th.cos());
            let v = e_theta * (self.epsilon * (self.beta * th).cos()) + n_r * self.normal_speed;
            UpstreamData::new(GasModel::new(self.gamma)?, self.rho, v)
        }

        /// Closed-form value and gradient at `xi`.
        pub fn exact(&self, xi: Vec2) -> Result<(f64, Vec2)> {
            let psi_r = self.upstream()?.psi(self.xi_r());
            let d = xi - self.xi_r();
            let (r, phi) = (d.norm(), d.angle());
            let (s, c) = (self.beta * phi).sin_cos();
            let e_r = Vec2::from_angle(phi);
            let grad = e_r * (self.epsilon * c) - e_r.perp() * (self.epsilon * self.beta * s);
            Ok((psi_r + self.epsilon * r * c, grad))
        }
    }

    pub fn weak_field(p: &WeakFieldParams) -> Result<GridField> {
        let n = p.n;
        let h = p.spacing();
        let up = p.upstream()?;
        let mut values = Vec::with_capacity(n * n);
        let mut mask = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let xi = p.xi_r() + Vec2::new(i as f64 * h, j as f64 * h);
                let label = if i == 0 && j == 0 {
                    NodeLabel::Corner
                } else if j > i {
                    NodeLabel::Outside
                } else if j == i {
                    NodeLabel::Shock
                } else if i == n - 1 {
                    NodeLabel::WallB
                } else if j == 0 {
                    NodeLabel::WallA
                } else {
                    NodeLabel::Interior
                };
                let v = match label {
                    NodeLabel::Outside => 0.0,
                    NodeLabel::Shock => up.psi(xi),
                    _ => p.exact(xi)?.0,
                };
                values.push(v);
                mask.push(label);
            }
        }
        GridField::new(n, n, p.xi_r(), (h, h), values, mask, up, p.xi_r())
    }

    /// Lowers one wall-`B` node by `depth`.
    pub fn with_wall_b_dip(field: &GridField, j: usize, depth: f64) -> Result<GridField> {
        let k = field
            .index(field.nx() as isize - 1, j as isize)
            .filter(|&k| field.label(k) == NodeLabel::WallB);
        let k = k.ok_or_else(|| Error::InvalidInput(format!("no wall-B node in row {j}")))?;
        let mut v = field.values().to_vec();
        v[k] -= depth;
        field.with_values(v)
    }

    /// Sets shock node `(i, i)` to `below` under the corner value.
    pub fn with_shock_minimum(field: &GridField, i: usize, below: f64) -> Result<GridField> {
        let k = field
            .index(i as isize, i as isize)
            .filter(|&k| field.label(k) == NodeLabel::Shock);
        let k = k.ok_or_else(|| Error::InvalidInput(format!("({i}, {i}) is not a shock node")))?;
        let mut v = field.values().to_vec();
        v[k] = v[field.corner()] - below;
        field.with_values(v)
    }

    /// Multiplies `psi - psi_R` off the shock by `1 - 2 exp(-r / width)`, so
    /// the potential decreases away from the corner near it.
    pub fn with_corner_descent(field: &GridField, width: f64) -> Result<GridField> {
        let psi_r = field.value(field.corner());
        let v = (0..field.len())
            .map(|k| {
                let psi = field.value(k);
                match field.label(k) {
                    NodeLabel::Outside | NodeLabel::Shock => psi,
                    _ => {
                        let r = (field.position(k) - field.xi_r()).norm();
                        psi_r + (psi - psi_r) * (1.0 - 2.0 * (-r / width).exp())
                    }
                }
            })
            .collect();
        field.with_values(v)
    }

    /// Disk of radius `radius` about `center` with boundary nodes on the arc
    /// and the corner at the bottom node; `psi = kappa |xi - c|^2 + v_h . (xi - c)`.
    pub fn arc_field(n: usize, radius: f64, kappa: f64, v_h: Vec2) -> Result<GridField> {
        let h = 2.0 * radius / (n - 1) as f64;
        let center = Vec2::new(radius, radius);
        let inside = |i: isize, j: isize| {
            (0..n as isize).contains(&i)
                && (0..n as isize).contains(&j)
                && (Vec2::new(i as f64 * h, j as f64 * h) - center).norm() <= radius * (1.0 + 1e-12)
        };
        let mid = (n / 2) as isize;
        let mut values = Vec::with_capacity(n * n);
        let mut mask = Vec::with_capacity(n * n);
        for j in 0..n as isize {
            for i in 0..n as isize {
                let d = Vec2::new(i as f64 * h, j as f64 * h) - center;
                let label = if !inside(i, j) {
                    NodeLabel::Outside
                } else if (i, j) == (mid, 0) {
                    NodeLabel::Corner
                } else if [(1, 0), (-1, 0), (0, 1), (0, -1)]
                    .iter()
                    .any(|&(a, b)| !inside(i + a, j + b))
                {
                    NodeLabel::Arc
                } else {
                    NodeLabel::Interior
                };
                values.push(if label == NodeLabel::Outside {
                    0.0
                } else {
                    kappa * d.norm_sq() + v_h.dot(d)
                });
                mask.push(label);
            }
        }
        let up = UpstreamData::new(GasModel::new(1.4)?, 1.0, v_h)?;
        let corner = Vec2::new(mid as f64 * h, 0.0);
        GridField::new(n, n, Vec2::ZERO, (h, h), values, mask, up, corner)
    }
}
