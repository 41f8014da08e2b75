//! The shock polar through a fixed point `xi`: every downstream velocity that
//! an admissible shock through `xi` can produce from fixed upstream data.
//!
//! The polar is parametrized by the upstream normal pseudo-Mach number
//! `Mn = zn_u / c_I` in `(1, L_I]` and a side tag. `Mn -> 1` is the vanishing
//! shock, `Mn = L_I` the pseudo-normal point `N` where the shock normal is
//! parallel to `z_I`. Side `+` holds the points with `zt > 0`, whose
//! downstream pseudo-velocity is turned counterclockwise from `z_I`; side `-`
//! is its mirror image across the `z_I` axis.
//!
//! Shocks are classified by the sign of `g_v . z_d` at the downstream state:
//! negative is weak-type, positive strong-type, zero critical-type. On the
//! convex polytropic polar the critical point is where the turning angle
//! `tau = angle(z_I, z_d)` peaks at `tau_*`.

use std::f64::consts::PI;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::f64_17;
use crate::geom::Vec2;
use crate::root::bisect_secant;
use crate::shock::{g_grad_v, oblique_jump, ShockPoint, UpstreamData, VANISHING_SHOCK_TOL};

/// Relative width of the critical band on the type indicator.
pub const CRITICAL_REL_TOL: f64 = 1e-9;

/// Minimum samples per side for a curvature report.
pub const MIN_CONVEXITY_SAMPLES: usize = 16;

pub const POLAR_CSV_HEADER: &str = "Mn,side,nx,ny,vx,vy,rho_d,zt,zn_d,indicator,type";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }

    pub fn of_turning(tau: f64) -> Side {
        if tau < 0.0 {
            Side::Minus
        } else {
            Side::Plus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeLabel {
    Weak,
    Critical,
    Strong,
}

impl TypeLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TypeLabel::Weak => "weak",
            TypeLabel::Critical => "critical",
            TypeLabel::Strong => "strong",
        }
    }

    pub fn parse(s: &str) -> Option<TypeLabel> {
        match s {
            "weak" => Some(TypeLabel::Weak),
            "critical" => Some(TypeLabel::Critical),
            "strong" => Some(TypeLabel::Strong),
            _ => None,
        }
    }
}

/// Type label with the indicator `g_v . z_d` it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockType {
    pub label: TypeLabel,
    pub indicator: f64,
}

/// Weak/critical/strong classification of an admissible shock by the sign
/// of `g_v . z_d`, with a critical band of relative width
/// [`CRITICAL_REL_TOL`] on `|g_v| |z_d|`.
pub fn classify_type(upstream: &UpstreamData, sp: &ShockPoint) -> Result<ShockType> {
    if sp.strength() < VANISHING_SHOCK_TOL * (1.0 + upstream.v.norm()) {
        return Err(Error::DegenerateShock);
    }
    let gv = g_grad_v(upstream, sp.v_d, sp.xi)?;
    let zd = sp.z_d();
    let indicator = gv.dot(zd);
    let tol = CRITICAL_REL_TOL * gv.norm() * zd.norm();
    let label = if indicator < -tol {
        TypeLabel::Weak
    } else if indicator > tol {
        TypeLabel::Strong
    } else {
        TypeLabel::Critical
    };
    Ok(ShockType { label, indicator })
}

/// Counterclockwise turning angle from the upstream to the downstream
/// pseudo-velocity, in radians.
pub fn turning_angle(sp: &ShockPoint) -> f64 {
    sp.z_u().angle_to(sp.z_d())
}

/// The polar point with upstream normal pseudo-Mach `mn` on `side`.
pub fn polar_point(upstream: &UpstreamData, xi: Vec2, mn: f64, side: Side) -> Result<ShockPoint> {
    let z = upstream.z(xi);
    let mach = z.norm() / upstream.sound_speed();
    let cos_phi = (mn / mach).min(1.0);
    let phi = cos_phi.acos();
    let n = if phi == 0.0 {
        z / z.norm()
    } else {
        (z / z.norm()).rotated(-side.sign() * phi)
    };
    oblique_jump(upstream, xi, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarSample {
    pub mn: f64,
    pub side: Side,
    pub point: ShockPoint,
    pub shock_type: ShockType,
    /// Signed turning angle in radians.
    pub turning: f64,
}

impl PolarSample {
    fn at(upstream: &UpstreamData, xi: Vec2, mn: f64, side: Side) -> Result<Self> {
        let point = polar_point(upstream, xi, mn, side)?;
        let shock_type = classify_type(upstream, &point)?;
        Ok(PolarSample {
            mn,
            side,
            point,
            shock_type,
            turning: turning_angle(&point),
        })
    }
}

/// A distinguished polar point located by root refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub mn: f64,
    pub side: Side,
    pub point: ShockPoint,
    pub turning: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    pub upstream: UpstreamData,
    pub xi: Vec2,
    /// Upstream pseudo-Mach `L_I = |z_I| / c_I`, the largest `Mn`.
    pub mach: f64,
    /// Side `+` in ascending `Mn`, then side `-` in ascending `Mn`.
    pub samples: Vec<PolarSample>,
    /// Pseudo-normal point `N` (`zt = 0`).
    pub normal_point: ShockPoint,
    /// Critical points (peak turning), one per side.
    pub critical: [MarkedPoint; 2],
    /// Sonic points (`L_d = 1`), when the branch crosses sonic.
    pub sonic: Vec<MarkedPoint>,
}

/// `Mn` grid clustered towards both ends of `(1, mach]`.
fn mn_grid(mach: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            if k == n {
                mach
            } else {
                1.0 + (mach - 1.0) * 0.5 * (1.0 - (PI * k as f64 / n as f64).cos())
            }
        })
        .collect()
}

/// Traces `n_samples` points per side of the polar through `xi`.
pub fn polar_trace(upstream: &UpstreamData, xi: Vec2, n_samples: usize) -> Result<Polar> {
    if n_samples < 2 {
        return Err(Error::TooFewSamples { got: n_samples, min: 2 });
    }
    let mach = upstream.pseudo_mach(xi);
    if !(mach > 1.0) {
        return Err(Error::NoPolar(mach));
    }
    let grid = mn_grid(mach, n_samples);
    let jobs: Vec<(Side, f64)> = [Side::Plus, Side::Minus]
        .iter()
        .flat_map(|&s| grid.iter().map(move |&m| (s, m)))
        .collect();
    let samples = jobs
        .par_iter()
        .map(|&(side, mn)| PolarSample::at(upstream, xi, mn, side))
        .collect::<Result<Vec<_>>>()?;

    let normal_point = samples[n_samples - 1].point;
    let plus = &samples[..n_samples];
    let crit_plus = locate_critical(upstream, xi, plus)?;
    let crit_minus = mirror_marked(upstream, xi, &crit_plus)?;

    let mut sonic = Vec::new();
    for side in [Side::Plus, Side::Minus] {
        let branch: Vec<&PolarSample> = samples.iter().filter(|s| s.side == side).collect();
        if let Some(p) = locate_sonic(upstream, xi, side, &branch)? {
            sonic.push(p);
        }
    }

    Ok(Polar {
        upstream: *upstream,
        xi,
        mach,
        samples,
        normal_point,
        critical: [crit_plus, crit_minus],
        sonic,
    })
}

fn marked(upstream: &UpstreamData, xi: Vec2, mn: f64, side: Side) -> Result<MarkedPoint> {
    let point = polar_point(upstream, xi, mn, side)?;
    Ok(MarkedPoint {
        mn,
        side,
        point,
        turning: turning_angle(&point),
    })
}

fn mirror_marked(upstream: &UpstreamData, xi: Vec2, p: &MarkedPoint) -> Result<MarkedPoint> {
    marked(upstream, xi, p.mn, Side::Minus)
}

fn indicator_at(upstream: &UpstreamData, xi: Vec2, mn: f64, side: Side) -> Result<f64> {
    let p = polar_point(upstream, xi, mn, side)?;
    Ok(classify_type(upstream, &p)?.indicator)
}

fn locate_critical(upstream: &UpstreamData, xi: Vec2, branch: &[PolarSample]) -> Result<MarkedPoint> {
    let side = branch[0].side;
    let pair = branch
        .windows(2)
        .find(|w| w[0].shock_type.indicator < 0.0 && w[1].shock_type.indicator >= 0.0);
    let (a, b, fa, fb) = match pair {
        Some(w) => (w[0].mn, w[1].mn, w[0].shock_type.indicator, w[1].shock_type.indicator),
        None => {
            // sign change between the vanishing end and the first sample
            let first = &branch[0];
            if first.shock_type.indicator < 0.0 {
                return Err(Error::RootFinding("type indicator never changes sign".into()));
            }
            let a = 1.0 + (first.mn - 1.0) * 1e-3;
            (
                a,
                first.mn,
                indicator_at(upstream, xi, a, side)?,
                first.shock_type.indicator,
            )
        }
    };
    let mn = bisect_secant(|m| indicator_at(upstream, xi, m, side), a, b, fa, fb, 1e-15 * b)?;
    marked(upstream, xi, mn, side)
}

fn locate_sonic(upstream: &UpstreamData, xi: Vec2, side: Side, branch: &[&PolarSample]) -> Result<Option<MarkedPoint>> {
    let excess = |s: &PolarSample| s.point.pseudo_mach_d() - 1.0;
    let pair = branch.windows(2).find(|w| excess(w[0]) > 0.0 && excess(w[1]) <= 0.0);
    let Some(w) = pair else { return Ok(None) };
    let f = |m: f64| Ok(polar_point(upstream, xi, m, side)?.pseudo_mach_d() - 1.0);
    let mn = bisect_secant(f, w[0].mn, w[1].mn, excess(w[0]), excess(w[1]), 1e-15 * w[1].mn)?;
    Ok(Some(marked(upstream, xi, mn, side)?))
}

impl Polar {
    pub fn side(&self, side: Side) -> impl Iterator<Item = &PolarSample> {
        self.samples.iter().filter(move |s| s.side == side)
    }

    pub fn samples_per_side(&self) -> usize {
        self.samples.len() / 2
    }

    /// Peak turning angle `tau_*` in radians (positive).
    pub fn max_turning(&self) -> f64 {
        self.critical[0].turning.abs()
    }

    /// Admissible branch as one curve: side `+` from the vanishing end to
    /// `N`, then side `-` back to the vanishing end.
    pub fn branch_curve(&self) -> Vec<Vec2> {
        let mut pts: Vec<Vec2> = self.side(Side::Plus).map(|s| s.point.v_d).collect();
        let minus: Vec<Vec2> = self.side(Side::Minus).map(|s| s.point.v_d).collect();
        pts.extend(minus.iter().rev().skip(1));
        pts
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{POLAR_CSV_HEADER}")?;
        for s in &self.samples {
            let p = &s.point;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                f64_17(s.mn),
                s.side.as_str(),
                f64_17(p.n.x),
                f64_17(p.n.y),
                f64_17(p.v_d.x),
                f64_17(p.v_d.y),
                f64_17(p.rho_d),
                f64_17(p.zt),
                f64_17(p.zn_d),
                f64_17(s.shock_type.indicator),
                s.shock_type.label.as_str()
            )?;
        }
        Ok(())
    }
}

/// One parsed row of a polar CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarCsvRow {
    pub mn: f64,
    pub side: Side,
    pub n: Vec2,
    pub v: Vec2,
    pub rho_d: f64,
    pub zt: f64,
    pub zn_d: f64,
    pub indicator: f64,
    pub label: TypeLabel,
}

pub fn parse_polar_csv<R: BufRead>(r: R) -> Result<Vec<PolarCsvRow>> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if i == 0 {
            if line != POLAR_CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    msg: "unexpected header".into(),
                });
            }
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("{} columns", cols.len()),
            });
        }
        let num = |k: usize| -> Result<f64> {
            cols[k].parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("column {k}: {e}"),
            })
        };
        let side = match cols[1] {
            "+" => Side::Plus,
            "-" => Side::Minus,
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("side {other:?}"),
                })
            }
        };
        let label = TypeLabel::parse(cols[10]).ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("type {:?}", cols[10]),
        })?;
        rows.push(PolarCsvRow {
            mn: num(0)?,
            side,
            n: Vec2::new(num(2)?, num(3)?),
            v: Vec2::new(num(4)?, num(5)?),
            rho_d: num(6)?,
            zt: num(7)?,
            zn_d: num(8)?,
            indicator: num(9)?,
            label,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    /// Signed curvature at each interior point of [`Polar::branch_curve`].
    pub curvature: Vec<f64>,
    pub single_signed: bool,
}

/// Discrete signed curvature of the admissible branch from the circumcircle
/// through consecutive point triples.
pub fn convexity_report(polar: &Polar) -> Result<ConvexityReport> {
    let per_side = polar.samples_per_side();
    if per_side < MIN_CONVEXITY_SAMPLES {
        return Err(Error::TooFewSamples {
            got: per_side,
            min: MIN_CONVEXITY_SAMPLES,
        });
    }
    let pts = polar.branch_curve();
    let curvature: Vec<f64> = pts
        .windows(3)
        .map(|w| {
            let (a, b, c) = (w[0], w[1], w[2]);
            2.0 * (b - a).cross(c - b) / ((b - a).norm() * (c - b).norm() * (c - a).norm())
        })
        .collect();
    let single_signed = curvature.iter().all(|&k| k > 0.0) || curvature.iter().all(|&k| k < 0.0);
    Ok(ConvexityReport {
        curvature,
        single_signed,
    })
}

/// A polar point whose downstream pseudo-velocity is turned by a prescribed
/// angle from `z_I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeflectionRoot {
    pub mn: f64,
    pub side: Side,
    pub point: ShockPoint,
    pub shock_type: ShockType,
    pub turning: f64,
}

/// Absolute band (radians) around zero deflection treated as pseudo-normal.
const ZERO_TURNING_TOL: f64 = 1e-14;
/// Relative band around `tau_*` treated as the critical root.
const CRITICAL_TURNING_TOL: f64 = 1e-12;

/// All nonzero-strength admissible polar points with turning angle `tau`
/// (radians, signed), sorted by `Mn` so weak-type roots come first. An empty
/// result means the shock is detached.
pub fn solve_deflection(polar: &Polar, tau: f64) -> Result<Vec<DeflectionRoot>> {
    let up = &polar.upstream;
    let xi = polar.xi;
    let root_at = |mn: f64, side: Side| -> Result<DeflectionRoot> {
        let point = polar_point(up, xi, mn, side)?;
        let shock_type = classify_type(up, &point)?;
        Ok(DeflectionRoot {
            mn,
            side,
            point,
            shock_type,
            turning: turning_angle(&point),
        })
    };

    if tau.abs() <= ZERO_TURNING_TOL {
        return Ok(vec![root_at(polar.mach, Side::Plus)?]);
    }
    let side = Side::of_turning(tau);
    let target = tau.abs();
    let tau_star = polar.max_turning();
    let crit = polar.critical[0].mn;
    if (target - tau_star).abs() <= CRITICAL_TURNING_TOL * tau_star.max(1.0) {
        return Ok(vec![root_at(crit, side)?]);
    }
    if target > tau_star {
        return Ok(Vec::new());
    }

    let f = |mn: f64| -> Result<f64> { Ok(side.sign() * turning_angle(&polar_point(up, xi, mn, side)?) - target) };
    // bracket candidates: vanishing end, samples, critical point
    let mut nodes: Vec<(f64, f64)> = vec![(1.0, -target)];
    let mut crit_inserted = false;
    for s in polar.side(side) {
        if !crit_inserted && s.mn > crit {
            nodes.push((crit, tau_star - target));
            crit_inserted = true;
        }
        nodes.push((s.mn, side.sign() * s.turning - target));
    }
    if !crit_inserted {
        nodes.push((crit, tau_star - target));
    }

    let mut roots: Vec<DeflectionRoot> = Vec::new();
    for w in nodes.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if fa == 0.0 || fa.signum() == fb.signum() {
            if fb == 0.0 && b != 1.0 {
                push_root(&mut roots, root_at(b, side));
            }
            continue;
        }
        let mn = bisect_secant(f, a, b, fa, fb, 1e-15 * b)?;
        push_root(&mut roots, root_at(mn, side));
    }
    roots.sort_by(|a, b| a.mn.total_cmp(&b.mn));
    Ok(roots)
}

fn push_root(roots: &mut Vec<DeflectionRoot>, r: Result<DeflectionRoot>) {
    // vanishing-strength candidates fail classification and are dropped
    if let Ok(r) = r {
        if !roots.iter().any(|q| (q.mn - r.mn).abs() <= 1e-12 * r.mn) {
            roots.push(r);
        }
    }
}
