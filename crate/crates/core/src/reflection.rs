//! Local regular reflection at a wall point `xi_r`.
//!
//! The reflected shock passes through `xi_r` with the constant state on its
//! hyperbolic side as upstream data; it must produce a downstream velocity
//! parallel to the wall. With `xi_r` on a wall line through the origin
//! (`xi_r . n_wall = 0`) this is the same as a downstream pseudo-velocity
//! parallel to the wall, so the reflected shocks are the polar points with
//! turning angle `tau = angle(z_I, wall_dir)`.
//!
//! Every solution is also put into the corner frame: wall along `+x` from
//! `xi_r`, shock tangent ray in the first quadrant, observer moving with the
//! downstream flow so that `v_3 = 0`. There `theta` is the wall-to-tangent
//! angle and `alpha` the counterclockwise angle from the shock tangent `t_r`
//! to `-g_v`. Weak-type shocks have `alpha + theta < 90`, strong-type
//! `alpha + theta > 90`.

use std::io::{self, BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::f64_17;
use crate::gas::GasModel;
use crate::geom::Vec2;
use crate::polar::{polar_trace, solve_deflection, Polar, ShockType, TypeLabel};
use crate::root::bisect_secant;
use crate::shock::{g_grad_v, oblique_jump, ShockPoint, UpstreamData};

pub const DEFAULT_POLAR_SAMPLES: usize = 128;

/// Tolerance (degrees) of the angle trichotomy.
pub const ANGLE_TOL_DEG: f64 = 1e-7;

/// Largest residual downstream velocity normal to the wall.
pub const WALL_PARALLEL_TOL: f64 = 1e-10;

const SLIP_TOL: f64 = 1e-12;
const SONIC_TOL: f64 = 1e-9;
const DEGENERATE_THETA_TOL_DEG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    ClassicalRr,
    SupersonicWedge,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::ClassicalRr => "classical_rr",
            Scenario::SupersonicWedge => "supersonic_wedge",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionConfig {
    /// State on the hyperbolic side of the reflected shock.
    pub upstream: UpstreamData,
    pub xi_r: Vec2,
    /// Unit vector along the wall, pointing downstream.
    pub wall_dir: Vec2,
    pub scenario: Scenario,
}

impl ReflectionConfig {
    pub fn new(upstream: UpstreamData, xi_r: Vec2, wall_dir: Vec2, scenario: Scenario) -> Result<Self> {
        let len = wall_dir.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidInput("wall direction must be nonzero".into()));
        }
        if !xi_r.is_finite() {
            return Err(Error::InvalidInput("non-finite reflection point".into()));
        }
        let wall_dir = wall_dir / len;
        let off = xi_r.dot(wall_dir.perp());
        if off.abs() > SLIP_TOL * (1.0 + xi_r.norm()) {
            return Err(Error::InvalidInput(format!(
                "reflection point is off the wall line through the origin (xi_r . n_wall = {off:e})"
            )));
        }
        let mach = upstream.pseudo_mach(xi_r);
        if !(mach > 1.0) {
            return Err(Error::NoPolar(mach));
        }
        Ok(ReflectionConfig {
            upstream,
            xi_r,
            wall_dir,
            scenario,
        })
    }

    pub fn wall_normal(&self) -> Vec2 {
        self.wall_dir.perp()
    }

    /// Signed turning from `z_I` to the wall direction, radians.
    pub fn deflection(&self) -> f64 {
        self.upstream.z(self.xi_r).angle_to(self.wall_dir)
    }
}

/// Constant state behind a straight incident shock through `xi` with
/// downstream normal `n_incident`.
pub fn state_behind_incident(upstream1: &UpstreamData, xi: Vec2, n_incident: Vec2) -> Result<UpstreamData> {
    let sp = oblique_jump(upstream1, xi, n_incident)?;
    UpstreamData::new(upstream1.gas, sp.rho_d, sp.v_d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SonicCharacter {
    Transonic,
    Sonic,
    Supersonic,
}

impl SonicCharacter {
    pub fn of(l3: f64) -> Self {
        if (l3 - 1.0).abs() <= SONIC_TOL {
            SonicCharacter::Sonic
        } else if l3 < 1.0 {
            SonicCharacter::Transonic
        } else {
            SonicCharacter::Supersonic
        }
    }
}

/// Corner-frame data of a reflected shock: wall along `+x`, shock tangent
/// ray in the first quadrant, observer with `v_3 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerGeometry {
    /// Corner-frame axes expressed in the original frame.
    pub e1: Vec2,
    pub e2: Vec2,
    /// Observer velocity (along the wall) that brings `v_3` to zero.
    pub observer_shift: Vec2,
    /// `xi_r` after the observer shift, in the corner frame; `-z_d` there.
    pub xi_r: Vec2,
    pub n_r: Vec2,
    pub t_r: Vec2,
    /// `-g_v` at the root, in the corner frame.
    pub minus_gv: Vec2,
    pub z_d: Vec2,
}

impl CornerGeometry {
    pub fn to_corner(&self, v: Vec2) -> Vec2 {
        Vec2::new(v.dot(self.e1), v.dot(self.e2))
    }

    pub fn theta_deg(&self) -> f64 {
        self.t_r.angle().to_degrees()
    }

    pub fn alpha_deg(&self) -> f64 {
        self.t_r.angle_to(self.minus_gv).to_degrees()
    }
}

fn corner_geometry(shock: &ShockPoint, config: &ReflectionConfig) -> Result<CornerGeometry> {
    let e1 = config.wall_dir;
    let w = e1 * shock.v_d.dot(e1);
    let residual = (shock.v_d - w).norm();
    if residual > WALL_PARALLEL_TOL * shock.v_d.norm().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "downstream velocity not parallel to the wall (|v_3| = {residual:e} after normalization)"
        )));
    }
    // mirror if needed so the downstream normal points towards the wall
    let e2 = if shock.n.dot(e1.perp()) > 0.0 {
        -e1.perp()
    } else {
        e1.perp()
    };
    let geo = CornerGeometry {
        e1,
        e2,
        observer_shift: w,
        xi_r: Vec2::ZERO,
        n_r: Vec2::ZERO,
        t_r: Vec2::ZERO,
        minus_gv: Vec2::ZERO,
        z_d: Vec2::ZERO,
    };
    let n_r = geo.to_corner(shock.n);
    let gv = g_grad_v(&shock.upstream, shock.v_d, shock.xi)?;
    let geo = CornerGeometry {
        xi_r: geo.to_corner(config.xi_r - w),
        n_r,
        t_r: n_r.perp(),
        minus_gv: -geo.to_corner(gv),
        z_d: geo.to_corner(shock.z_d()),
        ..geo
    };

    let zd = geo.z_d;
    if !(zd.x > 0.0) || zd.y.abs() > WALL_PARALLEL_TOL * zd.norm().max(1.0) {
        return Err(Error::SignFact(format!("z_d = ({}, {}) not along +wall", zd.x, zd.y)));
    }
    let g = geo.minus_gv;
    let tol = 1e-12 * g.norm();
    let degenerate = (geo.theta_deg() - 90.0).abs() < DEGENERATE_THETA_TOL_DEG;
    if g.dot(geo.t_r) <= if degenerate { -tol } else { 0.0 } {
        return Err(Error::SignFact(format!("-g_v . t_r = {} not positive", g.dot(geo.t_r))));
    }
    if g.dot(geo.n_r) >= 0.0 {
        return Err(Error::SignFact(format!("-g_v . n_r = {} not negative", g.dot(geo.n_r))));
    }
    Ok(geo)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSolution {
    pub shock: ShockPoint,
    #[serde(rename = "type")]
    pub shock_type: ShockType,
    /// Wall to shock-tangent angle, degrees, in `(0, 90]`.
    pub theta: f64,
    /// Angle from `t_r` to `-g_v`, degrees.
    pub alpha: f64,
    /// Downstream pseudo-Mach number at `xi_r`.
    pub l3: f64,
    pub sonic_character: SonicCharacter,
    /// Pseudo-normal reflection with the shock perpendicular to the wall.
    pub degenerate_theta: bool,
    pub corner: CornerGeometry,
}

/// `(theta, alpha)` in degrees, recomputed from the shock and the wall.
///
/// Fails with [`Error::SignFact`] when `-g_v . t_r > 0` or `-g_v . n_r < 0`
/// does not hold, which only happens for inadmissible input.
pub fn reflection_angles(solution: &ReflectionSolution, config: &ReflectionConfig) -> Result<(f64, f64)> {
    let geo = corner_geometry(&solution.shock, config)?;
    Ok((geo.theta_deg(), geo.alpha_deg()))
}

/// Weak/critical/strong label from the corner angles (degrees).
pub fn classify_by_angles(theta: f64, alpha: f64) -> Result<TypeLabel> {
    if !(theta > 0.0 && theta < 90.0) {
        return Err(Error::InvalidInput(format!("theta = {theta} outside (0, 90)")));
    }
    let sum = alpha + theta;
    Ok(if sum < 90.0 - ANGLE_TOL_DEG {
        TypeLabel::Weak
    } else if sum > 90.0 + ANGLE_TOL_DEG {
        TypeLabel::Strong
    } else {
        TypeLabel::Critical
    })
}

/// Reflected shocks at `xi_r`, weak-type first. Empty means detachment.
pub fn solve_reflection(config: &ReflectionConfig) -> Result<Vec<ReflectionSolution>> {
    let polar = polar_trace(&config.upstream, config.xi_r, DEFAULT_POLAR_SAMPLES)?;
    solve_reflection_on(config, &polar)
}

/// As [`solve_reflection`], reusing a polar already traced at `xi_r`.
pub fn solve_reflection_on(config: &ReflectionConfig, polar: &Polar) -> Result<Vec<ReflectionSolution>> {
    let roots = solve_deflection(polar, config.deflection())?;
    let mut out = Vec::with_capacity(roots.len());
    for root in roots {
        if root.point.z_d().dot(config.wall_dir) <= 0.0 {
            continue;
        }
        let corner = corner_geometry(&root.point, config)?;
        let theta = corner.theta_deg();
        let l3 = root.point.pseudo_mach_d();
        out.push(ReflectionSolution {
            shock: root.point,
            shock_type: root.shock_type,
            theta,
            alpha: corner.alpha_deg(),
            l3,
            sonic_character: SonicCharacter::of(l3),
            degenerate_theta: (theta - 90.0).abs() < DEGENERATE_THETA_TOL_DEG,
            corner,
        });
    }
    Ok(out)
}

/// Change of inertial frame by an observer moving with velocity `w` along
/// the wall.
pub fn shift_observer(config: &ReflectionConfig, w: Vec2) -> Result<ReflectionConfig> {
    let off = w.dot(config.wall_normal());
    if off.abs() > SLIP_TOL * (1.0 + w.norm()) {
        return Err(Error::InvalidInput(format!(
            "observer shift not along the wall (w . n_wall = {off:e})"
        )));
    }
    ReflectionConfig::new(
        config.upstream.shifted(w)?,
        config.xi_r - w,
        config.wall_dir,
        config.scenario,
    )
}

/// Rigid rotation of every vector by `angle` radians about the origin.
pub fn rotate_frame(config: &ReflectionConfig, angle: f64) -> Result<ReflectionConfig> {
    ReflectionConfig::new(
        config.upstream.rotated(angle)?,
        config.xi_r.rotated(angle),
        config.wall_dir.rotated(angle),
        config.scenario,
    )
}

/// Local configuration for a sweep grid point: unit upstream density,
/// upstream pseudo-Mach `mach` along `+x` at `xi_r = 0`, wall turned by
/// `tau_deg` counterclockwise.
pub fn sweep_config(gas: GasModel, scenario: Scenario, tau_deg: f64, mach: f64) -> Result<ReflectionConfig> {
    let c = gas.sound_speed(1.0)?;
    let up = UpstreamData::new(gas, 1.0, Vec2::new(mach * c, 0.0))?;
    ReflectionConfig::new(up, Vec2::ZERO, Vec2::from_angle(tau_deg.to_radians()), scenario)
}

pub const SWEEP_CSV_HEADER: &str = "tau_deg,mach,roots,weak_L3,weak_rho,strong_rho,weak_indicator,strong_indicator";
pub const LOCI_CSV_HEADER: &str = "gamma,locus,tau_deg,mach";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub tau_deg: Vec<f64>,
    pub mach: Vec<f64>,
}

impl SweepGrid {
    /// `n_tau x n_mach` uniform grid including both ends.
    pub fn uniform(tau: (f64, f64, usize), mach: (f64, f64, usize)) -> Self {
        let lin = |(a, b, n): (f64, f64, usize)| -> Vec<f64> {
            if n <= 1 {
                return vec![a];
            }
            (0..n)
                .map(|k| (a * (n - 1 - k) as f64 + b * k as f64) / (n - 1) as f64)
                .collect()
        };
        SweepGrid {
            tau_deg: lin(tau),
            mach: lin(mach),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau_deg: f64,
    pub mach: f64,
    pub roots: usize,
    pub weak_l3: Option<f64>,
    pub weak_rho: Option<f64>,
    pub strong_rho: Option<f64>,
    pub weak_indicator: Option<f64>,
    pub strong_indicator: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocusKind {
    Detachment,
    Sonic,
}

impl LocusKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LocusKind::Detachment => "detachment",
            LocusKind::Sonic => "sonic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub gamma: f64,
    pub locus: LocusKind,
    pub tau_deg: f64,
    pub mach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub gamma: f64,
    pub scenario: Scenario,
    /// Ordered by Mach column, then by `tau` within a column.
    pub rows: Vec<SweepRow>,
    pub loci: Vec<LocusPoint>,
}

const LOCUS_TAU_TOL_DEG: f64 = 1e-10;

fn sweep_row(config: &ReflectionConfig, polar: &Polar, tau_deg: f64, mach: f64) -> Result<SweepRow> {
    let sols = solve_reflection_on(config, polar)?;
    let weak = sols.iter().find(|s| s.shock_type.label == TypeLabel::Weak);
    let strong = sols.iter().find(|s| s.shock_type.label == TypeLabel::Strong);
    Ok(SweepRow {
        tau_deg,
        mach,
        roots: sols.len(),
        weak_l3: weak.map(|s| s.l3),
        weak_rho: weak.map(|s| s.shock.rho_d),
        strong_rho: strong.map(|s| s.shock.rho_d),
        weak_indicator: weak.map(|s| s.shock_type.indicator),
        strong_indicator: strong.map(|s| s.shock_type.indicator),
    })
}

fn sweep_column(
    gas: GasModel,
    scenario: Scenario,
    taus: &[f64],
    mach: f64,
) -> Result<(Vec<SweepRow>, Vec<LocusPoint>)> {
    let base = sweep_config(gas, scenario, 0.0, mach)?;
    let polar = polar_trace(&base.upstream, base.xi_r, DEFAULT_POLAR_SAMPLES)?;
    let at = |tau_deg: f64| -> Result<SweepRow> {
        let cfg = sweep_config(gas, scenario, tau_deg, mach)?;
        sweep_row(&cfg, &polar, tau_deg, mach)
    };
    let rows = taus.iter().map(|&t| at(t)).collect::<Result<Vec<_>>>()?;

    let mut loci = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.roots > 0 && b.roots == 0 {
            let count = |t: f64| -> Result<f64> { Ok(if at(t)?.roots > 0 { -1.0 } else { 1.0 }) };
            let tau = bisect_secant(count, a.tau_deg, b.tau_deg, -1.0, 1.0, LOCUS_TAU_TOL_DEG)?;
            loci.push(LocusPoint {
                gamma: gas.gamma(),
                locus: LocusKind::Detachment,
                tau_deg: tau,
                mach,
            });
        }
        if let (Some(la), Some(lb)) = (a.weak_l3, b.weak_l3) {
            if (la - 1.0).signum() != (lb - 1.0).signum() {
                let f = |t: f64| -> Result<f64> {
                    at(t)?
                        .weak_l3
                        .map(|l| l - 1.0)
                        .ok_or_else(|| Error::RootFinding("weak root lost inside bracket".into()))
                };
                let tau = bisect_secant(f, a.tau_deg, b.tau_deg, la - 1.0, lb - 1.0, LOCUS_TAU_TOL_DEG)?;
                loci.push(LocusPoint {
                    gamma: gas.gamma(),
                    locus: LocusKind::Sonic,
                    tau_deg: tau,
                    mach,
                });
            }
        }
    }
    Ok((rows, loci))
}

/// Root counts and root data over a `(tau, mach)` grid, with the detachment
/// locus (roots 2 -> 0) and the sonic locus of the weak root (`L3 = 1`)
/// refined by bisection in `tau` within each Mach column. Columns run in
/// parallel; output order does not depend on scheduling.
pub fn sweep_transitions(scenario: Scenario, gamma: f64, grid: &SweepGrid) -> Result<SweepTable> {
    let gas = GasModel::new(gamma)?;
    let mut taus = grid.tau_deg.clone();
    taus.sort_by(f64::total_cmp);
    let columns = grid
        .mach
        .par_iter()
        .map(|&m| sweep_column(gas, scenario, &taus, m))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut loci = Vec::new();
    for (r, l) in columns {
        rows.extend(r);
        loci.extend(l);
    }
    Ok(SweepTable {
        gamma,
        scenario,
        rows,
        loci,
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(f64_17).unwrap_or_default()
}

impl SweepTable {
    pub fn write_sweep_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                f64_17(r.tau_deg),
                f64_17(r.mach),
                r.roots,
                opt(r.weak_l3),
                opt(r.weak_rho),
                opt(r.strong_rho),
                opt(r.weak_indicator),
                opt(r.strong_indicator)
            )?;
        }
        Ok(())
    }

    pub fn write_loci_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{LOCI_CSV_HEADER}")?;
        for l in &self.loci {
            writeln!(
                w,
                "{},{},{},{}",
                f64_17(l.gamma),
                l.locus.as_str(),
                f64_17(l.tau_deg),
                f64_17(l.mach)
            )?;
        }
        Ok(())
    }
}

fn parse_field(s: &str, line: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse {
        line,
        msg: format!("{s:?}: {e}"),
    })
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_field(s, line).map(Some)
    }
}

fn csv_lines<R: BufRead>(r: R, header: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        if i == 0 {
            if line != header {
                return Err(Error::Parse {
                    line: 1,
                    msg: "unexpected header".into(),
                });
            }
            continue;
        }
        out.push((i + 1, line));
    }
    Ok(out)
}

pub fn parse_sweep_csv<R: BufRead>(r: R) -> Result<Vec<SweepRow>> {
    csv_lines(r, SWEEP_CSV_HEADER)?
        .into_iter()
        .map(|(ln, line)| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 8 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("{} columns", c.len()),
                });
            }
            Ok(SweepRow {
                tau_deg: parse_field(c[0], ln)?,
                mach: parse_field(c[1], ln)?,
                roots: c[2].parse().map_err(|_| Error::Parse {
                    line: ln,
                    msg: "roots".into(),
                })?,
                weak_l3: parse_opt(c[3], ln)?,
                weak_rho: parse_opt(c[4], ln)?,
                strong_rho: parse_opt(c[5], ln)?,
                weak_indicator: parse_opt(c[6], ln)?,
                strong_indicator: parse_opt(c[7], ln)?,
            })
        })
        .collect()
}

pub fn parse_loci_csv<R: BufRead>(r: R) -> Result<Vec<LocusPoint>> {
    csv_lines(r, LOCI_CSV_HEADER)?
        .into_iter()
        .map(|(ln, line)| {
            let c: Vec<&str> = line.split(',').collect();
            if c.len() != 4 {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("{} columns", c.len()),
                });
            }
            let locus = match c[1] {
                "detachment" => LocusKind::Detachment,
                "sonic" => LocusKind::Sonic,
                other => {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("locus {other:?}"),
                    })
                }
            };
            Ok(LocusPoint {
                gamma: parse_field(c[0], ln)?,
                locus,
                tau_deg: parse_field(c[2], ln)?,
                mach: parse_field(c[3], ln)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_config(wall_deg: f64) -> ReflectionConfig {
        let up = UpstreamData::new(GasModel::new(2.0).unwrap(), 1.0, Vec2::new(3.0, 0.0)).unwrap();
        let wall = Vec2::from_angle(wall_deg.to_radians());
        // keep xi_r on the wall line through the origin
        ReflectionConfig::new(up, wall, wall, Scenario::ClassicalRr).unwrap()
    }

    #[test]
    fn golden_aligned_reflection() {
        let cfg = golden_config(0.0);
        let sols = solve_reflection(&cfg).unwrap();
        assert_eq!(sols.len(), 1);
        let s = &sols[0];
        assert!((s.shock.v_d - Vec2::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
        assert_eq!(s.shock_type.label, TypeLabel::Strong);
        assert_eq!(s.sonic_character, SonicCharacter::Transonic);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let l3 = (5f64.sqrt() - 1.0) / (2.0 * golden).sqrt();
        assert!((s.l3 - l3).abs() < 1e-12);
        assert!((s.l3 - 0.687).abs() < 1e-3);
        assert!((s.theta - 90.0).abs() < 1e-9);
        assert!(s.degenerate_theta);
    }

    #[test]
    fn rotated_wall_gives_weak_and_strong() {
        let cfg = golden_config(2.0);
        let sols = solve_reflection(&cfg).unwrap();
        assert_eq!(sols.len(), 2);
        assert_eq!(sols[0].shock_type.label, TypeLabel::Weak);
        assert_eq!(sols[1].shock_type.label, TypeLabel::Strong);
        assert!(sols[1].shock.rho_d > sols[0].shock.rho_d);
        for s in &sols {
            let v = s.shock.v_d;
            assert!(v.cross(cfg.wall_dir).abs() < 1e-10 * v.norm());
            assert!(s.shock.z_d().dot(cfg.wall_dir) > 0.0);
            assert!(s.corner.z_d.x > 0.0 && s.corner.z_d.y.abs() < 1e-10);
            let label = classify_by_angles(s.theta, s.alpha).unwrap();
            assert_eq!(label, s.shock_type.label);
        }
        let (t, a) = (sols[1].theta, sols[1].alpha);
        assert!(t + a > 90.0 && t + a < 90.0 + t);
        let (t, a) = (sols[0].theta, sols[0].alpha);
        assert!(t + a > t && t + a < 90.0);
    }

    #[test]
    fn wall_beyond_max_turning_detaches() {
        let cfg = golden_config(40.0);
        assert!(solve_reflection(&cfg).unwrap().is_empty());
    }

    #[test]
    fn slip_compatibility_enforced() {
        let up = UpstreamData::new(GasModel::new(2.0).unwrap(), 1.0, Vec2::new(3.0, 0.0)).unwrap();
        let err = ReflectionConfig::new(up, Vec2::new(1.0, 0.1), Vec2::new(1.0, 0.0), Scenario::ClassicalRr);
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        let cfg = golden_config(0.0);
        assert!(shift_observer(&cfg, Vec2::new(0.0, 0.1)).is_err());
    }

    #[test]
    fn incident_state() {
        let gas = GasModel::new(2.0).unwrap();
        let s1 = UpstreamData::new(gas, 1.0, Vec2::new(2.0, 0.5)).unwrap();
        let s2 = state_behind_incident(&s1, Vec2::ZERO, Vec2::new(1.0, 0.0)).unwrap();
        assert!((s2.rho - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((s2.v.y - 0.5).abs() < 1e-12);
        // potential continuous along the incident shock line
        for s in [-2.0, 0.3, 5.0] {
            let p = Vec2::new(0.0, s);
            assert!((s2.psi(p) - s1.psi(p)).abs() < 1e-12);
        }
        let c = s1.sound_speed();
        let weak = state_behind_incident(&s1, Vec2::new(2.0 - c * (1.0 + 1e-10), 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!((weak.rho - 1.0).abs() < 1e-8 && (weak.v - s1.v).norm() < 1e-8);
    }

    #[test]
    fn angle_classification() {
        assert_eq!(classify_by_angles(30.0, 50.0).unwrap(), TypeLabel::Weak);
        assert_eq!(classify_by_angles(30.0, 60.0).unwrap(), TypeLabel::Critical);
        assert_eq!(classify_by_angles(30.0, 75.0).unwrap(), TypeLabel::Strong);
        assert!(classify_by_angles(90.0, 10.0).is_err());
        assert!(classify_by_angles(0.0, 10.0).is_err());
    }

    #[test]
    fn frame_changes_preserve_solutions() {
        let cfg = golden_config(3.0);
        let base = solve_reflection(&cfg).unwrap();
        let shifted = shift_observer(&cfg, cfg.wall_dir * 0.8).unwrap();
        let rotated = rotate_frame(&cfg, 90f64.to_radians()).unwrap();
        assert_eq!(shift_observer(&cfg, Vec2::ZERO).unwrap(), cfg);
        for other in [solve_reflection(&shifted).unwrap(), solve_reflection(&rotated).unwrap()] {
            assert_eq!(other.len(), base.len());
            for (a, b) in base.iter().zip(&other) {
                assert_eq!(a.shock_type.label, b.shock_type.label);
                assert!((a.shock.rho_d - b.shock.rho_d).abs() < 1e-10);
                assert!((a.theta - b.theta).abs() < 1e-8);
                assert!((a.alpha - b.alpha).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn sweep_structure() {
        let grid = SweepGrid::uniform((0.0, 60.0, 21), (1.6, 3.0, 3));
        let table = sweep_transitions(Scenario::SupersonicWedge, 1.4, &grid).unwrap();
        assert_eq!(table.rows.len(), 63);
        for col in table.rows.chunks(21) {
            assert_eq!(col[0].roots, 1);
            assert!(col[0].strong_rho.is_some() && col[0].weak_rho.is_none());
            let counts: Vec<usize> = col[1..].iter().map(|r| r.roots).collect();
            let first_zero = counts.iter().position(|&c| c == 0).unwrap();
            assert!(counts[..first_zero].iter().all(|&c| c == 2));
            assert!(counts[first_zero..].iter().all(|&c| c == 0));
        }
        let detach = table.loci.iter().filter(|l| l.locus == LocusKind::Detachment).count();
        assert_eq!(detach, 3);

        let mut buf = Vec::new();
        table.write_sweep_csv(&mut buf).unwrap();
        assert_eq!(parse_sweep_csv(&buf[..]).unwrap(), table.rows);
        let mut buf = Vec::new();
        table.write_loci_csv(&mut buf).unwrap();
        assert_eq!(parse_loci_csv(&buf[..]).unwrap(), table.loci);
    }

    #[test]
    fn fast_small_deflection_weak_root_is_supersonic() {
        let cfg = sweep_config(GasModel::new(1.4).unwrap(), Scenario::SupersonicWedge, 5.0, 3.0).unwrap();
        let sols = solve_reflection(&cfg).unwrap();
        assert_eq!(sols[0].shock_type.label, TypeLabel::Weak);
        assert!(sols[0].l3 > 1.0);
        assert_eq!(sols[0].sonic_character, SonicCharacter::Supersonic);
    }
}
