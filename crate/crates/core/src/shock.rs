//! Jump relations for self-similar potential flow and the shock-condition
//! function `g(v, xi)`.
//!
//! Across a shock through `xi` with downstream unit normal `n` (pointing from
//! the upstream to the downstream side) the pseudo-velocity `z = v - xi`
//! satisfies
//!
//! * mass: `rho_u zn_u = rho_d zn_d`,
//! * tangential continuity: `zt_u = zt_d`,
//! * Bernoulli continuity: `pi(rho_u) + zn_u^2/2 = pi(rho_d) + zn_d^2/2`
//!   (the pseudo-potential is continuous),
//!
//! and is admissible (compressive) when `zn_u >= zn_d`.
//!
//! For constant upstream data with affine potential `psi_I(xi) = psi0 + v_I.xi`
//! the three conditions collapse into the scalar equation `g(v, xi) = 0` for
//! the downstream velocity `v`, with
//!
//! ```text
//! g(v, xi) = ( rho(v, xi) (v - xi) - rho_I (v_I - xi) ) . (v_I - v) / |v_I - v|
//! rho(v, xi) = pi^-1( -psi_I(xi) + v.xi - |v|^2/2 )
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::geom::Vec2;
use crate::root::bisect_secant;

/// Absolute residual allowed in the normal jump equations, scaled by the
/// Bernoulli constant when that exceeds one.
pub const JUMP_RESIDUAL_TOL: f64 = 1e-13;

/// Relative distance from `v_I` below which `g` is not evaluated.
pub const VANISHING_SHOCK_TOL: f64 = 1e-9;

/// Constant state on the hyperbolic (upstream) side of a shock.
///
/// The potential offset `psi0` is fixed by the Bernoulli normalization
/// `rho = pi^-1(-chi - |grad chi|^2/2)` and is always derived, never supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpstreamData {
    pub gas: GasModel,
    pub rho: f64,
    pub v: Vec2,
    psi0: f64,
}

impl UpstreamData {
    pub fn new(gas: GasModel, rho: f64, v: Vec2) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidInput("non-finite upstream velocity".into()));
        }
        let psi0 = -gas.pi(rho)? - 0.5 * v.norm_sq();
        Ok(UpstreamData { gas, rho, v, psi0 })
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    /// Affine upstream potential `psi_I(xi) = psi0 + v_I . xi`.
    pub fn psi(&self, xi: Vec2) -> f64 {
        self.psi0 + self.v.dot(xi)
    }

    pub fn sound_speed(&self) -> f64 {
        self.gas
            .sound_speed(self.rho)
            .expect("density validated on construction")
    }

    /// Upstream pseudo-velocity `z_I = v_I - xi`.
    pub fn z(&self, xi: Vec2) -> Vec2 {
        self.v - xi
    }

    pub fn pseudo_mach(&self, xi: Vec2) -> f64 {
        self.z(xi).norm() / self.sound_speed()
    }

    /// Change of inertial frame by observer velocity `w`: `v <- v - w`.
    /// Similarity coordinates shift the same way (`xi <- xi - w`).
    pub fn shifted(&self, w: Vec2) -> Result<Self> {
        UpstreamData::new(self.gas, self.rho, self.v - w)
    }

    pub fn rotated(&self, angle: f64) -> Result<Self> {
        UpstreamData::new(self.gas, self.rho, self.v.rotated(angle))
    }
}

/// One discontinuity at `xi`: upstream state, downstream normal and the
/// resulting downstream state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockPoint {
    pub upstream: UpstreamData,
    pub xi: Vec2,
    /// Unit normal pointing downstream.
    pub n: Vec2,
    pub rho_d: f64,
    pub v_d: Vec2,
    pub zn_u: f64,
    pub zn_d: f64,
    /// Tangential pseudo-velocity, shared by both sides.
    pub zt: f64,
}

impl ShockPoint {
    /// Tangent, 90 degrees counterclockwise from `n`.
    pub fn t(&self) -> Vec2 {
        self.n.perp()
    }

    pub fn z_u(&self) -> Vec2 {
        self.upstream.z(self.xi)
    }

    pub fn z_d(&self) -> Vec2 {
        self.v_d - self.xi
    }

    pub fn c_d(&self) -> f64 {
        self.upstream.gas.sound_speed(self.rho_d).unwrap_or(f64::NAN)
    }

    /// Downstream pseudo-Mach number.
    pub fn pseudo_mach_d(&self) -> f64 {
        self.z_d().norm() / self.c_d()
    }

    /// Relative mass-flux residual `|rho_u zn_u - rho_d zn_d| / (rho_u zn_u)`.
    pub fn mass_residual(&self) -> f64 {
        let m = self.upstream.rho * self.zn_u;
        (m - self.rho_d * self.zn_d).abs() / m.abs()
    }

    /// Magnitude of the velocity jump.
    pub fn strength(&self) -> f64 {
        (self.upstream.v - self.v_d).norm()
    }
}

fn bernoulli_residual(gas: &GasModel, rho: f64, mass_flux: f64, bernoulli: f64) -> Result<f64> {
    let zn = mass_flux / rho;
    Ok(gas.pi(rho)? + 0.5 * zn * zn - bernoulli)
}

/// Solves the normal jump for the compressive downstream state.
///
/// Returns `(rho_d, zn_d)` with `rho_d > rho_u`. The residual
/// `F(rho) = pi(rho) + (m/rho)^2/2 - B` is negative between `rho_u` and the
/// sonic density `(m^2/gamma)^(1/(gamma+1))` and grows without bound above
/// it, so the compressive root is bracketed by the sonic density and a
/// geometrically grown upper bound.
pub fn normal_jump(gas: &GasModel, rho_u: f64, zn_u: f64) -> Result<(f64, f64)> {
    let c_u = gas.sound_speed(rho_u)?;
    if !(zn_u > c_u) {
        return Err(Error::NoShock(zn_u / c_u));
    }
    let m = rho_u * zn_u;
    let bernoulli = gas.pi(rho_u)? + 0.5 * zn_u * zn_u;
    let f = |rho: f64| bernoulli_residual(gas, rho, m, bernoulli);

    let rho_sonic = (m * m / gas.gamma()).powf(1.0 / (gas.gamma() + 1.0));
    let lo = rho_sonic.max(rho_u);
    let f_lo = f(lo)?;
    if f_lo >= 0.0 {
        // vanishing strength: root, sonic density and rho_u coincide to rounding
        return Ok((lo, m / lo));
    }
    let mut hi = 2.0 * lo;
    let mut f_hi = f(hi)?;
    let mut grow = 0;
    while f_hi <= 0.0 {
        hi *= 2.0;
        f_hi = f(hi)?;
        grow += 1;
        if grow > 200 {
            return Err(Error::RootFinding("normal jump: no upper bracket".into()));
        }
    }
    let mut rho = bisect_secant(f, lo, hi, f_lo, f_hi, 4.0 * f64::EPSILON * hi)?;

    // Newton polish: F'(rho) = (c^2 - zn^2) / rho
    for _ in 0..3 {
        let r = f(rho)?;
        let zn = m / rho;
        let d = (gas.sound_speed_sq(rho)? - zn * zn) / rho;
        if d <= 0.0 {
            break;
        }
        let next = rho - r / d;
        if next > lo && f(next)?.abs() < r.abs() {
            rho = next;
        } else {
            break;
        }
    }
    let res = f(rho)?.abs();
    if res > JUMP_RESIDUAL_TOL * bernoulli.abs().max(1.0) {
        return Err(Error::RootFinding(format!("normal jump residual {res:e}")));
    }
    Ok((rho, m / rho))
}

/// Oblique shock through `xi` with downstream normal `n`.
pub fn oblique_jump(upstream: &UpstreamData, xi: Vec2, n: Vec2) -> Result<ShockPoint> {
    let len = n.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::InvalidInput("shock normal must be nonzero".into()));
    }
    let n = n / len;
    let t = n.perp();
    let z = upstream.z(xi);
    let zn_u = z.dot(n);
    let zt = z.dot(t);
    let (rho_d, zn_d) = normal_jump(&upstream.gas, upstream.rho, zn_u)?;
    let v_d = xi + n * zn_d + t * zt;
    Ok(ShockPoint {
        upstream: *upstream,
        xi,
        n,
        rho_d,
        v_d,
        zn_u,
        zn_d,
        zt,
    })
}

/// Downstream normal from the velocity jump, `(v_u - v_d) / |v_u - v_d|`.
pub fn shock_normal_from_velocities(v_u: Vec2, v_d: Vec2) -> Result<Vec2> {
    let d = v_u - v_d;
    let len = d.norm();
    if !(len > 0.0) {
        return Err(Error::DegenerateShock);
    }
    Ok(d / len)
}

fn check_not_vanishing(upstream: &UpstreamData, v: Vec2) -> Result<Vec2> {
    let diff = upstream.v - v;
    let len = diff.norm();
    if !(len >= VANISHING_SHOCK_TOL * (1.0 + upstream.v.norm())) {
        return Err(Error::VanishingShock(len));
    }
    Ok(diff / len)
}

/// Density behind a shock at `xi` with downstream velocity `v`, from potential
/// continuity and the Bernoulli relation.
pub fn downstream_density(upstream: &UpstreamData, v: Vec2, xi: Vec2) -> Result<f64> {
    // -psi_I(xi) + v.xi with the upstream part folded in, so a shift of xi
    // along the shock (normal to v - v_I) leaves the argument unchanged
    upstream
        .gas
        .pi_inv(-upstream.psi0() + (v - upstream.v).dot(xi) - 0.5 * v.norm_sq())
}

/// Shock-condition residual `g(v, xi)`; zero exactly on the shock polar.
pub fn g_eval(upstream: &UpstreamData, v: Vec2, xi: Vec2) -> Result<f64> {
    let n = check_not_vanishing(upstream, v)?;
    let rho = downstream_density(upstream, v, xi)?;
    Ok(rho * v.dot(n) - upstream.rho * upstream.v.dot(n) - (rho - upstream.rho) * xi.dot(n))
}

/// Gradient of `g` with respect to `v`:
///
/// ```text
/// g_v = rho (I - z z^T / c^2) n - ((rho z - rho_I z_I) . t) / |v_I - v| t
/// ```
///
/// with `z = v - xi`, `c = c(rho)` downstream and `n = (v_I - v)/|v_I - v|`.
pub fn g_grad_v(upstream: &UpstreamData, v: Vec2, xi: Vec2) -> Result<Vec2> {
    let n = check_not_vanishing(upstream, v)?;
    let t = n.perp();
    let jump = (upstream.v - v).norm();
    let rho = downstream_density(upstream, v, xi)?;
    let c2 = upstream.gas.sound_speed_sq(rho)?;
    let z = v - xi;
    let normal_part = (n - z * (z.dot(n) / c2)) * rho;
    let flux = z * rho - upstream.z(xi) * upstream.rho;
    Ok(normal_part - t * (flux.dot(t) / jump))
}

/// Compressive shock test `zn_u >= zn_d`.
pub fn admissible(sp: &ShockPoint) -> bool {
    sp.zn_u >= sp.zn_d
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 1.618_033_988_749_895;

    fn gas(g: f64) -> GasModel {
        GasModel::new(g).unwrap()
    }

    fn golden_upstream() -> UpstreamData {
        UpstreamData::new(gas(2.0), 1.0, Vec2::new(3.0, 0.0)).unwrap()
    }

    /// Plain bisection on the reduced cubic `rho^3 - 2 rho^2 + 1` for the
    /// golden case, independent of the jump solver.
    fn golden_cubic_oracle() -> f64 {
        let f = |r: f64| r * r * r - 2.0 * r * r + 1.0;
        let (mut lo, mut hi) = (1.2, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn golden_normal_shock() {
        let (rho_d, zn_d) = normal_jump(&gas(2.0), 1.0, 2.0).unwrap();
        let oracle = golden_cubic_oracle();
        assert!((oracle - GOLDEN).abs() < 1e-14);
        assert!((rho_d - GOLDEN).abs() < 1e-12);
        assert!((zn_d - 2.0 / GOLDEN).abs() < 1e-12);
        assert!((zn_d - 1.236_067_977_5).abs() < 1e-10);
        // Bernoulli constant 4 on both sides
        let b_d = gas(2.0).pi(rho_d).unwrap() + 0.5 * zn_d * zn_d;
        assert!((b_d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sonic_limit_vanishes() {
        let s = 2f64.sqrt();
        let (rho_d, zn_d) = normal_jump(&gas(2.0), 1.0, s * (1.0 + 1e-9)).unwrap();
        assert!((rho_d - 1.0).abs() < 1e-6);
        assert!((zn_d - s).abs() < 1e-6);
        assert!(rho_d >= 1.0);
    }

    #[test]
    fn subsonic_has_no_shock() {
        assert!(matches!(normal_jump(&gas(2.0), 1.0, 1.0), Err(Error::NoShock(_))));
        assert!(matches!(
            normal_jump(&gas(2.0), 1.0, 2f64.sqrt()),
            Err(Error::NoShock(_))
        ));
    }

    #[test]
    fn faster_normal_shock_is_stronger() {
        let (r2, _) = normal_jump(&gas(2.0), 1.0, 2.0).unwrap();
        let (r25, _) = normal_jump(&gas(2.0), 1.0, 2.5).unwrap();
        assert!(r25 > r2);
    }

    #[test]
    fn isothermal_jump_conserves_bernoulli() {
        // gamma = 1: ln(rho) + (3/rho)^2/2 = 9/2
        let (rho_d, zn_d) = normal_jump(&gas(1.0), 1.0, 3.0).unwrap();
        assert!(rho_d > 1.0 && zn_d < 1.0);
        assert!((rho_d.ln() + 0.5 * zn_d * zn_d - 4.5).abs() < 1e-13);
        assert!((rho_d * zn_d - 3.0).abs() < 1e-13);
    }

    #[test]
    fn oblique_golden_shifted() {
        let up = golden_upstream();
        let sp = oblique_jump(&up, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert!((sp.v_d.x - 5f64.sqrt()).abs() < 1e-12);
        assert!(sp.v_d.y.abs() < 1e-15);
        assert!((sp.rho_d - GOLDEN).abs() < 1e-12);
        assert_eq!(sp.zt, 0.0);
        assert!(admissible(&sp));
        assert!(sp.mass_residual() < 1e-10);
    }

    #[test]
    fn mirrored_normal_negates_tangential() {
        let up = golden_upstream();
        let xi = Vec2::new(1.0, 0.0);
        let n = Vec2::from_angle(0.3);
        let m = Vec2::from_angle(-0.3);
        let a = oblique_jump(&up, xi, n).unwrap();
        let b = oblique_jump(&up, xi, m).unwrap();
        assert!((a.zt + b.zt).abs() < 1e-14);
        assert!((a.rho_d - b.rho_d).abs() < 1e-14);
    }

    #[test]
    fn normal_from_velocities() {
        let n = shock_normal_from_velocities(Vec2::new(3.0, 0.0), Vec2::new(5f64.sqrt(), 0.0)).unwrap();
        assert_eq!(n, Vec2::new(1.0, 0.0));
        let n = shock_normal_from_velocities(Vec2::new(0.0, 1.0), Vec2::ZERO).unwrap();
        assert_eq!(n, Vec2::new(0.0, 1.0));
        assert_eq!(
            shock_normal_from_velocities(Vec2::new(1.0, 1.0), Vec2::new(1.0, 1.0)),
            Err(Error::DegenerateShock)
        );
    }

    #[test]
    fn g_vanishes_at_jump_solution() {
        let up = golden_upstream();
        let xi = Vec2::new(1.0, 0.0);
        let sp = oblique_jump(&up, xi, Vec2::new(1.0, 0.0)).unwrap();
        assert!(g_eval(&up, sp.v_d, xi).unwrap().abs() < 1e-12);
        let rho = downstream_density(&up, sp.v_d, xi).unwrap();
        assert!((rho - sp.rho_d).abs() < 1e-12);
    }

    #[test]
    fn g_rejects_vanishing_shock() {
        let up = golden_upstream();
        assert!(matches!(g_eval(&up, up.v, Vec2::ZERO), Err(Error::VanishingShock(_))));
        assert!(g_grad_v(&up, up.v + Vec2::new(1e-12, 0.0), Vec2::ZERO).is_err());
    }

    #[test]
    fn gradient_at_golden_normal_point() {
        let up = golden_upstream();
        let xi = Vec2::new(1.0, 0.0);
        let sp = oblique_jump(&up, xi, Vec2::new(1.0, 0.0)).unwrap();
        let gv = g_grad_v(&up, sp.v_d, xi).unwrap();
        let expected = sp.rho_d * (1.0 - sp.zn_d * sp.zn_d / gas(2.0).sound_speed_sq(sp.rho_d).unwrap());
        assert!((gv.dot(sp.n) - expected).abs() < 1e-12);
        assert!((gv.dot(sp.n) - 0.854_101_966).abs() < 1e-9);
        assert!(gv.dot(sp.t()).abs() < 1e-14);
    }

    #[test]
    fn swapped_states_are_inadmissible() {
        let up = golden_upstream();
        let mut sp = oblique_jump(&up, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        let equal = ShockPoint { zn_d: sp.zn_u, ..sp };
        assert!(admissible(&equal));
        std::mem::swap(&mut sp.zn_u, &mut sp.zn_d);
        assert!(!admissible(&sp));
    }

    #[test]
    fn observer_shift_leaves_g_invariant() {
        let up = golden_upstream();
        let xi = Vec2::new(1.0, 0.2);
        let sp = oblique_jump(&up, xi, Vec2::from_angle(0.4)).unwrap();
        let w = Vec2::new(-0.7, 1.3);
        let shifted = up.shifted(w).unwrap();
        assert!((shifted.psi0() - (up.psi0() + up.v.dot(w) - 0.5 * w.norm_sq())).abs() < 1e-12);
        let probe = sp.v_d + Vec2::new(0.01, -0.02);
        let g0 = g_eval(&up, probe, xi).unwrap();
        let g1 = g_eval(&shifted, probe - w, xi - w).unwrap();
        assert!((g0 - g1).abs() < 1e-10);
        let d0 = g_grad_v(&up, probe, xi).unwrap();
        let d1 = g_grad_v(&shifted, probe - w, xi - w).unwrap();
        assert!((d0 - d1).norm() < 1e-10);
    }
}
