//! Comparison-function certificates that a strong-type reflection corner
//! cannot carry the global minimum of the potential.
//!
//! In the corner frame the downstream equation at the corner is
//! `a^2 psi_xx + psi_yy = 0` with `a = sqrt(1 - L3^2)`. Stretching
//! `X = x / a` turns it into Laplace's equation; geometric vectors and the
//! shock-condition gradient `g_v` both transform by `M = diag(1/a, 1)`
//! (for `g_v` because `g . grad_x psi = (M g) . grad_X psi`). In the
//! stretched frame the subsolution is
//!
//! ```text
//! Psi(r, phi) = psi_ref + eps r cos(beta phi),   0 <= phi <= theta_t.
//! ```

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::polar::TypeLabel;
use crate::reflection::{solve_reflection, ReflectionConfig, ReflectionSolution, ANGLE_TOL_DEG};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const MIN_GRID: usize = 64;
pub const DEFAULT_GRID: usize = 128;
pub const WALL_RESIDUAL_TOL: f64 = 1e-14;
const R_MIN: f64 = 1e-6;
const R_MAX: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerFrame {
    /// Reflection point in the normalized corner frame, `-z_d`.
    pub xi_r: Vec2,
    pub psi_ref: f64,
    /// Degrees.
    pub theta: f64,
    pub alpha: f64,
    pub a: f64,
    pub theta_t: f64,
    pub alpha_t: f64,
    pub t_r: Vec2,
    /// `-g_v` at the corner.
    pub gv: Vec2,
    pub t_r_t: Vec2,
    pub gv_t: Vec2,
}

impl CornerFrame {
    fn assemble(xi_r: Vec2, psi_ref: f64, a: f64, t_r: Vec2, gv: Vec2) -> Self {
        let stretch = |v: Vec2| Vec2::new(v.x / a, v.y);
        let (t_r_t, gv_t) = (stretch(t_r), stretch(gv));
        CornerFrame {
            xi_r,
            psi_ref,
            theta: t_r.angle().to_degrees(),
            alpha: t_r.angle_to(gv).to_degrees(),
            a,
            theta_t: t_r_t.angle().to_degrees(),
            alpha_t: t_r_t.angle_to(gv_t).to_degrees(),
            t_r,
            gv,
            t_r_t,
            gv_t,
        }
    }

    /// Synthetic frame with unit `-g_v`; angles in degrees.
    pub fn from_angles(theta: f64, alpha: f64, a: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 90.0) {
            return Err(Error::InvalidInput(format!("theta = {theta} outside (0, 90)")));
        }
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::InvalidInput(format!("dilation factor {a} outside (0, 1]")));
        }
        let t_r = Vec2::from_angle(theta.to_radians());
        let gv = Vec2::from_angle((theta + alpha).to_radians());
        let xi_r = Vec2::new(-(1.0 - a * a).sqrt(), 0.0);
        Ok(Self::assemble(xi_r, 0.0, a, t_r, gv))
    }

    pub fn is_strong_type(&self) -> bool {
        let window = |s: f64| s > 90.0 + ANGLE_TOL_DEG && s < 180.0 - ANGLE_TOL_DEG;
        window(self.alpha + self.theta) && window(self.alpha_t + self.theta_t)
    }

    /// Norm of the dilation map `diag(1/a, 1)`.
    pub fn map_norm(&self) -> f64 {
        1.0 / self.a
    }

    /// Norm of its inverse `diag(a, 1)`.
    pub fn inverse_map_norm(&self) -> f64 {
        1.0
    }
}

/// Corner frame of a solved reflection.
pub fn build_corner_frame(config: &ReflectionConfig, solution: &ReflectionSolution) -> Result<CornerFrame> {
    if solution.degenerate_theta {
        return Err(Error::DegenerateTheta);
    }
    if !(solution.theta > 0.0 && solution.theta < 90.0) {
        return Err(Error::InvalidInput(format!(
            "theta = {} outside (0, 90)",
            solution.theta
        )));
    }
    if !(solution.l3 < 1.0) {
        return Err(Error::NotElliptic(solution.l3));
    }
    let corner = &solution.corner;
    let l = corner.xi_r.norm() / solution.shock.c_d();
    if !(l < 1.0) {
        return Err(Error::NotElliptic(l));
    }
    Ok(CornerFrame::assemble(
        corner.xi_r,
        config.upstream.psi(config.xi_r),
        (1.0 - l * l).sqrt(),
        corner.t_r,
        corner.minus_gv,
    ))
}

/// `(-g_t_hat . grad Psi) / (-eps)` on the ray `phi = theta_t`.
pub fn shock_margin(alpha_t: f64, theta_t: f64, beta: f64) -> f64 {
    let (a, bt) = (alpha_t.to_radians(), (beta * theta_t).to_radians());
    -(1.0 - beta) * a.cos() * bt.cos() - beta * (a + bt).cos()
}

/// First `beta = 1 - 2^-k` (k = 1..40) with
/// `alpha_t + beta theta_t > 90 + margin` and a positive shock margin.
pub fn choose_beta(frame: &CornerFrame) -> Result<f64> {
    let sum = frame.alpha_t + frame.theta_t;
    if !(sum > 90.0 + ANGLE_TOL_DEG && sum < 180.0) {
        return Err(Error::NotStrongType(format!("alpha_t + theta_t = {sum}")));
    }
    let margin = f64::min(1.0, (sum - 90.0) / 2.0);
    for k in 1..=40 {
        let beta = 1.0 - 0.5f64.powi(k);
        let s = frame.alpha_t + beta * frame.theta_t;
        if s > 90.0 + margin && s < 180.0 && shock_margin(frame.alpha_t, frame.theta_t, beta) > 0.0 {
            return Ok(beta);
        }
    }
    Err(Error::NotStrongType("no feasible beta".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subsolution {
    pub psi_ref: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub frame: CornerFrame,
}

impl Subsolution {
    pub fn new(frame: CornerFrame, beta: f64, epsilon: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidInput(format!("beta = {beta} outside (0, 1)")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon = {epsilon} outside (0, 1)")));
        }
        Ok(Subsolution {
            psi_ref: frame.psi_ref,
            epsilon,
            beta,
            frame,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsolutionValue {
    pub psi: f64,
    /// `(Psi_r, Psi_phi / r)`.
    pub grad_polar: Vec2,
    /// `Delta Psi = eps (1 - beta^2) cos(beta phi) / r`.
    pub laplacian: f64,
}

impl SubsolutionValue {
    /// Cartesian gradient at polar angle `phi` (radians).
    pub fn grad_cartesian(&self, phi: f64) -> Vec2 {
        Vec2::from_angle(phi) * self.grad_polar.x + Vec2::from_angle(phi).perp() * self.grad_polar.y
    }
}

/// Closed-form value and derivatives at `(r, phi)`, `phi` in radians.
pub fn subsolution_eval(sub: &Subsolution, r: f64, phi: f64) -> Result<SubsolutionValue> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput(format!("r = {r} must be positive")));
    }
    let (e, b) = (sub.epsilon, sub.beta);
    let (s, c) = (b * phi).sin_cos();
    Ok(SubsolutionValue {
        psi: sub.psi_ref + e * r * c,
        grad_polar: Vec2::new(e * c, -e * b * s),
        laplacian: e * (1.0 - b * b) * c / r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    Certified,
    NotStrongType,
    DegenerateTheta,
    Failed,
}

impl CertificateStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateStatus::Certified => "certified",
            CertificateStatus::NotStrongType => "not_strong_type",
            CertificateStatus::DegenerateTheta => "degenerate_theta",
            CertificateStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSummary {
    pub theta: f64,
    pub alpha: f64,
    pub a: f64,
    pub theta_t: f64,
    pub alpha_t: f64,
}

impl From<&CornerFrame> for FrameSummary {
    fn from(f: &CornerFrame) -> Self {
        FrameSummary {
            theta: f.theta,
            alpha: f.alpha,
            a: f.a,
            theta_t: f.theta_t,
            alpha_t: f.alpha_t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub status: CertificateStatus,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    /// Minimum of `Delta Psi * r / eps` over the sample grid.
    pub delta_interior: Option<f64>,
    /// Minimum of `(-g_t_hat . grad Psi) / (-eps)` on the shock tangent ray.
    pub delta_shock: Option<f64>,
    /// Max `|Psi_phi|` on the wall.
    pub wall_residual: Option<f64>,
    /// `d/dr (psi - Psi)` at the corner along the wall.
    pub corner_descent: Option<f64>,
    /// Interior margin for the undilated operator, `Q : D^2 Psi >= d eps / r`.
    pub delta_interior_undilated: Option<f64>,
    /// Shock margin for the undilated `-g_v`, `-g_v . grad Psi <= -d eps`.
    pub delta_shock_undilated: Option<f64>,
    pub frame: Option<FrameSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Certificate {
    pub fn without_frame(status: CertificateStatus, reason: impl Into<String>) -> Self {
        Certificate {
            status,
            beta: None,
            epsilon: None,
            delta_interior: None,
            delta_shock: None,
            wall_residual: None,
            corner_descent: None,
            delta_interior_undilated: None,
            delta_shock_undilated: None,
            frame: None,
            reason: Some(reason.into()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Sample radii: `n_r` log-spaced points in `[1e-6, 1]`.
pub fn radial_grid(n_r: usize) -> Vec<f64> {
    let (lo, hi) = (R_MIN.ln(), R_MAX.ln());
    (0..n_r)
        .map(|i| (lo + (hi - lo) * i as f64 / (n_r - 1) as f64).exp())
        .collect()
}

/// Evaluates every sign condition of the subsolution on a polar sample grid.
///
/// `beta` is not checked against the window, so a weak-type frame can be
/// pushed through and is reported as `failed`.
pub fn check_certificate(
    frame: &CornerFrame,
    beta: f64,
    epsilon: f64,
    n_r: usize,
    n_phi: usize,
) -> Result<Certificate> {
    if n_r < MIN_GRID || n_phi < MIN_GRID {
        return Err(Error::TooFewSamples {
            got: n_r.min(n_phi),
            min: MIN_GRID,
        });
    }
    let sub = Subsolution::new(*frame, beta, epsilon)?;
    let radii = radial_grid(n_r);
    let theta_t = frame.theta_t.to_radians();
    let phis: Vec<f64> = (0..n_phi).map(|j| theta_t * j as f64 / (n_phi - 1) as f64).collect();

    let delta_interior = radii
        .par_iter()
        .map(|&r| {
            phis.iter().try_fold(f64::INFINITY, |m, &phi| {
                let v = subsolution_eval(&sub, r, phi)?;
                Ok(m.min(v.laplacian * r / epsilon))
            })
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);

    let g_hat = frame.gv_t.normalized();
    let mut delta_shock = f64::INFINITY;
    let mut wall_residual: f64 = 0.0;
    for &r in &radii {
        let v = subsolution_eval(&sub, r, theta_t)?;
        delta_shock = delta_shock.min(g_hat.dot(v.grad_cartesian(theta_t)) / -epsilon);
        let w = subsolution_eval(&sub, r, 0.0)?;
        wall_residual = wall_residual.max((w.grad_polar.y * r).abs());
    }
    // the potential is stationary at the corner in the normalized frame
    let corner_descent = 0.0 - subsolution_eval(&sub, radii[0], 0.0)?.grad_polar.x;

    let certified =
        delta_interior > 0.0 && delta_shock > 0.0 && wall_residual < WALL_RESIDUAL_TOL && corner_descent < 0.0;
    Ok(Certificate {
        status: if certified {
            CertificateStatus::Certified
        } else {
            CertificateStatus::Failed
        },
        beta: Some(beta),
        epsilon: Some(epsilon),
        delta_interior: Some(delta_interior),
        delta_shock: Some(delta_shock),
        wall_residual: Some(wall_residual),
        corner_descent: Some(corner_descent),
        delta_interior_undilated: Some(delta_interior / frame.map_norm()),
        delta_shock_undilated: Some(delta_shock * frame.gv_t.norm()),
        frame: Some(frame.into()),
        reason: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RootChoice {
    #[default]
    Strong,
    Weak,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub root: RootChoice,
    pub epsilon: f64,
    /// `None` selects beta automatically.
    pub beta: Option<f64>,
    pub n_r: usize,
    pub n_phi: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            root: RootChoice::Strong,
            epsilon: DEFAULT_EPSILON,
            beta: None,
            n_r: DEFAULT_GRID,
            n_phi: DEFAULT_GRID,
        }
    }
}

/// Full pipeline with default options on the strong root.
pub fn certify_nonexistence(config: &ReflectionConfig) -> Result<Certificate> {
    certify_candidate(config, &CertifyOptions::default())
}

pub fn certify_candidate(config: &ReflectionConfig, opts: &CertifyOptions) -> Result<Certificate> {
    let sols = solve_reflection(config)?;
    if sols.is_empty() {
        return Ok(Certificate::without_frame(
            CertificateStatus::NotStrongType,
            "no reflected shock (detached)",
        ));
    }
    let wanted = match opts.root {
        RootChoice::Strong => TypeLabel::Strong,
        RootChoice::Weak => TypeLabel::Weak,
    };
    let Some(sol) = sols.iter().find(|s| s.shock_type.label == wanted) else {
        let labels: Vec<&str> = sols.iter().map(|s| s.shock_type.label.as_str()).collect();
        return Ok(Certificate::without_frame(
            CertificateStatus::NotStrongType,
            format!("no {} root (found: {})", wanted.as_str(), labels.join(", ")),
        ));
    };
    if sol.shock_type.label != TypeLabel::Strong {
        return Ok(Certificate::without_frame(
            CertificateStatus::NotStrongType,
            format!("{} root selected", sol.shock_type.label.as_str()),
        ));
    }
    let frame = match build_corner_frame(config, sol) {
        Ok(f) => f,
        Err(Error::DegenerateTheta) => {
            return Ok(Certificate::without_frame(
                CertificateStatus::DegenerateTheta,
                "shock perpendicular to the wall",
            ))
        }
        Err(e @ Error::NotElliptic(_)) => {
            return Ok(Certificate::without_frame(CertificateStatus::Failed, e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let not_strong = |reason: String| {
        let mut c = Certificate::without_frame(CertificateStatus::NotStrongType, reason);
        c.frame = Some((&frame).into());
        c
    };
    if !frame.is_strong_type() {
        return Ok(not_strong(format!(
            "alpha + theta = {}, alpha_t + theta_t = {}",
            frame.alpha + frame.theta,
            frame.alpha_t + frame.theta_t
        )));
    }
    let beta = match opts.beta {
        Some(b) => b,
        None => match choose_beta(&frame) {
            Ok(b) => b,
            Err(Error::NotStrongType(r)) => return Ok(not_strong(r)),
            Err(e) => return Err(e),
        },
    };
    check_certificate(&frame, beta, opts.epsilon, opts.n_r, opts.n_phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasModel;
    use crate::reflection::Scenario;
    use crate::shock::UpstreamData;

    fn golden(wall_deg: f64) -> ReflectionConfig {
        let up = UpstreamData::new(GasModel::new(2.0).unwrap(), 1.0, Vec2::new(3.0, 0.0)).unwrap();
        let wall = Vec2::from_angle(wall_deg.to_radians());
        ReflectionConfig::new(up, wall, wall, Scenario::ClassicalRr).unwrap()
    }

    #[test]
    fn laplacian_sample() {
        let frame = CornerFrame::from_angles(30.0, 80.0, 1.0).unwrap();
        let sub = Subsolution::new(frame, 0.9, 0.01).unwrap();
        let v = subsolution_eval(&sub, 0.1, 27f64.to_radians()).unwrap();
        let expected = -0.01 / 0.1 * (1.0 - 0.81) * 24.3f64.to_radians().cos();
        assert!((-v.laplacian - expected).abs() < 1e-15);
        assert!((-v.laplacian + 0.0173166623).abs() < 1e-10);
        let w = subsolution_eval(&sub, 0.1, 0.0).unwrap();
        assert_eq!(w.grad_polar.y, 0.0);
        assert!(subsolution_eval(&sub, 0.0, 0.1).is_err());
        let tiny = subsolution_eval(&sub, 1e-300, 0.4).unwrap();
        assert!((tiny.psi - sub.psi_ref).abs() < 1e-300);
    }

    #[test]
    fn laplacian_matches_finite_differences() {
        let frame = CornerFrame::from_angles(40.0, 70.0, 1.0).unwrap();
        let sub = Subsolution::new(frame, 0.8, 0.3).unwrap();
        let psi = |x: f64, y: f64| subsolution_eval(&sub, x.hypot(y), y.atan2(x)).unwrap().psi;
        let (x, y, h) = (0.3, 0.1, 1e-4);
        let lap = (psi(x + h, y) + psi(x - h, y) + psi(x, y + h) + psi(x, y - h) - 4.0 * psi(x, y)) / (h * h);
        let v = subsolution_eval(&sub, x.hypot(y), y.atan2(x)).unwrap();
        assert!((lap - v.laplacian).abs() < 1e-5 * v.laplacian.abs());
    }

    #[test]
    fn undilated_frame() {
        let f = CornerFrame::from_angles(30.0, 75.0, 1.0).unwrap();
        assert!((f.theta_t - 30.0).abs() < 1e-12 && (f.alpha_t - 75.0).abs() < 1e-12);
        assert!(f.is_strong_type());
    }

    #[test]
    fn beta_choice() {
        let f = CornerFrame::from_angles(80.0, 90.0, 1.0).unwrap();
        assert_eq!(choose_beta(&f).unwrap(), 0.5);
        let f = CornerFrame::from_angles(30.0, 61.0, 1.0).unwrap();
        let b = choose_beta(&f).unwrap();
        assert!(f.alpha_t + b * f.theta_t > 90.0);
        assert!(shock_margin(f.alpha_t, f.theta_t, b) > 0.0);
        let f = CornerFrame::from_angles(30.0, 60.0, 1.0).unwrap();
        assert!(matches!(choose_beta(&f), Err(Error::NotStrongType(_))));
    }

    #[test]
    fn shock_margin_limit_and_direct_evaluation() {
        let f = CornerFrame::from_angles(35.0, 80.0, 0.6).unwrap();
        let lim = shock_margin(f.alpha_t, f.theta_t, 1.0 - 1e-12);
        assert!((lim + (f.alpha_t + f.theta_t).to_radians().cos()).abs() < 1e-10);
        let beta = choose_beta(&f).unwrap();
        let cert = check_certificate(&f, beta, 1e-3, 64, 64).unwrap();
        let closed = shock_margin(f.alpha_t, f.theta_t, beta);
        assert!((cert.delta_shock.unwrap() - closed).abs() < 1e-10);
        assert_eq!(cert.status, CertificateStatus::Certified);
        assert_eq!(cert.wall_residual, Some(0.0));
        assert_eq!(cert.corner_descent, Some(-1e-3));
    }

    #[test]
    fn forced_weak_frame_fails() {
        let f = CornerFrame::from_angles(30.0, 40.0, 0.8).unwrap();
        assert!(!f.is_strong_type());
        let cert = check_certificate(&f, 0.9, 1e-3, 64, 64).unwrap();
        assert!(cert.delta_shock.unwrap() < 0.0);
        assert_eq!(cert.status, CertificateStatus::Failed);
    }

    #[test]
    fn coarse_grid_rejected() {
        let f = CornerFrame::from_angles(30.0, 75.0, 1.0).unwrap();
        assert!(matches!(
            check_certificate(&f, 0.9, 1e-3, 32, 64),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn golden_rotated_strong_root_certified() {
        let cfg = golden(2.0);
        let sols = solve_reflection(&cfg).unwrap();
        let strong = &sols[1];
        let frame = build_corner_frame(&cfg, strong).unwrap();
        assert!(frame.alpha_t + frame.theta_t > 90.0 && frame.alpha_t + frame.theta_t < 180.0);
        assert!((frame.a - (1.0 - strong.l3 * strong.l3).sqrt()).abs() < 1e-12);
        let cert = certify_nonexistence(&cfg).unwrap();
        assert_eq!(cert.status, CertificateStatus::Certified, "{cert:?}");
        assert!(cert.delta_interior.unwrap() > 0.0 && cert.delta_shock.unwrap() > 0.0);
        assert!(cert.delta_interior_undilated.unwrap() > 0.0 && cert.delta_shock_undilated.unwrap() > 0.0);

        let weak = certify_candidate(
            &cfg,
            &CertifyOptions {
                root: RootChoice::Weak,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(weak.status, CertificateStatus::NotStrongType);
    }

    #[test]
    fn pipeline_statuses() {
        assert_eq!(
            certify_nonexistence(&golden(40.0)).unwrap().status,
            CertificateStatus::NotStrongType
        );
        assert_eq!(
            certify_nonexistence(&golden(0.0)).unwrap().status,
            CertificateStatus::DegenerateTheta
        );
    }

    #[test]
    fn json_shape() {
        let cert = certify_nonexistence(&golden(2.0)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(v["status"], "certified");
        for k in ["theta", "alpha", "a", "theta_t", "alpha_t"] {
            assert!(v["frame"][k].is_f64());
        }
        let back: Certificate = serde_json::from_str(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
    }
}
