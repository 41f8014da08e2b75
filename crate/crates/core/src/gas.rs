//! Polytropic thermodynamics: pressure `p = rho^gamma`, sound speed, the
//! pressure-potential map `pi` with `dpi/drho = c^2 / rho`, and the local type
//! of the self-similar potential-flow equation.
//!
//! `pi` is normalized so that `pi(0) = 0` for `gamma > 1`, which gives
//! `pi(rho) = gamma/(gamma-1) rho^(gamma-1)`. The isothermal case `gamma = 1`
//! uses `pi(rho) = ln rho`. The two branches do not join continuously as
//! `gamma -> 1+`; each is exact on its own.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Sym2, Vec2};

pub const GAMMA_MIN: f64 = 1.0;
pub const GAMMA_MAX: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    gamma: f64,
}

impl GasModel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(GAMMA_MIN..=GAMMA_MAX).contains(&gamma) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        Ok(GasModel { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    fn check_density(rho: f64) -> Result<()> {
        if rho > 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::NonPositiveDensity(rho))
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        Self::check_density(rho)?;
        Ok(rho.powf(self.gamma))
    }

    /// `c = sqrt(dp/drho) = sqrt(gamma rho^(gamma-1))`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        Ok(self.sound_speed_sq(rho)?.sqrt())
    }

    pub fn sound_speed_sq(&self, rho: f64) -> Result<f64> {
        Self::check_density(rho)?;
        Ok(self.gamma * rho.powf(self.gamma - 1.0))
    }

    pub fn pi(&self, rho: f64) -> Result<f64> {
        Self::check_density(rho)?;
        if self.is_isothermal() {
            Ok(rho.ln())
        } else {
            Ok(self.gamma / (self.gamma - 1.0) * rho.powf(self.gamma - 1.0))
        }
    }

    /// Exact inverse of [`GasModel::pi`]. For `gamma > 1` the range of `pi`
    /// is `(0, inf)`; anything else is vacuum.
    pub fn pi_inv(&self, q: f64) -> Result<f64> {
        if !q.is_finite() {
            return Err(Error::Vacuum(q));
        }
        if self.is_isothermal() {
            let rho = q.exp();
            if rho > 0.0 && rho.is_finite() {
                Ok(rho)
            } else {
                Err(Error::Vacuum(q))
            }
        } else {
            if q <= 0.0 {
                return Err(Error::Vacuum(q));
            }
            Ok((q * (self.gamma - 1.0) / self.gamma).powf(1.0 / (self.gamma - 1.0)))
        }
    }

    /// Density from the Bernoulli relation `rho = pi^-1(-chi - |grad chi|^2 / 2)`
    /// for the pseudo-potential `chi`.
    pub fn density_from_bernoulli(&self, chi: f64, grad_chi: Vec2) -> Result<f64> {
        self.pi_inv(-chi - 0.5 * grad_chi.norm_sq())
    }

    /// Coefficient matrix `c^2 I - z z^T` of the non-divergence form at a
    /// point, and whether it is positive definite (`L < 1`).
    pub fn pde_matrix(&self, state: &PointState) -> Result<(Sym2, bool)> {
        let c2 = self.sound_speed_sq(state.rho)?;
        let z = state.z();
        let m = Sym2::scaled_identity(c2) - Sym2::outer(z);
        Ok((m, z.norm_sq() < c2))
    }
}

/// Density, velocity and similarity coordinate at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointState {
    pub rho: f64,
    pub v: Vec2,
    pub xi: Vec2,
}

impl PointState {
    pub fn new(rho: f64, v: Vec2, xi: Vec2) -> Result<Self> {
        GasModel::check_density(rho)?;
        Ok(PointState { rho, v, xi })
    }

    /// Pseudo-velocity `z = v - xi`.
    pub fn z(&self) -> Vec2 {
        self.v - self.xi
    }

    pub fn sound_speed(&self, gas: &GasModel) -> f64 {
        // density validated on construction
        gas.sound_speed(self.rho).unwrap_or(f64::NAN)
    }

    /// Pseudo-Mach number `L = |z| / c`.
    pub fn pseudo_mach(&self, gas: &GasModel) -> f64 {
        self.z().norm() / self.sound_speed(gas)
    }

    pub fn is_elliptic(&self, gas: &GasModel) -> bool {
        self.pseudo_mach(gas) < 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gas(g: f64) -> GasModel {
        GasModel::new(g).unwrap()
    }

    #[test]
    fn pressure_values() {
        assert_eq!(gas(2.0).pressure(1.0).unwrap(), 1.0);
        assert_eq!(gas(1.0).pressure(3.0).unwrap(), 3.0);
        let p = gas(1.4).pressure(2.0).unwrap();
        let oracle = (1.4 * 2f64.ln()).exp();
        assert!((p - oracle).abs() < 1e-14);
        assert!((p - 2.639015821545).abs() < 1e-11);
    }

    #[test]
    fn nonpositive_density_rejected() {
        assert_eq!(gas(2.0).pressure(0.0), Err(Error::NonPositiveDensity(0.0)));
        assert!(gas(2.0).sound_speed(-1.0).is_err());
        assert!(gas(1.0).pi(0.0).is_err());
    }

    #[test]
    fn gamma_range() {
        assert!(GasModel::new(0.99).is_err());
        assert!(GasModel::new(4.01).is_err());
        assert!(GasModel::new(f64::NAN).is_err());
        assert!(GasModel::new(4.0).is_ok());
    }

    #[test]
    fn sound_speed_values() {
        assert_eq!(gas(1.0).sound_speed(5.0).unwrap(), 1.0);
        assert!((gas(2.0).sound_speed(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let c = gas(2.0).sound_speed(golden).unwrap();
        assert!((c - (2.0 * golden).sqrt()).abs() < 1e-15);
        assert!((c - 1.798_907_43).abs() < 1e-8);
    }

    #[test]
    fn pi_values_and_round_trip() {
        assert!((gas(2.0).pi(1.5).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(gas(1.0).pi(1.0).unwrap(), 0.0);
        for g in [1.0, 1.4, 2.0, 3.0, 4.0] {
            for rho in [0.1, 1.0, 10.0] {
                let back = gas(g).pi_inv(gas(g).pi(rho).unwrap()).unwrap();
                assert!((back - rho).abs() <= 1e-12 * rho, "gamma {g} rho {rho}");
            }
        }
    }

    #[test]
    fn pi_inv_vacuum() {
        assert_eq!(gas(2.0).pi_inv(0.0), Err(Error::Vacuum(0.0)));
        assert!(gas(1.4).pi_inv(-1.0).is_err());
        assert!(gas(1.0).pi_inv(-30.0).is_ok());
    }

    #[test]
    fn bernoulli_density() {
        let g2 = gas(2.0);
        assert!((g2.density_from_bernoulli(-2.0, Vec2::ZERO).unwrap() - 1.0).abs() < 1e-15);
        assert!((g2.density_from_bernoulli(-4.0, Vec2::new(2.0, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        let g1 = gas(1.0);
        assert!((g1.density_from_bernoulli(-0.5, Vec2::new(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(g2.density_from_bernoulli(1.0, Vec2::ZERO).is_err());
    }

    #[test]
    fn pde_matrix_cases() {
        let g2 = gas(2.0);
        let at_rest = PointState::new(1.0, Vec2::new(0.3, 0.2), Vec2::new(0.3, 0.2)).unwrap();
        let (m, ell) = g2.pde_matrix(&at_rest).unwrap();
        assert!(ell);
        assert_eq!(m, Sym2::scaled_identity(2.0));

        let s = PointState::new(1.0, Vec2::new(2.0, 0.0), Vec2::ZERO).unwrap();
        let (m, ell) = g2.pde_matrix(&s).unwrap();
        assert!(!ell);
        assert!((m.xx + 2.0).abs() < 1e-15 && m.xy == 0.0 && (m.yy - 2.0).abs() < 1e-15);
        assert!((s.pseudo_mach(&g2) - 2f64.sqrt()).abs() < 1e-15);

        let sonic = PointState::new(1.0, Vec2::new(1.0, 1.0), Vec2::ZERO).unwrap();
        let (m, ell) = g2.pde_matrix(&sonic).unwrap();
        assert!(!ell);
        assert!(m.det().abs() < 1e-12);
    }
}
