//! Shock polars, local regular reflection and strong-type non-existence
//! certificates for self-similar compressible potential flow.
//!
//! ```
//! use ssrr_core::{GasModel, UpstreamData, Vec2};
//! use ssrr_core::shock::normal_jump;
//!
//! let gas = GasModel::new(2.0)?;
//! let (rho_d, zn_d) = normal_jump(&gas, 1.0, 2.0)?;
//! assert!((rho_d - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
//! assert!((rho_d * zn_d - 2.0).abs() < 1e-12);
//! # let _ = UpstreamData::new(gas, 1.0, Vec2::new(3.0, 0.0))?;
//! # Ok::<(), ssrr_core::Error>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod diagnostic;
pub mod error;
pub mod fmt;
pub mod gas;
pub mod geom;
pub mod polar;
pub mod reflection;
pub mod root;
pub mod shock;

pub use certificate::{certify_nonexistence, Certificate, CertificateStatus, CornerFrame};
pub use diagnostic::{minimum_report, GridField, Verdict};
pub use error::{Error, Result};
pub use gas::{GasModel, PointState};
pub use geom::{Sym2, Vec2};
pub use polar::{polar_trace, Polar, TypeLabel};
pub use reflection::{solve_reflection, ReflectionConfig, ReflectionSolution, Scenario};
pub use shock::{ShockPoint, UpstreamData};

// Book chapters run as doc-tests so the guide stays in sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/gas.md")]
    mod gas {}
    #[doc = include_str!("../../../book/src/shock-polar.md")]
    mod shock_polar {}
    #[doc = include_str!("../../../book/src/reflection.md")]
    mod reflection {}
    #[doc = include_str!("../../../book/src/certificate.md")]
    mod certificate {}
    #[doc = include_str!("../../../book/src/diagnostic.md")]
    mod diagnostic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
