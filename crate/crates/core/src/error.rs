use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("adiabatic exponent {0} outside [1, 4]")]
    GammaOutOfRange(f64),

    #[error("density must be positive, got {0}")]
    NonPositiveDensity(f64),

    /// The argument of the inverse pressure-potential map left its range.
    #[error("vacuum: pi^-1 argument {0} out of range")]
    Vacuum(f64),

    /// Upstream normal pseudo-velocity is not strictly supersonic.
    #[error("no shock: upstream normal pseudo-Mach {0} <= 1")]
    NoShock(f64),

    #[error("degenerate shock: velocity jump vanishes")]
    DegenerateShock,

    /// `v` too close to the upstream velocity, where `g` is singular.
    #[error("vanishing shock: |v - v_I| = {0} below threshold")]
    VanishingShock(f64),

    #[error("upstream pseudo-subsonic at xi (L = {0})")]
    NoPolar(f64),

    #[error("too few samples: {got} < {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("root finder failed: {0}")]
    RootFinding(String),

    /// A sign fact that holds for every admissible shock was violated.
    #[error("sign fact violated: {0}")]
    SignFact(String),

    /// Reflection point where the wall meets the shock at a right angle.
    #[error("degenerate corner: shock perpendicular to the wall")]
    DegenerateTheta,

    #[error("downstream not elliptic at the corner (L3 = {0})")]
    NotElliptic(f64),

    #[error("not strong-type: {0}")]
    NotStrongType(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
