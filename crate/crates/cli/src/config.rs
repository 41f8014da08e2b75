use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use ssrr_core::certificate::RootChoice;
use ssrr_core::reflection::{state_behind_incident, Scenario, SweepGrid};
use ssrr_core::{GasModel, ReflectionConfig, UpstreamData, Vec2};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub rho: f64,
    pub v: [f64; 2],
}

/// Incident shock through `xi_r` with the given downstream normal; the
/// `upstream` state is then the state ahead of it.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentSpec {
    pub normal: [f64; 2],
}

/// `[lo, hi, count]`.
pub type Range = (f64, f64, usize);

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub tau_deg: Range,
    pub mach: Range,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaSpec {
    Auto,
    Value(f64),
}

impl std::str::FromStr for BetaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(BetaSpec::Auto);
        }
        s.parse::<f64>()
            .map(BetaSpec::Value)
            .map_err(|_| format!("expected `auto` or a number, got {s:?}"))
    }
}

impl<'de> Deserialize<'de> for BetaSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(BetaSpec::Value(x)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Grid dimensions `NxM`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub struct GridSpec(pub usize, pub usize);

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected NxM, got {s:?}"))?;
        let p = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("expected NxM, got {s:?}"))
        };
        Ok(GridSpec(p(a)?, p(b)?))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gamma: f64,
    pub upstream: Option<StateSpec>,
    pub incident: Option<IncidentSpec>,
    pub xi_r: Option<[f64; 2]>,
    pub wall_dir: Option<[f64; 2]>,
    pub scenario: Option<Scenario>,
    pub samples: Option<usize>,
    pub epsilon: Option<f64>,
    pub beta: Option<BetaSpec>,
    pub grid: Option<GridSpec>,
    pub root: Option<RootChoice>,
    pub sweep: Option<SweepSpec>,
    pub field: Option<PathBuf>,
}

fn cfg_err(field: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn vec2(field: &str, v: [f64; 2]) -> Result<Vec2, CliError> {
    let v = Vec2::new(v[0], v[1]);
    if !v.is_finite() {
        return Err(cfg_err(field, "components must be finite"));
    }
    Ok(v)
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!(
                "{}: line {} column {}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        if let Some(f) = &cfg.field {
            if f.is_relative() {
                cfg.field = Some(path.parent().unwrap_or(Path::new(".")).join(f));
            }
        }
        Ok(cfg)
    }

    pub fn gas(&self) -> Result<GasModel, CliError> {
        GasModel::new(self.gamma).map_err(|e| cfg_err("gamma", e))
    }

    pub fn xi_r(&self) -> Result<Vec2, CliError> {
        vec2("xi_r", self.xi_r.unwrap_or([0.0, 0.0]))
    }

    /// State on the upstream side of the reflected shock: `upstream`
    /// itself, or the state behind `incident` when that is given.
    pub fn reflected_upstream(&self) -> Result<UpstreamData, CliError> {
        let gas = self.gas()?;
        let s = self
            .upstream
            .ok_or_else(|| cfg_err("upstream", "required for this command"))?;
        if !(s.rho > 0.0) {
            return Err(cfg_err("upstream.rho", format!("must be positive, got {}", s.rho)));
        }
        let up = UpstreamData::new(gas, s.rho, vec2("upstream.v", s.v)?).map_err(|e| cfg_err("upstream", e))?;
        match self.incident {
            None => Ok(up),
            Some(inc) => {
                let n = vec2("incident.normal", inc.normal)?;
                if !(n.norm() > 0.0) {
                    return Err(cfg_err("incident.normal", "must be nonzero"));
                }
                state_behind_incident(&up, self.xi_r()?, n).map_err(CliError::from)
            }
        }
    }

    pub fn wall_dir(&self) -> Result<Option<Vec2>, CliError> {
        self.wall_dir
            .map(|w| {
                let v = vec2("wall_dir", w)?;
                if !(v.norm() > 0.0) {
                    return Err(cfg_err("wall_dir", "must be nonzero"));
                }
                Ok(v)
            })
            .transpose()
    }

    pub fn reflection(&self) -> Result<ReflectionConfig, CliError> {
        let up = self.reflected_upstream()?;
        let wall = self
            .wall_dir()?
            .ok_or_else(|| cfg_err("wall_dir", "required for this command"))?;
        let xi_r = self.xi_r()?;
        if xi_r.dot(wall.normalized().perp()).abs() > 1e-12 * (1.0 + xi_r.norm()) {
            return Err(cfg_err("xi_r", "must lie on the wall line through the origin"));
        }
        ReflectionConfig::new(up, xi_r, wall, self.scenario.unwrap_or(Scenario::ClassicalRr)).map_err(CliError::from)
    }

    pub fn sweep_grid(&self, grid: Option<GridSpec>) -> Result<SweepGrid, CliError> {
        let s = self
            .sweep
            .ok_or_else(|| cfg_err("sweep", "required for this command"))?;
        let (mut tau, mut mach) = (s.tau_deg, s.mach);
        if let Some(GridSpec(n, m)) = grid {
            tau.2 = n;
            mach.2 = m;
        }
        for (name, (lo, hi, n)) in [("sweep.tau_deg", tau), ("sweep.mach", mach)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 {
                return Err(cfg_err(name, "expected [lo, hi, count] with lo <= hi and count >= 1"));
            }
        }
        if !(mach.0 > 1.0) {
            return Err(cfg_err("sweep.mach", "Mach numbers must exceed 1"));
        }
        Ok(SweepGrid::uniform(tau, mach))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"gamma": 2, "upstream": {"rho": 1, "v": [3, 0]}, "xi_r": [1, 0], "wall_dir": [1, 0],
                "scenario": "supersonic_wedge", "beta": "auto", "grid": [64, 64], "root": "weak",
                "sweep": {"tau_deg": [0, 40, 11], "mach": [1.5, 3, 4]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.beta, Some(BetaSpec::Auto));
        assert_eq!(cfg.grid, Some(GridSpec(64, 64)));
        assert_eq!(cfg.root, Some(RootChoice::Weak));
        assert!(cfg.reflection().is_ok());
        assert_eq!(cfg.sweep_grid(None).unwrap().tau_deg.len(), 11);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"gamma": 1.4, "gama": 2}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"gamma": 7, "upstream": {"rho": 1, "v": [3, 0]}}"#).unwrap();
        match cfg.reflected_upstream() {
            Err(CliError::Config(m)) => assert!(m.starts_with("gamma:")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_and_beta_flags() {
        assert_eq!("128x64".parse::<GridSpec>().unwrap(), GridSpec(128, 64));
        assert!("128".parse::<GridSpec>().is_err());
        assert_eq!("0.75".parse::<BetaSpec>().unwrap(), BetaSpec::Value(0.75));
        assert!("maybe".parse::<BetaSpec>().is_err());
    }
}
