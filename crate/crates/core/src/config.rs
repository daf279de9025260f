//! Flat TOML run configuration. Every key is optional; see [`RunConfig`] for
//! the defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{InitialFamily, Phi};
use crate::classify::ClassifierTolerances;
use crate::error::{FlowError, Result};
use crate::evolve::{StepControl, StepScheme};
use crate::geometry::ProblemParams;
use crate::verify::VerifySettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    #[default]
    Explicit,
    SemiImplicit,
}

/// ```toml
/// force = 1.0
/// half_span = 0.5
/// grid_n = 201
/// phi = "cosine"        # or "parabola"
/// sigma = 0.1
/// scheme = "explicit"   # or "semi_implicit"
/// sigmas = [0.0, 1.0, 5.0]
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub force: f64,
    pub half_span: f64,
    pub grid_n: usize,
    pub phi: Phi,
    pub sigma: f64,

    pub cfl: f64,
    pub dt_max: f64,
    pub sample_interval: f64,
    pub scheme: SchemeName,
    pub implicit_boost: f64,
    pub slope_switch: f64,
    pub slope_return: f64,
    pub snapshot_every: usize,

    pub t_max: f64,
    pub converge: f64,
    pub escape_gap: f64,
    pub dissipation: f64,

    pub out_dir: PathBuf,
    /// Amplitudes for `sweep`.
    pub sigmas: Vec<f64>,
    /// Initial bracket for `bisect`; `bisect_hi` defaults to the escape certificate.
    pub bisect_lo: f64,
    pub bisect_hi: Option<f64>,
    pub bisect_width: f64,
    pub critical_width: f64,
    pub critical_horizon: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ctl = StepControl::<f64>::default();
        let tols = ClassifierTolerances::<f64>::default();
        RunConfig {
            force: 1.0,
            half_span: 0.5,
            grid_n: 201,
            phi: Phi::Cosine,
            sigma: 0.1,
            cfl: ctl.cfl,
            dt_max: ctl.dt_max,
            sample_interval: ctl.sample_interval,
            scheme: SchemeName::Explicit,
            implicit_boost: ctl.implicit_boost,
            slope_switch: ctl.slope_switch,
            slope_return: ctl.slope_return,
            snapshot_every: ctl.snapshot_every,
            t_max: tols.t_max,
            converge: tols.converge,
            escape_gap: tols.escape_gap,
            dissipation: tols.dissipation,
            out_dir: PathBuf::from("out"),
            sigmas: vec![-1.0, 0.0, 0.1, 1.0, 2.0, 3.0, 4.0, 5.0, 10.0],
            bisect_lo: 0.1,
            bisect_hi: None,
            bisect_width: 0.01,
            critical_width: 1e-4,
            critical_horizon: 100.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| FlowError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FlowError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            FlowError::Config(m) => FlowError::Config(format!("{}: {m}", path.display())),
            other => FlowError::Config(format!("{}: {other}", path.display())),
        })
    }

    /// Checks every derived object; all failures are reported as [`FlowError::Config`].
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: FlowError| match e {
            FlowError::Config(_) => e,
            other => FlowError::Config(other.to_string()),
        };
        self.family().map_err(wrap)?;
        self.step_control().validate().map_err(wrap)?;
        self.tolerances().validate().map_err(wrap)?;
        let positive = [
            ("bisect_width", self.bisect_width),
            ("critical_width", self.critical_width),
            ("critical_horizon", self.critical_horizon),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(FlowError::Config(format!("{k} = {v} must be positive")));
            }
        }
        if let Some(s) = self.sigmas.iter().find(|s| !s.is_finite()) {
            return Err(FlowError::Config(format!("sigmas contains {s}")));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ProblemParams<f64>> {
        ProblemParams::new(self.force, self.half_span, self.grid_n)
    }

    pub fn family(&self) -> Result<InitialFamily<f64>> {
        InitialFamily::new(self.params()?, self.phi, self.sigma)
    }

    pub fn step_control(&self) -> StepControl<f64> {
        StepControl {
            cfl: self.cfl,
            dt_max: self.dt_max,
            sample_interval: self.sample_interval,
            scheme: match self.scheme {
                SchemeName::Explicit => StepScheme::Explicit,
                SchemeName::SemiImplicit => StepScheme::SemiImplicit,
            },
            implicit_boost: self.implicit_boost,
            slope_switch: self.slope_switch,
            slope_return: self.slope_return,
            snapshot_every: self.snapshot_every,
        }
    }

    pub fn tolerances(&self) -> ClassifierTolerances<f64> {
        ClassifierTolerances {
            converge: self.converge,
            escape_gap: self.escape_gap,
            dissipation: self.dissipation,
            t_max: self.t_max,
        }
    }

    pub fn verify_settings(&self) -> VerifySettings {
        VerifySettings {
            force: self.force,
            half_span: self.half_span,
            grid_n: self.grid_n,
            phi: self.phi,
            ctl: self.step_control(),
            tols: self.tolerances(),
            bracket_width: self.bisect_width,
            critical_width: self.critical_width,
            critical_horizon: self.critical_horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn keys_are_flat() {
        let c = RunConfig::parse("grid_n = 101\nphi = \"parabola\"\nscheme = \"semi_implicit\"\nsigmas = [1.0, 2.0]\n").unwrap();
        assert_eq!(c.grid_n, 101);
        assert_eq!(c.phi, Phi::Parabola);
        assert_eq!(c.step_control().scheme, StepScheme::SemiImplicit);
        assert_eq!(c.sigmas, vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_bad_input() {
        for text in ["gridn = 3", "grid_n = \"x\"", "half_span = 2.0", "grid_n = 100", "cfl = -1.0", "t_max = 0.0", "sigma = 40.0\nphi = \"parabola\"\nhalf_span = 1.0\ngrid_n = 5"] {
            match RunConfig::parse(text) {
                Err(FlowError::Config(_)) => {}
                other => panic!("{text:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn wide_span_message_names_the_limit() {
        let e = RunConfig::parse("half_span = 1.5").unwrap_err();
        assert!(e.to_string().contains("1/A"), "{e}");
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let e = RunConfig::load(Path::new("/nonexistent/run.toml")).unwrap_err();
        assert!(matches!(e, FlowError::Config(_)));
    }
}
