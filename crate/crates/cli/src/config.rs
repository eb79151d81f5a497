//! Scenario configuration: the lattice block from the core crate plus
//! per-subcommand parameter blocks. Every block is optional in the JSON and
//! fully defaulted; unknown keys are rejected at every level. Site indices
//! are signed and centered, mapped to array indices by the lattice offset.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use zigzag_core::config::LatticeConfig;
use zigzag_core::propagator::InitialCondition;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub lattice: LatticeConfig,
    pub initial: InitialConfig,
    pub integration: IntegrationConfig,
    pub band: BandConfig,
    pub ensemble: EnsembleConfig,
    pub wavepacket: WavepacketConfig,
    pub asymptotics: AsymptoticsConfig,
    pub output: OutputConfig,
}

/// Command-line overrides applied after the config file is read.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_max: Option<f64>,
    pub size: Option<usize>,
    pub threads: Option<usize>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))
    }

    pub fn apply_overrides(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            if self.lattice.disorder.kind == "uniform_disorder" {
                self.lattice.disorder.seed = Some(seed);
            }
            self.ensemble.base_seed = Some(seed);
        }
        if let Some(dt) = o.dt {
            self.integration.dt = Some(dt);
        }
        if let Some(t_max) = o.t_max {
            self.integration.t_max = t_max;
        }
        if let Some(size) = o.size {
            self.lattice.size = size;
        }
    }
}

/// Initial excitation: {kind, n0, w0, q0} with `kind` one of "single_site"
/// or "gaussian"; n0 is a signed centered site index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub kind: String,
    pub n0: i64,
    pub w0: Option<f64>,
    pub q0: Option<f64>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { kind: "single_site".into(), n0: 0, w0: None, q0: None }
    }
}

impl InitialConfig {
    pub fn gaussian(n0: i64, w0: f64, q0: f64) -> Self {
        Self { kind: "gaussian".into(), n0, w0: Some(w0), q0: Some(q0) }
    }

    /// Resolve against a lattice of `size` sites with the given offset.
    pub fn resolve(&self, size: usize, offset: i64) -> Result<InitialCondition, CliError> {
        let n0 = self.n0 + offset;
        if n0 < 0 || n0 >= size as i64 {
            return Err(CliError::Config(format!(
                "initial site {} maps to array index {n0}, outside the {size}-site lattice",
                self.n0
            )));
        }
        let n0 = n0 as usize;
        match self.kind.as_str() {
            "single_site" => {
                if self.w0.is_some() || self.q0.is_some() {
                    return Err(CliError::Config(
                        "single_site initial condition does not accept w0/q0".into(),
                    ));
                }
                Ok(InitialCondition::SingleSite { n0 })
            }
            "gaussian" => {
                let w0 = self
                    .w0
                    .ok_or_else(|| CliError::Config("gaussian initial condition requires w0".into()))?;
                let q0 = self
                    .q0
                    .ok_or_else(|| CliError::Config("gaussian initial condition requires q0".into()))?;
                Ok(InitialCondition::Gaussian { n0, w0, q0 })
            }
            other => Err(CliError::Config(format!(
                "unknown initial condition kind '{other}' (expected single_site or gaussian)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationConfig {
    /// Step size; defaults to the operator's stability step when absent.
    pub dt: Option<f64>,
    pub t_max: f64,
    /// Store every k-th step.
    pub sample_every: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self { dt: None, t_max: 100.0, sample_every: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandConfig {
    /// Flux values to sweep; each produces one CSV (with φ' = −φ).
    pub phis: Vec<f64>,
    /// Points of the uniform q grid over the extended zone.
    pub points: usize,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self { phis: vec![0.0, FRAC_PI_4, FRAC_PI_2], points: 512 }
    }
}

/// One lattice setting of an ensemble sweep (φ' = −φ convention).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSettingConfig {
    pub label: String,
    pub kappa: f64,
    pub rho: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl Default for EnsembleSettingConfig {
    fn default() -> Self {
        Self { label: "hermitian".into(), kappa: 0.0, rho: 1.0, gamma: 0.0, phi: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub realizations: usize,
    /// Base seed for member derivation; the --seed flag overrides it.
    pub base_seed: Option<u64>,
    /// Disorder half-widths to sweep.
    pub deltas: Vec<f64>,
    pub settings: Vec<EnsembleSettingConfig>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            realizations: 100,
            base_seed: None,
            deltas: vec![0.5, 1.0, 1.5],
            settings: vec![
                EnsembleSettingConfig::default(),
                EnsembleSettingConfig {
                    label: "nh_phi0".into(),
                    kappa: 0.3,
                    rho: 1.0,
                    gamma: 0.6,
                    phi: 0.0,
                },
                EnsembleSettingConfig {
                    label: "nh_phi_quarter".into(),
                    kappa: 0.3,
                    rho: 1.0,
                    gamma: 0.6,
                    phi: FRAC_PI_4,
                },
                EnsembleSettingConfig {
                    label: "nh_phi_half".into(),
                    kappa: 0.3,
                    rho: 1.0,
                    gamma: 0.6,
                    phi: FRAC_PI_2,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WavepacketConfig {
    pub w0: f64,
    /// Launch distance from the scattering region (or from the center for
    /// disordered lattices), in sites.
    pub launch_distance: i64,
    /// Pulse threshold for echo counting, as a fraction of the trace max.
    pub pulse_threshold: f64,
}

impl Default for WavepacketConfig {
    fn default() -> Self {
        Self { w0: 10.0, launch_distance: 50, pulse_threshold: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsConfig {
    /// Comparison time for the three solution routes.
    pub time: f64,
    /// Brillouin-zone quadrature panels.
    pub panels: usize,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self { time: 10.0, panels: 1024 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Emit PGM heatmaps alongside amplitude matrices.
    pub heatmap: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { heatmap: true }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_all_defaults() {
        let cfg = ScenarioConfig::from_json("{}").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.integration.t_max, 100.0);
        assert_eq!(cfg.ensemble.realizations, 100);
        assert_eq!(cfg.band.phis.len(), 3);
    }

    #[test]
    fn unknown_keys_rejected_at_all_levels() {
        assert!(ScenarioConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"integration": {"bogus": 1}}"#).is_err());
        assert!(ScenarioConfig::from_json(r#"{"lattice": {"bogus": 1}}"#).is_err());
    }

    #[test]
    fn overrides_apply() {
        let mut cfg = ScenarioConfig::from_json(
            r#"{"lattice": {"disorder": {"kind": "uniform_disorder", "delta": 1.0, "seed": 1}}}"#,
        )
        .unwrap();
        cfg.apply_overrides(&Overrides {
            seed: Some(9),
            dt: Some(0.01),
            t_max: Some(42.0),
            size: Some(128),
            threads: None,
        });
        assert_eq!(cfg.lattice.disorder.seed, Some(9));
        assert_eq!(cfg.ensemble.base_seed, Some(9));
        assert_eq!(cfg.integration.dt, Some(0.01));
        assert_eq!(cfg.integration.t_max, 42.0);
        assert_eq!(cfg.lattice.size, 128);
    }

    #[test]
    fn initial_condition_mapping() {
        let init = InitialConfig::gaussian(-70, 10.0, -FRAC_PI_2);
        match init.resolve(400, 200).unwrap() {
            InitialCondition::Gaussian { n0, w0, q0 } => {
                assert_eq!(n0, 130);
                assert_eq!(w0, 10.0);
                assert_eq!(q0, -FRAC_PI_2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(init.resolve(100, 50).is_err());
        let stray = InitialConfig { w0: Some(3.0), ..InitialConfig::default() };
        assert!(stray.resolve(100, 50).is_err());
    }
}
