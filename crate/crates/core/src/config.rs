//! JSON-facing lattice configuration.
//!
//! The configuration object is flat: physical parameters, the optional
//! auxiliary-model block (epsilon/sigma/u_site), a disorder descriptor and
//! the chain size. Unknown keys are rejected. Site indices in configs are
//! signed and measured from the lattice center; `offset()` is the array
//! index of site 0.

use serde::{Deserialize, Serialize};

use crate::ensemble::draw_disorder;
use crate::error::Error;
use crate::model::{AuxiliaryParams, LatticeParams, SiteField};
use crate::Result;

use num_complex::Complex64;

/// Lattice parameters and on-site potential, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeConfig {
    pub kappa: f64,
    pub rho: f64,
    pub gamma: f64,
    pub phi: f64,
    pub phi_prime: f64,
    /// Hermitian next-to-nearest hopping of the auxiliary model.
    pub epsilon: Option<f64>,
    /// Coupling to the auxiliary sites.
    pub sigma: Option<f64>,
    /// Auxiliary site energy as [re, im]; Im < 0.
    pub u_site: Option<[f64; 2]>,
    pub disorder: DisorderConfig,
    pub size: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            kappa: 0.3,
            rho: 1.0,
            gamma: 0.6,
            phi: std::f64::consts::FRAC_PI_4,
            phi_prime: -std::f64::consts::FRAC_PI_4,
            epsilon: None,
            sigma: None,
            u_site: None,
            disorder: DisorderConfig::default(),
            size: 400,
        }
    }
}

/// On-site potential descriptor: {kind, delta, v0, n1, n2, seed}.
///
/// `kind` is one of "clean", "uniform_disorder" (uses delta, seed) or
/// "defect_pair" (uses v0, n1, n2 with signed center-based indices). Keys
/// that do not belong to the requested kind are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderConfig {
    pub kind: String,
    pub delta: Option<f64>,
    pub v0: Option<f64>,
    pub n1: Option<i64>,
    pub n2: Option<i64>,
    pub seed: Option<u64>,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        Self { kind: "clean".into(), delta: None, v0: None, n1: None, n2: None, seed: None }
    }
}

impl DisorderConfig {
    pub fn uniform(delta: f64, seed: u64) -> Self {
        Self { kind: "uniform_disorder".into(), delta: Some(delta), seed: Some(seed), ..Self::default() }
    }

    pub fn defect_pair(v0: f64, n1: i64, n2: i64) -> Self {
        Self { kind: "defect_pair".into(), v0: Some(v0), n1: Some(n1), n2: Some(n2), ..Self::default() }
    }

    fn reject_extraneous(&self, allowed: &[&str]) -> Result<()> {
        let mut stray = Vec::new();
        if self.delta.is_some() && !allowed.contains(&"delta") {
            stray.push("delta");
        }
        if self.v0.is_some() && !allowed.contains(&"v0") {
            stray.push("v0");
        }
        if self.n1.is_some() && !allowed.contains(&"n1") {
            stray.push("n1");
        }
        if self.n2.is_some() && !allowed.contains(&"n2") {
            stray.push("n2");
        }
        if self.seed.is_some() && !allowed.contains(&"seed") {
            stray.push("seed");
        }
        if stray.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "disorder kind '{}' does not accept: {}",
                self.kind,
                stray.join(", ")
            )))
        }
    }
}

/// Fully resolved lattice: validated parameters, realized on-site field, and
/// the signed-index offset.
#[derive(Debug, Clone)]
pub struct ResolvedLattice {
    pub params: LatticeParams,
    pub aux: Option<AuxiliaryParams>,
    pub field: SiteField,
    pub size: usize,
    /// Array index of config site 0 (the lattice center).
    pub offset: i64,
    /// Seed actually used when drawing disorder, if any.
    pub seed: Option<u64>,
}

impl LatticeConfig {
    pub fn params(&self) -> Result<LatticeParams> {
        LatticeParams::new(self.kappa, self.rho, self.gamma, self.phi, self.phi_prime)
    }

    /// The auxiliary block, if any of its keys are present (then all three
    /// are required).
    pub fn auxiliary(&self) -> Result<Option<AuxiliaryParams>> {
        match (self.epsilon, self.sigma, self.u_site) {
            (None, None, None) => Ok(None),
            (Some(e), Some(s), Some([re, im])) => {
                Ok(Some(AuxiliaryParams::new(e, s, Complex64::new(re, im))?))
            }
            _ => Err(Error::Config(
                "auxiliary model needs all of epsilon, sigma and u_site".into(),
            )),
        }
    }

    /// Array index of config site 0.
    pub fn offset(&self) -> i64 {
        (self.size / 2) as i64
    }

    /// Map a signed config site index into the array.
    pub fn site_index(&self, signed: i64) -> Result<usize> {
        let idx = signed + self.offset();
        if idx < 0 || idx >= self.size as i64 {
            return Err(Error::Config(format!(
                "site {signed} maps to array index {idx}, outside the {} -site lattice",
                self.size
            )));
        }
        Ok(idx as usize)
    }

    /// Validate everything and realize the on-site field.
    pub fn resolve(&self) -> Result<ResolvedLattice> {
        let params = self.params()?;
        let aux = self.auxiliary()?;
        if self.size < 3 {
            return Err(Error::Config(format!("lattice size must be at least 3 (got {})", self.size)));
        }
        let (field, seed) = match self.disorder.kind.as_str() {
            "clean" => {
                self.disorder.reject_extraneous(&[])?;
                (SiteField::clean(self.size), None)
            }
            "uniform_disorder" => {
                self.disorder.reject_extraneous(&["delta", "seed"])?;
                let delta = self.disorder.delta.ok_or_else(|| {
                    Error::Config("uniform_disorder requires delta".into())
                })?;
                if delta < 0.0 {
                    return Err(Error::Config(format!(
                        "disorder half-width must be non-negative (got {delta})"
                    )));
                }
                let seed = self.disorder.seed.unwrap_or(0);
                (draw_disorder(seed, self.size, delta), Some(seed))
            }
            "defect_pair" => {
                self.disorder.reject_extraneous(&["v0", "n1", "n2"])?;
                let v0 = self
                    .disorder
                    .v0
                    .ok_or_else(|| Error::Config("defect_pair requires v0".into()))?;
                let n1 = self
                    .disorder
                    .n1
                    .ok_or_else(|| Error::Config("defect_pair requires n1".into()))?;
                let n2 = self
                    .disorder
                    .n2
                    .ok_or_else(|| Error::Config("defect_pair requires n2".into()))?;
                let i1 = self.site_index(n1)?;
                let i2 = self.site_index(n2)?;
                (SiteField::defect_pair(self.size, v0, i1, i2)?, None)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown disorder kind '{other}' (expected clean, uniform_disorder or defect_pair)"
                )))
            }
        };
        Ok(ResolvedLattice { params, aux, field, size: self.size, offset: self.offset(), seed })
    }
}
