//! Bounded observation-noise models.
//!
//! Every model draws `xi` with `|xi| <= delta`; clipping is applied after
//! sampling so the bound holds exactly regardless of the distribution.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default pre-clip standard deviation of the clipped Gaussian, as a fraction of `delta`.
pub const DEFAULT_STD_FRACTION: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseKind {
    Zero,
    #[default]
    Uniform,
    ClippedGaussian {
        #[serde(default = "default_std_fraction")]
        std_fraction: f64,
    },
    FixedBiasPlus,
    FixedBiasMinus,
    /// `+delta` on even-numbered calls, `-delta` on odd ones.
    AlternatingBias,
}

fn default_std_fraction() -> f64 {
    DEFAULT_STD_FRACTION
}

impl NoiseKind {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseKind::Zero => "zero",
            NoiseKind::Uniform => "uniform",
            NoiseKind::ClippedGaussian { .. } => "clipped-gaussian",
            NoiseKind::FixedBiasPlus => "fixed-bias-plus",
            NoiseKind::FixedBiasMinus => "fixed-bias-minus",
            NoiseKind::AlternatingBias => "alternating-bias",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "none" => Ok(NoiseKind::Zero),
            "uniform" => Ok(NoiseKind::Uniform),
            "clipped-gaussian" | "gaussian" => Ok(NoiseKind::ClippedGaussian {
                std_fraction: DEFAULT_STD_FRACTION,
            }),
            "fixed-bias-plus" | "bias-plus" => Ok(NoiseKind::FixedBiasPlus),
            "fixed-bias-minus" | "bias-minus" => Ok(NoiseKind::FixedBiasMinus),
            "alternating-bias" | "alternating" => Ok(NoiseKind::AlternatingBias),
            other => Err(Error::InvalidParameter(format!(
                "unknown noise model '{other}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    #[serde(flatten)]
    pub kind: NoiseKind,
    pub delta: f64,
}

impl NoiseModel {
    pub fn new(kind: NoiseKind, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise bound must be nonnegative, got {delta}"
            )));
        }
        if let NoiseKind::ClippedGaussian { std_fraction } = kind {
            if !(std_fraction.is_finite() && std_fraction > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "clipped-gaussian std_fraction must be positive, got {std_fraction}"
                )));
            }
        }
        Ok(Self { kind, delta })
    }

    pub fn zero() -> Self {
        Self {
            kind: NoiseKind::Zero,
            delta: 0.0,
        }
    }

    pub fn uniform(delta: f64) -> Result<Self> {
        Self::new(NoiseKind::Uniform, delta)
    }

    /// Draw one noise value. `call_index` is the zero-based oracle call count,
    /// consulted only by the alternating model.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, call_index: u64) -> f64 {
        let d = self.delta;
        if d == 0.0 {
            return 0.0;
        }
        let xi = match self.kind {
            NoiseKind::Zero => 0.0,
            NoiseKind::Uniform => rng.random_range(-d..=d),
            NoiseKind::ClippedGaussian { std_fraction } => {
                // std_fraction and d are validated positive, so Normal::new cannot fail.
                let normal = Normal::new(0.0, std_fraction * d).expect("valid normal");
                normal.sample(rng)
            }
            NoiseKind::FixedBiasPlus => d,
            NoiseKind::FixedBiasMinus => -d,
            NoiseKind::AlternatingBias => {
                if call_index.is_multiple_of(2) {
                    d
                } else {
                    -d
                }
            }
        };
        xi.clamp(-d, d)
    }
}
