use serde::{Deserialize, Serialize};

use crate::bounds::{Anchor, ExclusionReport};
use crate::expansion::BoundaryReport;
use crate::interval::IntervalUnion;
use crate::maximize::SubregionReport;
use crate::noise::NoiseModel;
use crate::problem::Problem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u32>,
    pub name: String,
    pub domain: (f64, f64),
    pub lipschitz: f64,
    pub delta: f64,
    pub threshold: f64,
}

impl From<&Problem> for ProblemSummary {
    fn from(p: &Problem) -> Self {
        Self {
            id: p.id(),
            name: p.name().to_string(),
            domain: p.domain(),
            lipschitz: p.lipschitz(),
            delta: p.delta(),
            threshold: p.threshold(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub nu: usize,
    pub sigma_fraction: f64,
    pub eps_expand: f64,
    pub eps_max: f64,
}

/// Distinct evaluated coordinates and oracle calls.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub points: usize,
    pub evaluations: usize,
}

impl std::ops::Add for Counts {
    type Output = Counts;

    fn add(self, rhs: Counts) -> Counts {
        Counts {
            points: self.points + rhs.points,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub x: f64,
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: ProblemSummary,
    pub noise: NoiseModel,
    pub seed: u64,
    pub params: RunParams,
    pub initial_points: Vec<f64>,
    pub safe_region: IntervalUnion,
    pub expansion: Counts,
    pub maximization: Counts,
    pub total: Counts,
    pub boundaries: Vec<BoundaryReport>,
    /// Initial points whose region stayed a single point.
    pub no_expansion: Vec<usize>,
    /// Anchors `(x, g_hat)` of the minorant after the expansion phase.
    pub minorant_anchors: Vec<Anchor>,
    pub subregions: Vec<SubregionReport>,
    pub best: Estimate,
    pub exclusion: ExclusionReport,
    pub violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> crate::Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
