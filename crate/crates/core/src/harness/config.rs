use std::path::PathBuf;

use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node,
    Value,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansion::ExpansionParams;
use crate::maximize::MaxParams;
use crate::noise::{NoiseKind, NoiseModel};
use crate::problem::{Objective, Problem};
use crate::testbed::{self, estimate_range, RANGE_GRID};

/// A problem given by catalog id or defined inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProblemSpec {
    Catalog(u32),
    Inline(InlineProblem),
}

/// An objective written as an expression in `x`, e.g.
/// `"math::sin(x) + 0.5 * x"`. Use float literals for division (`1.0 / 3.0`);
/// `pi` and `e` are predefined.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub expression: String,
    pub domain: (f64, f64),
    pub lipschitz: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialPoints {
    /// One point drawn from the seeded start candidates.
    Auto(Auto),
    Explicit(Vec<f64>),
}

impl Default for InitialPoints {
    fn default() -> Self {
        InitialPoints::Auto(Auto::Auto)
    }
}

fn default_seed() -> u64 {
    0
}

fn default_nu() -> usize {
    15
}

fn default_sigma_fraction() -> f64 {
    0.1
}

fn default_eps() -> f64 {
    1e-3
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Absolute noise bound; overrides `delta_fraction` and the catalog value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Noise bound as a fraction of the grid range of `f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_fraction: Option<f64>,
    /// Absolute threshold; overrides `threshold_fraction` and the catalog value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Threshold as `min f + fraction * range`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_fraction: Option<f64>,
    #[serde(default = "default_nu")]
    pub nu: usize,
    #[serde(default = "default_sigma_fraction")]
    pub sigma_fraction: f64,
    #[serde(default = "default_eps")]
    pub eps_expand: f64,
    #[serde(default = "default_eps")]
    pub eps_max: f64,
    #[serde(default)]
    pub initial_points: InitialPoints,
    #[serde(default, skip_serializing_if = "is_false")]
    pub parallel_subregions: bool,
    /// Stamp trace records and the report with wall-clock time.
    #[serde(default, skip_serializing_if = "is_false")]
    pub record_timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

impl RunConfig {
    pub fn catalog(id: u32) -> Self {
        Self {
            problem: ProblemSpec::Catalog(id),
            noise: NoiseKind::default(),
            seed: default_seed(),
            delta: None,
            delta_fraction: None,
            threshold: None,
            threshold_fraction: None,
            nu: default_nu(),
            sigma_fraction: default_sigma_fraction(),
            eps_expand: default_eps(),
            eps_max: default_eps(),
            initial_points: InitialPoints::default(),
            parallel_subregions: false,
            record_timing: false,
            trace: None,
            report: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Turn the configuration into a concrete problem, noise model and parameters.
    pub fn resolve(&self) -> Result<ResolvedRun> {
        let base = match &self.problem {
            ProblemSpec::Catalog(id) => testbed::get_problem(*id)?,
            ProblemSpec::Inline(p) => p.build()?,
        };
        let range = || estimate_range(|x| base.f(x), base.domain(), RANGE_GRID);
        let inline = matches!(self.problem, ProblemSpec::Inline(_));

        let delta = match (self.delta, self.delta_fraction) {
            (Some(d), _) => d,
            (None, Some(frac)) => {
                let (lo, hi) = range();
                frac * (hi - lo)
            }
            (None, None) if inline => {
                let (lo, hi) = range();
                testbed::DELTA_FRACTION * (hi - lo)
            }
            (None, None) => base.delta(),
        };
        let threshold = match (self.threshold, self.threshold_fraction) {
            (Some(h), _) => h,
            (None, Some(frac)) => {
                let (lo, hi) = range();
                lo + frac * (hi - lo)
            }
            (None, None) if inline => {
                let (lo, hi) = range();
                lo + 0.1 * (hi - lo)
            }
            (None, None) => base.threshold(),
        };
        let problem = base
            .with_delta(delta)
            .map_err(config_error)?
            .with_threshold(threshold)
            .map_err(config_error)?;
        let noise = NoiseModel::new(self.noise, delta).map_err(config_error)?;

        let expansion = ExpansionParams {
            nu: self.nu,
            sigma_fraction: self.sigma_fraction,
            eps_expand: self.eps_expand,
        };
        expansion.validate().map_err(config_error)?;
        let max = MaxParams {
            eps_max: self.eps_max,
            nu: self.nu,
            parallel: self.parallel_subregions,
            ..MaxParams::default()
        };
        max.validate().map_err(config_error)?;

        let initial_points = match &self.initial_points {
            InitialPoints::Auto(_) => vec![testbed::pick_initial_point(&problem, self.seed)?],
            InitialPoints::Explicit(points) => {
                if points.is_empty() {
                    return Err(Error::Config("initial_points must not be empty".into()));
                }
                for &x in points {
                    problem.check_domain(x).map_err(config_error)?;
                }
                points.clone()
            }
        };

        Ok(ResolvedRun {
            problem,
            noise,
            seed: self.seed,
            expansion,
            max,
            initial_points,
            record_timing: self.record_timing,
        })
    }
}

fn config_error(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl InlineProblem {
    pub fn build(&self) -> Result<Problem> {
        let objective = expression_objective(&self.expression)?;
        let name = self.name.clone().unwrap_or_else(|| self.expression.clone());
        let (a, b) = self.domain;
        let mid = 0.5 * (a + b);
        if !objective.eval(mid).is_finite() {
            return Err(Error::Config(format!(
                "expression '{}' does not evaluate to a number at x = {mid}",
                self.expression
            )));
        }
        Problem::new(name, objective, self.domain, self.lipschitz, 0.0, 0.0).map_err(config_error)
    }
}

/// Compile an expression in `x`. Evaluation failures yield NaN, which the
/// oracle rejects.
pub fn expression_objective(expression: &str) -> Result<Objective> {
    let tree: Node<DefaultNumericTypes> = build_operator_tree(expression)
        .map_err(|e| Error::Config(format!("cannot parse '{expression}': {e}")))?;
    let label = expression.to_string();
    Ok(Objective::new(label, move |x| {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        let vars = [
            ("x", x),
            ("pi", std::f64::consts::PI),
            ("e", std::f64::consts::E),
        ];
        for (name, v) in vars {
            if ctx.set_value(name.into(), Value::Float(v)).is_err() {
                return f64::NAN;
            }
        }
        tree.eval_number_with_context(&ctx).unwrap_or(f64::NAN)
    }))
}

/// A configuration resolved to concrete values.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub problem: Problem,
    pub noise: NoiseModel,
    pub seed: u64,
    pub expansion: ExpansionParams,
    pub max: MaxParams,
    pub initial_points: Vec<f64>,
    pub record_timing: bool,
}

impl ResolvedRun {
    /// A run with the default parameters and uniform noise at the problem's bound.
    pub fn new(problem: Problem, seed: u64, initial_points: Vec<f64>) -> Result<Self> {
        let noise = NoiseModel::uniform(problem.delta())?;
        Ok(Self {
            problem,
            noise,
            seed,
            expansion: ExpansionParams::default(),
            max: MaxParams::default(),
            initial_points,
            record_timing: false,
        })
    }
}
