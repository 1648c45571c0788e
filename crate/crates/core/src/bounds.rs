//! Sawtooth bounds built from shifted Lipschitz cones.
//!
//! A minorant anchored at `(x_i, g_hat_i)` is `max_i g_hat_i - L|x - x_i| - 2 delta`
//! and lies below every possible observation; a majorant anchored at
//! `(x_i, g_check_i)` is `min_i g_check_i + L|x - x_i| + 2 delta` and lies above
//! every possible observation. Both are `L`-Lipschitz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::samples::SampleEntry;

#[inline]
pub fn minorant_piece(x: f64, center: f64, value: f64, lipschitz: f64, delta: f64) -> f64 {
    value - lipschitz * (center - x).abs() - 2.0 * delta
}

#[inline]
pub fn majorant_piece(x: f64, center: f64, value: f64, lipschitz: f64, delta: f64) -> f64 {
    value + lipschitz * (center - x).abs() + 2.0 * delta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Minorant,
    Majorant,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub x: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearBound {
    pub kind: BoundKind,
    pub anchors: Vec<Anchor>,
    pub lipschitz: f64,
    pub delta: f64,
}

impl PiecewiseLinearBound {
    pub fn new(kind: BoundKind, anchors: Vec<Anchor>, lipschitz: f64, delta: f64) -> Self {
        Self {
            kind,
            anchors,
            lipschitz,
            delta,
        }
    }

    /// Anchor a bound on logged samples: largest observation for a minorant,
    /// smallest for a majorant.
    pub fn from_entries<'a>(
        kind: BoundKind,
        entries: impl IntoIterator<Item = &'a SampleEntry>,
        lipschitz: f64,
        delta: f64,
    ) -> Self {
        let anchors = entries
            .into_iter()
            .map(|e| Anchor {
                x: e.x,
                value: match kind {
                    BoundKind::Minorant => e.g_max(),
                    BoundKind::Majorant => e.g_min(),
                },
            })
            .collect();
        Self::new(kind, anchors, lipschitz, delta)
    }

    pub fn piece(&self, anchor: &Anchor, x: f64) -> f64 {
        match self.kind {
            BoundKind::Minorant => {
                minorant_piece(x, anchor.x, anchor.value, self.lipschitz, self.delta)
            }
            BoundKind::Majorant => {
                majorant_piece(x, anchor.x, anchor.value, self.lipschitz, self.delta)
            }
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if self.anchors.is_empty() {
            return Err(Error::EmptyBound);
        }
        let pieces = self.anchors.iter().map(|a| self.piece(a, x));
        Ok(match self.kind {
            BoundKind::Minorant => pieces.fold(f64::NEG_INFINITY, f64::max),
            BoundKind::Majorant => pieces.fold(f64::INFINITY, f64::min),
        })
    }

    /// `{x in region : B(x) < level}` for a majorant, computed exactly: the
    /// minimum of cones is below `level` iff one cone is, and each cone's
    /// sublevel set is an open interval around its apex.
    pub fn strict_sublevel_set(&self, level: f64, region: &IntervalUnion) -> Result<IntervalUnion> {
        if self.kind != BoundKind::Majorant {
            return Err(Error::InvalidInput(
                "sublevel sets are defined for majorants".into(),
            ));
        }
        if self.anchors.is_empty() {
            return Err(Error::EmptyBound);
        }
        let cones = IntervalUnion::from_intervals(self.anchors.iter().filter_map(|a| {
            let radius = (level - a.value - 2.0 * self.delta) / self.lipschitz;
            (radius > 0.0).then(|| Interval::open(a.x - radius, a.x + radius))
        }));
        let pieces = region
            .intervals()
            .iter()
            .flat_map(|r| cones.intersect_interval(r).intervals().to_vec());
        Ok(IntervalUnion::from_intervals(pieces))
    }
}

/// Free-function form of [`PiecewiseLinearBound::eval`].
pub fn eval_bound(bound: &PiecewiseLinearBound, x: f64) -> Result<f64> {
    bound.eval(x)
}

/// Regions that cannot hold the maximizer of `g` (`n_g`) or of `f` (`n_f`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub n_g: IntervalUnion,
    pub n_f: IntervalUnion,
    pub level: f64,
}

/// `n_g = {Gamma < g_star}` and `n_f = {Gamma < g_star - delta}`, both within `region`.
pub fn exclusion_regions(
    majorant: &PiecewiseLinearBound,
    region: &IntervalUnion,
    g_star: f64,
    delta: f64,
) -> Result<ExclusionReport> {
    if !g_star.is_finite() {
        return Err(Error::InvalidInput("reference level must be finite".into()));
    }
    Ok(ExclusionReport {
        n_g: majorant.strict_sublevel_set(g_star, region)?,
        n_f: majorant.strict_sublevel_set(g_star - delta, region)?,
        level: g_star,
    })
}

impl ExclusionReport {
    /// Union of per-subregion reports sharing one reference level.
    pub fn merge(reports: &[ExclusionReport], level: f64) -> ExclusionReport {
        let n_g =
            IntervalUnion::from_intervals(reports.iter().flat_map(|r| r.n_g.intervals().to_vec()));
        let n_f =
            IntervalUnion::from_intervals(reports.iter().flat_map(|r| r.n_f.intervals().to_vec()));
        ExclusionReport { n_g, n_f, level }
    }
}
