//! Phase 1: grow certified safe intervals around initial safe points.
//!
//! Each region has a left and a right boundary. A boundary observation `g`
//! certifies that `f >= h + delta` on a ball of radius `(g - 2 delta - h) / L`,
//! so the boundary may move outward by that much without any later
//! observation falling below `h`. Boundaries that cannot move are re-evaluated
//! until the spread of their observations approaches the full noise width or
//! the repetition budget runs out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::oracle::{EvalContext, EvalEvent, Oracle};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionParams {
    /// Maximum number of observations at a boundary that does not move.
    pub nu: usize,
    /// Tolerance as a fraction of the noise width `2 delta`.
    pub sigma_fraction: f64,
    /// Smallest outward move that counts as progress.
    pub eps_expand: f64,
}

impl Default for ExpansionParams {
    fn default() -> Self {
        Self {
            nu: 15,
            sigma_fraction: 0.1,
            eps_expand: 1e-3,
        }
    }
}

impl ExpansionParams {
    pub fn validate(&self) -> Result<()> {
        if self.nu < 1 {
            return Err(Error::InvalidParameter("nu must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.sigma_fraction) {
            return Err(Error::InvalidParameter(format!(
                "sigma_fraction must lie in [0, 1], got {}",
                self.sigma_fraction
            )));
        }
        if !(self.eps_expand.is_finite() && self.eps_expand > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_expand must be positive, got {}",
                self.eps_expand
            )));
        }
        Ok(())
    }
}

/// Safe outward move allowed by one observation; zero when none is possible.
pub fn expansion_step(g_value: f64, h: f64, delta: f64, lipschitz: f64) -> f64 {
    ((g_value - 2.0 * delta - h) / lipschitz).max(0.0)
}

/// `true` once the observed spread reaches `2 delta - sigma`. Needs at least
/// two observations.
pub fn tolerance_stop(values: &[f64], delta: f64, sigma_fraction: f64) -> bool {
    if values.len() < 2 {
        return false;
    }
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sigma = sigma_fraction * 2.0 * delta;
    hi - lo >= 2.0 * delta - sigma
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideStop {
    RepetitionBudget,
    Tolerance,
    DomainEdge,
    Merged,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryState {
    pub side: Side,
    pub coord: f64,
    /// Observations at `coord` since the last accepted move.
    pub repetitions: Vec<f64>,
    pub finished: Option<SideStop>,
    pub origin: usize,
    pub moves: usize,
    pub evaluations: usize,
    // Observation shared by both sides of a fresh initial point.
    pending: Option<f64>,
}

impl BoundaryState {
    fn new(side: Side, coord: f64, origin: usize, initial_value: f64) -> Self {
        Self {
            side,
            coord,
            repetitions: Vec::new(),
            finished: None,
            origin,
            moves: 0,
            evaluations: 0,
            pending: Some(initial_value),
        }
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    fn report(&self) -> BoundaryReport {
        BoundaryReport {
            origin: self.origin,
            side: self.side,
            coordinate: self.coord,
            reason: self.finished,
            moves: self.moves,
            evaluations: self.evaluations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    /// Index of the initial point the boundary started from.
    pub origin: usize,
    pub side: Side,
    pub coordinate: f64,
    pub reason: Option<SideStop>,
    pub moves: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionOutcome {
    pub region: IntervalUnion,
    pub boundaries: Vec<BoundaryReport>,
    /// Initial points whose region never grew beyond the point itself.
    pub no_expansion: Vec<usize>,
    pub iterations: usize,
}

struct Region {
    left: BoundaryState,
    right: BoundaryState,
    sources: Vec<usize>,
}

impl Region {
    fn done(&self) -> bool {
        self.left.is_finished() && self.right.is_finished()
    }
}

/// Run Phase 1 from `initial_points`, recording every observation in the
/// oracle's log. Each initial point must be safe.
pub fn expand(
    oracle: &mut Oracle,
    initial_points: &[f64],
    params: &ExpansionParams,
) -> Result<ExpansionOutcome> {
    params.validate()?;
    if initial_points.is_empty() {
        return Err(Error::InvalidInput(
            "at least one initial point is required".into(),
        ));
    }
    for &x in initial_points {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!(
                "initial point {x} is not finite"
            )));
        }
        oracle.problem().check_domain(x)?;
    }

    let mut regions = Vec::with_capacity(initial_points.len());
    for (i, &x) in initial_points.iter().enumerate() {
        let v = oracle.evaluate(x, EvalContext::expansion(0, EvalEvent::Initial))?;
        regions.push(Region {
            left: BoundaryState::new(Side::Left, x, i, v),
            right: BoundaryState::new(Side::Right, x, i, v),
            sources: vec![i],
        });
    }

    let mut retired = Vec::new();
    let mut iteration = 0;
    merge_regions(&mut regions, &mut retired);
    while regions.iter().any(|r| !r.done()) {
        iteration += 1;
        for r in regions.iter_mut() {
            if !r.left.is_finished() {
                visit(oracle, &mut r.left, params, iteration)?;
            }
            if !r.right.is_finished() {
                visit(oracle, &mut r.right, params, iteration)?;
            }
        }
        merge_regions(&mut regions, &mut retired);
    }

    let mut region = IntervalUnion::new();
    let mut boundaries = retired;
    let mut no_expansion = Vec::new();
    for r in &regions {
        region.push(
            Interval::closed(r.left.coord, r.right.coord),
            r.sources.clone(),
        );
        if r.left.coord == r.right.coord {
            no_expansion.extend(r.sources.iter().copied());
        }
        boundaries.push(r.left.report());
        boundaries.push(r.right.report());
    }
    boundaries.sort_by_key(|b| (b.origin, b.side == Side::Right));
    no_expansion.sort_unstable();
    Ok(ExpansionOutcome {
        region: region.normalized(),
        boundaries,
        no_expansion,
        iterations: iteration,
    })
}

fn visit(
    oracle: &mut Oracle,
    side: &mut BoundaryState,
    params: &ExpansionParams,
    iteration: usize,
) -> Result<()> {
    let (a, b) = oracle.problem().domain();
    let value = match side.pending.take() {
        Some(v) => v,
        None => {
            let event = match side.side {
                Side::Left => EvalEvent::ExpandLeft,
                Side::Right => EvalEvent::ExpandRight,
            };
            side.evaluations += 1;
            oracle.evaluate(side.coord, EvalContext::expansion(iteration, event))?
        }
    };
    side.repetitions.push(value);

    let at_edge = match side.side {
        Side::Left => side.coord <= a,
        Side::Right => side.coord >= b,
    };
    if at_edge {
        side.finished = Some(SideStop::DomainEdge);
        return Ok(());
    }

    let p = oracle.problem();
    let best = oracle
        .log()
        .get(side.coord)
        .map(|e| e.g_max())
        .ok_or_else(|| Error::Internal("boundary observation missing from the log".into()))?;
    let step = expansion_step(best, p.threshold(), p.delta(), p.lipschitz());
    if step >= params.eps_expand {
        side.coord = match side.side {
            Side::Left => (side.coord - step).max(a),
            Side::Right => (side.coord + step).min(b),
        };
        side.repetitions.clear();
        side.moves += 1;
        return Ok(());
    }
    if tolerance_stop(&side.repetitions, p.delta(), params.sigma_fraction) {
        side.finished = Some(SideStop::Tolerance);
    } else if side.repetitions.len() >= params.nu {
        side.finished = Some(SideStop::RepetitionBudget);
    }
    Ok(())
}

// Sort regions and fuse any that overlap or touch. The fused region keeps the
// outermost boundaries; the inner ones are retired as merged.
fn merge_regions(regions: &mut Vec<Region>, retired: &mut Vec<BoundaryReport>) {
    regions.sort_by(|p, q| {
        p.left
            .coord
            .total_cmp(&q.left.coord)
            .then(p.right.coord.total_cmp(&q.right.coord))
    });
    let mut out: Vec<Region> = Vec::with_capacity(regions.len());
    for r in regions.drain(..) {
        match out.last_mut() {
            Some(cur) if r.left.coord <= cur.right.coord => {
                let mut inner_left = r.left;
                inner_left.finished = Some(SideStop::Merged);
                retired.push(inner_left.report());
                if r.right.coord > cur.right.coord {
                    let mut inner_right = std::mem::replace(&mut cur.right, r.right);
                    inner_right.finished = Some(SideStop::Merged);
                    retired.push(inner_right.report());
                } else {
                    let mut inner_right = r.right;
                    inner_right.finished = Some(SideStop::Merged);
                    retired.push(inner_right.report());
                }
                cur.sources.extend(r.sources);
                cur.sources.sort_unstable();
            }
            _ => out.push(r),
        }
    }
    *regions = out;
}
