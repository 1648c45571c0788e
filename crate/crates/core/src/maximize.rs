//! Phase 2: Piyavskii-style maximization over the certified safe region.
//!
//! Every subregion keeps its trial points sorted with values
//! `z_i = Gamma(x_i)`, where `Gamma` is the majorant anchored at the smallest
//! observation of each point. The peak of `Gamma` over `[x_{t-1}, x_t]` is the
//! characteristic `R_t`; the next trial goes to the peak of the interval with
//! the largest characteristic. A trial is accepted only if it lowers the
//! majorant there; otherwise it is re-evaluated, up to the repetition budget.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{exclusion_regions, Anchor, BoundKind, ExclusionReport, PiecewiseLinearBound};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalUnion};
use crate::oracle::{EvalContext, EvalEvent, Oracle};
use crate::samples::SampleLog;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxParams {
    /// Stop once the selected interval is no longer than this.
    pub eps_max: f64,
    /// Repetition budget for a pending trial point.
    pub nu: usize,
    /// Safety cap on iterations per subregion.
    pub max_iterations: usize,
    /// Search subregions on separate threads. Results are identical either way.
    pub parallel: bool,
}

impl Default for MaxParams {
    fn default() -> Self {
        Self {
            eps_max: 1e-3,
            nu: 15,
            max_iterations: 100_000,
            parallel: false,
        }
    }
}

impl MaxParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_max.is_finite() && self.eps_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "eps_max must be positive, got {}",
                self.eps_max
            )));
        }
        if self.nu < 1 {
            return Err(Error::InvalidParameter("nu must be at least 1".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Peak `R` of `min(z_lo + L(x - x_lo), z_hi + L(x_hi - x))` over
/// `[x_lo, x_hi]` and its location.
pub fn characteristic(
    x_lo: f64,
    x_hi: f64,
    z_lo: f64,
    z_hi: f64,
    lipschitz: f64,
) -> Result<(f64, f64)> {
    let len = x_hi - x_lo;
    let dz = z_hi - z_lo;
    // Rounding slack: z values are minima of cones and can overshoot by an ulp.
    let slack = 1e-12 * (lipschitz * len + z_lo.abs().max(z_hi.abs()));
    if len.is_nan() || len <= 0.0 || dz.abs() > lipschitz * len + slack {
        return Err(Error::InconsistentInterval {
            x_lo,
            x_hi,
            z_lo,
            z_hi,
            lipschitz,
        });
    }
    let r = 0.5 * (z_lo + z_hi) + 0.5 * lipschitz * len;
    let x_bar = (0.5 * (x_hi + x_lo) + 0.5 * dz / lipschitz).clamp(x_lo, x_hi);
    Ok((r, x_bar))
}

/// `z_i = min_j (g_check_j + L|x_i - x_j| + 2 delta)` for points `(x_j, g_check_j)`.
pub fn initial_z(points: &[(f64, f64)], lipschitz: f64, delta: f64) -> Vec<f64> {
    points
        .iter()
        .map(|&(xi, _)| {
            points
                .iter()
                .map(|&(xj, gj)| gj + lipschitz * (xi - xj).abs() + 2.0 * delta)
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Largest per-point maximum observation among logged points in `region`;
/// ties go to the smallest coordinate.
pub fn best_estimate(log: &SampleLog, region: &IntervalUnion) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for e in log.entries().iter().filter(|e| region.contains(e.x)) {
        let g = e.g_max();
        best = match best {
            Some((bx, bg)) if bg > g || (bg == g && bx <= e.x) => Some((bx, bg)),
            _ => Some((e.x, g)),
        };
    }
    best.ok_or_else(|| Error::InvalidInput("no logged point inside the region".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubregionStop {
    Accuracy,
    Repetitions,
    /// Single-point subregion; nothing to search.
    Degenerate,
    IterationLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub subregion: usize,
    /// Iteration number, starting at 1.
    pub iteration: usize,
    /// Number of trial points before this iteration.
    pub k: usize,
    /// Selected interval is `[x_{t-1}, x_t]`.
    pub t: usize,
    pub r_max: f64,
    pub x_bar: f64,
    /// Largest observation in the subregion when the trial was chosen.
    pub incumbent: f64,
    /// Observations taken at `x_bar` in this iteration.
    pub observed: Vec<f64>,
    pub accepted: bool,
    /// The trial was not inside `{Gamma < incumbent}` when chosen.
    pub outside_n_g: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubregionReport {
    pub index: usize,
    pub interval: Interval,
    pub stop: SubregionStop,
    pub points: usize,
    pub evaluations: usize,
    pub incumbent: (f64, f64),
    /// Anchors `(x, g_check)` of the final majorant.
    pub anchors: Vec<Anchor>,
    pub iterations: Vec<IterationRecord>,
}

impl SubregionReport {
    pub fn majorant(&self, lipschitz: f64, delta: f64) -> PiecewiseLinearBound {
        PiecewiseLinearBound::new(BoundKind::Majorant, self.anchors.clone(), lipschitz, delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxOutcome {
    pub subregions: Vec<SubregionReport>,
    pub best: (f64, f64),
    pub exclusion: ExclusionReport,
}

/// Run Phase 2 over every subregion of `region`. The oracle's log must hold
/// the Phase 1 observations; Phase 2 observations are appended to it.
pub fn maximize(
    oracle: &mut Oracle,
    region: &IntervalUnion,
    params: &MaxParams,
) -> Result<MaxOutcome> {
    params.validate()?;
    if region.is_empty() {
        return Err(Error::InvalidInput("safe region is empty".into()));
    }
    let snapshot = oracle.log().clone();
    let jobs: Vec<(usize, Interval, Oracle)> = region
        .intervals()
        .iter()
        .enumerate()
        .map(|(j, iv)| (j, *iv, oracle.child(j as u64 + 1)))
        .collect();
    let run = |(j, iv, mut child): (usize, Interval, Oracle)| {
        search(&snapshot, &mut child, j, iv, params).map(|rep| (rep, child))
    };
    let results: Vec<Result<(SubregionReport, Oracle)>> = if params.parallel {
        jobs.into_par_iter().map(run).collect()
    } else {
        jobs.into_iter().map(run).collect()
    };

    let mut subregions = Vec::with_capacity(results.len());
    for r in results {
        let (rep, child) = r?;
        oracle.absorb(&child);
        subregions.push(rep);
    }

    let best = best_estimate(oracle.log(), region)?;
    let (l, d) = (oracle.problem().lipschitz(), oracle.problem().delta());
    let mut parts = Vec::with_capacity(subregions.len());
    for s in &subregions {
        let within = IntervalUnion::from_intervals([s.interval]);
        parts.push(exclusion_regions(&s.majorant(l, d), &within, best.1, d)?);
    }
    Ok(MaxOutcome {
        subregions,
        best,
        exclusion: ExclusionReport::merge(&parts, best.1),
    })
}

#[derive(Clone, Copy, Debug)]
struct Point {
    x: f64,
    g_min: f64,
    g_max: f64,
    z: f64,
}

fn search(
    phase1: &SampleLog,
    oracle: &mut Oracle,
    index: usize,
    interval: Interval,
    params: &MaxParams,
) -> Result<SubregionReport> {
    let (l, d) = (oracle.problem().lipschitz(), oracle.problem().delta());
    let mut pts: Vec<Point> = phase1
        .entries_in(interval.lo, interval.hi)
        .into_iter()
        .map(|e| Point {
            x: e.x,
            g_min: e.g_min(),
            g_max: e.g_max(),
            z: f64::INFINITY,
        })
        .collect();

    for end in [interval.lo, interval.hi] {
        if !pts.iter().any(|p| p.x == end) {
            let v = oracle.evaluate(
                end,
                EvalContext::maximization(index, 0, EvalEvent::SeedEndpoint),
            )?;
            pts.push(Point {
                x: end,
                g_min: v,
                g_max: v,
                z: f64::INFINITY,
            });
        }
    }
    pts.sort_by(|p, q| p.x.total_cmp(&q.x));
    let seeds: Vec<(f64, f64)> = pts.iter().map(|p| (p.x, p.g_min)).collect();
    for (p, z) in pts.iter_mut().zip(initial_z(&seeds, l, d)) {
        p.z = z;
    }

    let mut rejected: Option<Point> = None;
    let mut iterations = Vec::new();
    let stop = if pts.len() < 2 {
        SubregionStop::Degenerate
    } else {
        loop {
            if iterations.len() >= params.max_iterations {
                break SubregionStop::IterationLimit;
            }
            let mut t = 1;
            let (mut r_max, mut x_bar) = characteristic(pts[0].x, pts[1].x, pts[0].z, pts[1].z, l)?;
            for i in 2..pts.len() {
                let (r, xb) = characteristic(pts[i - 1].x, pts[i].x, pts[i - 1].z, pts[i].z, l)?;
                if r > r_max {
                    (t, r_max, x_bar) = (i, r, xb);
                }
            }
            if pts[t].x - pts[t - 1].x <= params.eps_max {
                break SubregionStop::Accuracy;
            }

            let incumbent = pts
                .iter()
                .map(|p| p.g_max)
                .fold(f64::NEG_INFINITY, f64::max);
            let iteration = iterations.len() + 1;
            let existing = pts.iter().position(|p| p.x == x_bar);
            let (mut g_min, mut g_max) = existing
                .map(|i| (pts[i].g_min, pts[i].g_max))
                .unwrap_or((f64::INFINITY, f64::NEG_INFINITY));
            let mut observed = Vec::new();
            let accepted = loop {
                let event = if observed.is_empty() {
                    EvalEvent::Trial
                } else {
                    EvalEvent::Repeat
                };
                let v =
                    oracle.evaluate(x_bar, EvalContext::maximization(index, iteration, event))?;
                observed.push(v);
                g_min = g_min.min(v);
                g_max = g_max.max(v);
                if g_min + 2.0 * d < r_max {
                    break true;
                }
                if observed.len() + 1 >= params.nu {
                    break false;
                }
            };
            iterations.push(IterationRecord {
                subregion: index,
                iteration,
                k: pts.len(),
                t,
                r_max,
                x_bar,
                incumbent,
                observed,
                accepted,
                outside_n_g: r_max >= incumbent,
            });

            if !accepted {
                match existing {
                    Some(i) => {
                        pts[i].g_min = g_min;
                        pts[i].g_max = g_max;
                    }
                    None => {
                        rejected = Some(Point {
                            x: x_bar,
                            g_min,
                            g_max,
                            z: r_max,
                        })
                    }
                }
                break SubregionStop::Repetitions;
            }

            let z_new = g_min + 2.0 * d;
            let at = match existing {
                Some(i) => i,
                None => {
                    let i = pts.partition_point(|p| p.x < x_bar);
                    pts.insert(
                        i,
                        Point {
                            x: x_bar,
                            g_min,
                            g_max,
                            z: z_new,
                        },
                    );
                    i
                }
            };
            pts[at].g_min = g_min;
            pts[at].g_max = g_max;
            for p in pts.iter_mut() {
                p.z = p.z.min(z_new + l * (p.x - x_bar).abs());
            }
        }
    };

    let all: Vec<Point> = pts.iter().copied().chain(rejected).collect();
    let incumbent = all
        .iter()
        .fold(None, |best: Option<(f64, f64)>, p| match best {
            Some((bx, bg)) if bg > p.g_max || (bg == p.g_max && bx <= p.x) => best,
            _ => Some((p.x, p.g_max)),
        })
        .ok_or_else(|| Error::Internal("subregion without samples".into()))?;
    let mut anchors: Vec<Anchor> = all
        .iter()
        .map(|p| Anchor {
            x: p.x,
            value: p.g_min,
        })
        .collect();
    anchors.sort_by(|p, q| p.x.total_cmp(&q.x));

    Ok(SubregionReport {
        index,
        interval,
        stop,
        points: oracle.log().len(),
        evaluations: oracle.log().evaluations(),
        incumbent,
        anchors,
        iterations,
    })
}
