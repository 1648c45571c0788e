use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::{ProblemSpec, RunConfig};
use super::report::RunReport;
use super::run::execute;

/// One row per problem; each count is a median (or an interquartile range)
/// over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: u32,
    pub se_points: f64,
    pub se_evals: f64,
    pub gm_points: f64,
    pub gm_evals: f64,
    pub total_points: f64,
    pub total_evals: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub seeds: Vec<u64>,
    pub medians: Vec<BenchRow>,
    pub iqr: Vec<BenchRow>,
    /// Worst sentinel count over all runs.
    pub max_violations: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn column(reports: &[RunReport], pick: impl Fn(&RunReport) -> usize) -> Vec<f64> {
    let mut v: Vec<f64> = reports.iter().map(|r| pick(r) as f64).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn summarize(problem: u32, reports: &[RunReport], stat: impl Fn(&[f64]) -> f64) -> BenchRow {
    BenchRow {
        problem,
        se_points: stat(&column(reports, |r| r.expansion.points)),
        se_evals: stat(&column(reports, |r| r.expansion.evaluations)),
        gm_points: stat(&column(reports, |r| r.maximization.points)),
        gm_evals: stat(&column(reports, |r| r.maximization.evaluations)),
        total_points: stat(&column(reports, |r| r.total.points)),
        total_evals: stat(&column(reports, |r| r.total.evaluations)),
    }
}

/// Run every catalog problem in `problems` for every seed, using `template`
/// for everything but the problem and seed. Runs execute in parallel.
pub fn bench_reports(
    problems: &[u32],
    seeds: &[u64],
    template: &RunConfig,
) -> Result<Vec<Vec<RunReport>>> {
    if problems.is_empty() {
        return Err(Error::InvalidInput("no problems to bench".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidInput("no seeds to bench".into()));
    }
    let jobs: Vec<(usize, RunConfig)> = problems
        .iter()
        .enumerate()
        .flat_map(|(i, &id)| {
            seeds.iter().map(move |&seed| {
                let mut cfg = template.clone();
                cfg.problem = ProblemSpec::Catalog(id);
                cfg.seed = seed;
                cfg.trace = None;
                cfg.report = None;
                (i, cfg)
            })
        })
        .collect();
    let done: Vec<(usize, RunReport)> = jobs
        .into_par_iter()
        .map(|(i, cfg)| execute(&cfg.resolve()?).map(|o| (i, o.report)))
        .collect::<Result<_>>()?;
    let mut grouped = vec![Vec::with_capacity(seeds.len()); problems.len()];
    for (i, report) in done {
        grouped[i].push(report);
    }
    Ok(grouped)
}

pub fn bench(problems: &[u32], seeds: &[u64], template: &RunConfig) -> Result<BenchSummary> {
    let grouped = bench_reports(problems, seeds, template)?;
    let medians = problems
        .iter()
        .zip(&grouped)
        .map(|(&id, reports)| summarize(id, reports, |v| quantile(v, 0.5)))
        .collect();
    let iqr = problems
        .iter()
        .zip(&grouped)
        .map(|(&id, reports)| summarize(id, reports, |v| quantile(v, 0.75) - quantile(v, 0.25)))
        .collect();
    let max_violations = grouped
        .iter()
        .flatten()
        .map(|r| r.violations)
        .max()
        .unwrap_or(0);
    Ok(BenchSummary {
        seeds: seeds.to_vec(),
        medians,
        iqr,
        max_violations,
    })
}

/// CSV with header `problem,se_points,se_evals,gm_points,gm_evals,total_points,total_evals`.
pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
