use std::collections::HashSet;
use std::fs::File;
use std::io::BufWriter;
use std::time::Instant;

use crate::bounds::{Anchor, BoundKind, PiecewiseLinearBound};
use crate::error::Result;
use crate::expansion::expand;
use crate::maximize::maximize;
use crate::oracle::{Oracle, TraceRecord};
use crate::samples::{Phase, SampleLog};

use super::config::{ResolvedRun, RunConfig};
use super::report::{Counts, Estimate, ProblemSummary, RunParams, RunReport};
use super::trace::write_trace;

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub trace: Vec<TraceRecord>,
    pub log: SampleLog,
}

impl RunOutcome {
    /// Minorant over all observations.
    pub fn minorant(&self) -> PiecewiseLinearBound {
        PiecewiseLinearBound::from_entries(
            BoundKind::Minorant,
            self.log.entries(),
            self.report.problem.lipschitz,
            self.report.problem.delta,
        )
    }
}

/// Resolve and execute a configuration, then write the trace and report
/// files it names.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    let outcome = execute(&config.resolve()?)?;
    if let Some(path) = &config.trace {
        write_trace(&outcome.trace, BufWriter::new(File::create(path)?))?;
    }
    if let Some(path) = &config.report {
        std::fs::write(path, outcome.report.to_json()? + "\n")?;
    }
    Ok(outcome)
}

fn phase_counts(trace: &[TraceRecord], phase: Phase) -> Counts {
    let mut seen = HashSet::new();
    let mut evaluations = 0;
    for r in trace.iter().filter(|r| r.phase == phase) {
        evaluations += 1;
        seen.insert(if r.x == 0.0 { 0 } else { r.x.to_bits() });
    }
    Counts {
        points: seen.len(),
        evaluations,
    }
}

/// Run both phases on a resolved configuration.
pub fn execute(run: &ResolvedRun) -> Result<RunOutcome> {
    let started = run.record_timing.then(Instant::now);
    let mut oracle =
        Oracle::new(run.problem.clone(), run.noise, run.seed)?.record_timing(run.record_timing);

    let phase1 = expand(&mut oracle, &run.initial_points, &run.expansion)?;
    let minorant_anchors = oracle
        .log()
        .entries()
        .iter()
        .map(|e| Anchor {
            x: e.x,
            value: e.g_max(),
        })
        .collect();
    let phase2 = maximize(&mut oracle, &phase1.region, &run.max)?;

    let trace = oracle.trace().to_vec();
    let expansion = phase_counts(&trace, Phase::Expansion);
    let maximization = phase_counts(&trace, Phase::Maximization);
    let report = RunReport {
        problem: ProblemSummary::from(&run.problem),
        noise: run.noise,
        seed: run.seed,
        params: RunParams {
            nu: run.expansion.nu,
            sigma_fraction: run.expansion.sigma_fraction,
            eps_expand: run.expansion.eps_expand,
            eps_max: run.max.eps_max,
        },
        initial_points: run.initial_points.clone(),
        safe_region: phase1.region,
        expansion,
        maximization,
        total: expansion + maximization,
        boundaries: phase1.boundaries,
        no_expansion: phase1.no_expansion,
        minorant_anchors,
        subregions: phase2.subregions,
        best: Estimate {
            x: phase2.best.0,
            g: phase2.best.1,
        },
        exclusion: phase2.exclusion,
        violations: oracle.sentinel().violation_count(),
        wall_time_s: started.map(|t| t.elapsed().as_secs_f64()),
    };
    Ok(RunOutcome {
        report,
        trace,
        log: oracle.log().clone(),
    })
}
