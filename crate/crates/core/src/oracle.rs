//! The noisy oracle `g(x) = f(x) + xi`, wrapped by a safety sentinel and a
//! per-call trace.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::problem::Problem;
use crate::samples::{Phase, SampleLog};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvalEvent {
    /// First observation at an initial safe point.
    Initial,
    ExpandLeft,
    ExpandRight,
    /// Endpoint of a safe subregion evaluated before maximization starts.
    SeedEndpoint,
    /// First observation at a new maximization trial point.
    Trial,
    /// Re-evaluation of a pending trial point.
    Repeat,
}

impl EvalEvent {
    pub fn name(&self) -> &'static str {
        match self {
            EvalEvent::Initial => "initial",
            EvalEvent::ExpandLeft => "expand-left",
            EvalEvent::ExpandRight => "expand-right",
            EvalEvent::SeedEndpoint => "seed-endpoint",
            EvalEvent::Trial => "trial",
            EvalEvent::Repeat => "repeat",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalContext {
    pub phase: Phase,
    pub subregion: Option<usize>,
    pub iteration: usize,
    pub event: EvalEvent,
}

impl EvalContext {
    pub fn expansion(iteration: usize, event: EvalEvent) -> Self {
        Self {
            phase: Phase::Expansion,
            subregion: None,
            iteration,
            event,
        }
    }

    pub fn maximization(subregion: usize, iteration: usize, event: EvalEvent) -> Self {
        Self {
            phase: Phase::Maximization,
            subregion: Some(subregion),
            iteration,
            event,
        }
    }
}

/// One oracle call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub phase: Phase,
    pub subregion: Option<usize>,
    pub iteration: usize,
    pub x: f64,
    pub value: f64,
    pub repetition_index: usize,
    pub event: EvalEvent,
    pub timestamp_ns: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub x: f64,
    pub value: f64,
}

/// Watches every observation against the threshold `h`.
#[derive(Clone, Debug, PartialEq)]
pub struct SafetySentinel {
    threshold: f64,
    calls: usize,
    violations: Vec<Violation>,
}

impl SafetySentinel {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            calls: 0,
            violations: Vec::new(),
        }
    }

    /// Returns `true` when the observation is safe.
    pub fn observe(&mut self, x: f64, value: f64) -> bool {
        self.calls += 1;
        if value < self.threshold {
            self.violations.push(Violation { x, value });
            false
        } else {
            true
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    fn absorb(&mut self, other: &SafetySentinel) {
        self.calls += other.calls;
        self.violations.extend_from_slice(&other.violations);
    }
}

/// Single-run oracle: owns the random stream, the sample log, the sentinel
/// and the trace. Not shared across threads; parallel work uses [`Oracle::child`].
#[derive(Clone, Debug)]
pub struct Oracle {
    problem: Problem,
    noise: NoiseModel,
    seed: u64,
    rng: ChaCha8Rng,
    log: SampleLog,
    sentinel: SafetySentinel,
    trace: Vec<TraceRecord>,
    calls: u64,
    strict: bool,
    started: Option<Instant>,
}

impl Oracle {
    pub fn new(problem: Problem, noise: NoiseModel, seed: u64) -> Result<Self> {
        if noise.delta > problem.delta() {
            return Err(Error::InvalidParameter(format!(
                "noise model bound {} exceeds the problem's noise bound {}",
                noise.delta,
                problem.delta()
            )));
        }
        let sentinel = SafetySentinel::new(problem.threshold());
        Ok(Self {
            problem,
            noise,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: SampleLog::new(),
            sentinel,
            trace: Vec::new(),
            calls: 0,
            strict: true,
            started: None,
        })
    }

    /// In strict mode (the default) an unsafe observation is returned as
    /// [`Error::SafetyViolation`]; otherwise it is only recorded.
    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    /// Stamp trace records with wall-clock nanoseconds since this call.
    /// Off by default so traces stay byte-reproducible.
    pub fn record_timing(mut self, enabled: bool) -> Self {
        self.started = enabled.then(Instant::now);
        self
    }

    /// An oracle with an independent random stream derived from the same seed,
    /// and an empty log, sentinel and trace.
    pub fn child(&self, stream: u64) -> Oracle {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        Oracle {
            problem: self.problem.clone(),
            noise: self.noise,
            seed: self.seed,
            rng,
            log: SampleLog::new(),
            sentinel: SafetySentinel::new(self.problem.threshold()),
            trace: Vec::new(),
            calls: 0,
            strict: self.strict,
            started: self.started,
        }
    }

    /// Fold a child's observations, violations and trace into this oracle.
    pub fn absorb(&mut self, child: &Oracle) {
        self.log.absorb(&child.log);
        self.sentinel.absorb(&child.sentinel);
        self.trace.extend_from_slice(&child.trace);
    }

    pub fn evaluate(&mut self, x: f64, ctx: EvalContext) -> Result<f64> {
        self.problem.check_domain(x)?;
        let fx = self.problem.f(x);
        if !fx.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "objective is not finite at x = {x}"
            )));
        }
        let xi = self.noise.draw(&mut self.rng, self.calls);
        self.calls += 1;
        let value = within_bound(fx, fx + xi, self.noise.delta);
        let repetition_index = self.log.record(x, value, ctx.phase, ctx.iteration);
        let timestamp_ns = self
            .started
            .map(|t| t.elapsed().as_nanos() as u64)
            .unwrap_or(0);
        self.trace.push(TraceRecord {
            phase: ctx.phase,
            subregion: ctx.subregion,
            iteration: ctx.iteration,
            x,
            value,
            repetition_index,
            event: ctx.event,
            timestamp_ns,
        });
        let safe = self.sentinel.observe(x, value);
        if !safe && self.strict {
            return Err(Error::SafetyViolation {
                x,
                value,
                threshold: self.problem.threshold(),
            });
        }
        Ok(value)
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn log(&self) -> &SampleLog {
        &self.log
    }

    pub fn sentinel(&self) -> &SafetySentinel {
        &self.sentinel
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }
}

/// `f + xi` rounded back inside `[f - delta, f + delta]`, so that two
/// observations at one point never differ by more than `2 delta` in floats.
fn within_bound(fx: f64, mut value: f64, delta: f64) -> f64 {
    while value - fx > delta {
        value = value.next_down();
    }
    while fx - value > delta {
        value = value.next_up();
    }
    value
}
