//! Append-only record of oracle evaluations, grouped by coordinate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Expansion,
    Maximization,
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::Expansion => "expansion",
            Phase::Maximization => "maximization",
        }
    }
}

/// All observations taken at one coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub x: f64,
    pub values: Vec<f64>,
    /// Phase of the first evaluation at `x`.
    pub phase: Phase,
    /// Iteration of the first evaluation at `x`.
    pub iteration: usize,
}

impl SampleEntry {
    /// Largest observation, used to anchor minorants and the incumbent.
    pub fn g_max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest observation, used to anchor majorants.
    pub fn g_min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(from = "Vec<SampleEntry>", into = "Vec<SampleEntry>")]
pub struct SampleLog {
    entries: Vec<SampleEntry>,
    index: HashMap<u64, usize>,
    evaluations: usize,
}

// Coordinates come from the algorithms themselves, so exact equality is the
// merge rule; only the sign of zero is normalized.
fn key(x: f64) -> u64 {
    if x == 0.0 {
        0.0f64.to_bits()
    } else {
        x.to_bits()
    }
}

impl From<Vec<SampleEntry>> for SampleLog {
    fn from(entries: Vec<SampleEntry>) -> Self {
        let mut log = SampleLog::new();
        for e in entries {
            for v in e.values {
                log.record(e.x, v, e.phase, e.iteration);
            }
        }
        log
    }
}

impl From<SampleLog> for Vec<SampleEntry> {
    fn from(log: SampleLog) -> Self {
        log.entries
    }
}

impl PartialEq for SampleLog {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl SampleLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an observation; returns its zero-based repetition index at `x`.
    pub fn record(&mut self, x: f64, value: f64, phase: Phase, iteration: usize) -> usize {
        self.evaluations += 1;
        match self.index.get(&key(x)) {
            Some(&i) => {
                self.entries[i].values.push(value);
                self.entries[i].values.len() - 1
            }
            None => {
                self.index.insert(key(x), self.entries.len());
                self.entries.push(SampleEntry {
                    x,
                    values: vec![value],
                    phase,
                    iteration,
                });
                0
            }
        }
    }

    pub fn get(&self, x: f64) -> Option<&SampleEntry> {
        self.index.get(&key(x)).map(|&i| &self.entries[i])
    }

    pub fn entries(&self) -> &[SampleEntry] {
        &self.entries
    }

    /// Number of distinct coordinates.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of observations.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    /// Entries with `lo <= x <= hi`, sorted by coordinate.
    pub fn entries_in(&self, lo: f64, hi: f64) -> Vec<&SampleEntry> {
        let mut out: Vec<&SampleEntry> = self
            .entries
            .iter()
            .filter(|e| e.x >= lo && e.x <= hi)
            .collect();
        out.sort_by(|p, q| p.x.total_cmp(&q.x));
        out
    }

    /// Append every observation of `other`, in its entry order.
    pub fn absorb(&mut self, other: &SampleLog) {
        for e in &other.entries {
            for &v in &e.values {
                self.record(e.x, v, e.phase, e.iteration);
            }
        }
    }

    /// Check that every pair of observations satisfies
    /// `|g1 - g2| <= L |x1 - x2| + 2 delta` (plus a 1e-12 slack).
    pub fn audit(&self, lipschitz: f64, delta: f64) -> AuditOutcome {
        self.find_pair(|d| lipschitz * d + 2.0 * delta + 1e-12)
    }

    /// First pair of observations that breaks the plain Lipschitz inequality
    /// `|g1 - g2| <= L |x1 - x2|`, if any. Noisy observations are expected to
    /// produce one.
    pub fn plain_lipschitz_witness(&self, lipschitz: f64) -> Option<ViolatingPair> {
        self.find_pair(|d| lipschitz * d).violation
    }

    fn find_pair(&self, allowed: impl Fn(f64) -> f64) -> AuditOutcome {
        for (i, p) in self.entries.iter().enumerate() {
            let (p_hi, p_lo) = (p.g_max(), p.g_min());
            if p_hi - p_lo > allowed(0.0) {
                return AuditOutcome::violated(p.x, p_hi, p.x, p_lo);
            }
            for q in &self.entries[i + 1..] {
                let d = (p.x - q.x).abs();
                let (q_hi, q_lo) = (q.g_max(), q.g_min());
                let limit = allowed(d);
                if p_hi - q_lo > limit {
                    return AuditOutcome::violated(p.x, p_hi, q.x, q_lo);
                }
                if q_hi - p_lo > limit {
                    return AuditOutcome::violated(q.x, q_hi, p.x, p_lo);
                }
            }
        }
        AuditOutcome {
            ok: true,
            violation: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolatingPair {
    pub x1: f64,
    pub g1: f64,
    pub x2: f64,
    pub g2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditOutcome {
    pub ok: bool,
    pub violation: Option<ViolatingPair>,
}

impl AuditOutcome {
    fn violated(x1: f64, g1: f64, x2: f64, g2: f64) -> Self {
        Self {
            ok: false,
            violation: Some(ViolatingPair { x1, g1, x2, g2 }),
        }
    }
}

/// Free-function form of [`SampleLog::audit`].
pub fn sample_property_audit(log: &SampleLog, lipschitz: f64, delta: f64) -> AuditOutcome {
    log.audit(lipschitz, delta)
}
