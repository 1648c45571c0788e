//! Problem definitions: objective, search domain, Lipschitz constant,
//! noise bound and safety threshold.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A pure, deterministic univariate objective.
#[derive(Clone)]
pub struct Objective {
    label: String,
    func: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl Objective {
    pub fn new<F>(label: impl Into<String>, func: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            func: Arc::new(func),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.func)(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Objective").field(&self.label).finish()
    }
}

/// A safe maximization instance over `[a, b]`.
///
/// The objective must satisfy `|f(x1) - f(x2)| <= L |x1 - x2|` on the domain,
/// observations are `f(x) + xi` with `|xi| <= delta`, and no observation may
/// fall below `threshold`.
#[derive(Clone, Debug)]
pub struct Problem {
    id: Option<u32>,
    name: String,
    objective: Objective,
    a: f64,
    b: f64,
    lipschitz: f64,
    delta: f64,
    threshold: f64,
    true_max: Option<(f64, f64)>,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        objective: Objective,
        domain: (f64, f64),
        lipschitz: f64,
        delta: f64,
        threshold: f64,
    ) -> Result<Self> {
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidProblem(format!(
                "domain [{a}, {b}] must be finite with a < b"
            )));
        }
        check_lipschitz(lipschitz)?;
        check_delta(delta)?;
        if !threshold.is_finite() {
            return Err(Error::InvalidProblem("threshold must be finite".into()));
        }
        Ok(Self {
            id: None,
            name: name.into(),
            objective,
            a,
            b,
            lipschitz,
            delta,
            threshold,
            true_max: None,
        })
    }

    pub fn with_id(mut self, id: u32) -> Self {
        self.id = Some(id);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        check_delta(delta)?;
        self.delta = delta;
        Ok(self)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() {
            return Err(Error::InvalidProblem("threshold must be finite".into()));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Result<Self> {
        check_lipschitz(lipschitz)?;
        self.lipschitz = lipschitz;
        Ok(self)
    }

    /// Attach the reference maximizer `(x, f(x))`, used only by tests and reports.
    pub fn with_true_max(mut self, x: f64, fx: f64) -> Self {
        self.true_max = Some((x, fx));
        self
    }

    pub fn id(&self) -> Option<u32> {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        self.objective.eval(x)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn true_max(&self) -> Option<(f64, f64)> {
        self.true_max
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    pub fn check_domain(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x,
                a: self.a,
                b: self.b,
            })
        }
    }
}

fn check_lipschitz(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!(
            "Lipschitz constant must be positive and finite, got {l}"
        )))
    }
}

// Zero is accepted so that noiseless runs can be compared against classic
// Piyavskii behaviour.
fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProblem(format!(
            "noise bound must be nonnegative and finite, got {delta}"
        )))
    }
}
