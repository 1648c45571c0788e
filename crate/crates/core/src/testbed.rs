//! The 18 benchmark problems and the grid utilities used to calibrate them.
//!
//! Noise bounds are 10% of the grid-estimated range of each objective.
//! Thresholds are the published values. Five published Lipschitz constants
//! fall slightly below the grid slope of their objective; those problems run
//! with the corrected constant from [`effective_lipschitz`], and the published
//! value stays available from [`published_lipschitz`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{Objective, Problem};

pub const CATALOG_SIZE: u32 = 18;

/// Grid used to estimate ranges, noise bounds and true maxima.
pub const RANGE_GRID: usize = 100_001;

/// Grid used to pick initial safe points.
pub const START_GRID: usize = 20_001;

/// Safety margin above the threshold for initial points, as a fraction of the range.
pub const START_MARGIN: f64 = 0.05;

/// Noise bound as a fraction of the range.
pub const DELTA_FRACTION: f64 = 0.1;

struct Entry {
    name: &'static str,
    f: fn(f64) -> f64,
    domain: (f64, f64),
    lipschitz: f64,
    effective: Option<f64>,
    threshold: f64,
}

fn p1(x: f64) -> f64 {
    -x.powi(6) / 6.0 + 52.0 / 25.0 * x.powi(5) - 39.0 / 80.0 * x.powi(4) - 71.0 / 10.0 * x.powi(3)
        + 79.0 / 20.0 * x.powi(2)
        + x
        - 0.1
}

fn p11(x: f64) -> f64 {
    (1..=5)
        .map(|i| {
            let i = i as f64;
            i * ((i + 1.0) * x + i).sin()
        })
        .sum::<f64>()
        + 3.0
}

fn p15(x: f64) -> f64 {
    -(1..=5).map(|i| ((i as f64 + 1.0) * x).cos()).sum::<f64>()
}

const ENTRIES: [Entry; 18] = [
    Entry {
        name: "-x^6/6 + 52x^5/25 - 39x^4/80 - 71x^3/10 + 79x^2/20 + x - 1/10",
        f: p1,
        domain: (-1.5, 11.0),
        lipschitz: 13870.0,
        effective: None,
        threshold: 2974.180,
    },
    Entry {
        name: "-sin^3(x) - cos^3(x)",
        f: |x| -x.sin().powi(3) - x.cos().powi(3),
        #[allow(clippy::approx_constant)]
        domain: (0.0, 6.28),
        lipschitz: 2.2,
        effective: None,
        threshold: -0.800,
    },
    Entry {
        name: "x - sin(3x) + 1",
        f: |x| x - (3.0 * x).sin() + 1.0,
        domain: (0.0, 6.5),
        lipschitz: 4.0,
        effective: None,
        threshold: 1.202,
    },
    Entry {
        name: "(x^2 - 5x + 6) / (x^2 + 1)",
        f: |x| (x * x - 5.0 * x + 6.0) / (x * x + 1.0),
        domain: (-5.0, 5.0),
        lipschitz: 6.5,
        effective: None,
        threshold: 0.671,
    },
    Entry {
        name: "-sin(x) - sin(10x/3)",
        f: |x| -x.sin() - (10.0 * x / 3.0).sin(),
        domain: (2.7, 7.5),
        lipschitz: 4.29,
        effective: None,
        threshold: -0.609,
    },
    Entry {
        name: "(-3x + 1.4) sin(18x)",
        f: |x| (-3.0 * x + 1.4) * (18.0 * x).sin(),
        domain: (0.0, 1.2),
        lipschitz: 36.0,
        effective: None,
        threshold: -1.271,
    },
    Entry {
        name: "(x + sin(x)) exp(-x^2)",
        f: |x| (x + x.sin()) * (-x * x).exp(),
        domain: (-10.0, 10.0),
        lipschitz: 2.5,
        effective: None,
        threshold: -0.659,
    },
    Entry {
        name: "-sin(x) - sin(2x/3)",
        f: |x| -x.sin() - (2.0 * x / 3.0).sin(),
        domain: (3.1, 20.4),
        lipschitz: 1.7,
        effective: None,
        threshold: -1.483,
    },
    Entry {
        name: "exp(-x) sin(2 pi x)",
        f: |x| (-x).exp() * (2.0 * PI * x).sin(),
        domain: (0.0, 4.0),
        lipschitz: 6.5,
        effective: None,
        threshold: -0.347,
    },
    Entry {
        name: "-exp(-x) sin(2 pi x) + 0.5",
        f: |x| -(-x).exp() * (2.0 * PI * x).sin() + 0.5,
        domain: (0.0, 4.0),
        lipschitz: 6.5,
        effective: None,
        threshold: -0.154,
    },
    Entry {
        name: "sum_{i=1..5} i sin((i+1)x + i) + 3",
        f: p11,
        domain: (-10.0, 10.0),
        lipschitz: 67.0,
        effective: Some(68.42),
        threshold: -24.335,
    },
    Entry {
        name: "cos(x) - sin(5x) + 1",
        f: |x| x.cos() - (5.0 * x).sin() + 1.0,
        domain: (0.0, 7.0),
        lipschitz: 5.951,
        effective: Some(5.952),
        threshold: -0.545,
    },
    Entry {
        name: "cos(5x) if x <= 3pi/2, else cos(x)",
        f: |x| {
            if x <= 3.0 * FRAC_PI_2 {
                (5.0 * x).cos()
            } else {
                x.cos()
            }
        },
        domain: (0.0, 18.0),
        lipschitz: 4.999,
        effective: Some(5.001),
        threshold: -0.800,
    },
    Entry {
        name: "sin(x) if x <= pi, else sin(5x)",
        f: |x| if x <= PI { x.sin() } else { (5.0 * x).sin() },
        domain: (-10.0, 10.0),
        lipschitz: 4.999,
        effective: Some(5.001),
        threshold: -0.800,
    },
    Entry {
        name: "-sum_{i=1..5} cos((i+1)x)",
        f: p15,
        domain: (-10.0, 10.0),
        lipschitz: 18.119,
        effective: Some(18.12),
        threshold: -4.229,
    },
    Entry {
        name: "x |sin(x)| + 6",
        f: |x| x * x.sin().abs() + 6.0,
        domain: (-10.0, 10.0),
        lipschitz: 9.632,
        effective: None,
        threshold: -0.332,
    },
    Entry {
        name: "|x sin(x)| - 1.5",
        f: |x| (x * x.sin()).abs() - 1.5,
        domain: (-10.0, 10.0),
        lipschitz: 9.632,
        effective: None,
        threshold: -0.709,
    },
    Entry {
        name: "sin(x) if sin(x) > cos(x), else cos(x)",
        f: |x| if x.sin() > x.cos() { x.sin() } else { x.cos() },
        domain: (-10.0, 10.0),
        lipschitz: 1.0,
        effective: None,
        threshold: -0.519,
    },
];

fn entry(id: u32) -> Result<&'static Entry> {
    if (1..=CATALOG_SIZE).contains(&id) {
        Ok(&ENTRIES[id as usize - 1])
    } else {
        Err(Error::UnknownProblem(id))
    }
}

pub fn problem_ids() -> impl Iterator<Item = u32> {
    1..=CATALOG_SIZE
}

/// The Lipschitz constant as published for the problem.
pub fn published_lipschitz(id: u32) -> Result<f64> {
    Ok(entry(id)?.lipschitz)
}

/// The constant the problem runs with: the published value, or a corrected
/// one where the published value is below the objective's grid slope.
pub fn effective_lipschitz(id: u32) -> Result<f64> {
    let e = entry(id)?;
    Ok(e.effective.unwrap_or(e.lipschitz))
}

/// The raw objective of a catalog problem.
pub fn objective(id: u32) -> Result<fn(f64) -> f64> {
    Ok(entry(id)?.f)
}

fn build(id: u32) -> Problem {
    let e = &ENTRIES[id as usize - 1];
    let (lo, hi) = estimate_range(e.f, e.domain, RANGE_GRID);
    let best = grid_argmax(e.f, e.domain, RANGE_GRID);
    let lipschitz = e.effective.unwrap_or(e.lipschitz);
    Problem::new(
        e.name,
        Objective::new(e.name, e.f),
        e.domain,
        lipschitz,
        DELTA_FRACTION * (hi - lo),
        e.threshold,
    )
    .expect("catalog entries are valid")
    .with_id(id)
    .with_true_max(best.0, best.1)
}

fn catalog() -> &'static [Problem] {
    static CATALOG: OnceLock<Vec<Problem>> = OnceLock::new();
    CATALOG.get_or_init(|| problem_ids().map(build).collect())
}

/// Catalog problem `id` (1 to 18) with its threshold, running Lipschitz
/// constant and noise bound `0.1 * range`.
pub fn get_problem(id: u32) -> Result<Problem> {
    entry(id)?;
    Ok(catalog()[id as usize - 1].clone())
}

fn grid(domain: (f64, f64), points: usize) -> impl Iterator<Item = f64> {
    let (a, b) = domain;
    let n = points.max(2);
    let h = (b - a) / (n - 1) as f64;
    (0..n).map(move |i| if i + 1 == n { b } else { a + h * i as f64 })
}

/// Minimum and maximum of `f` over a uniform grid of `grid_points` points.
pub fn estimate_range(
    f: impl Fn(f64) -> f64,
    domain: (f64, f64),
    grid_points: usize,
) -> (f64, f64) {
    grid(domain, grid_points).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        let v = f(x);
        (lo.min(v), hi.max(v))
    })
}

/// Grid maximizer of `f`; ties go to the smallest coordinate.
pub fn grid_argmax(f: impl Fn(f64) -> f64, domain: (f64, f64), grid_points: usize) -> (f64, f64) {
    grid(domain, grid_points).fold((f64::NAN, f64::NEG_INFINITY), |(bx, bv), x| {
        let v = f(x);
        if v > bv {
            (x, v)
        } else {
            (bx, bv)
        }
    })
}

/// Largest difference quotient of `f` between neighbouring grid points.
pub fn grid_slope(f: impl Fn(f64) -> f64, domain: (f64, f64), grid_points: usize) -> f64 {
    let mut prev: Option<(f64, f64)> = None;
    let mut worst = 0.0f64;
    for x in grid(domain, grid_points) {
        let v = f(x);
        if let Some((px, pv)) = prev {
            worst = worst.max((v - pv).abs() / (x - px));
        }
        prev = Some((x, v));
    }
    worst
}

/// `true` if no grid difference quotient exceeds `L`, up to a relative
/// rounding slack of 1e-9.
pub fn verify_lipschitz(
    f: impl Fn(f64) -> f64,
    domain: (f64, f64),
    lipschitz: f64,
    grid_points: usize,
) -> bool {
    grid_slope(f, domain, grid_points) <= lipschitz * (1.0 + 1e-9)
}

/// Grid points where `f - delta >= h + margin * range`.
pub fn safe_start_candidates(
    problem: &Problem,
    grid_points: usize,
    margin_fraction: f64,
) -> Vec<f64> {
    let (lo, hi) = estimate_range(|x| problem.f(x), problem.domain(), grid_points);
    let level = problem.threshold() + margin_fraction * (hi - lo);
    grid(problem.domain(), grid_points)
        .filter(|&x| problem.f(x) - problem.delta() >= level)
        .collect()
}

/// One initial safe point drawn uniformly from the start candidates.
pub fn pick_initial_point(problem: &Problem, seed: u64) -> Result<f64> {
    let candidates = safe_start_candidates(problem, START_GRID, START_MARGIN);
    if candidates.is_empty() {
        return Err(Error::InvalidProblem(format!(
            "no grid point of '{}' clears the threshold with margin",
            problem.name()
        )));
    }
    // A stream separate from the oracle's so the start does not shift the noise.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    Ok(candidates[rng.random_range(0..candidates.len())])
}
