//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use safe_lipschitz::harness::{
    bench_reports, execute, run, write_trace, InitialPoints, ResolvedRun, RunConfig, RunOutcome,
};
use safe_lipschitz::interval::IntervalUnion;
use safe_lipschitz::maximize::{characteristic, initial_z, MaxParams};
use safe_lipschitz::noise::NoiseKind;
use safe_lipschitz::oracle::EvalEvent;
use safe_lipschitz::problem::{Objective, Problem};
use safe_lipschitz::samples::Phase;
use safe_lipschitz::testbed::{get_problem, problem_ids, verify_lipschitz};
use safe_lipschitz::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 30;

/// Published total evaluations per problem.
const TABLE_TOTAL_EVALS: [f64; 18] = [
    72.0, 221.0, 63.0, 194.0, 224.0, 122.0, 418.0, 414.0, 1495.0, 139.0, 681.0, 281.0, 515.0,
    502.0, 363.0, 217.0, 418.0, 226.0,
];

fn noise_models() -> Vec<NoiseKind> {
    vec![
        NoiseKind::Uniform,
        NoiseKind::ClippedGaussian { std_fraction: 0.5 },
        NoiseKind::FixedBiasPlus,
        NoiseKind::FixedBiasMinus,
    ]
}

fn config(id: u32, seed: u64, noise: NoiseKind) -> RunConfig {
    let mut cfg = RunConfig::catalog(id);
    cfg.seed = seed;
    cfg.noise = noise;
    cfg
}

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// `n` points spread over the union in proportion to interval length,
/// always including every endpoint.
fn grid_over(region: &IntervalUnion, n: usize) -> Vec<f64> {
    let total = region.total_length();
    let mut xs = Vec::with_capacity(n + 2 * region.len());
    for iv in region.intervals() {
        let k = if total > 0.0 {
            ((n as f64 * iv.length() / total).ceil() as usize).max(2)
        } else {
            1
        };
        if k == 1 || iv.length() == 0.0 {
            xs.push(iv.lo);
            continue;
        }
        let h = iv.length() / (k - 1) as f64;
        for i in 0..k {
            xs.push(if i + 1 == k {
                iv.hi
            } else {
                iv.lo + h * i as f64
            });
        }
    }
    xs
}

/// Lower envelope `min_j (c_j + L|x - x_j|)` on sorted `xs` by two sweeps.
fn cone_min(anchors: &[(f64, f64)], l: f64, xs: &[f64]) -> Vec<f64> {
    let mut a = anchors.to_vec();
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = vec![f64::INFINITY; xs.len()];
    let (mut j, mut best) = (0, f64::INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        while j < a.len() && a[j].0 <= x {
            best = best.min(a[j].1 - l * a[j].0);
            j += 1;
        }
        out[i] = best + l * x;
    }
    let (mut j, mut best) = (a.len(), f64::INFINITY);
    for (i, &x) in xs.iter().enumerate().rev() {
        while j > 0 && a[j - 1].0 >= x {
            j -= 1;
            best = best.min(a[j].1 + l * a[j].0);
        }
        out[i] = out[i].min(best - l * x);
    }
    out
}

/// Upper envelope `max_j (c_j - L|x - x_j|)` on sorted `xs`.
fn cone_max(anchors: &[(f64, f64)], l: f64, xs: &[f64]) -> Vec<f64> {
    let neg: Vec<(f64, f64)> = anchors.iter().map(|&(x, c)| (x, -c)).collect();
    cone_min(&neg, l, xs).into_iter().map(|v| -v).collect()
}

fn brute_gamma(anchors: &[(f64, f64)], l: f64, x: f64) -> f64 {
    anchors
        .iter()
        .map(|&(xj, c)| c + l * (x - xj).abs())
        .fold(f64::INFINITY, f64::min)
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut runs = 0;
    let mut violations = 0;
    let mut below = 0;
    let mut errors = Vec::new();
    for id in problem_ids() {
        let h = get_problem(id).unwrap().threshold();
        for noise in noise_models() {
            for seed in 0..SEEDS {
                runs += 1;
                match execute(&config(id, seed, noise).resolve().unwrap()) {
                    Ok(o) => {
                        violations += o.report.violations;
                        below += o.trace.iter().filter(|r| r.value < h).count();
                    }
                    Err(Error::SafetyViolation { .. }) => violations += 1,
                    Err(e) => errors.push(format!("problem {id} seed {seed} {noise}: {e}")),
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        violations == 0 && below == 0 && errors.is_empty() && secs < 60.0,
        format!(
            "{runs} runs, {violations} sentinel violations, {below} observations below h, {} errors, {secs:.1} s{}",
            errors.len(),
            errors.first().map(|e| format!(" (first: {e})")).unwrap_or_default()
        ),
    )
}

/// Every run of the criterion-1 matrix, one at a time.
fn for_each_run(mut f: impl FnMut(u32, &Problem, &RunOutcome)) {
    for id in problem_ids() {
        let p = get_problem(id).unwrap();
        for noise in noise_models() {
            for seed in 0..SEEDS {
                let o = execute(&config(id, seed, noise).resolve().unwrap()).unwrap();
                f(id, &p, &o);
            }
        }
    }
}

struct RunChecks {
    sandwich_runs: usize,
    sandwich_fail: Vec<String>,
    audit_fail: Vec<String>,
    n_f_fail: Vec<String>,
    lemma_checked: usize,
    lemma_fail: Vec<String>,
}

fn check_runs() -> RunChecks {
    let mut c = RunChecks {
        sandwich_runs: 0,
        sandwich_fail: Vec::new(),
        audit_fail: Vec::new(),
        n_f_fail: Vec::new(),
        lemma_checked: 0,
        lemma_fail: Vec::new(),
    };
    for_each_run(|id, p, o| {
        let r = &o.report;
        let tag = format!("problem {id} seed {} {}", r.seed, r.noise.kind);
        let (l, d) = (p.lipschitz(), r.problem.delta);

        // Criterion 2: minorant below f - delta, majorant above f + delta.
        c.sandwich_runs += 1;
        let xs = grid_over(&r.safe_region, 10_000);
        let phi_anchors: Vec<(f64, f64)> = o
            .log
            .entries()
            .iter()
            .map(|e| (e.x, e.g_max() - 2.0 * d))
            .collect();
        let phi = cone_max(&phi_anchors, l, &xs);
        let mut worst_lo = f64::NEG_INFINITY;
        for (x, v) in xs.iter().zip(&phi) {
            worst_lo = worst_lo.max(v - (p.f(*x) - d));
        }
        let mut worst_hi = f64::NEG_INFINITY;
        for s in &r.subregions {
            let sub = IntervalUnion::from_intervals([s.interval]);
            let xs = grid_over(&sub, 10_000);
            let anchors: Vec<(f64, f64)> =
                s.anchors.iter().map(|a| (a.x, a.value + 2.0 * d)).collect();
            for (x, v) in xs.iter().zip(cone_min(&anchors, l, &xs)) {
                worst_hi = worst_hi.max((p.f(*x) + d) - v);
            }
        }
        if worst_lo > 1e-9 || worst_hi > 1e-9 {
            c.sandwich_fail.push(format!(
                "{tag}: minorant excess {worst_lo:e}, majorant deficit {worst_hi:e}"
            ));
        }

        // Criterion 3 (ii): pairwise bound on observations.
        if let Some(v) = o.log.audit(l, d).violation {
            c.audit_fail.push(format!("{tag}: {v:?}"));
        }

        // Criterion 7: maximizer of f outside N_f.
        let xs = grid_over(&r.safe_region, 100_000);
        let x_best = xs
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |(bx, bv), x| {
                let v = p.f(x);
                if v > bv {
                    (x, v)
                } else {
                    (bx, bv)
                }
            });
        if r.exclusion.n_f.contains(x_best.0) {
            c.n_f_fail
                .push(format!("{tag}: grid maximizer {} inside N_f", x_best.0));
        }

        // Criterion 7: every trial was outside N_g when chosen, replayed from the trace.
        for s in &r.subregions {
            let mut lows: Vec<(f64, f64)> = Vec::new();
            let mut incumbent = f64::NEG_INFINITY;
            let relevant = o.trace.iter().filter(|t| {
                s.interval.contains(t.x)
                    && (t.phase == Phase::Expansion || t.subregion == Some(s.index))
            });
            for t in relevant {
                if t.phase == Phase::Maximization && t.event == EvalEvent::Trial {
                    let it = &s.iterations[t.iteration - 1];
                    let anchors: Vec<(f64, f64)> =
                        lows.iter().map(|&(x, g)| (x, g + 2.0 * d)).collect();
                    let gamma = brute_gamma(&anchors, l, it.x_bar);
                    c.lemma_checked += 1;
                    if it.x_bar != t.x || gamma < incumbent - 1e-9 {
                        c.lemma_fail.push(format!(
                            "{tag}: subregion {} iteration {} trial {} has Gamma {gamma} < incumbent {incumbent}",
                            s.index, it.iteration, it.x_bar
                        ));
                    }
                }
                incumbent = incumbent.max(t.value);
                match lows.iter_mut().find(|(x, _)| *x == t.x) {
                    Some(e) => e.1 = e.1.min(t.value),
                    None => lows.push((t.x, t.value)),
                }
            }
            if c.lemma_checked == 0 && !s.iterations.is_empty() {
                c.lemma_fail
                    .push(format!("{tag}: no trials found in trace"));
            }
        }
    });
    c
}

fn first(v: &[String]) -> String {
    v.first()
        .map(|e| format!(" (first: {e})"))
        .unwrap_or_default()
}

fn criterion_3_witness() -> (bool, String) {
    let mut cfg = config(3, 1, NoiseKind::AlternatingBias);
    cfg.initial_points = InitialPoints::Explicit(vec![3.0]);
    let o = run(&cfg).unwrap();
    let l = o.report.problem.lipschitz;
    match o.log.plain_lipschitz_witness(l) {
        Some(w) => (
            true,
            format!("witness |{} - {}| > L |{} - {}|", w.g1, w.g2, w.x1, w.x2),
        ),
        None => (
            false,
            "no plain-Lipschitz witness in alternating-bias run".into(),
        ),
    }
}

fn criterion_4() -> Verdict {
    // Random configurations against a grid search refined by ternary search.
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_r = 0.0f64;
    let mut worst_x = 0.0f64;
    for _ in 0..1000 {
        let x_lo = rng.random_range(-10.0..10.0);
        let len = rng.random_range(1e-3..10.0);
        let x_hi = x_lo + len;
        let l = rng.random_range(0.1..20.0);
        let z_lo = rng.random_range(-10.0..10.0);
        let z_hi = z_lo + rng.random_range(-1.0..=1.0) * l * len;
        let two_piece = |x: f64| (z_lo + l * (x - x_lo)).min(z_hi + l * (x_hi - x));
        let n = 100_000;
        let h = len / (n - 1) as f64;
        let mut best_i: usize = 0;
        let mut best_v = f64::NEG_INFINITY;
        for i in 0..n {
            let v = two_piece(x_lo + h * i as f64);
            if v > best_v {
                best_v = v;
                best_i = i;
            }
        }
        let (mut lo, mut hi) = (
            (x_lo + h * best_i.saturating_sub(1) as f64).max(x_lo),
            (x_lo + h * (best_i + 1) as f64).min(x_hi),
        );
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if two_piece(m1) < two_piece(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let x_star = 0.5 * (lo + hi);
        let r_star = two_piece(x_star).max(best_v);
        let (r, x_bar) = characteristic(x_lo, x_hi, z_lo, z_hi, l).unwrap();
        worst_r = worst_r.max((r - r_star).abs());
        worst_x = worst_x.max((x_bar - x_star).abs());
    }

    // Full runs: the largest characteristic equals the maximum of the majorant.
    let mut worst_run = 0.0f64;
    let mut compared = 0;
    for id in problem_ids() {
        for seed in 0..5 {
            let o = execute(&config(id, seed, NoiseKind::Uniform).resolve().unwrap()).unwrap();
            let (l, d) = (o.report.problem.lipschitz, o.report.problem.delta);
            for s in &o.report.subregions {
                if s.anchors.len() < 2 {
                    continue;
                }
                let pts: Vec<(f64, f64)> = s.anchors.iter().map(|a| (a.x, a.value)).collect();
                let z = initial_z(&pts, l, d);
                let mut r_max = f64::NEG_INFINITY;
                for i in 1..pts.len() {
                    let (r, _) = characteristic(pts[i - 1].0, pts[i].0, z[i - 1], z[i], l).unwrap();
                    r_max = r_max.max(r);
                }
                let cones: Vec<(f64, f64)> = pts.iter().map(|&(x, g)| (x, g + 2.0 * d)).collect();
                let grid_max = exact_cone_max(&cones, l, s.interval.lo, s.interval.hi);
                worst_run = worst_run.max((r_max - grid_max).abs());
                compared += 1;
            }
        }
    }
    Verdict::new(
        worst_r <= 1e-6 && worst_x <= 1e-6 && worst_run <= 1e-6,
        format!(
            "1000 configs: max |R - grid| = {worst_r:.2e}, max |x - grid| = {worst_x:.2e}; {compared} subregions: max |max R - max Gamma| = {worst_run:.2e}"
        ),
    )
}

/// Maximum of `min_j (c_j + L|x - x_j|)` on `[lo, hi]`: scan a grid, then
/// resolve every near-maximal cell exactly from the crossings of its active cones.
fn exact_cone_max(cones: &[(f64, f64)], l: f64, lo: f64, hi: f64) -> f64 {
    let n = 100_000;
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    let vals = cone_min(cones, l, &xs);
    let grid_max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spacing = (hi - lo) / (n - 1) as f64;
    let active = |x: f64| {
        let g = brute_gamma(cones, l, x);
        cones
            .iter()
            .copied()
            .filter(move |&(xj, c)| c + l * (x - xj).abs() <= g + 1e-12 * (1.0 + g.abs()))
    };
    let mut best = grid_max;
    for i in 0..n - 1 {
        if vals[i].max(vals[i + 1]) < grid_max - l * spacing {
            continue;
        }
        let (a, b) = (xs[i], xs[i + 1]);
        let cand: Vec<(f64, f64)> = active(a).chain(active(b)).collect();
        for &(xi, ci) in &cand {
            for &(xj, cj) in &cand {
                // Rising arm of the left cone meets the falling arm of the right one.
                let x = (cj - ci + l * (xi + xj)) / (2.0 * l);
                if x >= a && x <= b {
                    best = best.max(brute_gamma(cones, l, x));
                }
            }
        }
    }
    best
}

fn criterion_5() -> Verdict {
    let mut worst = f64::INFINITY;
    let mut lines = Vec::new();
    let mut pass = true;
    for id in [2, 3, 5] {
        for seed in 0..5 {
            let mut cfg = config(id, seed, NoiseKind::Zero);
            cfg.delta = Some(0.0);
            cfg.nu = 1;
            cfg.eps_max = 0.001;
            let o = run(&cfg).unwrap();
            let p = get_problem(id).unwrap();
            let xs = grid_over(&o.report.safe_region, 1_000_000);
            let f_max = xs.iter().map(|&x| p.f(x)).fold(f64::NEG_INFINITY, f64::max);
            let margin = o.report.best.g - (f_max - p.lipschitz() * 0.001);
            worst = worst.min(margin);
            if margin < 0.0 {
                pass = false;
                lines.push(format!(
                    "problem {id} seed {seed}: g* {} vs grid max {f_max}",
                    o.report.best.g
                ));
            }
        }
    }
    Verdict::new(
        pass,
        format!(
            "problems 2, 3, 5 x 5 seeds; smallest g* - (max f - L eps) = {worst:.3e}{}",
            first(&lines)
        ),
    )
}

fn criterion_6() -> Verdict {
    let ids: Vec<u32> = problem_ids().collect();
    let seeds: Vec<u64> = (0..SEEDS).collect();
    let grouped = bench_reports(&ids, &seeds, &RunConfig::catalog(1)).unwrap();
    let mut out_of_band = Vec::new();
    let mut structure = Vec::new();
    let mut ratios = Vec::new();
    for (i, reports) in grouped.iter().enumerate() {
        let mut totals: Vec<f64> = reports.iter().map(|r| r.total.evaluations as f64).collect();
        totals.sort_by(f64::total_cmp);
        let median = 0.5 * (totals[totals.len() / 2 - 1] + totals[totals.len() / 2]);
        let ratio = median / TABLE_TOTAL_EVALS[i];
        ratios.push(ratio);
        if !(0.25..=4.0).contains(&ratio) {
            out_of_band.push(format!(
                "problem {}: median {median} vs {}",
                ids[i], TABLE_TOTAL_EVALS[i]
            ));
        }
        for r in reports {
            if r.expansion.evaluations < r.expansion.points
                || r.maximization.evaluations < r.maximization.points
                || r.total.evaluations < r.total.points
            {
                structure.push(format!("problem {} seed {}", ids[i], r.seed));
            }
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Verdict::new(
        out_of_band.is_empty() && structure.is_empty(),
        format!(
            "median/published total evaluations in [{lo:.2}, {hi:.2}]; {} out of band, {} runs with evaluations < points{}{}",
            out_of_band.len(),
            structure.len(),
            first(&out_of_band),
            first(&structure)
        ),
    )
}

fn two_peaks() -> Problem {
    let f = |x: f64| (-((x - 1.0) / 0.3).powi(2)).exp() + 0.4 * (-((x - 3.0) / 0.3).powi(2)).exp();
    Problem::new(
        "two peaks",
        Objective::new("two peaks", f),
        (0.0, 4.0),
        3.0,
        0.05,
        -0.5,
    )
    .unwrap()
}

fn criterion_8() -> Verdict {
    let p = two_peaks();
    let f = |x: f64| p.f(x);
    assert!(verify_lipschitz(f, p.domain(), p.lipschitz(), 1_000_000));
    let xs: Vec<f64> = (0..=400_000).map(|i| i as f64 * 1e-5).collect();
    let argmax_near = |lo: f64, hi: f64| {
        xs.iter().copied().filter(|&x| x >= lo && x <= hi).fold(
            (f64::NAN, f64::NEG_INFINITY),
            |(bx, bv), x| if f(x) > bv { (x, f(x)) } else { (bx, bv) },
        )
    };
    let (x_star, f_star) = argmax_near(0.0, 2.0);
    let (x_other, f_other) = argmax_near(2.0, 4.0);
    assert!(f_star > f_other + 2.0 * p.delta());

    let mut failures = Vec::new();
    for seed in 0..10 {
        let mut run = ResolvedRun::new(p.clone(), seed, vec![2.0]).unwrap();
        run.max = MaxParams {
            eps_max: 1e-4,
            nu: 50,
            ..MaxParams::default()
        };
        run.expansion.nu = 50;
        let o = execute(&run).unwrap();
        let r = &o.report;
        let keeps = r.safe_region.contains(x_star) && !r.exclusion.n_g.contains(x_star);
        let drops = !r.safe_region.contains(x_other) || r.exclusion.n_g.contains(x_other);
        if !(keeps && drops) {
            failures.push(format!(
                "seed {seed}: keeps maximizer {keeps}, drops inferior peak {drops}"
            ));
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "maximizer {x_star:.5}, inferior peak {x_other:.5}; {} of 10 seeds failed{}",
            failures.len(),
            first(&failures)
        ),
    )
}

fn criterion_9() -> Verdict {
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for (id, noise, parallel) in [
        (3, NoiseKind::Uniform, false),
        (9, NoiseKind::ClippedGaussian { std_fraction: 0.5 }, false),
        (13, NoiseKind::Uniform, true),
        (11, NoiseKind::FixedBiasMinus, true),
    ] {
        let mut cfg = config(id, 7, noise);
        cfg.parallel_subregions = parallel;
        let bytes = |cfg: &RunConfig| {
            let o = run(cfg).unwrap();
            let mut trace = Vec::new();
            write_trace(&o.trace, &mut trace).unwrap();
            (o.report.to_json().unwrap(), trace)
        };
        let a = bytes(&cfg);
        let b = bytes(&cfg);
        let mut seq = cfg.clone();
        seq.parallel_subregions = !parallel;
        let c = bytes(&seq);
        compared += 1;
        if a != b {
            mismatches.push(format!("problem {id}: repeated runs differ"));
        }
        if a != c {
            mismatches.push(format!("problem {id}: parallel and sequential runs differ"));
        }
    }
    Verdict::new(
        mismatches.is_empty(),
        format!(
            "{compared} configurations run three times each{}",
            first(&mismatches)
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    results.push((1, "zero safety violations", criterion_1()));

    let checks = check_runs();
    results.push((
        2,
        "minorant/majorant sandwich",
        Verdict::new(
            checks.sandwich_fail.is_empty(),
            format!(
                "{} runs on 1e4-point grids, {} failures{}",
                checks.sandwich_runs,
                checks.sandwich_fail.len(),
                first(&checks.sandwich_fail)
            ),
        ),
    ));
    let (witness_ok, witness) = criterion_3_witness();
    results.push((
        3,
        "observation bounds and plain-Lipschitz witness",
        Verdict::new(
            checks.audit_fail.is_empty() && witness_ok,
            format!(
                "{} audit failures over {} runs; {witness}{}",
                checks.audit_fail.len(),
                checks.sandwich_runs,
                first(&checks.audit_fail)
            ),
        ),
    ));
    results.push((4, "characteristic equivalence", criterion_4()));
    results.push((5, "noiseless convergence", criterion_5()));
    results.push((6, "evaluation-count band", criterion_6()));
    results.push((
        7,
        "exclusion soundness",
        Verdict::new(
            checks.n_f_fail.is_empty() && checks.lemma_fail.is_empty(),
            format!(
                "{} runs: {} maximizers inside N_f; {} trials checked, {} inside N_g{}{}",
                checks.sandwich_runs,
                checks.n_f_fail.len(),
                checks.lemma_checked,
                checks.lemma_fail.len(),
                first(&checks.n_f_fail),
                first(&checks.lemma_fail)
            ),
        ),
    ));
    results.push((8, "two-peak separation", criterion_8()));
    results.push((9, "determinism", criterion_9()));

    let mut failed = 0;
    for (n, name, v) in &results {
        println!(
            "criterion {n} [{name}]: {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        if !v.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
