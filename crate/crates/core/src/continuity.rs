//! Empirical ε–δ modulus of the root map.
//!
//! For a polynomial `f` and a root tolerance `ε`, [`estimate_delta`] looks
//! for the largest coefficient perturbation size `δ` (max-norm) such that
//! every sampled perturbation `g = f + δ·d` has all roots within `ε` of the
//! roots of `f` under the bottleneck alignment.
//!
//! The estimate is a sampled lower-confidence value, not a certificate: the
//! inner maximization over directions `d` is a heuristic search (coordinate
//! directions, their rotations by `i`, seeded random directions and one
//! round of coordinate refinement). Only existence of `δ` is guaranteed
//! mathematically; no formula for it is known in general.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::align_bottleneck;
use crate::error::{Error, Result};
use crate::par::{self, Schedule};
use crate::poly::{find_roots, ComplexPoly, RootConfig, RootSet};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Random directions per call of [`worst_distance`].
    pub samples: usize,
    pub seed: u64,
    /// Search range for `δ`.
    pub delta_range: (f64, f64),
    /// Bisection stops once `hi / lo` drops below this ratio.
    pub bracket_ratio: f64,
    /// Random perturbations at `δ/2` used by [`recheck`].
    pub recheck_samples: usize,
    pub schedule: Schedule,
    /// Root finding for each sample; run sequentially since samples are
    /// already distributed.
    pub roots: RootConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            samples: 128,
            seed: 0,
            delta_range: (1e-15, 1.0),
            bracket_ratio: 1.1,
            recheck_samples: 500,
            schedule: Schedule::Parallel,
            roots: RootConfig {
                schedule: Schedule::Sequential,
                ..RootConfig::default()
            },
        }
    }
}

/// Result of the inner maximization at a fixed `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub distance: f64,
    /// Direction of max-norm 1 achieving `distance`.
    pub witness: Vec<Complex64>,
    pub evaluated: usize,
    /// Samples whose root finding failed.
    pub skipped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    Ok,
    /// `δ` reached the top of the search range with every sample inside `ε`.
    Saturated,
    /// Lowered to restore monotonicity in `ε`; the raw estimate was sampler
    /// noise.
    MonotoneAdjusted,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusPoint {
    pub epsilon: f64,
    pub delta: f64,
    /// Worst sampled distance at `delta`.
    pub distance_at_delta: f64,
    /// Worst direction found at the failing end of the final bracket (or at
    /// `delta` itself when saturated).
    pub witness: Vec<Complex64>,
    pub samples: usize,
    pub seed: u64,
    pub skipped: usize,
    pub status: PointStatus,
    /// Error message when `status` is `failed` (then `delta` is 0).
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulusCurve {
    pub points: Vec<ModulusPoint>,
    /// Least-squares slope of `log δ` against `log ε` over the `ok` and
    /// `monotone-adjusted` points; `None` with fewer than two.
    pub slope: Option<f64>,
}

/// `f + δ·d`, with the leading perturbation capped at `|a_n|/2` so the
/// degree is preserved.
pub fn perturb(f: &ComplexPoly, delta: f64, direction: &[Complex64]) -> Result<ComplexPoly> {
    if direction.len() != f.coeffs().len() {
        return Err(Error::SizeMismatch {
            left: f.coeffs().len(),
            right: direction.len(),
        });
    }
    let n = f.degree();
    let cap = f.leading().norm() / 2.0;
    let coeffs = f
        .coeffs()
        .iter()
        .zip(direction)
        .enumerate()
        .map(|(i, (a, d))| {
            let mut step = d * delta;
            if i == n && step.norm() > cap {
                step *= cap / step.norm();
            }
            a + step
        })
        .collect();
    ComplexPoly::new(coeffs)
}

/// Bottleneck alignment distance between the roots of `f` and of
/// `f + δ·d`.
pub fn distance_for_direction(
    f: &ComplexPoly,
    roots_f: &RootSet,
    delta: f64,
    direction: &[Complex64],
    cfg: &RootConfig,
) -> Result<f64> {
    let g = perturb(f, delta, direction)?;
    let roots_g = find_roots(&g, cfg)?;
    Ok(align_bottleneck(roots_f, &roots_g)?.max_distance)
}

fn unit(n: usize, i: usize, z: Complex64) -> Vec<Complex64> {
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    d[i] = z;
    d
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let d: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::from_polar(
                    rng.random::<f64>(),
                    rng.random_range(0.0..std::f64::consts::TAU),
                )
            })
            .collect();
        let m = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            return d.into_iter().map(|z| z / m).collect();
        }
    }
}

/// Evaluates every candidate and returns the index and distance of the
/// first maximum, with the number of failed candidates.
fn best_of(
    f: &ComplexPoly,
    roots_f: &RootSet,
    delta: f64,
    candidates: &[Vec<Complex64>],
    cfg: &SamplerConfig,
) -> (Option<(usize, f64)>, usize) {
    let results = par::map_indexed(cfg.schedule, candidates, |_, d| {
        distance_for_direction(f, roots_f, delta, d, &cfg.roots)
    });
    let mut best: Option<(usize, f64)> = None;
    let mut skipped = 0;
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(x) if best.is_none_or(|(_, b)| x > b) => best = Some((k, x)),
            Ok(_) => {}
            Err(_) => skipped += 1,
        }
    }
    (best, skipped)
}

/// Largest sampled alignment distance between the roots of `f` and of
/// `f + δ·d` over directions `d` of max-norm 1.
pub fn worst_distance(f: &ComplexPoly, delta: f64, cfg: &SamplerConfig) -> Result<WorstCase> {
    let roots_f = find_roots(f, &cfg.roots)?;
    worst_distance_with(f, &roots_f, delta, cfg)
}

fn worst_distance_with(
    f: &ComplexPoly,
    roots_f: &RootSet,
    delta: f64,
    cfg: &SamplerConfig,
) -> Result<WorstCase> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let n = f.coeffs().len();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut candidates: Vec<Vec<Complex64>> = Vec::new();
    for k in 0..n {
        for z in [one, -one, i, -i] {
            candidates.push(unit(n, k, z));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    candidates.extend((0..cfg.samples).map(|_| random_direction(&mut rng, n)));

    let (best, mut skipped) = best_of(f, roots_f, delta, &candidates, cfg);
    let mut evaluated = candidates.len();
    let Some((k, mut distance)) = best else {
        return Err(Error::invalid(format!(
            "root finding failed for all {} samples at delta = {delta:e}",
            candidates.len()
        )));
    };
    let mut witness = candidates[k].clone();

    // One round of coordinate refinement from the best candidate.
    for c in 0..n {
        let cur = witness[c];
        let options = [-cur, i * cur, -i * cur, one, -one, i, -i];
        let trial: Vec<Vec<Complex64>> = options
            .iter()
            .filter(|z| **z != cur)
            .map(|&z| {
                let mut d = witness.clone();
                d[c] = z;
                d
            })
            .filter(|d| d.iter().any(|z| z.norm() > 0.0))
            .map(|d| {
                let m = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
                d.into_iter().map(|z| z / m).collect()
            })
            .collect();
        let (b, s) = best_of(f, roots_f, delta, &trial, cfg);
        evaluated += trial.len();
        skipped += s;
        if let Some((k, x)) = b {
            if x > distance {
                distance = x;
                witness = trial[k].clone();
            }
        }
    }
    Ok(WorstCase {
        distance,
        witness,
        evaluated,
        skipped,
    })
}

/// Largest tested `δ` whose worst sampled distance stays below `epsilon`,
/// by bisection on `log δ`.
pub fn estimate_delta(f: &ComplexPoly, epsilon: f64, cfg: &SamplerConfig) -> Result<ModulusPoint> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let (lo0, hi0) = cfg.delta_range;
    if !(lo0 > 0.0 && hi0 > lo0 && cfg.bracket_ratio > 1.0) {
        return Err(Error::invalid(
            "delta range must satisfy 0 < lo < hi and ratio > 1",
        ));
    }
    let roots_f = find_roots(f, &cfg.roots)?;
    let worst = |delta: f64| worst_distance_with(f, &roots_f, delta, cfg);

    let point = |delta: f64, at: &WorstCase, witness: &WorstCase, skipped, status| ModulusPoint {
        epsilon,
        delta,
        distance_at_delta: at.distance,
        witness: witness.witness.clone(),
        samples: cfg.samples,
        seed: cfg.seed,
        skipped,
        status,
        error: None,
    };

    let top = worst(hi0)?;
    if top.distance < epsilon {
        return Ok(point(hi0, &top, &top, top.skipped, PointStatus::Saturated));
    }
    let bottom = worst(lo0)?;
    if bottom.distance >= epsilon {
        return Err(Error::BracketNotEstablished {
            lo: lo0,
            hi: hi0,
            lo_distance: bottom.distance,
            hi_distance: top.distance,
        });
    }
    let mut skipped = top.skipped + bottom.skipped;
    let (mut lo, mut hi) = ((lo0, bottom), (hi0, top));
    while hi.0 / lo.0 >= cfg.bracket_ratio {
        let mid = (lo.0 * hi.0).sqrt();
        let w = worst(mid)?;
        skipped += w.skipped;
        if w.distance < epsilon {
            lo = (mid, w);
        } else {
            hi = (mid, w);
        }
    }
    Ok(point(lo.0, &lo.1, &hi.1, skipped, PointStatus::Ok))
}

/// [`estimate_delta`] for each `epsilon` (positive, ascending), followed by
/// monotonicity enforcement and a log–log slope fit.
pub fn modulus_curve(
    f: &ComplexPoly,
    epsilons: &[f64],
    cfg: &SamplerConfig,
) -> Result<ModulusCurve> {
    if epsilons.is_empty() {
        return Err(Error::invalid("no epsilons given"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::invalid("epsilons must be positive"));
    }
    if epsilons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("epsilons must be strictly increasing"));
    }
    let mut points: Vec<ModulusPoint> = epsilons
        .iter()
        .map(|&epsilon| {
            estimate_delta(f, epsilon, cfg).unwrap_or_else(|e| ModulusPoint {
                epsilon,
                delta: 0.0,
                distance_at_delta: 0.0,
                witness: Vec::new(),
                samples: cfg.samples,
                seed: cfg.seed,
                skipped: 0,
                status: PointStatus::Failed,
                error: Some(e.to_string()),
            })
        })
        .collect();
    enforce_monotone(&mut points);
    let slope = fit_slope(&points);
    Ok(ModulusCurve { points, slope })
}

/// Running minimum from the largest `ε` down, so `δ` is non-decreasing in
/// `ε`. Lowering `δ` never invalidates a point.
fn enforce_monotone(points: &mut [ModulusPoint]) {
    let mut cap = f64::INFINITY;
    for p in points.iter_mut().rev() {
        if p.status == PointStatus::Failed {
            continue;
        }
        if p.delta > cap {
            p.delta = cap;
            p.status = PointStatus::MonotoneAdjusted;
        }
        cap = p.delta;
    }
}

fn fit_slope(points: &[ModulusPoint]) -> Option<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| matches!(p.status, PointStatus::Ok | PointStatus::MonotoneAdjusted))
        .map(|p| (p.epsilon.ln(), p.delta.ln()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let k = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / k;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Outcome of [`recheck`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recheck {
    pub samples: usize,
    pub skipped: usize,
    pub worst: f64,
    pub passed: bool,
}

/// Soundness re-check of a point: fresh random perturbations of magnitude
/// `δ/2`, drawn from a stream independent of the estimation samples, must
/// all move the roots by less than `ε`.
pub fn recheck(f: &ComplexPoly, point: &ModulusPoint, cfg: &SamplerConfig) -> Result<Recheck> {
    if !(point.delta > 0.0) {
        return Err(Error::invalid("point has no delta to re-check"));
    }
    let roots_f = find_roots(f, &cfg.roots)?;
    let n = f.coeffs().len();
    let mut rng = ChaCha8Rng::seed_from_u64(point.seed);
    rng.set_stream(1);
    let dirs: Vec<Vec<Complex64>> = (0..cfg.recheck_samples)
        .map(|_| random_direction(&mut rng, n))
        .collect();
    let half = point.delta / 2.0;
    let results = par::map_indexed(cfg.schedule, &dirs, |_, d| {
        distance_for_direction(f, &roots_f, half, d, &cfg.roots)
    });
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(x) => worst = worst.max(x),
            Err(_) => skipped += 1,
        }
    }
    Ok(Recheck {
        samples: dirs.len(),
        skipped,
        worst,
        passed: skipped == 0 && worst < point.epsilon,
    })
}
