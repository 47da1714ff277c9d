#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rootflow::ComplexPoly;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn random_complex(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    c(
        rng.random_range(-radius..radius),
        rng.random_range(-radius..radius),
    )
}

/// `n` points in the square `[-radius, radius]²` with pairwise distance at
/// least `separation`, by rejection.
pub fn separated_points(
    rng: &mut ChaCha8Rng,
    n: usize,
    radius: f64,
    separation: f64,
) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = Vec::with_capacity(n);
    while pts.len() < n {
        let z = random_complex(rng, radius);
        if pts.iter().all(|p| (p - z).norm() >= separation) {
            pts.push(z);
        }
    }
    pts
}

/// Monic polynomial with the given roots, expanded independently of the
/// library: coefficient `k` is `(−1)^(n−k) e_{n−k}(roots)`.
pub fn monic_from_roots(roots: &[Complex64]) -> ComplexPoly {
    let mut coeffs = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); coeffs.len() + 1];
        for (k, a) in coeffs.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        coeffs = next;
    }
    ComplexPoly::new(coeffs).unwrap()
}

/// Direction of max-norm 1.
pub fn max_norm_direction(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let d: Vec<Complex64> = (0..len).map(|_| random_complex(rng, 1.0)).collect();
    let m = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    d.into_iter().map(|z| z / m).collect()
}

/// Direction of Euclidean norm 1.
pub fn unit_direction(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    let d: Vec<Complex64> = (0..len).map(|_| random_complex(rng, 1.0)).collect();
    let m = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    d.into_iter().map(|z| z / m).collect()
}

/// Smallest achievable maximum pair distance, by trying every permutation.
pub fn exhaustive_bottleneck(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn go(k: usize, a: &[Complex64], b: &[Complex64], used: &mut [bool], cur: f64, best: &mut f64) {
        if cur >= *best {
            return;
        }
        if k == a.len() {
            *best = cur;
            return;
        }
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                go(k + 1, a, b, used, cur.max((a[k] - b[j]).norm()), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(0, a, b, &mut vec![false; b.len()], 0.0, &mut best);
    best
}

/// Prints the criterion line and returns the verdict.
pub fn report(id: u32, name: &str, ok: bool, detail: &str) -> bool {
    println!(
        "criterion {id} [{}] {name}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

/// `"; first: …"` for a nonempty problem list.
pub fn first_problem(problems: &[String]) -> String {
    problems
        .first()
        .map_or(String::new(), |p| format!("; first: {p}"))
}
