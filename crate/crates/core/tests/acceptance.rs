//! Acceptance suite. Each criterion prints one `criterion N [PASS|FAIL]`
//! line; the run fails if any criterion fails. Positional arguments filter
//! criteria by name substring.

mod common;

use std::path::PathBuf;
use std::process::Command;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rootflow::align::{align_bottleneck, bottleneck_points, deflation_trace};
use rootflow::cli::validate_report;
use rootflow::continuity::{modulus_curve, recheck, PointStatus, SamplerConfig};
use rootflow::deform::{
    chebyshev_points, check_lemma1, default_ladder, hensel_lift_root, root_trajectories, sample_at,
    Deformation, DeformationKind, HenselConfig, ItemStatus, Lemma1Config, TrajectoryConfig,
};
use rootflow::poly::{find_roots, roots_oracle, RootConfig};
use rootflow::{ComplexPoly, Exponent, HyperScalar, Magnitude, Precision, Valuation};

// ---------------------------------------------------------------------------
// 1. Standard part is a homomorphism on finite values

/// Random finite series as raw `(exponent, coefficient)` terms. Without an
/// exponent-zero term the value is infinitesimal.
fn random_finite_terms(rng: &mut ChaCha8Rng) -> Vec<(Exponent, Complex64)> {
    let count = rng.random_range(1..=5);
    let mut terms = Vec::new();
    if rng.random_bool(0.8) {
        terms.push((Exponent::from_integer(0), random_complex(rng, 1.0)));
    }
    for _ in 0..count {
        let e = Exponent::new(rng.random_range(1..=12), rng.random_range(1..=3));
        terms.push((e, random_complex(rng, 1.0)));
    }
    terms
}

/// Standard part read straight off the raw terms.
fn st_oracle(terms: &[(Exponent, Complex64)]) -> Complex64 {
    terms
        .iter()
        .filter(|(e, _)| *e == Exponent::from_integer(0))
        .map(|(_, c)| c)
        .sum()
}

fn close(a: Complex64, b: Complex64, scale: f64) -> bool {
    (a - b).norm() <= 1e-12 * scale.max(1.0)
}

/// `1/x` is infinite iff `x` is a nonzero infinitesimal, and finite
/// non-infinitesimal iff `x` is.
fn duality_holds(x: &HyperScalar) -> bool {
    if x.is_zero() {
        return x.recip().is_err();
    }
    let Ok(inv) = x.recip() else { return false };
    match x.classify() {
        Magnitude::Infinitesimal => inv.classify() == Magnitude::Infinite,
        Magnitude::FiniteNoninfinitesimal => inv.classify() == Magnitude::FiniteNoninfinitesimal,
        Magnitude::Infinite => inv.classify() == Magnitude::Infinitesimal,
    }
}

fn criterion_1_standard_part_homomorphism() -> bool {
    let mut rng = rng(1);
    let p = Precision::default();
    let (mut add_bad, mut mul_bad, mut div_bad, mut div_count, mut dual_bad) = (0, 0, 0, 0, 0);
    for _ in 0..1000 {
        let (ta, tb) = (random_finite_terms(&mut rng), random_finite_terms(&mut rng));
        let a = HyperScalar::from_terms(ta.clone(), p).unwrap();
        let b = HyperScalar::from_terms(tb.clone(), p).unwrap();
        let (sa, sb) = (st_oracle(&ta), st_oracle(&tb));

        let sum = a.add(&b).unwrap().standard_part().unwrap();
        add_bad += usize::from(!close(sum, sa + sb, sa.norm() + sb.norm()));
        let prod = a.mul(&b).unwrap().standard_part().unwrap();
        mul_bad += usize::from(!close(prod, sa * sb, sa.norm() * sb.norm()));
        if sb.norm() > 0.0 {
            div_count += 1;
            let q = a.div(&b).unwrap().standard_part().unwrap();
            div_bad += usize::from(!close(q, sa / sb, (sa / sb).norm()));
        }

        // Infinite values: a finite value over a positive power of ε.
        let k = Exponent::new(rng.random_range(1..=6), rng.random_range(1..=2));
        let big = a
            .add(&HyperScalar::embed(c(1.0, 0.0)))
            .unwrap()
            .div(&HyperScalar::monomial(c(1.0, 0.0), k))
            .unwrap();
        for x in [&a, &b, &big] {
            dual_bad += usize::from(!duality_holds(x));
        }
    }
    let ok = add_bad == 0 && mul_bad == 0 && div_bad == 0 && dual_bad == 0;
    let detail = format!(
        "1000 pairs: add {add_bad} bad, mul {mul_bad} bad, div {div_bad}/{div_count} bad, duality {dual_bad} bad"
    );
    report(1, "standard-part homomorphism", ok, &detail)
}

// ---------------------------------------------------------------------------
// 2. Evaluation/coefficient characterization

fn criterion_2_evaluation_characterization() -> bool {
    let mut rng = rng(2);
    let p = Precision::default();
    let mut failures = Vec::new();
    for case in 0..100 {
        let n = rng.random_range(1..=5);
        let mut a: Vec<Complex64> = (0..=n).map(|_| random_complex(&mut rng, 2.0)).collect();
        a[n] = a[n] / a[n].norm();
        let h: Vec<Complex64> = (0..=n).map(|_| random_complex(&mut rng, 2.0)).collect();
        let d = Deformation::linear(ComplexPoly::new(a).unwrap(), &h, p).unwrap();
        match check_lemma1(&d, &chebyshev_points(n + 1), &Lemma1Config::default()) {
            Ok(r) if r.items.iter().all(|i| i.status != ItemStatus::Fail) => {}
            Ok(r) => failures.push(format!("case {case}: {:?}", r.items)),
            Err(e) => failures.push(format!("case {case}: {e}")),
        }
    }
    let mut missed = Vec::new();
    for case in 0..20 {
        let n = rng.random_range(1..=5);
        let a: Vec<Complex64> = (0..=n).map(|_| random_complex(&mut rng, 2.0)).collect();
        let base =
            ComplexPoly::trimmed(a).unwrap_or_else(|_| ComplexPoly::from_real(&[1.0]).unwrap());
        let mut paths = base.embed(p).into_coeffs();
        paths.resize(n + 1, HyperScalar::zero_with(p));
        paths[n] = paths[n].add(&HyperScalar::embed(c(1.0, 0.0))).unwrap();
        let i = rng.random_range(0..=n);
        let q = Exponent::new(rng.random_range(1..=4), rng.random_range(1..=2));
        let pole = HyperScalar::monomial_with(random_complex(&mut rng, 1.0) + c(1.5, 0.0), -q, p);
        paths[i] = paths[i].add(&pole).unwrap();
        let d = Deformation::new(base, paths, DeformationKind::Series).unwrap();
        let verdict = check_lemma1(&d, &chebyshev_points(n + 1), &Lemma1Config::default())
            .ok()
            .and_then(|r| r.item("finite-coefficients").map(|i| i.status));
        if verdict != Some(ItemStatus::Pass) {
            missed.push(format!("case {case}: {verdict:?}"));
        }
    }
    let ok = failures.is_empty() && missed.is_empty();
    let detail = format!(
        "{}/100 deformations pass every item; infinite coefficient detected in {}/20{}",
        100 - failures.len(),
        20 - missed.len(),
        first_problem(&[failures, missed].concat())
    );
    report(2, "evaluation/coefficient characterization", ok, &detail)
}

// ---------------------------------------------------------------------------
// 3. Nearby roots: trajectory limits, Hensel lifting, series vs. ladder

fn criterion_3_nearby_roots() -> bool {
    let mut rng = rng(3);
    let p = Precision::default();
    let k = 8;
    let t = 1e-3;
    let mut worst_limit = 0.0f64;
    let mut hensel_bad = Vec::new();
    let mut consistency_bad = Vec::new();
    let mut worst_ratio = 0.0f64;
    let rc = RootConfig::default();
    for case in 0..100 {
        let n = rng.random_range(2..=6);
        let roots = separated_points(&mut rng, n, 1.5, 0.5);
        let f = monic_from_roots(&roots);
        let h = unit_direction(&mut rng, n + 1);
        let d = Deformation::linear(f.clone(), &h, p).unwrap();

        let tr = root_trajectories(&d, &default_ladder(), &TrajectoryConfig::default()).unwrap();
        for traj in &tr.trajectories {
            worst_limit = worst_limit.max(traj.distance_to_base.unwrap_or(f64::INFINITY));
        }

        let sampled = sample_at(&d, t).unwrap();
        let sampled_roots = find_roots(&sampled, &rc).unwrap().expanded();
        for cl in &find_roots(&f, &rc).unwrap().clusters {
            let s = match hensel_lift_root(
                &d,
                cl.center,
                Exponent::from_integer(k),
                &HenselConfig::default(),
            ) {
                Ok(s) => s,
                Err(e) => {
                    hensel_bad.push(format!("case {case}: {e}"));
                    continue;
                }
            };
            let residual = d.g().eval(&s).unwrap();
            let deep_enough = residual.truncation_order() >= Exponent::from_integer(k);
            if !(deep_enough && residual.valuation() > Valuation::Finite(Exponent::from_integer(k)))
            {
                hensel_bad.push(format!("case {case}: residual {residual}"));
            }

            // |s(t) − numeric root| against C·t^(K+1) plus a rounding floor.
            let coeffs: Vec<f64> = (1..=k)
                .map(|j| s.coeff(Exponent::from_integer(j)).norm())
                .collect();
            let growth = coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| c.powf((k + 1) as f64 / (j + 1) as f64))
                .fold(0.0, f64::max);
            let big_c = 10.0 * growth;
            let st = s.eval_at(t).unwrap();
            let x = *sampled_roots
                .iter()
                .min_by(|a, b| (*a - st).norm().total_cmp(&(*b - st).norm()))
                .unwrap();
            let (_, slope) = sampled.eval_with_derivative(&x).unwrap();
            let kappa = sampled.abs_eval(x) / slope.norm();
            let series_scale: f64 = s.terms().iter().map(|term| term.coeff.norm()).sum();
            let floor = 100.0 * f64::EPSILON * (kappa + series_scale);
            let tol = big_c * t.powi(k as i32 + 1) + floor;
            let diff = (x - st).norm();
            worst_ratio = worst_ratio.max(diff / tol);
            if diff > tol {
                consistency_bad.push(format!("case {case}: |diff| {diff:e} > {tol:e}"));
            }
        }
    }
    let ok = worst_limit <= 1e-6 && hensel_bad.is_empty() && consistency_bad.is_empty();
    let detail = format!(
        "worst limit distance {worst_limit:e} (≤ 1e-6); Hensel failures {}; series/ladder worst diff/tol {worst_ratio:.3}{}",
        hensel_bad.len(),
        first_problem(&[hensel_bad, consistency_bad].concat())
    );
    report(3, "nearby-root property", ok, &detail)
}

// ---------------------------------------------------------------------------
// 4. Exact law for zⁿ against zⁿ − δ

fn criterion_4_monomial_law() -> bool {
    let delta = 1e-8;
    let rc = RootConfig::default();
    let mut worst = 0.0f64;
    for n in 2..=5 {
        let f = ComplexPoly::monomial_minus(n, c(0.0, 0.0));
        let g = ComplexPoly::monomial_minus(n, c(delta, 0.0));
        let expected = delta.powf(1.0 / n as f64);
        let (rf, rg) = (find_roots(&f, &rc).unwrap(), find_roots(&g, &rc).unwrap());
        let deflation = deflation_trace(&f, &g, &rf, &rg)
            .unwrap()
            .alignment
            .max_distance;
        let bottleneck = align_bottleneck(&rf, &rg).unwrap().max_distance;
        for got in [deflation, bottleneck] {
            worst = worst.max((got - expected).abs() / expected);
        }
    }
    let ok = worst <= 1e-10;
    report(
        4,
        "z^n vs z^n - delta",
        ok,
        &format!("worst relative error {worst:e} (≤ 1e-10)"),
    )
}

// ---------------------------------------------------------------------------
// 5 and 6. Deflation vs. bottleneck alignment, and the deflation identity

struct Instance {
    f: ComplexPoly,
    g: ComplexPoly,
}

fn alignment_corpus() -> Vec<Instance> {
    let mut rng = rng(5);
    (0..200)
        .map(|_| {
            let n = rng.random_range(1..=8);
            let roots = separated_points(&mut rng, n, 2.0, 0.5);
            let f = monic_from_roots(&roots);
            let d = max_norm_direction(&mut rng, n + 1);
            let g = ComplexPoly::new(
                f.coeffs()
                    .iter()
                    .zip(&d)
                    .map(|(a, h)| a + h * 1e-6)
                    .collect(),
            )
            .unwrap();
            Instance { f, g }
        })
        .collect()
}

fn criterion_5_alignment_agreement() -> bool {
    let rc = RootConfig::default();
    let mut disagreements = Vec::new();
    for (k, inst) in alignment_corpus().iter().enumerate() {
        let rf = find_roots(&inst.f, &rc).unwrap();
        let rg = find_roots(&inst.g, &rc).unwrap();
        let deflation = deflation_trace(&inst.f, &inst.g, &rf, &rg)
            .unwrap()
            .alignment;
        let bottleneck = align_bottleneck(&rf, &rg).unwrap();
        if !(deflation.is_bijection() && deflation.same_pairing(&bottleneck)) {
            disagreements.push(k);
        }
    }

    let mut rng = rng(55);
    let mut mismatches = Vec::new();
    for case in 0..50 {
        let n = case % 6 + 1;
        let a: Vec<Complex64> = (0..n).map(|_| random_complex(&mut rng, 1.0)).collect();
        let noise = 10f64.powf(rng.random_range(-3.0..0.5));
        let mut b: Vec<Complex64> = a
            .iter()
            .map(|z| z + random_complex(&mut rng, noise))
            .collect();
        b.reverse();
        let got = bottleneck_points(&a, &b).unwrap();
        let best = exhaustive_bottleneck(&a, &b);
        if got.max_distance != best || !got.is_bijection() {
            mismatches.push((case, got.max_distance, best));
        }
    }
    let ok = disagreements.is_empty() && mismatches.is_empty();
    let detail = format!(
        "identical bijections on {}/200 instances; bottleneck = exhaustive on {}/50{}{}",
        200 - disagreements.len(),
        50 - mismatches.len(),
        first_problem(
            &disagreements
                .iter()
                .map(|k| format!("instance {k}"))
                .collect::<Vec<_>>()
        ),
        first_problem(
            &mismatches
                .iter()
                .map(|m| format!("{m:?}"))
                .collect::<Vec<_>>()
        )
    );
    report(5, "deflation vs bottleneck alignment", ok, &detail)
}

fn criterion_6_deflation_identity() -> bool {
    let rc = RootConfig::default();
    let mut rng = rng(6);
    let (mut levels, mut worst) = (0, 0.0f64);
    for inst in alignment_corpus() {
        let rf = find_roots(&inst.f, &rc).unwrap();
        let rg = find_roots(&inst.g, &rc).unwrap();
        let trace = deflation_trace(&inst.f, &inst.g, &rf, &rg).unwrap();
        for step in &trace.steps {
            levels += 1;
            for _ in 0..10 {
                let z = random_complex(&mut rng, 2.5);
                worst = worst.max(step.identity_residual(z) / step.identity_scale(z));
            }
        }
    }
    let ok = worst <= 1e-9;
    let detail = format!("{levels} levels × 10 points, worst residual/scale {worst:e} (≤ 1e-9)");
    report(6, "deflation identity", ok, &detail)
}

// ---------------------------------------------------------------------------
// 7. Modulus of continuity

fn criterion_7_modulus_slopes() -> bool {
    let cfg = SamplerConfig {
        seed: 7,
        ..SamplerConfig::default()
    };
    let epsilons: Vec<f64> = (0..5).map(|k| 10f64.powf(-4.0 + 0.5 * k as f64)).collect();
    let cases = [
        (
            "z^2",
            ComplexPoly::from_real(&[0.0, 0.0, 1.0]).unwrap(),
            2.0,
            0.1,
        ),
        (
            "z-1",
            ComplexPoly::from_real(&[-1.0, 1.0]).unwrap(),
            1.0,
            0.1,
        ),
        (
            "z^3",
            ComplexPoly::from_real(&[0.0, 0.0, 0.0, 1.0]).unwrap(),
            3.0,
            0.2,
        ),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, f, want, tol) in cases {
        let curve = modulus_curve(&f, &epsilons, &cfg).unwrap();
        let slope = curve.slope.unwrap_or(f64::NAN);
        let mut sound = true;
        for p in &curve.points {
            sound &= p.status != PointStatus::Failed && recheck(&f, p, &cfg).unwrap().passed;
        }
        ok &= (slope - want).abs() <= tol && sound;
        parts.push(format!(
            "{name} slope {slope:.4} (want {want} ± {tol}), recheck {}",
            if sound { "ok" } else { "FAILED" }
        ));
    }
    report(7, "epsilon-delta modulus", ok, &parts.join("; "))
}

// ---------------------------------------------------------------------------
// 8. Root finder against the companion-matrix oracle

fn criterion_8_oracle_agreement() -> bool {
    let rc = RootConfig::default();
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let roots = separated_points(&mut rng, n, 2.0, 0.5);
        let lead = random_complex(&mut rng, 1.0) + c(1.5, 0.0);
        let f = monic_from_roots(&roots).scaled(lead).unwrap();
        let ours = find_roots(&f, &rc).unwrap();
        let oracle = roots_oracle(&f).unwrap();
        worst = worst.max(align_bottleneck(&ours, &oracle).unwrap().max_distance);
    }
    let w = ComplexPoly::from_real(&[-120.0, 274.0, -225.0, 85.0, -15.0, 1.0]).unwrap();
    let centers = find_roots(&w, &rc).unwrap().centers();
    let wilkinson = centers
        .iter()
        .enumerate()
        .map(|(k, z)| (z - c(k as f64 + 1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    let ok = worst <= 1e-8 && wilkinson <= 1e-9 && centers.len() == 5;
    let detail = format!(
        "worst oracle deviation {worst:e} (≤ 1e-8); Wilkinson-5 error {wilkinson:e} (≤ 1e-9)"
    );
    report(8, "root finder vs companion oracle", ok, &detail)
}

// ---------------------------------------------------------------------------
// 9. CLI determinism and schema

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_rootflow"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn criterion_9_cli_determinism_and_schema() -> bool {
    let (w, shift, lead) = (
        data("wilkinson5.json"),
        data("shift.json"),
        data("vanishing_lead.json"),
    );
    let runs: Vec<Vec<&str>> = vec![
        vec!["roots", &w, "--verify"],
        vec!["roots", "--inline", "1+2i,-3,0.5i,1"],
        vec![
            "align",
            "--f-inline",
            "-1,0,1",
            "--g-inline",
            "-1.00000001,0,1",
        ],
        vec!["lemma", &shift, "--which", "1"],
        vec!["lemma", &shift, "--which", "2"],
        vec!["lemma", &lead, "--which", "2"],
        vec![
            "--seed",
            "11",
            "--samples",
            "48",
            "continuity",
            "--inline",
            "0,0,1",
            "--epsilons",
            "1e-3,1e-2",
        ],
        vec![
            "--format",
            "csv",
            "--seed",
            "11",
            "continuity",
            "--inline",
            "-1,1",
            "--epsilons",
            "1e-3,1e-2",
        ],
    ];
    let mut problems = Vec::new();
    for args in &runs {
        let (code1, out1) = run_cli(args);
        let (code2, out2) = run_cli(args);
        if code1 != 0 || code2 != 0 || out1 != out2 {
            problems.push(format!(
                "{args:?}: codes {code1}/{code2}, identical {}",
                out1 == out2
            ));
            continue;
        }
        if !args.contains(&"csv") {
            if let Err(e) = validate_report(&String::from_utf8_lossy(&out1)) {
                problems.push(format!("{args:?}: {e}"));
            }
        }
    }
    let ok = problems.is_empty();
    let detail = format!(
        "{} commands run twice, byte-identical and schema-valid{}",
        runs.len() - problems.len(),
        first_problem(&problems)
    );
    report(9, "CLI determinism and schema", ok, &detail)
}

fn main() {
    let criteria: [(&str, fn() -> bool); 9] = [
        (
            "criterion_1_standard_part_homomorphism",
            criterion_1_standard_part_homomorphism,
        ),
        (
            "criterion_2_evaluation_characterization",
            criterion_2_evaluation_characterization,
        ),
        ("criterion_3_nearby_roots", criterion_3_nearby_roots),
        ("criterion_4_monomial_law", criterion_4_monomial_law),
        (
            "criterion_5_alignment_agreement",
            criterion_5_alignment_agreement,
        ),
        (
            "criterion_6_deflation_identity",
            criterion_6_deflation_identity,
        ),
        ("criterion_7_modulus_slopes", criterion_7_modulus_slopes),
        ("criterion_8_oracle_agreement", criterion_8_oracle_agreement),
        (
            "criterion_9_cli_determinism_and_schema",
            criterion_9_cli_determinism_and_schema,
        ),
    ];
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    let mut ran = 0;
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        if !run() {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
