//! Infinitesimal deformations `g(z; ε) = Σ b_i(ε) z^i` of a base polynomial
//! `f(z) = Σ a_i z^i`.
//!
//! Two engines look at the roots of `g`:
//!
//! * [`hensel_lift_root`] lifts a simple root of `f` to a series root of `g`
//!   by Newton iteration in series arithmetic;
//! * [`root_trajectories`] substitutes `ε = t` along a decreasing ladder,
//!   solves numerically, links consecutive root sets by bottleneck matching
//!   and extrapolates each trajectory to `t → 0`. This is the numeric stand-in
//!   for the standard part of a root when lifting is unavailable (multiple
//!   roots).
//!
//! [`check_lemma1`] and [`check_lemma2`] turn the evaluation/coefficient
//! characterization of infinitesimal deformations and the nearby-root
//! property into [`LemmaReport`]s.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::align::{bottleneck_points, Alignment};
use crate::error::{Error, Result};
use crate::infinitesimal::{Exponent, HyperScalar, Magnitude, Precision};
use crate::par::{self, Schedule};
use crate::poly::{find_roots, ComplexPoly, HyperPoly, Poly, RootConfig, RootSet};
use crate::SCHEMA_VERSION;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeformationKind {
    Linear,
    Series,
}

/// A base polynomial with one coefficient path per degree. The base may be
/// shorter than the paths; missing base coefficients are zero (this is how a
/// deformation that raises the degree is expressed).
#[derive(Clone, Debug, PartialEq)]
pub struct Deformation {
    base: ComplexPoly,
    paths: Vec<HyperScalar>,
    kind: DeformationKind,
}

impl Deformation {
    pub fn new(base: ComplexPoly, paths: Vec<HyperScalar>, kind: DeformationKind) -> Result<Self> {
        if paths.len() < base.degree() + 1 {
            return Err(Error::invalid(format!(
                "{} coefficient paths for a degree-{} base",
                paths.len(),
                base.degree()
            )));
        }
        if paths.last().is_none_or(HyperScalar::is_zero) {
            return Err(Error::LeadingCoefficientZero);
        }
        Ok(Deformation { base, paths, kind })
    }

    /// `b_i = a_i + ε·h_i`.
    pub fn linear(
        base: ComplexPoly,
        directions: &[Complex64],
        precision: Precision,
    ) -> Result<Self> {
        if directions.len() != base.degree() + 1 {
            return Err(Error::invalid(
                "one direction per base coefficient is required",
            ));
        }
        let eps = Exponent::from_integer(1);
        let paths = base
            .coeffs()
            .iter()
            .zip(directions)
            .map(|(&a, &h)| {
                HyperScalar::from_terms([(Exponent::from_integer(0), a), (eps, h)], precision)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, paths, DeformationKind::Linear)
    }

    /// `b_i = a_i + Σ_k c_{i,k} ε^{k+1}`.
    pub fn polynomial_in_eps(
        base: ComplexPoly,
        corrections: &[Vec<Complex64>],
        precision: Precision,
    ) -> Result<Self> {
        let n = corrections.len().max(base.degree() + 1);
        let paths = (0..n)
            .map(|i| {
                let a = base.coeffs().get(i).copied().unwrap_or_default();
                let higher = corrections.get(i).into_iter().flatten().enumerate();
                let terms = std::iter::once((Exponent::from_integer(0), a))
                    .chain(higher.map(|(k, &c)| (Exponent::from_integer(k as i64 + 1), c)));
                HyperScalar::from_terms(terms, precision)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, paths, DeformationKind::Series)
    }

    pub fn base(&self) -> &ComplexPoly {
        &self.base
    }

    pub fn paths(&self) -> &[HyperScalar] {
        &self.paths
    }

    pub fn kind(&self) -> DeformationKind {
        self.kind
    }

    /// Degree `n` of `g`.
    pub fn degree(&self) -> usize {
        self.paths.len() - 1
    }

    /// `a_i`, zero beyond the base degree.
    pub fn base_coeff(&self, i: usize) -> Complex64 {
        self.base.coeffs().get(i).copied().unwrap_or_default()
    }

    pub fn g(&self) -> HyperPoly {
        Poly::new(self.paths.clone()).expect("leading path checked nonzero")
    }

    /// Same paths under a new precision.
    pub fn with_precision(&self, precision: Precision) -> Result<Self> {
        let paths = self
            .paths
            .iter()
            .map(|p| p.with_precision(precision))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.base.clone(), paths, self.kind)
    }

    /// The degree is preserved: `a_n ≠ 0` with `b_n` finite and not
    /// infinitesimal.
    pub fn theorem_applicable(&self) -> bool {
        self.base.degree() == self.degree()
            && self.paths[self.degree()].classify() == Magnitude::FiniteNoninfinitesimal
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeformationRepr {
    base: ComplexPoly,
    paths: Vec<HyperScalar>,
    kind: DeformationKind,
}

impl Serialize for Deformation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DeformationRepr {
            base: self.base.clone(),
            paths: self.paths.clone(),
            kind: self.kind,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Deformation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = DeformationRepr::deserialize(d)?;
        Deformation::new(r.base, r.paths, r.kind).map_err(D::Error::custom)
    }
}

/// `b_i ≈ a_i` for every `i`.
pub fn is_infinitesimal_deformation(d: &Deformation) -> bool {
    d.paths
        .iter()
        .enumerate()
        .all(|(i, b)| b.approx_eq(&HyperScalar::embed_with(d.base_coeff(i), b.precision())))
}

/// Substitutes `ε = t`, `0 < t ≤ 1`.
pub fn sample_at(d: &Deformation, t: f64) -> Result<ComplexPoly> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::invalid(format!(
            "sample point must lie in (0, 1], got {t}"
        )));
    }
    let coeffs = d
        .paths
        .iter()
        .map(|b| b.eval_at(t))
        .collect::<Result<Vec<_>>>()?;
    Poly::trimmed(coeffs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HenselConfig {
    /// `|f(r)|` must not exceed this fraction of `Σ|a_i||r|^i`.
    pub root_tolerance: f64,
    /// `|f'(r)|` must exceed this fraction of its absolute scale.
    pub simple_threshold: f64,
    pub max_steps: usize,
}

impl Default for HenselConfig {
    fn default() -> Self {
        HenselConfig {
            root_tolerance: 1e-8,
            simple_threshold: 1e-8,
            max_steps: 64,
        }
    }
}

/// Lifts a simple root `r` of the base to a series root `s` of `g` with
/// `st(s) = r` and `g(s)` vanishing beyond `order`, by Newton steps
/// `s ← s − g(s)/g'(s)` in series arithmetic.
pub fn hensel_lift_root(
    d: &Deformation,
    r: Complex64,
    order: Exponent,
    cfg: &HenselConfig,
) -> Result<HyperScalar> {
    let f = &d.base;
    let residual = f.eval_c(r).norm();
    if residual > cfg.root_tolerance * f.abs_eval(r).max(f64::MIN_POSITIVE) {
        return Err(Error::NotARoot { root: r, residual });
    }
    let df = Poly::trimmed(f.derivative_coeffs()?).ok();
    let slope = df.as_ref().map_or(0.0, |p| p.eval_c(r).norm());
    let slope_scale = df.as_ref().map_or(0.0, |p| p.abs_eval(r));
    if slope <= cfg.simple_threshold * slope_scale || slope == 0.0 {
        return Err(Error::NotSimpleRoot {
            root: r,
            derivative: slope,
        });
    }

    let g = d.g();
    let precision = g.leading().precision();
    if order > precision.order {
        return Err(Error::invalid(format!(
            "requested order {order} exceeds the truncation order {}",
            precision.order
        )));
    }
    let mut s = HyperScalar::embed_with(r, precision);
    for _ in 0..cfg.max_steps {
        let (value, slope) = g.eval_with_derivative(&s)?;
        if value.is_zero() && value.truncation_order() >= order {
            return Ok(s);
        }
        if slope.classify() != Magnitude::FiniteNoninfinitesimal {
            return Err(Error::NotSimpleRoot {
                root: r,
                derivative: slope.standard_part().map_or(f64::INFINITY, |c| c.norm()),
            });
        }
        s = s.sub(&value.div(&slope)?)?;
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_steps,
        best: vec![s.standard_part().unwrap_or_default()],
    })
}

/// Default ladder: `10⁻¹ … 10⁻⁶`.
pub fn default_ladder() -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub roots: RootConfig,
    pub schedule: Schedule,
    /// Two pairings whose bottleneck values differ by less than this
    /// (relative, with the same absolute floor) count as tied.
    pub tie_tolerance: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            roots: RootConfig {
                schedule: Schedule::Sequential,
                ..RootConfig::default()
            },
            schedule: Schedule::Parallel,
            tie_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// One root per ladder point.
    pub points: Vec<Complex64>,
    pub limit: Complex64,
    /// Multiplicity of the base root nearest to the last point; the
    /// extrapolation is in powers of `t^(1/m)`.
    pub multiplicity: usize,
    pub extrapolation_residual: f64,
    pub nearest_base_root: Option<Complex64>,
    pub distance_to_base: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingAmbiguity {
    /// Index of the ladder step (pairing between points `step - 1` and
    /// `step`).
    pub step: usize,
    pub chosen: Vec<(usize, usize)>,
    pub alternative: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectories {
    pub ladder: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    pub ambiguities: Vec<PairingAmbiguity>,
    /// Roots of the base, when it has degree at least one.
    pub base_roots: Option<RootSet>,
}

fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::invalid("empty ladder"));
    }
    if ladder.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::invalid("ladder values must lie in (0, 1]"));
    }
    if ladder.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("ladder must be strictly decreasing"));
    }
    Ok(())
}

/// Numeric root paths of `g` along a decreasing ladder of `t` values.
pub fn root_trajectories(
    d: &Deformation,
    ladder: &[f64],
    cfg: &TrajectoryConfig,
) -> Result<Trajectories> {
    validate_ladder(ladder)?;
    let root_lists: Vec<Vec<Complex64>> = par::map_indexed(cfg.schedule, ladder, |_, &t| {
        let p = sample_at(d, t)?;
        Ok(find_roots(&p, &cfg.roots)?.expanded())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let n = root_lists[0].len();
    if let Some(bad) = root_lists.iter().find(|r| r.len() != n) {
        return Err(Error::SizeMismatch {
            left: n,
            right: bad.len(),
        });
    }

    let mut paths: Vec<Vec<Complex64>> = root_lists[0].iter().map(|&z| vec![z]).collect();
    let mut ambiguities = Vec::new();
    for (step, roots) in root_lists.iter().enumerate().skip(1) {
        let ends: Vec<Complex64> = paths.iter().map(|p| *p.last().expect("nonempty")).collect();
        let alignment = bottleneck_points(&ends, roots)?;
        if let Some(alternative) = alternative_pairing(&ends, roots, &alignment, cfg.tie_tolerance)
        {
            ambiguities.push(PairingAmbiguity {
                step,
                chosen: alignment.pairs.clone(),
                alternative,
            });
        }
        for &(i, j) in &alignment.pairs {
            paths[i].push(roots[j]);
        }
    }

    let base_roots = if d.base.degree() >= 1 {
        Some(find_roots(&d.base, &cfg.roots)?)
    } else {
        None
    };
    let trajectories = paths
        .into_iter()
        .map(|points| {
            let last = *points.last().expect("nonempty");
            let multiplicity = base_roots
                .as_ref()
                .and_then(|rs| rs.nearest(last))
                .map_or(1, |c| c.multiplicity);
            let (limit, extrapolation_residual) = extrapolate(ladder, &points, multiplicity);
            let nearest = base_roots
                .as_ref()
                .and_then(|rs| rs.nearest(limit))
                .map(|c| c.center);
            Trajectory {
                limit,
                multiplicity,
                extrapolation_residual,
                nearest_base_root: nearest,
                distance_to_base: nearest.map(|r| (r - limit).norm()),
                points,
            }
        })
        .collect();
    Ok(Trajectories {
        ladder: ladder.to_vec(),
        trajectories,
        ambiguities,
        base_roots,
    })
}

/// Least-squares fit of `c₀ + c₁ t^(1/m)` over the last three ladder points;
/// returns `(c₀, max fit residual)`.
fn extrapolate(ladder: &[f64], points: &[Complex64], m: usize) -> (Complex64, f64) {
    let k = ladder.len().min(3);
    let ts = &ladder[ladder.len() - k..];
    let ys = &points[points.len() - k..];
    if k == 1 {
        return (ys[0], 0.0);
    }
    let us: Vec<f64> = ts.iter().map(|t| t.powf(1.0 / m as f64)).collect();
    let kf = k as f64;
    let su: f64 = us.iter().sum();
    let suu: f64 = us.iter().map(|u| u * u).sum();
    let sy: Complex64 = ys.iter().sum();
    let suy: Complex64 = us.iter().zip(ys).map(|(u, y)| y * u).sum();
    let det = kf * suu - su * su;
    let c1 = (suy * kf - sy * su) / det;
    let c0 = (sy - c1 * su) / kf;
    let residual = us
        .iter()
        .zip(ys)
        .map(|(u, y)| (y - c0 - c1 * u).norm())
        .fold(0.0, f64::max);
    (c0, residual)
}

/// A different perfect matching within the tie tolerance of the bottleneck
/// value, assigning some trajectory a genuinely different point.
fn alternative_pairing(
    a: &[Complex64],
    b: &[Complex64],
    chosen: &Alignment,
    tie: f64,
) -> Option<Vec<(usize, usize)>> {
    let n = a.len();
    let threshold = chosen.max_distance * (1.0 + tie) + tie;
    for &(i, j) in &chosen.pairs {
        let mut d: Vec<Vec<f64>> = a
            .iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).collect())
            .collect();
        for (jj, y) in b.iter().enumerate() {
            if (y - b[j]).norm() <= tie * (1.0 + y.norm()) {
                d[i][jj] = f64::INFINITY;
            }
        }
        if let Some(assign) = perfect_matching(&d, threshold) {
            let mut pairs: Vec<(usize, usize)> = (0..n).map(|r| (r, assign[r])).collect();
            pairs.sort();
            return Some(pairs);
        }
    }
    None
}

fn perfect_matching(d: &[Vec<f64>], t: f64) -> Option<Vec<usize>> {
    let n = d.len();
    let mut match_col: Vec<Option<usize>> = vec![None; n];
    fn augment(
        i: usize,
        d: &[Vec<f64>],
        t: f64,
        seen: &mut [bool],
        mc: &mut [Option<usize>],
    ) -> bool {
        for j in 0..d.len() {
            if seen[j] || d[i][j] > t {
                continue;
            }
            seen[j] = true;
            if mc[j].is_none_or(|k| augment(k, d, t, seen, mc)) {
                mc[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..n {
        let mut seen = vec![false; n];
        if !augment(i, d, t, &mut seen, &mut match_col) {
            return None;
        }
    }
    let mut row = vec![0; n];
    for (j, i) in match_col.iter().enumerate() {
        row[i.expect("perfect")] = j;
    }
    Some(row)
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemStatus {
    Pass,
    Fail,
    /// Recorded but not counted as a failure (violated hypotheses, vacuous
    /// premises).
    Informational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportItem {
    pub name: String,
    pub status: ItemStatus,
    pub detail: String,
    pub witness: Option<serde_json::Value>,
}

impl ReportItem {
    fn new(name: impl Into<String>, status: ItemStatus, detail: impl Into<String>) -> Self {
        ReportItem {
            name: name.into(),
            status,
            detail: detail.into(),
            witness: None,
        }
    }

    fn with_witness(mut self, witness: serde_json::Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LemmaClaim {
    Lemma1,
    Lemma2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaReport {
    pub schema: String,
    pub claim: LemmaClaim,
    pub items: Vec<ReportItem>,
    pub tolerances: BTreeMap<String, f64>,
    pub passed: bool,
}

impl LemmaReport {
    fn new(claim: LemmaClaim, items: Vec<ReportItem>, tolerances: BTreeMap<String, f64>) -> Self {
        let passed = items.iter().all(|i| i.status != ItemStatus::Fail);
        LemmaReport {
            schema: SCHEMA_VERSION.to_string(),
            claim,
            items,
            tolerances,
            passed,
        }
    }

    pub fn item(&self, name: &str) -> Option<&ReportItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

fn cjson(z: Complex64) -> serde_json::Value {
    serde_json::json!([z.re, z.im])
}

// ---------------------------------------------------------------------------
// Evaluation at standard points vs. coefficients

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma1Config {
    /// Recovered coefficients must match the stored paths term by term
    /// within this relative tolerance.
    pub interpolation_tolerance: f64,
}

impl Default for Lemma1Config {
    fn default() -> Self {
        Lemma1Config {
            interpolation_tolerance: 1e-9,
        }
    }
}

/// `n + 1` Chebyshev points on `[-1, 1]`.
pub fn chebyshev_points(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let x = (std::f64::consts::PI * (2 * k + 1) as f64 / (2 * count) as f64).cos();
            Complex64::new(x, 0.0)
        })
        .collect()
}

/// Checks, in the series model, that
/// (iii) `b_i ≈ a_i` implies (ii) `g(z) ≈ f(z)` at every sample point, that
/// (ii) at `n + 1` points implies (iii) via exact interpolation of the sampled
/// values, and that an infinite coefficient forces an infinite value at one
/// of the points.
pub fn check_lemma1(
    d: &Deformation,
    points: &[Complex64],
    cfg: &Lemma1Config,
) -> Result<LemmaReport> {
    let n = d.degree();
    if points.len() < n + 1 {
        return Err(Error::invalid(format!(
            "{} sample points for degree {n}; need at least {}",
            points.len(),
            n + 1
        )));
    }
    for (i, p) in points.iter().enumerate() {
        if points[..i].contains(p) {
            return Err(Error::invalid(format!("sample point {p} repeated")));
        }
    }
    let g = d.g();
    let precision = g.leading().precision();
    let values = points
        .iter()
        .map(|&z| g.eval_standard(z))
        .collect::<Result<Vec<_>>>()?;
    let base_values: Vec<HyperScalar> = points
        .iter()
        .map(|&z| HyperScalar::embed_with(d.base.eval_c(z), precision))
        .collect();

    let deformation = is_infinitesimal_deformation(d);
    let mismatch = values
        .iter()
        .zip(&base_values)
        .position(|(v, f)| !v.approx_eq(f));
    let evaluations_close = mismatch.is_none();

    let mut items = Vec::new();
    items.push(if !deformation {
        ReportItem::new(
            "iii-implies-ii",
            ItemStatus::Pass,
            "premise (iii) false; vacuous",
        )
    } else if let Some(k) = mismatch {
        ReportItem::new(
            "iii-implies-ii",
            ItemStatus::Fail,
            "g(z) not ≈ f(z) at a sample point",
        )
        .with_witness(serde_json::json!({"point": cjson(points[k]), "value": values[k]}))
    } else {
        ReportItem::new(
            "iii-implies-ii",
            ItemStatus::Pass,
            "g(z) ≈ f(z) at every sample point",
        )
    });

    let recovered = interpolate(&points[..n + 1], &values[..n + 1])?;
    let order = precision.order;
    let tol = cfg.interpolation_tolerance;
    let inconsistent = recovered
        .iter()
        .zip(&d.paths)
        .position(|(r, b)| !r.agrees_with(b, order, tol));
    items.push(match inconsistent {
        None => ReportItem::new(
            "interpolation",
            ItemStatus::Pass,
            "coefficients recovered from n+1 evaluations match the paths",
        ),
        Some(i) => ReportItem::new(
            "interpolation",
            ItemStatus::Fail,
            "recovered coefficient differs from its path",
        )
        .with_witness(
            serde_json::json!({"index": i, "recovered": recovered[i], "path": d.paths[i]}),
        ),
    });

    items.push(if !evaluations_close {
        ReportItem::new(
            "ii-implies-iii",
            ItemStatus::Pass,
            "premise (ii) false; vacuous",
        )
    } else {
        let bad = recovered
            .iter()
            .enumerate()
            .position(|(i, r)| !r.approx_eq(&HyperScalar::embed_with(d.base_coeff(i), precision)));
        match bad {
            None => ReportItem::new(
                "ii-implies-iii",
                ItemStatus::Pass,
                "every recovered coefficient is ≈ the base coefficient",
            ),
            Some(i) => ReportItem::new(
                "ii-implies-iii",
                ItemStatus::Fail,
                "g ≈ f at the sample points but a recovered coefficient is not ≈ a_i",
            )
            .with_witness(serde_json::json!({"index": i, "recovered": recovered[i]})),
        }
    });

    let infinite_paths: Vec<usize> = d
        .paths
        .iter()
        .enumerate()
        .filter(|(_, b)| b.classify() == Magnitude::Infinite)
        .map(|(i, _)| i)
        .collect();
    items.push(if infinite_paths.is_empty() {
        ReportItem::new(
            "finite-coefficients",
            ItemStatus::Informational,
            "all coefficients finite; clause not exercised",
        )
    } else {
        match values
            .iter()
            .position(|v| v.classify() == Magnitude::Infinite)
        {
            Some(k) => ReportItem::new(
                "finite-coefficients",
                ItemStatus::Pass,
                "an infinite coefficient yields an infinite value at a sample point",
            )
            .with_witness(serde_json::json!({
                "infinite_paths": infinite_paths,
                "point": cjson(points[k]),
                "value": values[k],
            })),
            None => ReportItem::new(
                "finite-coefficients",
                ItemStatus::Fail,
                "infinite coefficient but every sample value is finite",
            )
            .with_witness(serde_json::json!({"infinite_paths": infinite_paths})),
        }
    });

    let tolerances = BTreeMap::from([
        ("interpolation".to_string(), tol),
        ("tau".to_string(), precision.tolerance),
        ("truncation_order".to_string(), ratio_f64(precision.order)),
    ]);
    Ok(LemmaReport::new(LemmaClaim::Lemma1, items, tolerances))
}

fn ratio_f64(e: Exponent) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

/// Solves the Vandermonde system `Σ_i c_i z_k^i = v_k`. The matrix is
/// standard, so it is factored in complex arithmetic with partial pivoting;
/// the series right-hand side is carried through in series arithmetic.
pub fn interpolate(points: &[Complex64], values: &[HyperScalar]) -> Result<Vec<HyperScalar>> {
    let m = points.len();
    if values.len() != m || m == 0 {
        return Err(Error::invalid(
            "one value per interpolation point is required",
        ));
    }
    let mut a: Vec<Vec<Complex64>> = points
        .iter()
        .map(|&z| (0..m).map(|i| z.powu(i as u32)).collect())
        .collect();
    let mut rhs: Vec<HyperScalar> = values.to_vec();
    let scale = a.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&x, &y| a[x][col].norm().total_cmp(&a[y][col].norm()))
            .expect("nonempty");
        let pivot = a[piv][col].norm();
        if pivot <= 1e-12 * scale {
            return Err(Error::InterpolationSingular { pivot });
        }
        a.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..m {
            let factor = a[row][col] / a[col][col];
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in col..m {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            rhs[row] = rhs[row].sub(&rhs[col].scale(factor)?)?;
        }
    }
    let mut x: Vec<HyperScalar> = vec![HyperScalar::zero(); m];
    for row in (0..m).rev() {
        let mut acc = rhs[row].clone();
        for k in row + 1..m {
            acc = acc.sub(&x[k].scale(a[row][k])?)?;
        }
        x[row] = acc.scale(a[row][row].inv())?;
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Roots of g have standard parts that are roots of f

#[derive(Clone, Debug, PartialEq)]
pub struct Lemma2Config {
    pub ladder: Vec<f64>,
    pub trajectories: TrajectoryConfig,
    /// Absolute floor of the limit-matching tolerance, relative to
    /// `max(1, |r|)`.
    pub limit_floor: f64,
}

impl Default for Lemma2Config {
    fn default() -> Self {
        Lemma2Config {
            ladder: default_ladder(),
            trajectories: TrajectoryConfig::default(),
            limit_floor: 1e-12,
        }
    }
}

/// Limit-matching tolerance for a trajectory:
/// `10 · (extrapolation residual + root-finder contribution)` where the
/// root-finder contribution is `residual_bound^(1/m) · max(1, |r|)`.
pub fn limit_tolerance(tr: &Trajectory, base: &RootSet, floor: f64) -> f64 {
    let r = tr.nearest_base_root.map_or(1.0, |z| z.norm().max(1.0));
    let finder = base.residual_bound.powf(1.0 / tr.multiplicity as f64) * r;
    10.0 * (tr.extrapolation_residual + finder) + floor * r
}

/// A trajectory grows at least like `1/t`: each ladder step multiplies its
/// magnitude by at least `0.9 · t_k / t_{k+1}`.
fn diverges(tr: &Trajectory, ladder: &[f64]) -> bool {
    ladder.len() >= 2
        && tr
            .points
            .windows(2)
            .zip(ladder.windows(2))
            .all(|(p, t)| p[1].norm() >= 0.9 * (t[0] / t[1]) * p[0].norm())
}

/// Machine check of the nearby-root property along a ladder.
pub fn check_lemma2(d: &Deformation, cfg: &Lemma2Config) -> LemmaReport {
    let mut items = Vec::new();
    let mut tolerances = BTreeMap::from([("limit_floor".to_string(), cfg.limit_floor)]);
    let deformation = is_infinitesimal_deformation(d);
    let applicable = d.theorem_applicable();
    items.push(if deformation {
        ReportItem::new(
            "hypothesis.deformation",
            ItemStatus::Pass,
            "b_i ≈ a_i for every i",
        )
    } else {
        ReportItem::new(
            "hypothesis.deformation",
            ItemStatus::Informational,
            "g is not an infinitesimal deformation of f; limit claims are informational",
        )
    });

    let tr = match root_trajectories(d, &cfg.ladder, &cfg.trajectories) {
        Ok(tr) => tr,
        Err(e) => {
            items.push(ReportItem::new(
                "trajectories",
                ItemStatus::Fail,
                e.to_string(),
            ));
            return LemmaReport::new(LemmaClaim::Lemma2, items, tolerances);
        }
    };
    if !tr.ambiguities.is_empty() {
        items.push(
            ReportItem::new(
                "pairing-ambiguity",
                ItemStatus::Informational,
                "tied pairings between consecutive ladder points",
            )
            .with_witness(serde_json::to_value(&tr.ambiguities).expect("serializable")),
        );
    }

    let divergent: Vec<usize> = tr
        .trajectories
        .iter()
        .enumerate()
        .filter(|(_, t)| diverges(t, &tr.ladder))
        .map(|(k, _)| k)
        .collect();
    if applicable {
        items.push(ReportItem::new(
            "hypothesis.leading-coefficient",
            ItemStatus::Pass,
            "b_n ≈ a_n ≠ 0",
        ));
        let mut worst: Option<(usize, usize, f64, f64)> = None;
        for (step, &t) in tr.ladder.iter().enumerate() {
            let sample = sample_at(d, t).ok();
            let bound = sample.map_or(f64::INFINITY, |p| cauchy_bound(&p));
            for (k, traj) in tr.trajectories.iter().enumerate() {
                let m = traj.points[step].norm();
                if worst.is_none_or(|w| m / bound > w.2 / w.3) {
                    worst = Some((k, step, m, bound));
                }
            }
        }
        let (k, step, m, bound) = worst.expect("nonempty");
        let within = m <= bound * (1.0 + 1e-9);
        items.push(
            ReportItem::new(
                "finiteness",
                if within {
                    ItemStatus::Pass
                } else {
                    ItemStatus::Fail
                },
                "every trajectory point lies inside the coefficient-ratio bound 1 + max|b_i/b_n|",
            )
            .with_witness(serde_json::json!({
                "trajectory": k, "t": tr.ladder[step], "magnitude": m, "bound": bound,
            })),
        );
    } else {
        let detail = if divergent.is_empty() {
            "b_n is not ≈ a nonzero a_n (hypothesis violated); no trajectory observed growing like 1/t"
        } else {
            "b_n is not ≈ a nonzero a_n (hypothesis violated); a trajectory grows like 1/t"
        };
        let growth: Vec<Vec<f64>> = divergent
            .iter()
            .map(|&k| tr.trajectories[k].points.iter().map(|z| z.norm()).collect())
            .collect();
        items.push(
            ReportItem::new(
                "hypothesis.leading-coefficient",
                ItemStatus::Informational,
                detail,
            )
            .with_witness(serde_json::json!({
                "divergent_trajectories": divergent,
                "magnitudes": growth,
                "ladder": tr.ladder,
            })),
        );
    }

    if let Some(base) = &tr.base_roots {
        tolerances.insert("base_residual_bound".to_string(), base.residual_bound);
        for (k, traj) in tr.trajectories.iter().enumerate() {
            let name = format!("limit-is-root[{k}]");
            let tol = limit_tolerance(traj, base, cfg.limit_floor);
            let dist = traj.distance_to_base.unwrap_or(f64::INFINITY);
            let witness = serde_json::json!({
                "limit": cjson(traj.limit),
                "nearest_root": traj.nearest_base_root.map(cjson),
                "distance": dist,
                "tolerance": tol,
                "multiplicity": traj.multiplicity,
            });
            let status = if !deformation || (divergent.contains(&k) && !applicable) {
                ItemStatus::Informational
            } else if dist <= tol {
                ItemStatus::Pass
            } else {
                ItemStatus::Fail
            };
            let detail = match status {
                ItemStatus::Pass => "extrapolated limit is a root of f",
                ItemStatus::Fail => "extrapolated limit is not within tolerance of a root of f",
                ItemStatus::Informational => "limit not claimed (hypothesis not met)",
            };
            items.push(ReportItem::new(name, status, detail).with_witness(witness));
        }
    }
    LemmaReport::new(LemmaClaim::Lemma2, items, tolerances)
}

fn cauchy_bound(p: &ComplexPoly) -> f64 {
    let lead = p.leading().norm();
    1.0 + p.coeffs()[..p.degree()]
        .iter()
        .map(|c| c.norm() / lead)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn e(n: i64) -> Exponent {
        Exponent::from_integer(n)
    }

    fn series(pairs: &[(i64, f64)]) -> HyperScalar {
        HyperScalar::from_terms(
            pairs.iter().map(|&(k, x)| (e(k), c(x))),
            Precision::default(),
        )
        .unwrap()
    }

    fn poly(coeffs: &[f64]) -> ComplexPoly {
        ComplexPoly::from_real(coeffs).unwrap()
    }

    /// f = z² − 1, g = z² − 1 − ε.
    fn unit_shift() -> Deformation {
        Deformation::new(
            poly(&[-1.0, 0.0, 1.0]),
            vec![
                series(&[(0, -1.0), (1, -1.0)]),
                series(&[]),
                series(&[(0, 1.0)]),
            ],
            DeformationKind::Series,
        )
        .unwrap()
    }

    #[test]
    fn linear_paths_are_deformations() {
        let d = Deformation::linear(
            poly(&[2.0, -3.0, 1.0]),
            &[c(5.0), Complex64::new(0.0, -7.0), c(1.0)],
            Precision::default(),
        )
        .unwrap();
        assert!(is_infinitesimal_deformation(&d));
    }

    #[test]
    fn unit_offset_is_not_a_deformation() {
        let mut paths = poly(&[2.0, -3.0, 1.0])
            .embed(Precision::default())
            .into_coeffs();
        paths[1] = series(&[(0, -2.0)]);
        let d = Deformation::new(poly(&[2.0, -3.0, 1.0]), paths, DeformationKind::Series).unwrap();
        assert!(!is_infinitesimal_deformation(&d));
    }

    #[test]
    fn infinitesimal_leading_path_is_not_a_deformation() {
        let d = Deformation::new(
            poly(&[-1.0, 1.0]),
            vec![series(&[(0, -1.0)]), series(&[(1, 1.0)])],
            DeformationKind::Series,
        )
        .unwrap();
        assert!(!is_infinitesimal_deformation(&d));
        assert!(!d.theorem_applicable());
    }

    #[test]
    fn sampling_substitutes_t() {
        let p = sample_at(&unit_shift(), 1e-3).unwrap();
        assert!((p.coeffs()[0] - c(-1.001)).norm() < 1e-15);
        assert_eq!(p.coeffs()[1], c(0.0));
        assert_eq!(p.coeffs()[2], c(1.0));
        assert!(sample_at(&unit_shift(), 0.0).is_err());
        assert!(sample_at(&unit_shift(), 2.0).is_err());
    }

    #[test]
    fn sampling_error_is_linear_in_t() {
        let h = [c(0.3), Complex64::new(-1.0, 0.5), c(0.8)];
        let d = Deformation::linear(poly(&[1.0, 2.0, 3.0]), &h, Precision::default()).unwrap();
        for t in [1e-1, 1e-2, 1e-4] {
            let p = sample_at(&d, t).unwrap();
            for i in 0..3 {
                let gap = (p.coeffs()[i] - d.base_coeff(i)).norm();
                assert!(gap <= h[i].norm() * t * (1.0 + 1e-12));
            }
            let q = sample_at(&d, t / 10.0).unwrap();
            for i in 0..3 {
                let gap = (p.coeffs()[i] - q.coeffs()[i]).norm();
                assert!((gap - 0.9 * t * h[i].norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn hensel_square_root_expansion() {
        let s = hensel_lift_root(&unit_shift(), c(1.0), e(8), &HenselConfig::default()).unwrap();
        // √(1+ε) = Σ binom(1/2, k) ε^k
        let mut binom = 1.0;
        for k in 0..=8 {
            let got = s.coeff(e(k));
            assert!((got - c(binom)).norm() < 1e-13, "k={k}: {got} vs {binom}");
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        let residual = unit_shift().g().eval(&s).unwrap();
        assert!(residual.is_zero());
    }

    #[test]
    fn hensel_linear_is_exact() {
        let b0 = series(&[(0, -2.0), (1, 3.0), (2, -0.5)]);
        let d = Deformation::new(
            poly(&[-2.0, 1.0]),
            vec![b0.clone(), series(&[(0, 1.0)])],
            DeformationKind::Series,
        )
        .unwrap();
        let s = hensel_lift_root(&d, c(2.0), e(8), &HenselConfig::default()).unwrap();
        assert!(s.agrees_with(&b0.neg(), e(8), 1e-15));
    }

    #[test]
    fn hensel_fixed_point_without_perturbation() {
        let f = poly(&[-6.0, 11.0, -6.0, 1.0]);
        let d = Deformation::new(
            f.clone(),
            f.embed(Precision::default()).into_coeffs(),
            DeformationKind::Series,
        )
        .unwrap();
        let s = hensel_lift_root(&d, c(2.0), e(8), &HenselConfig::default()).unwrap();
        assert_eq!(s, HyperScalar::embed(c(2.0)));
    }

    #[test]
    fn hensel_rejects_double_root() {
        let f = poly(&[0.0, 0.0, 1.0]);
        let d = Deformation::linear(f, &[c(-1.0), c(0.0), c(0.0)], Precision::default()).unwrap();
        assert!(matches!(
            hensel_lift_root(&d, c(0.0), e(8), &HenselConfig::default()),
            Err(Error::NotSimpleRoot { .. })
        ));
        assert!(matches!(
            hensel_lift_root(&d, c(0.5), e(8), &HenselConfig::default()),
            Err(Error::NotARoot { .. })
        ));
    }

    #[test]
    fn viete_reconstruction_from_lifted_roots() {
        let f =
            ComplexPoly::from_roots(c(2.0), &[c(1.0), c(-2.0), Complex64::new(0.5, 1.5)]).unwrap();
        let h = [c(0.4), Complex64::new(-0.3, 0.2), c(0.7), c(-0.1)];
        let d = Deformation::linear(f.clone(), &h, Precision::default()).unwrap();
        let lifted: Vec<HyperScalar> = [c(1.0), c(-2.0), Complex64::new(0.5, 1.5)]
            .iter()
            .map(|&r| hensel_lift_root(&d, r, e(8), &HenselConfig::default()).unwrap())
            .collect();
        let rebuilt = HyperPoly::from_roots(d.paths()[3].clone(), &lifted).unwrap();
        for (got, want) in rebuilt.coeffs().iter().zip(d.paths()) {
            assert!(got.agrees_with(want, e(8), 1e-10), "{got} vs {want}");
        }
    }

    #[test]
    fn double_root_trajectories() {
        let d = Deformation::new(
            poly(&[0.0, 0.0, 1.0]),
            vec![series(&[(1, -1.0)]), series(&[]), series(&[(0, 1.0)])],
            DeformationKind::Series,
        )
        .unwrap();
        let tr = root_trajectories(&d, &default_ladder(), &TrajectoryConfig::default()).unwrap();
        assert_eq!(tr.trajectories.len(), 2);
        for traj in &tr.trajectories {
            for (z, t) in traj.points.iter().zip(&tr.ladder) {
                assert!((z.norm() - t.sqrt()).abs() < 1e-15);
            }
            assert_eq!(traj.multiplicity, 2);
            assert!(traj.limit.norm() < 1e-12);
        }
        assert!(tr.ambiguities.is_empty());
    }

    #[test]
    fn simple_roots_trajectories() {
        // f = (z−1)(z−2), g = f + ε
        let d = Deformation::new(
            poly(&[2.0, -3.0, 1.0]),
            vec![
                series(&[(0, 2.0), (1, 1.0)]),
                series(&[(0, -3.0)]),
                series(&[(0, 1.0)]),
            ],
            DeformationKind::Series,
        )
        .unwrap();
        let tr = root_trajectories(&d, &default_ladder(), &TrajectoryConfig::default()).unwrap();
        let mut limits: Vec<f64> = tr.trajectories.iter().map(|t| t.limit.re).collect();
        limits.sort_by(f64::total_cmp);
        assert!((limits[0] - 1.0).abs() < 1e-8);
        assert!((limits[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn unperturbed_trajectories_are_constant() {
        let f = poly(&[2.0, -3.0, 1.0]);
        let d = Deformation::new(
            f.clone(),
            f.embed(Precision::default()).into_coeffs(),
            DeformationKind::Series,
        )
        .unwrap();
        let tr = root_trajectories(&d, &default_ladder(), &TrajectoryConfig::default()).unwrap();
        for traj in &tr.trajectories {
            assert!(traj.points.iter().all(|z| *z == traj.points[0]));
        }
    }

    #[test]
    fn ladder_validation() {
        let cfg = TrajectoryConfig::default();
        assert!(root_trajectories(&unit_shift(), &[1e-2, 1e-1], &cfg).is_err());
        assert!(root_trajectories(&unit_shift(), &[], &cfg).is_err());
    }

    #[test]
    fn lemma2_passes_for_unit_shift() {
        let report = check_lemma2(&unit_shift(), &Lemma2Config::default());
        assert!(report.passed, "{report:#?}");
        let limits: Vec<f64> = report
            .items
            .iter()
            .filter(|i| i.name.starts_with("limit-is-root"))
            .map(|i| i.witness.as_ref().unwrap()["limit"][0].as_f64().unwrap())
            .collect();
        assert_eq!(limits.len(), 2);
        assert!(limits.iter().any(|&x| (x - 1.0).abs() < 1e-9));
        assert!(limits.iter().any(|&x| (x + 1.0).abs() < 1e-9));
    }

    #[test]
    fn lemma2_hypothesis_violation_is_informational() {
        // g = εz² + z − 1 against f = z − 1.
        let d = Deformation::new(
            poly(&[-1.0, 1.0]),
            vec![
                series(&[(0, -1.0)]),
                series(&[(0, 1.0)]),
                series(&[(1, 1.0)]),
            ],
            DeformationKind::Series,
        )
        .unwrap();
        let report = check_lemma2(&d, &Lemma2Config::default());
        assert!(report.passed, "{report:#?}");
        let item = report.item("hypothesis.leading-coefficient").unwrap();
        assert_eq!(item.status, ItemStatus::Informational);
        let w = item.witness.as_ref().unwrap();
        assert_eq!(w["divergent_trajectories"].as_array().unwrap().len(), 1);
        // The large root is (−1 − √(1+4t))/(2t).
        let mags = w["magnitudes"][0].as_array().unwrap();
        for (m, t) in mags.iter().zip(default_ladder()) {
            let exact = (1.0 + (1.0 + 4.0 * t).sqrt()) / (2.0 * t);
            assert!((m.as_f64().unwrap() - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn lemma2_trivial_for_identity() {
        let f = poly(&[2.0, -3.0, 1.0]);
        let d = Deformation::new(
            f.clone(),
            f.embed(Precision::default()).into_coeffs(),
            DeformationKind::Series,
        )
        .unwrap();
        assert!(check_lemma2(&d, &Lemma2Config::default()).passed);
    }

    #[test]
    fn lemma1_linear_deformation() {
        let d = Deformation::linear(
            poly(&[1.0, -2.0, 0.5]),
            &[c(0.3), c(-0.7), Complex64::new(0.2, 0.9)],
            Precision::default(),
        )
        .unwrap();
        let points = [c(-1.0), c(0.5), c(2.0)];
        let report = check_lemma1(&d, &points, &Lemma1Config::default()).unwrap();
        assert!(report.passed, "{report:#?}");
        for name in ["iii-implies-ii", "interpolation", "ii-implies-iii"] {
            assert_eq!(report.item(name).unwrap().status, ItemStatus::Pass);
        }
    }

    #[test]
    fn lemma1_infinite_coefficient() {
        let d = Deformation::new(
            poly(&[0.0, 1.0]),
            vec![series(&[(-1, 1.0)]), series(&[(0, 1.0)])],
            DeformationKind::Series,
        )
        .unwrap();
        let report = check_lemma1(&d, &[c(0.0), c(1.0)], &Lemma1Config::default()).unwrap();
        assert!(report.passed, "{report:#?}");
        let item = report.item("finite-coefficients").unwrap();
        assert_eq!(item.status, ItemStatus::Pass);
        assert_eq!(
            item.witness.as_ref().unwrap()["point"][0].as_f64(),
            Some(0.0)
        );
    }

    #[test]
    fn lemma1_rejects_too_few_or_repeated_points() {
        let d = unit_shift();
        assert!(check_lemma1(&d, &[c(0.0), c(1.0)], &Lemma1Config::default()).is_err());
        assert!(check_lemma1(&d, &[c(0.0), c(1.0), c(0.0)], &Lemma1Config::default()).is_err());
        assert!(matches!(
            interpolate(
                &[c(0.0), c(1e-14)],
                &[series(&[(0, 1.0)]), series(&[(0, 1.0)])]
            ),
            Err(Error::InterpolationSingular { .. })
        ));
    }

    #[test]
    fn deformation_json() {
        let d = unit_shift();
        let json = serde_json::to_string(&d).unwrap();
        assert!(
            json.starts_with(r#"{"base":{"coeffs":[[-1.0,0.0],[0.0,0.0],[1.0,0.0]]},"paths":["#)
        );
        assert!(json.ends_with(r#""kind":"series"}"#));
        let back: Deformation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
