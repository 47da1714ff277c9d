use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexPoly;
use crate::error::{Error, Result};
use crate::par::{self, Schedule};

/// Golden angle in radians, used to offset the initial circle.
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;

/// Below this degree the per-root sweep always runs sequentially; the
/// results are identical either way.
const PARALLEL_MIN_DEGREE: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootConfig {
    pub max_iterations: usize,
    /// A root is settled once its correction is below this fraction of its
    /// modulus.
    pub step_tolerance: f64,
    /// Fixed single-linkage merge radius. `None` merges nearby roots only
    /// when their refined centroid passes the multiplicity test.
    pub merge_radius: Option<f64>,
    pub schedule: Schedule,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig {
            max_iterations: 200,
            step_tolerance: 1e-13,
            merge_radius: None,
            schedule: Schedule::Parallel,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootCluster {
    pub center: Complex64,
    pub multiplicity: usize,
    /// Largest distance from the center to a merged member.
    pub radius: f64,
}

/// Roots of a polynomial with multiplicities.
///
/// `residual_bound` is the relative backward error of the whole
/// factorization: the largest coefficient deviation of
/// `a_n Π (z − c_k)^{m_k}` from the source polynomial, divided by its
/// largest coefficient magnitude.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub clusters: Vec<RootCluster>,
    pub residual_bound: f64,
}

impl RootSet {
    /// Sum of multiplicities.
    pub fn degree(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// Roots listed with duplication, in cluster order.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.center, c.multiplicity))
            .collect()
    }

    pub fn centers(&self) -> Vec<Complex64> {
        self.clusters.iter().map(|c| c.center).collect()
    }

    /// Builds singleton clusters from raw roots (no merging).
    pub fn from_roots(roots: &[Complex64]) -> RootSet {
        let mut clusters: Vec<RootCluster> = roots
            .iter()
            .map(|&center| RootCluster {
                center,
                multiplicity: 1,
                radius: 0.0,
            })
            .collect();
        sort_clusters(&mut clusters);
        RootSet {
            clusters,
            residual_bound: 0.0,
        }
    }

    /// Cluster nearest to `z`.
    pub fn nearest(&self, z: Complex64) -> Option<&RootCluster> {
        self.clusters
            .iter()
            .min_by(|a, b| (a.center - z).norm().total_cmp(&(b.center - z).norm()))
    }

    /// Recomputes `residual_bound` against `p`.
    pub fn measure_residual(&mut self, p: &ComplexPoly) -> Result<()> {
        self.residual_bound = factorization_residual(p, &self.expanded())?;
        Ok(())
    }
}

pub(crate) fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn sort_clusters(clusters: &mut [RootCluster]) {
    clusters.sort_by(|a, b| lex_cmp(&a.center, &b.center));
}

fn factorization_residual(p: &ComplexPoly, roots: &[Complex64]) -> Result<f64> {
    let rebuilt = ComplexPoly::from_roots(*p.leading(), roots)?;
    let scale = p.coeff_scale();
    let worst = p
        .coeffs()
        .iter()
        .zip(rebuilt.coeffs())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// All roots of `p` by Aberth–Ehrlich simultaneous iteration, clustered
/// into multiplicities.
pub fn find_roots(p: &ComplexPoly, cfg: &RootConfig) -> Result<RootSet> {
    let raw = raw_roots(p, cfg)?;
    let mut set = match cfg.merge_radius {
        Some(r) => merge(&RootSet::from_roots(&raw), |_, _| r),
        None => merge_multiple(p, &raw),
    };
    set.measure_residual(p)?;
    Ok(set)
}

/// Candidate pairs for merging lie within this distance, relative to
/// `max(1, |root|)`.
const CANDIDATE_RADIUS: f64 = 1e-2;

/// Agglomerative merging: candidate pairs are visited by increasing
/// distance and two clusters are joined when the combined cluster passes
/// [`is_numerically_multiple`] at its refined center.
fn merge_multiple(p: &ComplexPoly, raw: &[Complex64]) -> RootSet {
    let n = raw.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = (raw[i] - raw[j]).norm();
            let reach = CANDIDATE_RADIUS * raw[i].norm().max(raw[j].norm()).max(1.0);
            if d <= reach {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    // Each live cluster: member indices and current center.
    let mut owner: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut centers: Vec<Complex64> = raw.to_vec();
    for (_, i, j) in pairs {
        let (a, b) = (owner[i], owner[j]);
        if a == b {
            continue;
        }
        let combined: Vec<usize> = members[a].iter().chain(&members[b]).copied().collect();
        let m = combined.len();
        let centroid = combined.iter().map(|&k| raw[k]).sum::<Complex64>() / m as f64;
        let center = refine_center(p, centroid, m);
        if is_numerically_multiple(p, center, m) {
            let (keep, drop) = (a.min(b), a.max(b));
            for &k in &members[drop] {
                owner[k] = keep;
            }
            members[keep] = combined;
            members[drop].clear();
            centers[keep] = center;
        }
    }
    let mut clusters: Vec<RootCluster> = members
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(k, g)| RootCluster {
            center: centers[k],
            multiplicity: g.len(),
            radius: g
                .iter()
                .map(|&i| (raw[i] - centers[k]).norm())
                .fold(0.0, f64::max),
        })
        .collect();
    sort_clusters(&mut clusters);
    RootSet {
        clusters,
        residual_bound: 0.0,
    }
}

/// Taylor coefficients `p^{(j)}(c)/j!` of `p` at `c`, and the same shift of
/// `|a_i|` at `|c|` as their rounding scale.
fn taylor(p: &ComplexPoly, c: Complex64) -> (Vec<Complex64>, Vec<f64>) {
    let mut t: Vec<Complex64> = p.coeffs().to_vec();
    let mut s: Vec<f64> = p.coeffs().iter().map(|a| a.norm()).collect();
    let r = c.norm();
    let n = t.len();
    for k in 0..n {
        for i in (k..n - 1).rev() {
            let (hi, shi) = (t[i + 1], s[i + 1]);
            t[i] += c * hi;
            s[i] += r * shi;
        }
    }
    (t, s)
}

/// An `m`-fold root at `c` up to rounding: the first `m` Taylor
/// coefficients vanish relative to their scale.
pub(crate) fn is_numerically_multiple(p: &ComplexPoly, c: Complex64, m: usize) -> bool {
    let (t, s) = taylor(p, c);
    let tol = 1e3 * p.degree() as f64 * f64::EPSILON;
    (0..m).all(|j| t[j].norm() <= tol * s[j])
}

/// Newton steps on `p^{(m−1)}`, which has a simple root at an `m`-fold root
/// of `p`.
fn refine_center(p: &ComplexPoly, start: Complex64, m: usize) -> Complex64 {
    let mut c = start;
    for _ in 0..4 {
        let (t, _) = taylor(p, c);
        if t[m].norm() == 0.0 {
            break;
        }
        // d^{m-1}/dz^{m-1} p at c is (m−1)!·t[m−1]; its derivative is m!·t[m].
        let step = t[m - 1] / (t[m] * m as f64);
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        let next = c - step;
        let (tn, _) = taylor(p, next);
        if tn[m - 1].norm() >= t[m - 1].norm() {
            break;
        }
        c = next;
    }
    c
}

/// Unclustered Aberth roots, one per degree. Exact zero roots (vanishing
/// low-order coefficients) are split off before iterating.
pub fn raw_roots(p: &ComplexPoly, cfg: &RootConfig) -> Result<Vec<Complex64>> {
    let a = p.coeffs();
    let zeros = a.iter().take_while(|c| c.norm() == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
    let rest = &a[zeros..];
    if rest.len() > 1 {
        roots.extend(aberth(rest, cfg)?);
    }
    Ok(roots)
}

struct Step {
    correction: Complex64,
    settled: bool,
}

fn aberth(a: &[Complex64], cfg: &RootConfig) -> Result<Vec<Complex64>> {
    let n = a.len() - 1;
    if n == 1 {
        return Ok(vec![-a[0] / a[1]]);
    }
    let lead = a[n];
    let radius = 1.0 + a[..n].iter().map(|c| (c / lead).norm()).fold(0.0, f64::max);
    let floor = f64::EPSILON * radius;
    let rounding = 4.0 * n as f64 * f64::EPSILON;

    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, TAU * k as f64 / n as f64 + GOLDEN_ANGLE))
        .collect();
    let mut settled = vec![false; n];
    let schedule = if n >= PARALLEL_MIN_DEGREE {
        cfg.schedule
    } else {
        Schedule::Sequential
    };

    for _ in 0..cfg.max_iterations {
        let snapshot = z.clone();
        let steps = par::map_indexed(schedule, &snapshot, |k, &zk| {
            if settled[k] {
                return None;
            }
            Some(aberth_step(
                a,
                &snapshot,
                k,
                zk,
                rounding,
                floor,
                cfg.step_tolerance,
            ))
        });
        for (k, step) in steps.into_iter().enumerate() {
            if let Some(step) = step {
                z[k] -= step.correction;
                settled[k] = step.settled;
            }
        }
        if settled.iter().all(|&s| s) {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence {
        iterations: cfg.max_iterations,
        best: z,
    })
}

fn aberth_step(
    a: &[Complex64],
    all: &[Complex64],
    k: usize,
    zk: Complex64,
    rounding: f64,
    floor: f64,
    step_tolerance: f64,
) -> Step {
    let mut p = a[a.len() - 1];
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = p.norm();
    let r = zk.norm();
    for c in a.iter().rev().skip(1) {
        dp = dp * zk + p;
        p = p * zk + c;
        scale = scale * r + c.norm();
    }
    if p.norm() <= rounding * scale {
        return Step {
            correction: Complex64::new(0.0, 0.0),
            settled: true,
        };
    }
    let newton = p / dp;
    if !newton.re.is_finite() || !newton.im.is_finite() {
        // Critical point: push off deterministically.
        return Step {
            correction: Complex64::from_polar(1e-3 * (1.0 + r), k as f64 + 0.5),
            settled: false,
        };
    }
    let repulsion: Complex64 = all
        .iter()
        .enumerate()
        .filter(|&(j, zj)| j != k && *zj != zk)
        .map(|(_, zj)| (zk - zj).inv())
        .sum();
    let mut w = newton / (Complex64::new(1.0, 0.0) - newton * repulsion);
    if !w.re.is_finite() || !w.im.is_finite() {
        w = newton;
    }
    let next = zk - w;
    Step {
        correction: w,
        settled: w.norm() <= step_tolerance * next.norm() || w.norm() <= floor,
    }
}

/// Single-linkage clustering at a fixed radius; clusters are reported at
/// their multiplicity-weighted centroid. `residual_bound` is carried over
/// unchanged (see [`RootSet::measure_residual`]).
pub fn cluster_roots(rs: &RootSet, radius: f64) -> Result<RootSet> {
    if !(radius >= 0.0) {
        return Err(Error::invalid(format!(
            "cluster radius must be nonnegative, got {radius}"
        )));
    }
    Ok(merge(rs, |_, _| radius))
}

fn merge(rs: &RootSet, threshold: impl Fn(Complex64, Complex64) -> f64) -> RootSet {
    let items = &rs.clusters;
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (items[i].center, items[j].center);
            if (a - b).norm() <= threshold(a, b) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let root = find(&mut parent, i);
        groups[root].push(i);
    }
    let mut clusters: Vec<RootCluster> = groups
        .into_iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let multiplicity: usize = g.iter().map(|&i| items[i].multiplicity).sum();
            let center = g
                .iter()
                .map(|&i| items[i].center * items[i].multiplicity as f64)
                .sum::<Complex64>()
                / multiplicity as f64;
            let radius = g
                .iter()
                .map(|&i| (items[i].center - center).norm() + items[i].radius)
                .fold(0.0, f64::max);
            RootCluster {
                center,
                multiplicity,
                radius,
            }
        })
        .collect();
    sort_clusters(&mut clusters);
    RootSet {
        clusters,
        residual_bound: rs.residual_bound,
    }
}
