//! Root alignment between a polynomial `f` and a perturbation `g`.
//!
//! [`align_by_deflation`] pairs roots the way the degree induction does:
//! pick a root `s` of `g`, pair it with the nearest root `r` of `f`, divide
//! `f` by `(z − r)` and `g` by `(z − s)`, and continue on the quotients until
//! the linear case `−a₀/a₁`, `−b₀/b₁` closes the recursion.
//!
//! [`align_bottleneck`] is the independent oracle: the bijection minimizing
//! the largest pair distance.
//!
//! Indices in an [`Alignment`] refer to [`RootSet::expanded`] order of the
//! root sets the alignment was computed from. Under clustered roots the
//! pairing itself may differ between valid selection rules; only
//! `max_distance` is stable.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{find_roots, ComplexPoly, Deflated, RootConfig, RootSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignMethod {
    Deflation,
    Bottleneck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Alignment {
    /// `(index into roots of f, index into roots of g)`, sorted by the
    /// first index.
    pub pairs: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
    pub max_distance: f64,
    pub method: AlignMethod,
}

impl Alignment {
    fn from_pairs(
        mut pairs: Vec<(usize, usize)>,
        mut distance: impl FnMut(usize, usize) -> f64,
        method: AlignMethod,
    ) -> Alignment {
        pairs.sort();
        let distances: Vec<f64> = pairs.iter().map(|&(i, j)| distance(i, j)).collect();
        let max_distance = distances.iter().copied().fold(0.0, f64::max);
        Alignment {
            pairs,
            distances,
            max_distance,
            method,
        }
    }

    /// Same bijection, regardless of method.
    pub fn same_pairing(&self, other: &Alignment) -> bool {
        self.pairs == other.pairs
    }

    /// `perm[i]` is the index of the `g` root paired with `f` root `i`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm = vec![0; self.pairs.len()];
        for &(i, j) in &self.pairs {
            perm[i] = j;
        }
        perm
    }

    /// Checks the bijection invariant.
    pub fn is_bijection(&self) -> bool {
        let n = self.pairs.len();
        let mut seen_f = vec![false; n];
        let mut seen_g = vec![false; n];
        for &(i, j) in &self.pairs {
            if i >= n || j >= n || seen_f[i] || seen_g[j] {
                return false;
            }
            seen_f[i] = true;
            seen_g[j] = true;
        }
        true
    }
}

/// The quantity bounded by the ε–δ statement: the largest pair distance.
pub fn alignment_distance(a: &Alignment) -> f64 {
    a.max_distance
}

/// One level of the deflation recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct DeflationStep {
    pub f: ComplexPoly,
    pub g: ComplexPoly,
    pub r: Complex64,
    pub s: Complex64,
    pub f_hat: Deflated,
    pub g_hat: Deflated,
}

impl DeflationStep {
    /// `|(z−r)(f̂(z)−ĝ(z)) − (f(z) − g(z) − ĝ(z)(s−r))|` at a standard point.
    pub fn identity_residual(&self, z: Complex64) -> f64 {
        let fh = self.f_hat.quotient.eval_c(z);
        let gh = self.g_hat.quotient.eval_c(z);
        let lhs = (z - self.r) * (fh - gh);
        let rhs = self.f.eval_c(z) - self.g.eval_c(z) - gh * (self.s - self.r);
        (lhs - rhs).norm()
    }

    /// Rounding scale for [`DeflationStep::identity_residual`] at `z`.
    pub fn identity_scale(&self, z: Complex64) -> f64 {
        self.f.abs_eval(z).max(self.g.abs_eval(z))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeflationTrace {
    pub alignment: Alignment,
    pub steps: Vec<DeflationStep>,
    /// Roots produced by the `n = 1` closing formulas.
    pub closing: (Complex64, Complex64),
}

fn check_degrees(f: &ComplexPoly, g: &ComplexPoly) -> Result<()> {
    if f.degree() != g.degree() {
        return Err(Error::DegreeMismatch {
            left: f.degree(),
            right: g.degree(),
        });
    }
    if f.degree() == 0 {
        return Err(Error::invalid("alignment needs degree at least 1"));
    }
    Ok(())
}

/// Deflation alignment with root sets computed by [`find_roots`].
pub fn align_by_deflation(f: &ComplexPoly, g: &ComplexPoly, cfg: &RootConfig) -> Result<Alignment> {
    check_degrees(f, g)?;
    let rf = find_roots(f, cfg)?;
    let rg = find_roots(g, cfg)?;
    Ok(deflation_trace(f, g, &rf, &rg)?.alignment)
}

/// Deflation alignment against given root sets, keeping every recursion
/// level.
///
/// Selection rule: among the remaining roots of `g`, take the one closest to
/// its nearest remaining root of `f` (ties by lexicographic `(re, im)`), and
/// pair it with that nearest root.
pub fn deflation_trace(
    f: &ComplexPoly,
    g: &ComplexPoly,
    roots_f: &RootSet,
    roots_g: &RootSet,
) -> Result<DeflationTrace> {
    check_degrees(f, g)?;
    let n = f.degree();
    let all_f = roots_f.expanded();
    let all_g = roots_g.expanded();
    if all_f.len() != n || all_g.len() != n {
        return Err(Error::SizeMismatch {
            left: all_f.len(),
            right: all_g.len(),
        });
    }
    let mut left_f: Vec<usize> = (0..n).collect();
    let mut left_g: Vec<usize> = (0..n).collect();
    let mut cur_f = f.clone();
    let mut cur_g = g.clone();
    let mut pairs = Vec::with_capacity(n);
    let mut dist = vec![0.0; n];
    let mut steps = Vec::with_capacity(n.saturating_sub(1));

    while cur_f.degree() > 1 {
        let nearest_f = |s: Complex64| {
            left_f
                .iter()
                .map(|&i| (i, (all_f[i] - s).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .expect("nonempty")
        };
        let (pos_g, (fi, _)) = left_g
            .iter()
            .enumerate()
            .map(|(pos, &j)| (pos, nearest_f(all_g[j])))
            .min_by(|a, b| {
                a.1 .1
                    .total_cmp(&b.1 .1)
                    .then(crate::poly::lex_cmp(
                        &all_g[left_g[a.0]],
                        &all_g[left_g[b.0]],
                    ))
                    .then(left_g[a.0].cmp(&left_g[b.0]))
            })
            .expect("nonempty");
        let gj = left_g.remove(pos_g);
        left_f.retain(|&i| i != fi);
        let (r, s) = (all_f[fi], all_g[gj]);
        let f_hat = cur_f.deflate_stable(r)?;
        let g_hat = cur_g.deflate_stable(s)?;
        pairs.push((fi, gj));
        dist[fi] = (s - r).norm();
        let next_f = f_hat.quotient.clone();
        let next_g = g_hat.quotient.clone();
        steps.push(DeflationStep {
            f: cur_f,
            g: cur_g,
            r,
            s,
            f_hat,
            g_hat,
        });
        cur_f = next_f;
        cur_g = next_g;
    }

    let (a, b) = (cur_f.coeffs(), cur_g.coeffs());
    let r1 = -a[0] / a[1];
    let s1 = -b[0] / b[1];
    let (fi, gj) = (left_f[0], left_g[0]);
    pairs.push((fi, gj));
    dist[fi] = (s1 - r1).norm();

    let alignment = Alignment::from_pairs(pairs, |i, _| dist[i], AlignMethod::Deflation);
    Ok(DeflationTrace {
        alignment,
        steps,
        closing: (r1, s1),
    })
}

/// Bottleneck-optimal bijection between two root multisets.
pub fn align_bottleneck(roots_f: &RootSet, roots_g: &RootSet) -> Result<Alignment> {
    bottleneck_points(&roots_f.expanded(), &roots_g.expanded())
}

/// Bottleneck matching on raw point lists: the smallest threshold admitting
/// a perfect matching is found by binary search over the pairwise
/// distances; among matchings under that threshold the lexicographically
/// smallest assignment is returned.
pub fn bottleneck_points(a: &[Complex64], b: &[Complex64]) -> Result<Alignment> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::SizeMismatch {
            left: n,
            right: b.len(),
        });
    }
    if n == 0 {
        return Err(Error::invalid("empty root lists"));
    }
    let d: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let mut cands: Vec<f64> = d.iter().flatten().copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();

    let (mut lo, mut hi) = (0, cands.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&d, cands[mid], &[]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let threshold = cands[lo];

    let mut fixed: Vec<(usize, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let j = (0..n)
            .find(|&j| {
                d[i][j] <= threshold && !fixed.iter().any(|&(_, fj)| fj == j) && {
                    fixed.push((i, j));
                    let ok = has_perfect_matching(&d, threshold, &fixed);
                    fixed.pop();
                    ok
                }
            })
            .expect("a perfect matching exists at the bottleneck threshold");
        fixed.push((i, j));
    }
    Ok(Alignment::from_pairs(
        fixed,
        |i, j| d[i][j],
        AlignMethod::Bottleneck,
    ))
}

/// Kuhn augmenting paths on the graph `d[i][j] <= t`, with some pairs
/// already fixed.
fn has_perfect_matching(d: &[Vec<f64>], t: f64, fixed: &[(usize, usize)]) -> bool {
    let n = d.len();
    let mut match_col: Vec<Option<usize>> = vec![None; n];
    let mut row_fixed = vec![false; n];
    for &(i, j) in fixed {
        match_col[j] = Some(i);
        row_fixed[i] = true;
    }
    let col_fixed: Vec<bool> = match_col.iter().map(Option::is_some).collect();

    fn augment(
        i: usize,
        d: &[Vec<f64>],
        t: f64,
        col_fixed: &[bool],
        seen: &mut [bool],
        match_col: &mut [Option<usize>],
    ) -> bool {
        for j in 0..d.len() {
            if col_fixed[j] || seen[j] || d[i][j] > t {
                continue;
            }
            seen[j] = true;
            let free = match match_col[j] {
                None => true,
                Some(k) => augment(k, d, t, col_fixed, seen, match_col),
            };
            if free {
                match_col[j] = Some(i);
                return true;
            }
        }
        false
    }

    (0..n).filter(|&i| !row_fixed[i]).all(|i| {
        let mut seen = vec![false; n];
        augment(i, d, t, &col_fixed, &mut seen, &mut match_col)
    })
}
