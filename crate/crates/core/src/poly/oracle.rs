//! Independent root oracle: eigenvalues of the companion matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::roots::{cluster_roots, RootSet};
use super::ComplexPoly;
use crate::error::{Error, Result};

const MERGE_RADIUS: f64 = 1e-7;

/// Roots of `p` as the eigenvalues of the (balanced) companion matrix of its
/// monic normalization, via a shifted QR Schur reduction. Intended for
/// cross-checking [`super::find_roots`]; it shares no code with it.
pub fn roots_oracle(p: &ComplexPoly) -> Result<RootSet> {
    let a = p.coeffs();
    let n = p.degree();
    if n == 0 {
        return Err(Error::invalid("a constant polynomial has no roots"));
    }
    let roots = if n == 1 {
        vec![-a[0] / a[1]]
    } else {
        companion_eigenvalues(a)?
    };
    let mut set = cluster_roots(&RootSet::from_roots(&roots), MERGE_RADIUS)?;
    set.measure_residual(p)?;
    Ok(set)
}

fn companion_eigenvalues(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.len() - 1;
    let lead = a[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -a[i] / lead;
    }
    balance(&mut m);
    let schur =
        nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Error::EigenFailure)?;
    let eig = schur.eigenvalues().ok_or(Error::EigenFailure)?;
    let out: Vec<Complex64> = eig.iter().copied().collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok(out)
}

/// Diagonal similarity scaling by powers of two so that row and column
/// norms are comparable.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut col = 0.0;
            let mut row = 0.0;
            for j in 0..n {
                if j != i {
                    col += m[(j, i)].norm();
                    row += m[(i, j)].norm();
                }
            }
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let total = col + row;
            let mut f = 1.0;
            let mut g = row / radix;
            while col < g {
                f *= radix;
                col *= radix * radix;
            }
            g = row * radix;
            while col > g {
                f /= radix;
                col /= radix * radix;
            }
            if (col + row) / f < 0.95 * total {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}
