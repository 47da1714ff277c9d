//! Dense polynomials over complex scalars or series scalars.
//!
//! Coefficients are stored in ascending degree order: index `i` holds the
//! coefficient of `z^i`.

mod oracle;
mod roots;

pub use oracle::roots_oracle;
pub(crate) use roots::lex_cmp;
pub use roots::{cluster_roots, find_roots, raw_roots, RootCluster, RootConfig, RootSet};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::infinitesimal::{HyperScalar, Precision};
use crate::scalar::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    coeffs: Vec<S>,
}

pub type ComplexPoly = Poly<Complex64>;
pub type HyperPoly = Poly<HyperScalar>;

impl<S: Field> Poly<S> {
    /// Rejects an empty list, an all-zero list and a zero leading
    /// coefficient.
    pub fn new(coeffs: Vec<S>) -> Result<Self> {
        if coeffs.iter().all(Field::is_zero) {
            return Err(Error::ZeroPolynomial);
        }
        if coeffs.last().is_some_and(Field::is_zero) {
            return Err(Error::LeadingCoefficientZero);
        }
        Ok(Poly { coeffs })
    }

    /// Like [`Poly::new`] but strips zero leading coefficients first.
    pub fn trimmed(mut coeffs: Vec<S>) -> Result<Self> {
        while coeffs.last().is_some_and(Field::is_zero) {
            coeffs.pop();
        }
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &S {
        self.coeffs.last().expect("nonempty by construction")
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &S) -> Result<S> {
        let mut acc = self.leading().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(z)?.add(c)?;
        }
        Ok(acc)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: &S) -> Result<(S, S)> {
        let mut p = self.leading().clone();
        let mut dp = p.zero_like();
        for c in self.coeffs.iter().rev().skip(1) {
            dp = dp.mul(z)?.add(&p)?;
            p = p.mul(z)?.add(c)?;
        }
        Ok((p, dp))
    }

    /// Coefficients of the derivative (empty for a constant).
    pub fn derivative_coeffs(&self) -> Result<Vec<S>> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.mul(&c.lift(Complex64::new(i as f64, 0.0))))
            .collect()
    }

    /// Synthetic division by `(z − root)`: returns `(q, rem)` with
    /// `p = (z − root)·q + rem`.
    pub fn deflate(&self, root: &S) -> Result<(Poly<S>, S)> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::invalid("cannot deflate a constant polynomial"));
        }
        let mut q = vec![self.leading().clone(); n];
        for i in (0..n - 1).rev() {
            q[i] = q[i + 1].mul(root)?.add(&self.coeffs[i + 1])?;
        }
        let rem = q[0].mul(root)?.add(&self.coeffs[0])?;
        Ok((Poly { coeffs: q }, rem))
    }

    /// Multiplies by `(z − root)`.
    pub fn mul_linear(&self, root: &S) -> Result<Poly<S>> {
        let n = self.coeffs.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.coeffs[0].zero_like().sub(&self.coeffs[0].mul(root)?)?);
        for i in 1..n {
            out.push(self.coeffs[i - 1].sub(&self.coeffs[i].mul(root)?)?);
        }
        out.push(self.coeffs[n - 1].clone());
        Ok(Poly { coeffs: out })
    }

    /// `lead · Π (z − r_i)`.
    pub fn from_roots(lead: S, roots: &[S]) -> Result<Poly<S>> {
        let mut p = Poly::new(vec![lead])?;
        for r in roots {
            p = p.mul_linear(r)?;
        }
        Ok(p)
    }

    /// Coefficient-wise sum; leading coefficients that cancel are stripped.
    pub fn add_poly(&self, other: &Poly<S>) -> Result<Poly<S>> {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = self.coeffs[0].zero_like();
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                a.add(b)
            })
            .collect::<Result<Vec<_>>>()?;
        Poly::trimmed(coeffs)
    }
}

impl ComplexPoly {
    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Poly::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn monomial_minus(n: usize, delta: Complex64) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[0] = -delta;
        c[n] = Complex64::new(1.0, 0.0);
        Poly { coeffs: c }
    }

    /// Largest coefficient magnitude.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |a_i| |z|^i`, the natural scale of `p(z)` and of its rounding
    /// error.
    pub fn abs_eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn eval_c(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// The polynomial as a series polynomial with exact (embedded)
    /// coefficients.
    pub fn embed(&self, precision: Precision) -> HyperPoly {
        Poly {
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| HyperScalar::embed_with(c, precision))
                .collect(),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Division by `(z − root)` choosing the stable direction: forward
    /// (Horner) when `|root| ≤ 1`, backward (from the constant term)
    /// otherwise.
    pub fn deflate_stable(&self, root: Complex64) -> Result<Deflated> {
        if root.norm() <= 1.0 {
            let (quotient, rem) = self.deflate(&root)?;
            return Ok(Deflated {
                quotient,
                remainder: rem,
                remainder_degree: 0,
            });
        }
        let n = self.degree();
        if n == 0 {
            return Err(Error::invalid("cannot deflate a constant polynomial"));
        }
        let a = &self.coeffs;
        let mut q = vec![Complex64::new(0.0, 0.0); n];
        q[0] = -a[0] / root;
        for i in 1..n {
            q[i] = (q[i - 1] - a[i]) / root;
        }
        let remainder = a[n] - q[n - 1];
        Ok(Deflated {
            quotient: Poly { coeffs: q },
            remainder,
            remainder_degree: n,
        })
    }
}

/// Result of [`ComplexPoly::deflate_stable`]:
/// `p(z) = (z − r)·quotient(z) + remainder · z^remainder_degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct Deflated {
    pub quotient: ComplexPoly,
    pub remainder: Complex64,
    pub remainder_degree: usize,
}

impl HyperPoly {
    /// Coefficient-wise standard part; requires every coefficient finite and
    /// the leading standard part nonzero.
    pub fn standard_part(&self) -> Result<ComplexPoly> {
        let coeffs = self
            .coeffs
            .iter()
            .map(HyperScalar::standard_part)
            .collect::<Result<Vec<_>>>()?;
        Poly::new(coeffs)
    }

    /// Evaluation at a standard complex point.
    pub fn eval_standard(&self, z: Complex64) -> Result<HyperScalar> {
        let point = HyperScalar::embed_with(z, self.leading().precision());
        self.eval(&point)
    }
}

/// Wire form of a complex polynomial: `{"coeffs": [[re, im], …]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyRepr {
    coeffs: Vec<(f64, f64)>,
}

impl Serialize for ComplexPoly {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        PolyRepr {
            coeffs: self.coeffs.iter().map(|c| (c.re, c.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = PolyRepr::deserialize(d)?;
        if repr
            .coeffs
            .iter()
            .any(|(re, im)| !re.is_finite() || !im.is_finite())
        {
            return Err(D::Error::custom("non-finite coefficient"));
        }
        Poly::new(
            repr.coeffs
                .into_iter()
                .map(|(re, im)| Complex64::new(re, im))
                .collect(),
        )
        .map_err(D::Error::custom)
    }
}
