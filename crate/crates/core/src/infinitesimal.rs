//! Truncated generalized power series in a formal infinitesimal `ε`.
//!
//! A [`HyperScalar`] is a finite sum `Σ c_k ε^{e_k}` with complex
//! coefficients and rational exponents, together with a truncation order
//! `K`: every exponent above `K` is unknown. Exponents are exact; the
//! coefficients are `f64` complex pairs.
//!
//! The magnitude classes of the hyper-complex field are read off the
//! valuation (the least exponent carrying a coefficient):
//!
//! * valuation `> 0` (or the zero value): infinitesimal,
//! * valuation `= 0`: finite and not infinitesimal,
//! * valuation `< 0`: infinite.
//!
//! The standard part of a finite value is its `ε⁰` coefficient.
//!
//! Model assumption: the computations in this crate only ever need values
//! expressible as such truncated series. Nothing here constructs the full
//! nonstandard field.
//!
//! Every operation tracks the order up to which its result is provably
//! correct. A result whose known part is empty while its truncation order is
//! negative has lost even its magnitude class, and is reported as
//! [`Error::OrderExhausted`].
//!
//! Coefficient noise: a computed coefficient is dropped when its magnitude
//! is at most `τ` times the sum of the magnitudes of the contributions that
//! produced it, so cancellation to rounding level yields an exact zero term.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Rational exponent of `ε`.
pub type Exponent = Ratio<i64>;

pub const DEFAULT_ORDER: i64 = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Truncation cap `K` and coefficient tolerance `τ` shared by a computation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Precision {
    pub order: Exponent,
    pub tolerance: f64,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            order: Exponent::from_integer(DEFAULT_ORDER),
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl Precision {
    pub fn new(order: i64, tolerance: f64) -> Self {
        Precision {
            order: Exponent::from_integer(order),
            tolerance,
        }
    }

    fn combine(self, other: Precision) -> Precision {
        Precision {
            order: self.order.min(other.order),
            tolerance: self.tolerance.max(other.tolerance),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub exponent: Exponent,
    pub coeff: Complex64,
}

/// Valuation of a series; the zero value has valuation `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(Exponent),
    PosInfinity,
}

impl Valuation {
    pub fn finite(self) -> Option<Exponent> {
        match self {
            Valuation::Finite(e) => Some(e),
            Valuation::PosInfinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(e) => write!(f, "{e}"),
            Valuation::PosInfinity => write!(f, "+inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Magnitude {
    Infinitesimal,
    FiniteNoninfinitesimal,
    Infinite,
}

impl Magnitude {
    /// Infinitesimals count as finite.
    pub fn is_finite(self) -> bool {
        self != Magnitude::Infinite
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HyperScalar {
    terms: Vec<Term>,
    order: Exponent,
    precision: Precision,
}

/// Accumulates coefficients per exponent along with the magnitude of the
/// contributions, then applies the tolerance rule.
#[derive(Default)]
struct Accumulator {
    slots: BTreeMap<Exponent, (Complex64, f64)>,
}

impl Accumulator {
    fn add(&mut self, exponent: Exponent, coeff: Complex64, scale: f64) {
        let slot = self
            .slots
            .entry(exponent)
            .or_insert((Complex64::new(0.0, 0.0), 0.0));
        slot.0 += coeff;
        slot.1 += scale;
    }

    fn finish(self, order: Exponent, precision: Precision) -> Result<HyperScalar> {
        let terms = self
            .slots
            .into_iter()
            .filter(|(e, (c, scale))| {
                *e <= order && c.norm() > precision.tolerance * scale && !c.is_zero()
            })
            .map(|(exponent, (coeff, _))| Term { exponent, coeff })
            .collect();
        HyperScalar::checked(terms, order, precision)
    }
}

impl HyperScalar {
    fn checked(terms: Vec<Term>, order: Exponent, precision: Precision) -> Result<Self> {
        if terms.is_empty() && order < Exponent::zero() {
            return Err(Error::OrderExhausted {
                order: order.to_string(),
            });
        }
        Ok(HyperScalar {
            terms,
            order,
            precision,
        })
    }

    pub fn zero() -> Self {
        Self::zero_with(Precision::default())
    }

    pub fn zero_with(precision: Precision) -> Self {
        HyperScalar {
            terms: Vec::new(),
            order: precision.order,
            precision,
        }
    }

    /// Standard complex number as a series with the default precision.
    pub fn embed(c: Complex64) -> Self {
        Self::embed_with(c, Precision::default())
    }

    pub fn embed_with(c: Complex64, precision: Precision) -> Self {
        Self::monomial_with(c, Exponent::zero(), precision)
    }

    pub fn embed_real(x: f64) -> Self {
        Self::embed(Complex64::new(x, 0.0))
    }

    /// The infinitesimal `ε` itself.
    pub fn epsilon() -> Self {
        Self::monomial(Complex64::new(1.0, 0.0), Exponent::from_integer(1))
    }

    /// `c · ε^e`. Terms above the truncation order are unrepresentable and
    /// give the zero value.
    pub fn monomial(c: Complex64, exponent: Exponent) -> Self {
        Self::monomial_with(c, exponent, Precision::default())
    }

    pub fn monomial_with(c: Complex64, exponent: Exponent, precision: Precision) -> Self {
        let terms = if c.is_zero() || exponent > precision.order {
            Vec::new()
        } else {
            vec![Term { exponent, coeff: c }]
        };
        HyperScalar {
            terms,
            order: precision.order,
            precision,
        }
    }

    /// Builds a series from arbitrary terms: sorted, merged, zero and
    /// out-of-order terms dropped. The truncation order is the precision cap.
    pub fn from_terms<I>(terms: I, precision: Precision) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        Self::from_terms_with_order(terms, precision.order, precision)
    }

    pub fn from_terms_with_order<I>(terms: I, order: Exponent, precision: Precision) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Complex64)>,
    {
        let order = order.min(precision.order);
        let mut acc = Accumulator::default();
        for (e, c) in terms {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::invalid(format!("non-finite coefficient at ε^{e}")));
            }
            acc.add(e, c, c.norm());
        }
        acc.finish(order, precision)
    }

    /// Convenience for integer exponents: `Σ coeffs[k] ε^k`.
    pub fn from_coeffs(coeffs: &[Complex64]) -> Self {
        Self::from_terms(
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| (Exponent::from_integer(k as i64), *c)),
            Precision::default(),
        )
        .expect("finite coefficients with nonnegative exponents")
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn truncation_order(&self) -> Exponent {
        self.order
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Same value under a new precision; the truncation order is lowered to
    /// the new cap when needed.
    pub fn with_precision(&self, precision: Precision) -> Result<Self> {
        let order = self.order.min(precision.order);
        let terms = self
            .terms
            .iter()
            .copied()
            .filter(|t| t.exponent <= order)
            .collect();
        Self::checked(terms, order, precision)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Valuation {
        self.terms
            .first()
            .map_or(Valuation::PosInfinity, |t| Valuation::Finite(t.exponent))
    }

    /// Coefficient of `ε^e` (zero when absent).
    pub fn coeff(&self, exponent: Exponent) -> Complex64 {
        self.terms
            .iter()
            .find(|t| t.exponent == exponent)
            .map_or(Complex64::new(0.0, 0.0), |t| t.coeff)
    }

    pub fn classify(&self) -> Magnitude {
        match self.valuation() {
            Valuation::PosInfinity => Magnitude::Infinitesimal,
            Valuation::Finite(v) if v.is_positive() => Magnitude::Infinitesimal,
            Valuation::Finite(v) if v.is_zero() => Magnitude::FiniteNoninfinitesimal,
            Valuation::Finite(_) => Magnitude::Infinite,
        }
    }

    pub fn standard_part(&self) -> Result<Complex64> {
        if self.classify() == Magnitude::Infinite {
            return Err(Error::InfiniteStandardPart {
                valuation: self.valuation().to_string(),
            });
        }
        Ok(self.coeff(Exponent::zero()))
    }

    /// `a ≈ b`: the difference is infinitesimal. A difference whose
    /// magnitude class is unknown (exhausted order) is not considered
    /// infinitesimal.
    pub fn approx_eq(&self, other: &HyperScalar) -> bool {
        self.sub(other)
            .map(|d| d.classify() == Magnitude::Infinitesimal)
            .unwrap_or(false)
    }

    /// Valuation for order bookkeeping: a zero value is known to vanish up
    /// to its truncation order.
    fn effective_valuation(&self) -> Exponent {
        match self.valuation() {
            Valuation::Finite(v) => v.min(self.order),
            Valuation::PosInfinity => self.order,
        }
    }

    pub fn neg(&self) -> HyperScalar {
        HyperScalar {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exponent: t.exponent,
                    coeff: -t.coeff,
                })
                .collect(),
            order: self.order,
            precision: self.precision,
        }
    }

    pub fn add(&self, other: &HyperScalar) -> Result<HyperScalar> {
        let precision = self.precision.combine(other.precision);
        let order = self.order.min(other.order).min(precision.order);
        let mut acc = Accumulator::default();
        for t in self.terms.iter().chain(&other.terms) {
            acc.add(t.exponent, t.coeff, t.coeff.norm());
        }
        acc.finish(order, precision)
    }

    pub fn sub(&self, other: &HyperScalar) -> Result<HyperScalar> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &HyperScalar) -> Result<HyperScalar> {
        let precision = self.precision.combine(other.precision);
        let order = (self.effective_valuation() + other.order)
            .min(other.effective_valuation() + self.order)
            .min(precision.order);
        let mut acc = Accumulator::default();
        for a in &self.terms {
            for b in &other.terms {
                let e = a.exponent + b.exponent;
                if e <= order {
                    acc.add(e, a.coeff * b.coeff, a.coeff.norm() * b.coeff.norm());
                }
            }
        }
        acc.finish(order, precision)
    }

    pub fn scale(&self, c: Complex64) -> Result<HyperScalar> {
        self.mul(&HyperScalar::embed_with(c, self.precision))
    }

    /// Series long division. The quotient is correct up to
    /// `min(ord(a) − v(b), v(a) + ord(b) − 2 v(b), K)`.
    pub fn div(&self, other: &HyperScalar) -> Result<HyperScalar> {
        let lead = *other.terms.first().ok_or(Error::DivisionByZero)?;
        let precision = self.precision.combine(other.precision);
        let vb = lead.exponent;
        let order = (self.order - vb)
            .min(self.effective_valuation() + other.order - vb - vb)
            .min(precision.order);

        let mut remainder: BTreeMap<Exponent, (Complex64, f64)> = self
            .terms
            .iter()
            .map(|t| (t.exponent, (t.coeff, t.coeff.norm())))
            .collect();
        let mut quotient = Accumulator::default();
        let lead_norm = lead.coeff.norm();
        while let Some((e, (c, scale))) = remainder.pop_first() {
            let qe = e - vb;
            if qe > order {
                break;
            }
            if c.is_zero() || c.norm() <= precision.tolerance * scale {
                continue;
            }
            let qc = c / lead.coeff;
            quotient.add(qe, qc, scale / lead_norm);
            for b in &other.terms[1..] {
                let e2 = qe + b.exponent;
                if e2 - vb > order {
                    break;
                }
                let slot = remainder
                    .entry(e2)
                    .or_insert((Complex64::new(0.0, 0.0), 0.0));
                slot.0 -= qc * b.coeff;
                slot.1 += qc.norm() * b.coeff.norm();
            }
        }
        quotient.finish(order, precision)
    }

    pub fn recip(&self) -> Result<HyperScalar> {
        HyperScalar::embed_with(Complex64::new(1.0, 0.0), self.precision).div(self)
    }

    pub fn powi(&self, n: u32) -> Result<HyperScalar> {
        let mut acc = HyperScalar::embed_with(Complex64::new(1.0, 0.0), self.precision);
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Substitutes a positive real `t` for `ε`.
    pub fn eval_at(&self, t: f64) -> Result<Complex64> {
        if !(t > 0.0) {
            return Err(Error::invalid(format!(
                "substitution point must be positive, got {t}"
            )));
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let e = *term.exponent.numer() as f64 / *term.exponent.denom() as f64;
            sum += term.coeff * t.powf(e);
        }
        if sum.re.is_finite() && sum.im.is_finite() {
            Ok(sum)
        } else {
            Err(Error::Overflow { t })
        }
    }

    /// Term-by-term comparison: every exponent up to `order` carries
    /// coefficients within `tol · max(1, |coefficient|)`.
    pub fn agrees_with(&self, other: &HyperScalar, order: Exponent, tol: f64) -> bool {
        let mut exps: Vec<Exponent> = self
            .terms
            .iter()
            .chain(&other.terms)
            .map(|t| t.exponent)
            .filter(|e| *e <= order)
            .collect();
        exps.sort();
        exps.dedup();
        exps.into_iter().all(|e| {
            let (a, b) = (self.coeff(e), other.coeff(e));
            (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
        })
    }
}

impl fmt::Display for HyperScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0 + O(ε^{})", self.order);
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)", t.coeff.re, t.coeff.im)?;
            if !t.exponent.is_zero() {
                write!(f, "ε^{}", t.exponent)?;
            }
        }
        write!(f, " + O(ε^{})", self.order)
    }
}

/// Wire form: `{"terms": [[num, den, re, im], …], "order": [num, den]}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperScalarRepr {
    terms: Vec<(i64, i64, f64, f64)>,
    order: (i64, i64),
}

impl Serialize for HyperScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        HyperScalarRepr {
            terms: self
                .terms
                .iter()
                .map(|t| {
                    (
                        *t.exponent.numer(),
                        *t.exponent.denom(),
                        t.coeff.re,
                        t.coeff.im,
                    )
                })
                .collect(),
            order: (*self.order.numer(), *self.order.denom()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HyperScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = HyperScalarRepr::deserialize(deserializer)?;
        let ratio = |n: i64, d: i64| {
            if d <= 0 {
                Err(D::Error::custom(format!(
                    "exponent denominator must be positive, got {d}"
                )))
            } else {
                Ok(Exponent::new(n, d))
            }
        };
        let order = ratio(repr.order.0, repr.order.1)?;
        let terms = repr
            .terms
            .iter()
            .map(|&(n, d, re, im)| Ok((ratio(n, d)?, Complex64::new(re, im))))
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        let precision = Precision {
            order,
            tolerance: DEFAULT_TOLERANCE,
        };
        HyperScalar::from_terms_with_order(terms, order, precision).map_err(D::Error::custom)
    }
}
