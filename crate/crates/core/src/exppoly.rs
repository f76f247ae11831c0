//! Finite sums of real exponentials `sum_k c_k exp(lambda_k x)`.
//!
//! Every tau function and every derivative of one is an [`ExpPoly`]. Values are
//! kept in canonical form: rates strictly increasing, equal rates merged by
//! exact comparison, exact zero coefficients dropped. Evaluation factors out the
//! dominant exponent so that intermediate values never overflow.

use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::error::{Error, Result};

/// One term `coeff * exp(rate * x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpTerm {
    pub coeff: f64,
    pub rate: f64,
}

impl ExpTerm {
    pub fn new(coeff: f64, rate: f64) -> Self {
        Self { coeff, rate }
    }
}

/// Canonical finite exponential sum. The empty sum is the zero function.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExpPoly {
    terms: Vec<ExpTerm>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, 0.0)
    }

    pub fn monomial(coeff: f64, rate: f64) -> Self {
        Self::from_terms(vec![ExpTerm::new(coeff, rate)])
    }

    /// Builds the canonical form of an arbitrary list of terms.
    ///
    /// # Panics
    /// If any rate or coefficient is not finite.
    pub fn from_terms(mut terms: Vec<ExpTerm>) -> Self {
        for t in &terms {
            assert!(
                t.rate.is_finite() && t.coeff.is_finite(),
                "non-finite exponential term {t:?}"
            );
        }
        terms.sort_by(|a, b| a.rate.total_cmp(&b.rate));
        let mut out: Vec<ExpTerm> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if last.rate == t.rate => last.coeff += t.coeff,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coeff != 0.0);
        Self { terms: out }
    }

    pub fn terms(&self) -> &[ExpTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest rate, `None` for the zero function.
    pub fn max_rate(&self) -> Option<f64> {
        self.terms.last().map(|t| t.rate)
    }

    /// Smallest rate, `None` for the zero function.
    pub fn min_rate(&self) -> Option<f64> {
        self.terms.first().map(|t| t.rate)
    }

    /// Coefficient attached to exactly `rate` (0 when absent).
    pub fn coeff_at(&self, rate: f64) -> f64 {
        self.terms
            .binary_search_by(|t| t.rate.total_cmp(&rate))
            .map(|k| self.terms[k].coeff)
            .unwrap_or(0.0)
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.coeff.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm::new(s * t.coeff, t.rate))
                .collect(),
        )
    }

    /// Multiplies by `exp(shift * x)`.
    pub fn shift_rate(&self, shift: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm::new(t.coeff, t.rate + shift))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.len() + other.len());
        terms.extend_from_slice(&self.terms);
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.len() + other.len());
        terms.extend_from_slice(&self.terms);
        terms.extend(other.terms.iter().map(|t| ExpTerm::new(-t.coeff, t.rate)));
        Self::from_terms(terms)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.len() * other.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(ExpTerm::new(a.coeff * b.coeff, a.rate + b.rate));
            }
        }
        Self::from_terms(terms)
    }

    pub fn differentiate(&self) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| ExpTerm::new(t.rate * t.coeff, t.rate))
                .collect(),
        )
    }

    /// Dominant exponent `max_k rate_k * x`, `None` for the zero function.
    pub fn dominant_exponent(&self, x: f64) -> Option<f64> {
        self.terms
            .iter()
            .map(|t| t.rate * x)
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }

    /// `exp(-shift) * p(x)`, the building block of overflow-safe evaluation.
    pub fn eval_shifted(&self, x: f64, shift: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * (t.rate * x - shift).exp())
            .sum()
    }

    /// `p(x)`; the result overflows to infinity only when the true value does.
    pub fn eval(&self, x: f64) -> f64 {
        match self.dominant_exponent(x) {
            None => 0.0,
            Some(s) => self.eval_shifted(x, s) * s.exp(),
        }
    }
}

/// `num(x) / den(x)` with both evaluated under one common exponent shift.
pub fn eval_ratio(num: &ExpPoly, den: &ExpPoly, x: f64) -> Result<f64> {
    let shift = joint_shift(&[num, den], x);
    let d = den.eval_shifted(x, shift);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::DenominatorZero(x));
    }
    Ok(num.eval_shifted(x, shift) / d)
}

/// Largest `rate * x` over all terms of all polynomials (0 if all are zero).
pub fn joint_shift(polys: &[&ExpPoly], x: f64) -> f64 {
    polys
        .iter()
        .filter_map(|p| p.dominant_exponent(x))
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        .unwrap_or(0.0)
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: Self) -> ExpPoly {
        ExpPoly::add(self, rhs)
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: Self) -> ExpPoly {
        ExpPoly::sub(self, rhs)
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: Self) -> ExpPoly {
        ExpPoly::mul(self, rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(-1.0)
    }
}
