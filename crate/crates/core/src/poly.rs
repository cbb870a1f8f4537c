//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A polynomial is a map from exponent vectors to nonzero coefficients.
//! The lab only ever needs degree <= 3 in two or three variables, so the
//! representation favours simplicity over asymptotic speed.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::exact::{format_rational, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// `c * x^exps`.
    pub fn monomial(exps: Vec<u32>, c: Rational) -> Self {
        let mut p = Poly::zero(exps.len());
        p.add_term(exps, c);
        p
    }

    /// The coordinate function `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Poly::monomial(e, Rational::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c.is_zero() {
            return;
        }
        let key = exps.clone();
        let slot = self.terms.entry(exps).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * Rational::from_integer(e[i].into()));
        }
        out
    }

    /// Applies the derivative `d^orders` (one order per variable).
    pub fn derivative_multi(&self, orders: &[u32]) -> Poly {
        let mut p = self.clone();
        for (i, &o) in orders.iter().enumerate() {
            for _ in 0..o {
                p = p.derivative(i);
            }
        }
        p
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "evaluation point has wrong length");
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sparse exponent form used in JSON certificates.
    pub fn to_sparse(&self) -> Vec<SparseTerm> {
        self.terms
            .iter()
            .map(|(e, c)| SparseTerm {
                exponents: e.clone(),
                coeff: format_rational(c),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SparseTerm {
    pub exponents: Vec<u32>,
    pub coeff: String,
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars);
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Poly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

const VAR_NAMES: [&str; 3] = ["r", "s", "u"];

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // highest degree first reads more naturally
        let mut items: Vec<_> = self.terms.iter().collect();
        items.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then(b.0.cmp(a.0))
        });
        for (e, c) in items {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    let name = VAR_NAMES.get(i).map(|s| s.to_string()).unwrap_or(format!("x{i}"));
                    if k == 1 {
                        name
                    } else {
                        format!("{name}^{k}")
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{}", format_rational(c))?;
            } else if c.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", format_rational(c), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    fn r() -> Poly {
        Poly::var(2, 0)
    }
    fn s() -> Poly {
        Poly::var(2, 1)
    }

    #[test]
    fn arithmetic_cancels() {
        let p = &(&r() * &s()) - &(&s() * &r());
        assert!(p.is_zero());
        let q = &(&r() + &s()) * &(&r() - &s());
        assert_eq!(q, &(&r() * &r()) - &(&s() * &s()));
    }

    #[test]
    fn derivative_and_eval() {
        // r^3 + 2 r s^2
        let p = &(&(&r() * &r()) * &r()) + &(&r() * &(&s() * &s())).scale(&int(2));
        let dr = p.derivative(0);
        assert_eq!(dr.eval(&[int(1), int(2)]), int(3 + 8));
        let drs = p.derivative_multi(&[1, 1]);
        assert_eq!(drs.eval(&[ratio(1, 3), ratio(1, 2)]), int(2));
        assert_eq!(p.degree(), Some(3));
        assert_eq!(Poly::zero(2).degree(), None);
    }

    #[test]
    fn display() {
        let p = &(&r() * &r()).scale(&int(72)) + &s();
        assert_eq!(p.to_string(), "72*r^2 + s");
        assert_eq!(Poly::zero(2).to_string(), "0");
    }
}
