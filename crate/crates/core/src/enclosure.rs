//! Rigorous dyadic interval enclosures of exact rationals.
//!
//! An enclosure `[lo, hi] / 2^prec` always contains the exact value it was
//! derived from: conversions round outward and products take the hull of the
//! endpoint products. The numerology scan uses enclosures to decide signs
//! cheaply and falls back to exact rationals when an enclosure straddles 0.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn scale(prec: u32) -> BigInt {
    BigInt::one() << prec
}

fn div_ceil(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Enclosure {
    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let scaled = q.numer() * scale(prec);
        Enclosure {
            lo: scaled.div_floor(q.denom()),
            hi: div_ceil(&scaled, q.denom()),
            prec,
        }
    }

    pub fn one(prec: u32) -> Self {
        Enclosure {
            lo: scale(prec),
            hi: scale(prec),
            prec,
        }
    }

    pub fn add(&self, rhs: &Enclosure) -> Enclosure {
        debug_assert_eq!(self.prec, rhs.prec);
        Enclosure {
            lo: &self.lo + &rhs.lo,
            hi: &self.hi + &rhs.hi,
            prec: self.prec,
        }
    }

    pub fn mul(&self, rhs: &Enclosure) -> Enclosure {
        debug_assert_eq!(self.prec, rhs.prec);
        let products = [
            &self.lo * &rhs.lo,
            &self.lo * &rhs.hi,
            &self.hi * &rhs.lo,
            &self.hi * &rhs.hi,
        ];
        let min = products.iter().min().expect("four products");
        let max = products.iter().max().expect("four products");
        let s = scale(self.prec);
        Enclosure {
            lo: min.div_floor(&s),
            hi: div_ceil(max, &s),
            prec: self.prec,
        }
    }

    /// `Some(ordering against 0)` when the enclosure decides the sign.
    pub fn sign(&self) -> Option<Ordering> {
        if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn contains(&self, q: &Rational) -> bool {
        let scaled = q * Rational::from_integer(scale(self.prec));
        Rational::from_integer(self.lo.clone()) <= scaled && scaled <= Rational::from_integer(self.hi.clone())
    }

    pub fn width(&self) -> Rational {
        Rational::new(&self.hi - &self.lo, scale(self.prec))
    }
}
