//! Exact scalars: arbitrary-precision integers and rationals, plus the
//! "a/b" text format used on the command line and in every report.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{LabError, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"a/b"` or `"a"`. Decimal notation is rejected so that no
/// exact parameter is ever rounded on the way in.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if text.contains(['.', 'e', 'E']) {
        return Err(LabError::param(format!(
            "'{text}' is not an exact rational; write it as a/b"
        )));
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| LabError::param(format!("bad rational numerator in '{text}'")))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| LabError::param(format!("bad rational denominator in '{text}'")))?;
    if den.is_zero() {
        return Err(LabError::param(format!("zero denominator in '{text}'")));
    }
    Ok(Rational::new(num, den))
}

/// Renders in lowest terms as `"a/b"`, or `"a"` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

pub fn binomial_usize(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc: usize = 1;
    let k = k.min(n - k);
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Integer power with exponent by squaring.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

pub fn floor(q: &Rational) -> BigInt {
    q.numer().div_floor(q.denom())
}

pub fn is_negative(q: &Rational) -> bool {
    q.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("42/4").unwrap(), ratio(21, 2));
        assert_eq!(format_rational(&ratio(21, 20)), "21/20");
        assert_eq!(format_rational(&int(-3)), "-3");
        assert_eq!(parse_rational(" -7 ").unwrap(), int(-7));
        assert_eq!(format_rational(&ratio(4, -6)), "-2/3");
    }

    #[test]
    fn decimals_rejected() {
        assert!(parse_rational("1.05").is_err());
        assert!(parse_rational("1e-6").is_err());
        assert!(parse_rational("3/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(3, 5), BigUint::zero());
        assert_eq!(binomial_usize(10, 3), 120);
        assert_eq!(binomial_usize(4, 4), 1);
        assert_eq!(binomial_usize(2, 3), 0);
    }

    #[test]
    fn floors() {
        assert_eq!(floor(&ratio(-7, 2)), BigInt::from(-4));
        assert_eq!(floor(&ratio(7, 2)), BigInt::from(3));
    }
}
