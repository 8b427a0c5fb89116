//! Exact rational scalars.
//!
//! Everything in this crate is computed over `BigRational`; there is no
//! floating point anywhere in the core.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

pub type Rational = num_rational::BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3"`, `"-3/4"`, `"+1/2"`. Rejects zero denominators.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.strip_prefix('+').unwrap_or(num).parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

/// Least common multiple of all denominators (1 for an empty slice).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales a vector by a positive rational so that all entries become
/// integers with gcd one. The zero vector is returned unchanged.
pub fn integerize(values: &[Rational]) -> Vec<BigInt> {
    let lcm = denominator_lcm(values);
    let scaled: Vec<BigInt> = values.iter().map(|v| (v * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = scaled.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if gcd.is_zero() {
        return scaled;
    }
    scaled.into_iter().map(|v| v / &gcd).collect()
}

/// Converts integers back to rationals.
pub fn from_integers(values: &[BigInt]) -> Vec<Rational> {
    values.iter().map(|v| Rational::from_integer(v.clone())).collect()
}
