use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{FromPrimitive, NumAssignRef, Signed};

use crate::error::{Error, Result};

/// An exact ordered field of scalars.
///
/// Every identity in this crate is checked by structural equality, so
/// implementors must have exact arithmetic. Arbitrary-precision rationals
/// are the intended instance; fixed-width rationals work for small inputs
/// and panic on overflow.
pub trait Field:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Signed
    + NumAssignRef
    + FromPrimitive
    + Send
    + Sync
    + 'static
{
    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer not representable in scalar field")
    }

    fn from_frac(p: i64, q: i64) -> Self {
        Self::from_int(p) / Self::from_int(q)
    }

    /// Parses the `"p/q"` (or `"p"`) wire format.
    fn parse_exact(s: &str) -> Result<Self>;

    /// Integer power; negative exponents invert.
    fn powi(&self, e: i64) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc *= &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        if e < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

fn parse_ratio<T>(s: &str) -> Result<Ratio<T>>
where
    Ratio<T>: FromStr,
    T: Clone + num_integer::Integer,
{
    let t = s.trim();
    if let Some((_, d)) = t.split_once('/') {
        if d.trim().chars().all(|c| c == '0') && !d.trim().is_empty() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
    }
    t.parse::<Ratio<T>>()
        .map_err(|_| Error::Parse(format!("not a rational: `{s}`")))
}

impl Field for Ratio<BigInt> {
    fn parse_exact(s: &str) -> Result<Self> {
        parse_ratio(s)
    }
}

macro_rules! small_ratio_field {
    ($($t:ty),*) => {$(
        impl Field for Ratio<$t> {
            fn parse_exact(s: &str) -> Result<Self> {
                parse_ratio(s)
            }
        }
    )*};
}

small_ratio_field!(i64, i128);

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn powi_handles_negative_exponents() {
        let half = BigRational::from_frac(1, 2);
        assert_eq!(half.powi(3), BigRational::from_frac(1, 8));
        assert_eq!(half.powi(-2), BigRational::from_int(4));
        assert_eq!(half.powi(0), BigRational::from_int(1));
    }

    #[test]
    fn parse_wire_format() {
        assert_eq!(
            BigRational::parse_exact("-6/4").unwrap(),
            BigRational::from_frac(-3, 2)
        );
        assert_eq!(
            BigRational::parse_exact("7").unwrap(),
            BigRational::from_int(7)
        );
        assert!(BigRational::parse_exact("1/0").is_err());
        assert!(BigRational::parse_exact("x").is_err());
        assert_eq!(BigRational::from_frac(-3, 2).to_string(), "-3/2");
        assert_eq!(BigRational::from_int(5).to_string(), "5");
    }

    #[test]
    fn fixed_width_instance() {
        type R = Ratio<i64>;
        assert_eq!(R::from_frac(2, 3).powi(2), R::from_frac(4, 9));
    }
}
