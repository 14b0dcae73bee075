use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::field::Field;
use super::poly::DensePoly;
use crate::error::{Error, Result};

/// A reduced quotient of polynomials.
///
/// Canonical form: the denominator is monic, numerator and denominator are
/// coprime, and zero is `0 / 1`. Every constructor and operation restores
/// this form, so `==` is equality of rational functions.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RationalFunction<K> {
    num: DensePoly<K>,
    den: DensePoly<K>,
}

impl<K: Field> Default for RationalFunction<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K: Field> From<DensePoly<K>> for RationalFunction<K> {
    fn from(p: DensePoly<K>) -> Self {
        Self::from_poly(p)
    }
}

impl<K: Field> RationalFunction<K> {
    pub fn new(num: DensePoly<K>, den: DensePoly<K>) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: DensePoly<K>, den: DensePoly<K>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_constant() {
            let inv = den.coeffs()[0].inv();
            return Self {
                num: num.scale(&inv),
                den: DensePoly::one(),
            };
        }
        let g = DensePoly::gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_div(&g).expect("gcd divides numerator"),
                den.exact_div(&g).expect("gcd divides denominator"),
            )
        };
        Self::normalize_lead(num, den)
    }

    /// Scales so the denominator is monic; assumes coprime inputs.
    fn normalize_lead(num: DensePoly<K>, den: DensePoly<K>) -> Self {
        let lead = den.leading().expect("nonzero denominator").clone();
        if lead.is_one() {
            Self { num, den }
        } else {
            let inv = lead.inv();
            Self {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn from_poly(p: DensePoly<K>) -> Self {
        Self {
            num: p,
            den: DensePoly::one(),
        }
    }

    pub fn zero() -> Self {
        Self::from_poly(DensePoly::zero())
    }

    pub fn one() -> Self {
        Self::from_poly(DensePoly::one())
    }

    pub fn constant(c: K) -> Self {
        Self::from_poly(DensePoly::constant(c))
    }

    pub fn x() -> Self {
        Self::from_poly(DensePoly::x())
    }

    /// `1 / p`.
    pub fn reciprocal_of(p: &DensePoly<K>) -> Result<Self> {
        Self::new(DensePoly::one(), p.clone())
    }

    pub fn num(&self) -> &DensePoly<K> {
        &self.num
    }

    pub fn den(&self) -> &DensePoly<K> {
        &self.den
    }

    pub fn into_parts(self) -> (DensePoly<K>, DensePoly<K>) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_poly(&self) -> bool {
        self.den.is_one()
    }

    pub fn to_poly(&self) -> Option<DensePoly<K>> {
        self.is_poly().then(|| self.num.clone())
    }

    pub fn eval(&self, x0: &K) -> Result<K> {
        let d = self.den.eval(x0);
        if d.is_zero() {
            return Err(Error::PoleAtEvaluationPoint(x0.to_string()));
        }
        Ok(self.num.eval(x0) / d)
    }

    /// `f(a x + b)`.
    pub fn compose_affine(&self, a: &K, b: &K) -> Self {
        let num = self.num.compose_affine(a, b);
        let den = self.den.compose_affine(a, b);
        if a.is_zero() {
            Self::reduce(num, den)
        } else {
            // an invertible substitution preserves coprimality
            Self::normalize_lead(num, den)
        }
    }

    pub fn scale(&self, s: &K) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self {
            num: self.num.scale(s),
            den: self.den.clone(),
        }
    }

    /// Formal derivative `(n' d - n d') / d^2`.
    pub fn derivative(&self) -> Self {
        if self.is_poly() {
            return Self::from_poly(self.num.derivative());
        }
        let top = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::reduce(top, &self.den * &self.den)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::normalize_lead(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self * &rhs.recip()?)
    }

    pub fn pow(&self, e: u32) -> Self {
        Self {
            num: self.num.pow(e),
            den: self.den.pow(e),
        }
    }

    fn add_impl(&self, rhs: &Self, negate_rhs: bool) -> Self {
        let rnum = if negate_rhs {
            -&rhs.num
        } else {
            rhs.num.clone()
        };
        if self.is_zero() {
            return Self {
                num: rnum,
                den: rhs.den.clone(),
            };
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rnum;
            if self.is_poly() {
                return Self::from_poly(num);
            }
            return Self::reduce(num, self.den.clone());
        }
        if self.is_poly() {
            return Self {
                num: &(&self.num * &rhs.den) + &rnum,
                den: rhs.den.clone(),
            };
        }
        if rhs.is_poly() {
            return Self {
                num: &self.num + &(&rnum * &self.den),
                den: self.den.clone(),
            };
        }
        let g = DensePoly::gcd(&self.den, &rhs.den);
        let ld = self.den.exact_div(&g).expect("gcd divides");
        let rd = rhs.den.exact_div(&g).expect("gcd divides");
        let num = &(&self.num * &rd) + &(&rnum * &ld);
        let den = &self.den * &rd;
        if num.is_zero() {
            return Self::zero();
        }
        if g.is_one() {
            return Self { num, den };
        }
        let h = DensePoly::gcd(&num, &g);
        if h.is_one() {
            Self { num, den }
        } else {
            Self {
                num: num.exact_div(&h).expect("gcd divides"),
                den: den.exact_div(&h).expect("gcd divides"),
            }
        }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        if self.is_poly() && rhs.is_poly() {
            return Self::from_poly(&self.num * &rhs.num);
        }
        let g1 = DensePoly::gcd(&self.num, &rhs.den);
        let g2 = DensePoly::gcd(&rhs.num, &self.den);
        let div = |p: &DensePoly<K>, g: &DensePoly<K>| {
            if g.is_one() {
                p.clone()
            } else {
                p.exact_div(g).expect("gcd divides")
            }
        };
        let num = &div(&self.num, &g1) * &div(&rhs.num, &g2);
        let den = &div(&self.den, &g2) * &div(&rhs.den, &g1);
        Self::normalize_lead(num, den)
    }
}

impl<K: Field> fmt::Display for RationalFunction<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_poly() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

impl<K: Field> Add for &RationalFunction<K> {
    type Output = RationalFunction<K>;
    fn add(self, rhs: Self) -> RationalFunction<K> {
        self.add_impl(rhs, false)
    }
}

impl<K: Field> Sub for &RationalFunction<K> {
    type Output = RationalFunction<K>;
    fn sub(self, rhs: Self) -> RationalFunction<K> {
        self.add_impl(rhs, true)
    }
}

impl<K: Field> Mul for &RationalFunction<K> {
    type Output = RationalFunction<K>;
    fn mul(self, rhs: Self) -> RationalFunction<K> {
        self.mul_impl(rhs)
    }
}

impl<K: Field> Neg for &RationalFunction<K> {
    type Output = RationalFunction<K>;
    fn neg(self) -> RationalFunction<K> {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl<K: Field> $tr for RationalFunction<K> {
            type Output = RationalFunction<K>;
            fn $m(self, rhs: Self) -> RationalFunction<K> {
                (&self).$m(&rhs)
            }
        }
        impl<K: Field> $tr<&RationalFunction<K>> for RationalFunction<K> {
            type Output = RationalFunction<K>;
            fn $m(self, rhs: &RationalFunction<K>) -> RationalFunction<K> {
                (&self).$m(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<K: Field> Neg for RationalFunction<K> {
    type Output = RationalFunction<K>;
    fn neg(self) -> RationalFunction<K> {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::One;

    type P = DensePoly<BigRational>;
    type F = RationalFunction<BigRational>;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::from_frac(p, q)
    }

    fn p(c: &[i64]) -> P {
        P::new(c.iter().map(|&v| BigRational::from_int(v)).collect())
    }

    #[test]
    fn new_cancels_common_factor() {
        let f = F::new(p(&[-1, 0, 1]), p(&[-1, 1])).unwrap();
        assert_eq!(f, F::from_poly(p(&[1, 1])));
        let g = F::new(p(&[0, 2]), p(&[2])).unwrap();
        assert_eq!(g, F::x());
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(F::new(p(&[1]), P::zero()), Err(Error::ZeroDenominator));
        assert!(F::zero().recip().is_err());
    }

    #[test]
    fn reciprocal_product_stays_irreducible() {
        // gamma / ((beta - gamma x)(beta - gamma (q x + w)))
        let (beta, gamma, q, w) = (r(2, 1), r(3, 1), r(1, 2), r(1, 3));
        let l0 = P::linear(beta.clone(), -gamma.clone());
        let l1 = l0.compose_affine(&q, &w);
        let f = F::new(P::constant(gamma.clone()), &l0 * &l1).unwrap();
        assert_eq!(f.den().degree(), Some(2));
        assert!(f.den().leading().unwrap().is_one());
        assert_eq!(P::gcd(f.num(), f.den()), P::one());
    }

    #[test]
    fn denominator_is_monic() {
        let f = F::new(p(&[1, 1]), p(&[3, 6])).unwrap();
        assert!(f.den().leading().unwrap().is_one());
        assert_eq!(f.num(), &P::new(vec![r(1, 6), r(1, 6)]));
    }

    #[test]
    fn arithmetic_round_trip() {
        let a = F::new(p(&[1, 2]), p(&[1, 0, 1])).unwrap();
        let b = F::new(p(&[3]), p(&[-1, 1])).unwrap();
        let s = &a + &b;
        assert_eq!(&s - &b, a);
        let m = &a * &b;
        assert_eq!(m.checked_div(&b).unwrap(), a);
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn evaluation_and_poles() {
        let f = F::new(p(&[1]), p(&[-1, 1])).unwrap();
        assert_eq!(f.eval(&r(3, 1)).unwrap(), r(1, 2));
        assert!(matches!(
            f.eval(&r(1, 1)),
            Err(Error::PoleAtEvaluationPoint(_))
        ));
    }

    #[test]
    fn derivative_of_reciprocal() {
        let f = F::new(p(&[1]), p(&[0, 1])).unwrap();
        assert_eq!(f.derivative(), F::new(p(&[-1]), p(&[0, 0, 1])).unwrap());
    }
}
