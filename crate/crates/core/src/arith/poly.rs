use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::field::Field;
use crate::error::{Error, Result};

/// Dense univariate polynomial, coefficients in ascending degree.
///
/// The coefficient vector never ends in a zero, so the zero polynomial is
/// the empty vector and two polynomials are equal iff their vectors are.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DensePoly<K> {
    coeffs: Vec<K>,
}

impl<K: Field> Default for DensePoly<K> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<K: Field> DensePoly<K> {
    pub fn new(mut coeffs: Vec<K>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(K::one())
    }

    pub fn constant(c: K) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::new(vec![K::zero(), K::one()])
    }

    /// `c0 + c1 x`.
    pub fn linear(c0: K, c1: K) -> Self {
        Self::new(vec![c0, c1])
    }

    pub fn monomial(c: K, degree: usize) -> Self {
        let mut v = vec![K::zero(); degree + 1];
        v[degree] = c;
        Self::new(v)
    }

    /// Monic polynomial `(x - r_0)(x - r_1)...`.
    pub fn from_roots<'a, I>(roots: I) -> Self
    where
        I: IntoIterator<Item = &'a K>,
    {
        roots.into_iter().fold(Self::one(), |acc, r| {
            acc.mul(&Self::linear(-r.clone(), K::one()))
        })
    }

    pub fn coeffs(&self) -> &[K] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<K> {
        self.coeffs
    }

    /// Coefficient of `x^i` (zero past the degree).
    pub fn coeff(&self, i: usize) -> K {
        self.coeffs.get(i).cloned().unwrap_or_else(K::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&K> {
        self.coeffs.last()
    }

    pub fn eval(&self, x0: &K) -> K {
        let mut acc = K::zero();
        for c in self.coeffs.iter().rev() {
            acc *= x0;
            acc += c;
        }
        acc
    }

    /// `p(a x + b)`.
    pub fn compose_affine(&self, a: &K, b: &K) -> Self {
        let lin = Self::linear(b.clone(), a.clone());
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(c.clone());
        }
        acc
    }

    /// `p(q(x))` for an arbitrary inner polynomial.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut acc = Self::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * inner) + &Self::constant(c.clone());
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * K::from_int(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, s: &K) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Divides through by the leading coefficient. Zero stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some(l) if l.is_one() => self.clone(),
            Some(l) => self.scale(&l.inv()),
        }
    }

    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::ZeroDenominator)?;
        let lead_inv = divisor.coeffs[dd].inv();
        let mut rem = self.coeffs.clone();
        let Some(nd) = self.degree().filter(|&nd| nd >= dd) else {
            return Ok((Self::zero(), self.clone()));
        };
        let mut quot = vec![K::zero(); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let c = rem[k + dd].clone() * lead_inv.clone();
            if c.is_zero() {
                continue;
            }
            for (i, d) in divisor.coeffs.iter().enumerate() {
                let t = c.clone() * d.clone();
                rem[k + i] -= t;
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Quotient when `divisor` divides `self` exactly.
    pub fn exact_div(&self, divisor: &Self) -> Option<Self> {
        match self.div_rem(divisor) {
            Ok((q, r)) if r.is_zero() => Some(q),
            _ => None,
        }
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut r0, mut r1) = (a.monic(), b.monic());
        if r0.degree() < r1.degree() {
            std::mem::swap(&mut r0, &mut r1);
        }
        while !r1.is_zero() {
            if r1.is_constant() {
                return Self::one();
            }
            let (_, r) = r0.div_rem(&r1).expect("nonzero divisor");
            r0 = r1;
            r1 = r.monic();
        }
        r0
    }

    /// Writes the polynomial in descending powers, e.g. `x^3 - 1/2 x`.
    pub fn to_pretty(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_owned();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_owned(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag} {mono}"));
            }
        }
        out
    }
}

impl<K: Field> fmt::Display for DensePoly<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pretty("x"))
    }
}

impl<K: Field> Add for &DensePoly<K> {
    type Output = DensePoly<K>;
    fn add(self, rhs: Self) -> DensePoly<K> {
        let (long, short) = if self.coeffs.len() >= rhs.coeffs.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut v = long.coeffs.clone();
        for (a, b) in v.iter_mut().zip(&short.coeffs) {
            *a += b;
        }
        DensePoly::new(v)
    }
}

impl<K: Field> Sub for &DensePoly<K> {
    type Output = DensePoly<K>;
    fn sub(self, rhs: Self) -> DensePoly<K> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut v = self.coeffs.clone();
        v.resize(n, K::zero());
        for (a, b) in v.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        DensePoly::new(v)
    }
}

impl<K: Field> Mul for &DensePoly<K> {
    type Output = DensePoly<K>;
    fn mul(self, rhs: Self) -> DensePoly<K> {
        if self.is_zero() || rhs.is_zero() {
            return DensePoly::zero();
        }
        let mut v = vec![K::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a.clone() * b.clone();
            }
        }
        DensePoly::new(v)
    }
}

impl<K: Field> Neg for &DensePoly<K> {
    type Output = DensePoly<K>;
    fn neg(self) -> DensePoly<K> {
        DensePoly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $m:ident) => {
        impl<K: Field> $tr for DensePoly<K> {
            type Output = DensePoly<K>;
            fn $m(self, rhs: Self) -> DensePoly<K> {
                (&self).$m(&rhs)
            }
        }
        impl<K: Field> $tr<&DensePoly<K>> for DensePoly<K> {
            type Output = DensePoly<K>;
            fn $m(self, rhs: &DensePoly<K>) -> DensePoly<K> {
                (&self).$m(rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl<K: Field> Neg for DensePoly<K> {
    type Output = DensePoly<K>;
    fn neg(self) -> DensePoly<K> {
        -&self
    }
}
