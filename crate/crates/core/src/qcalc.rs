//! The Hahn difference operator and the q-combinatorial coefficients that
//! appear alongside it.
//!
//! `D_{q,w} f(x) = (f(qx + w) - f(x)) / ((q - 1)x + w)`. With `w = 0` it is
//! the Jackson q-derivative, with `q = 1, w = 1` the forward difference, and
//! the ordinary derivative is its `w = 0, q -> 1` limit. Every `q = 1` case
//! is handled by an exact closed-form branch, never a numeric limit.

use serde::{Deserialize, Serialize};

use crate::arith::{DensePoly, Field, RationalFunction};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    /// `D_{q,w}` with `0 < q <= 1`, `w >= 0`.
    Hahn,
    /// Jackson `D_q`, i.e. `D_{q,0}` with `0 < q < 1`.
    QDifference,
    /// Forward difference, `D_{1,1}`.
    ForwardDifference,
    /// `d/dx`.
    Derivative,
}

impl ModeKind {
    pub fn name(self) -> &'static str {
        match self {
            ModeKind::Hahn => "hahn",
            ModeKind::QDifference => "q_difference",
            ModeKind::ForwardDifference => "forward_difference",
            ModeKind::Derivative => "derivative",
        }
    }
}

/// Which operator `D` stands for, together with its `(q, w)` parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperatorMode<K> {
    kind: ModeKind,
    q: K,
    omega: K,
}

impl<K: Field> OperatorMode<K> {
    pub fn hahn(q: K, omega: K) -> Result<Self> {
        if !q.is_positive() || q > K::one() {
            return Err(Error::InvalidMode(format!(
                "Hahn mode needs 0 < q <= 1, got q = {q}"
            )));
        }
        if omega.is_negative() {
            return Err(Error::InvalidMode(format!(
                "Hahn mode needs w >= 0, got w = {omega}"
            )));
        }
        if q.is_one() && omega.is_zero() {
            return Err(Error::InvalidMode(
                "q = 1 with w = 0 is the derivative limit, not a difference operator".into(),
            ));
        }
        Ok(Self {
            kind: ModeKind::Hahn,
            q,
            omega,
        })
    }

    pub fn q_difference(q: K) -> Result<Self> {
        if !q.is_positive() || q >= K::one() {
            return Err(Error::InvalidMode(format!(
                "q-difference mode needs 0 < q < 1, got q = {q}"
            )));
        }
        Ok(Self {
            kind: ModeKind::QDifference,
            q,
            omega: K::zero(),
        })
    }

    pub fn forward_difference() -> Self {
        Self {
            kind: ModeKind::ForwardDifference,
            q: K::one(),
            omega: K::one(),
        }
    }

    pub fn derivative() -> Self {
        Self {
            kind: ModeKind::Derivative,
            q: K::one(),
            omega: K::zero(),
        }
    }

    /// Builds a mode from a kind tag and optional parameters, checking
    /// that the parameters fit the kind.
    pub fn from_parts(kind: ModeKind, q: Option<K>, omega: Option<K>) -> Result<Self> {
        match kind {
            ModeKind::Hahn => Self::hahn(
                q.ok_or_else(|| Error::InvalidMode("Hahn mode needs q".into()))?,
                omega.unwrap_or_else(K::zero),
            ),
            ModeKind::QDifference => {
                if omega.as_ref().is_some_and(|w| !w.is_zero()) {
                    return Err(Error::InvalidMode("q-difference mode forces w = 0".into()));
                }
                Self::q_difference(
                    q.ok_or_else(|| Error::InvalidMode("q-difference mode needs q".into()))?,
                )
            }
            ModeKind::ForwardDifference => {
                if q.as_ref().is_some_and(|v| !v.is_one())
                    || omega.as_ref().is_some_and(|v| !v.is_one())
                {
                    return Err(Error::InvalidMode(
                        "forward difference forces q = 1, w = 1".into(),
                    ));
                }
                Ok(Self::forward_difference())
            }
            ModeKind::Derivative => {
                if q.as_ref().is_some_and(|v| !v.is_one())
                    || omega.as_ref().is_some_and(|v| !v.is_zero())
                {
                    return Err(Error::InvalidMode("derivative mode takes no q or w".into()));
                }
                Ok(Self::derivative())
            }
        }
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn q(&self) -> &K {
        &self.q
    }

    pub fn omega(&self) -> &K {
        &self.omega
    }

    pub fn is_q_one(&self) -> bool {
        self.q.is_one()
    }

    pub fn is_derivative(&self) -> bool {
        self.kind == ModeKind::Derivative
    }

    /// Fixed point `w / (1 - q)` of the lattice map; undefined when `q = 1`.
    pub fn omega0(&self) -> Option<K> {
        (!self.is_q_one()).then(|| self.omega.clone() / (K::one() - self.q.clone()))
    }

    /// The same operator expressed as a general Hahn mode. `None` for the
    /// derivative, which is only a limit.
    pub fn as_hahn(&self) -> Option<Self> {
        match self.kind {
            ModeKind::Derivative => None,
            _ => Some(Self {
                kind: ModeKind::Hahn,
                q: self.q.clone(),
                omega: self.omega.clone(),
            }),
        }
    }

    /// `q^k x + w [k]_q`, the k-fold image of `x` under `x -> qx + w`, as
    /// `(slope, intercept)`.
    pub fn lattice_shift(&self, k: i64) -> (K, K) {
        (self.q.powi(k), self.omega.clone() * q_number(k, self))
    }
}

/// Basic number `[k]_q = (1 - q^k) / (1 - q)`, equal to `k` when `q = 1`.
pub fn q_number<K: Field>(k: i64, mode: &OperatorMode<K>) -> K {
    q_number_at(k, mode.q())
}

pub fn q_number_at<K: Field>(k: i64, q: &K) -> K {
    if q.is_one() {
        return K::from_int(k);
    }
    (K::one() - q.powi(k)) / (K::one() - q.clone())
}

/// `(a; q)_k = prod_{i=1}^{k} (1 - a q^{i-1})`.
pub fn q_pochhammer<K: Field>(a: &K, q: &K, k: u32) -> K {
    let mut acc = K::one();
    let mut aq = a.clone();
    for _ in 0..k {
        acc *= K::one() - aq.clone();
        aq *= q;
    }
    acc
}

/// Gaussian binomial `(q;q)_n / ((q;q)_k (q;q)_{n-k})`; ordinary binomial at `q = 1`.
pub fn q_binomial<K: Field>(n: u32, k: u32, q: &K) -> Result<K> {
    if k > n {
        return Err(Error::BadIndex(format!(
            "q-binomial needs k <= n, got k = {k}, n = {n}"
        )));
    }
    if q.is_one() {
        let mut acc = K::one();
        for i in 0..k {
            acc *= K::from_int(i64::from(n - i));
            acc /= K::from_int(i64::from(i + 1));
        }
        return Ok(acc);
    }
    let qq = |m| q_pochhammer(q, q, m);
    Ok(qq(n) / (qq(k) * qq(n - k)))
}

/// `(q;q)_j / ((q;q)_i (1 - q)^{j-i})`, which is `j!/i!` at `q = 1`.
pub fn q_factorial_ratio<K: Field>(j: u32, i: u32, q: &K) -> Result<K> {
    if i > j {
        return Err(Error::BadIndex(format!(
            "factorial ratio needs i <= j, got i = {i}, j = {j}"
        )));
    }
    if q.is_one() {
        let mut acc = K::one();
        for m in (i + 1)..=j {
            acc *= K::from_int(i64::from(m));
        }
        return Ok(acc);
    }
    let qq = |m| q_pochhammer(q, q, m);
    Ok(qq(j) / (qq(i) * (K::one() - q.clone()).powi(i64::from(j - i))))
}

/// `D p` for a polynomial; the divided difference is always exact.
pub fn hahn_apply_poly<K: Field>(p: &DensePoly<K>, mode: &OperatorMode<K>) -> DensePoly<K> {
    if mode.is_derivative() {
        return p.derivative();
    }
    if p.is_constant() {
        return DensePoly::zero();
    }
    let shifted = p.compose_affine(mode.q(), mode.omega());
    let step = DensePoly::linear(mode.omega().clone(), mode.q().clone() - K::one());
    (&shifted - p)
        .exact_div(&step)
        .expect("polynomial divided difference is exact")
}

/// `D f` for a rational function. The removable singularity at `w_0` is
/// absorbed by canonicalisation.
pub fn hahn_apply<K: Field>(
    f: &RationalFunction<K>,
    mode: &OperatorMode<K>,
) -> RationalFunction<K> {
    if let Some(p) = f.to_poly() {
        return RationalFunction::from_poly(hahn_apply_poly(&p, mode));
    }
    if mode.is_derivative() {
        return f.derivative();
    }
    let shifted = f.compose_affine(mode.q(), mode.omega());
    let step = DensePoly::linear(mode.omega().clone(), mode.q().clone() - K::one());
    let diff = &shifted - f;
    diff.checked_div(&RationalFunction::from_poly(step))
        .expect("lattice step is a nonzero polynomial")
}

pub fn hahn_iterate_poly<K: Field>(
    p: &DensePoly<K>,
    j: u32,
    mode: &OperatorMode<K>,
) -> DensePoly<K> {
    (0..j).fold(p.clone(), |acc, _| hahn_apply_poly(&acc, mode))
}

/// `D^{(j)} f`, with `D^{(0)} f = f`.
pub fn hahn_iterate<K: Field>(
    f: &RationalFunction<K>,
    j: u32,
    mode: &OperatorMode<K>,
) -> RationalFunction<K> {
    (0..j).fold(f.clone(), |acc, _| hahn_apply(&acc, mode))
}

/// `D^{(j)} f` evaluated at `x = c`.
pub fn hahn_eval_at<K: Field>(
    f: &RationalFunction<K>,
    j: u32,
    c: &K,
    mode: &OperatorMode<K>,
) -> Result<K> {
    hahn_iterate(f, j, mode).eval(c)
}

pub fn hahn_eval_poly_at<K: Field>(p: &DensePoly<K>, j: u32, c: &K, mode: &OperatorMode<K>) -> K {
    hahn_iterate_poly(p, j, mode).eval(c)
}

/// Right-hand side of the Leibniz rule for `D^{(n)}(f g)`:
/// `sum_k [n k]_q q^{k(k-n)} D^{(k)} g(x) * D^{(n-k)}[f(q^k x + w[k]_q)]`,
/// where the operator in the second factor acts on the composed function.
/// At `q = 1` the coefficients reduce to plain binomials.
pub fn leibniz_rhs<K: Field>(
    f: &RationalFunction<K>,
    g: &RationalFunction<K>,
    n: u32,
    mode: &OperatorMode<K>,
) -> RationalFunction<K> {
    let mut acc = RationalFunction::zero();
    for k in 0..=n {
        let coeff = if mode.is_q_one() {
            q_binomial(n, k, &K::one()).expect("k <= n")
        } else {
            let kk = i64::from(k);
            q_binomial(n, k, mode.q()).expect("k <= n") * mode.q().powi(kk * (kk - i64::from(n)))
        };
        let (slope, intercept) = mode.lattice_shift(i64::from(k));
        let f_shift = f.compose_affine(&slope, &intercept);
        let term = &hahn_iterate(g, k, mode) * &hahn_iterate(&f_shift, n - k, mode);
        acc = &acc + &term.scale(&coeff);
    }
    acc
}

/// Closed form of `D^{(n)} (beta - gamma x)^{-1}`.
pub fn reciprocal_derivative<K: Field>(
    beta: &K,
    gamma: &K,
    n: u32,
    mode: &OperatorMode<K>,
) -> Result<RationalFunction<K>> {
    if beta.is_zero() && gamma.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let factor = |i: u32| -> DensePoly<K> {
        // beta - gamma (q^i x + w [i]_q)
        let (slope, intercept) = mode.lattice_shift(i64::from(i));
        DensePoly::linear(
            beta.clone() - gamma.clone() * intercept,
            -(gamma.clone() * slope),
        )
    };
    let numer = gamma.powi(i64::from(n));
    match mode.kind() {
        ModeKind::Derivative => {
            let den = DensePoly::linear(beta.clone(), -gamma.clone()).pow(n + 1);
            let fact = q_factorial_ratio(n, 0, &K::one())?;
            RationalFunction::new(DensePoly::constant(numer * fact), den)
        }
        _ if mode.is_q_one() => {
            let den = (0..=n).fold(DensePoly::one(), |acc, i| &acc * &factor(i));
            let fact = q_factorial_ratio(n, 0, &K::one())?;
            RationalFunction::new(DensePoly::constant(numer * fact), den)
        }
        _ => {
            let q = mode.q();
            let qq = q_pochhammer(q, q, n);
            let scale = qq / (K::one() - q.clone()).powi(i64::from(n));
            let den = (0..=n).fold(DensePoly::one(), |acc, i| &acc * &factor(i));
            RationalFunction::new(DensePoly::constant(numer * scale), den)
        }
    }
}
