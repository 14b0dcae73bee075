//! Standard monic orthogonal families given by recurrence and structure data.
//!
//! A family stores `alpha_n`, `beta_n`, `h_0`, the structure relation
//! `A(x) D P_n = B_n(x) P_n + C_n(x) P_{n-1}` and the operator `D` it holds
//! for. Nothing supplied is trusted: construction regenerates `P_n`, checks the
//! structure relation, derives moments from the Jacobi matrix and checks
//! Hankel positivity and orthogonality, all exactly.

use crate::arith::{DensePoly, Field, RationalFunction};
use crate::error::{Error, Result};
use crate::qcalc::{hahn_apply_poly, q_number_at, OperatorMode};

/// Moments `mu_k = (x^k, 1)` of the standard inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable<K> {
    mu: Vec<K>,
}

impl<K: Field> MomentTable<K> {
    pub fn new(mu: Vec<K>) -> Self {
        Self { mu }
    }

    pub fn as_slice(&self) -> &[K] {
        &self.mu
    }

    /// Highest available moment index, `None` when empty.
    pub fn max_index(&self) -> Option<usize> {
        self.mu.len().checked_sub(1)
    }

    pub fn get(&self, k: usize) -> Result<&K> {
        self.mu.get(k).ok_or(Error::MomentsExhausted {
            needed: k,
            available: self.mu.len().saturating_sub(1),
        })
    }

    /// `(f, g) = sum_{a,b} f_a g_b mu_{a+b}`.
    pub fn inner(&self, f: &DensePoly<K>, g: &DensePoly<K>) -> Result<K> {
        let (Some(df), Some(dg)) = (f.degree(), g.degree()) else {
            return Ok(K::zero());
        };
        self.get(df + dg)?;
        let mut acc = K::zero();
        for (a, fa) in f.coeffs().iter().enumerate() {
            if fa.is_zero() {
                continue;
            }
            for (b, gb) in g.coeffs().iter().enumerate() {
                if gb.is_zero() {
                    continue;
                }
                acc += fa.clone() * gb.clone() * self.mu[a + b].clone();
            }
        }
        Ok(acc)
    }

    /// Leading principal minors of the Hankel matrix `(mu_{i+j})_{0<=i,j<=m}`
    /// for `m = 0..=order`, by fraction-exact elimination without pivoting.
    /// Stops at the first minor that is not positive.
    pub fn hankel_minors(&self, order: usize) -> Result<Vec<K>> {
        self.get(2 * order)?;
        let size = order + 1;
        let mut h: Vec<Vec<K>> = (0..size)
            .map(|i| (0..size).map(|j| self.mu[i + j].clone()).collect())
            .collect();
        let mut minors = Vec::with_capacity(size);
        let mut det = K::one();
        for k in 0..size {
            let pivot = h[k][k].clone();
            det *= &pivot;
            minors.push(det.clone());
            if !pivot.is_positive() {
                return Err(Error::NotPositiveDefinite(format!(
                    "Hankel minor of order {k} is {det}"
                )));
            }
            for i in (k + 1)..size {
                let factor = h[i][k].clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for j in k..size {
                    let t = factor.clone() * h[k][j].clone();
                    h[i][j] -= t;
                }
            }
        }
        Ok(minors)
    }
}

/// Raw data for a family before validation.
///
/// `beta[i]` is `beta_{i+1}`, `b[i]` is `B_{i+1}` and `c[i]` is `C_{i+1}`;
/// `alpha[i]` is `alpha_i`.
#[derive(Clone, Debug)]
pub struct FamilyParts<K> {
    pub name: String,
    pub mode: OperatorMode<K>,
    pub alpha: Vec<K>,
    pub beta: Vec<K>,
    pub h0: K,
    pub a: DensePoly<K>,
    pub b: Vec<RationalFunction<K>>,
    pub c: Vec<RationalFunction<K>>,
    pub max_n: usize,
}

/// A validated standard orthogonal family.
#[derive(Clone, Debug)]
pub struct Family<K> {
    parts: FamilyParts<K>,
    polys: Vec<DensePoly<K>>,
    norms: Vec<K>,
    moments: MomentTable<K>,
}

fn bad_index(what: &str, n: usize, lo: usize, hi: usize) -> Error {
    Error::BadIndex(format!("{what}: n = {n} outside {lo}..={hi}"))
}

impl<K: Field> Family<K> {
    pub fn new(parts: FamilyParts<K>) -> Result<Self> {
        let max_n = parts.max_n;
        if max_n == 0 {
            return Err(Error::InvalidParameter("max_n must be at least 1".into()));
        }
        if parts.alpha.len() < max_n + 1 {
            return Err(Error::InvalidParameter(format!(
                "need alpha_0..alpha_{max_n}, got {} values",
                parts.alpha.len()
            )));
        }
        for (what, len) in [
            ("beta", parts.beta.len()),
            ("B", parts.b.len()),
            ("C", parts.c.len()),
        ] {
            if len < max_n {
                return Err(Error::InvalidParameter(format!(
                    "need {what}_1..{what}_{max_n}, got {len} values"
                )));
            }
        }
        if parts.a.is_zero() {
            return Err(Error::InvalidParameter("A(x) must be nonzero".into()));
        }
        if !parts.h0.is_positive() {
            return Err(Error::NotPositiveDefinite(format!(
                "h_0 = {} is not positive",
                parts.h0
            )));
        }
        for (i, b) in parts.beta.iter().take(max_n).enumerate() {
            if !b.is_positive() {
                return Err(Error::NotPositiveDefinite(format!(
                    "beta_{} = {b} is not positive",
                    i + 1
                )));
            }
        }

        let polys = generate_polys(&parts.alpha, &parts.beta, max_n + 1);
        let mut norms = Vec::with_capacity(max_n + 1);
        norms.push(parts.h0.clone());
        for i in 1..=max_n {
            let next = norms[i - 1].clone() * parts.beta[i - 1].clone();
            norms.push(next);
        }
        let moments = jacobi_moments(&parts.alpha, &parts.beta, &parts.h0, 2 * max_n + 1);

        let fam = Self {
            parts,
            polys,
            norms,
            moments,
        };
        for n in 1..=max_n {
            if !fam.structure_check(n)? {
                return Err(Error::StructureCheckFailed(n));
            }
        }
        fam.moments.hankel_minors(max_n)?;
        fam.check_orthogonality()?;
        Ok(fam)
    }

    fn check_orthogonality(&self) -> Result<()> {
        for m in 0..=self.max_n() {
            for n in 0..=m {
                let ip = self.moments.inner(&self.polys[m], &self.polys[n])?;
                let expect = if m == n {
                    self.norms[n].clone()
                } else {
                    K::zero()
                };
                if ip != expect {
                    return Err(Error::InternalIdentityViolation(format!(
                        "(P_{m}, P_{n}) = {ip}, expected {expect}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same data under a different operator; revalidated in full.
    pub fn with_mode(&self, mode: OperatorMode<K>) -> Result<Self> {
        let mut parts = self.parts.clone();
        parts.mode = mode;
        Self::new(parts)
    }

    pub fn parts(&self) -> &FamilyParts<K> {
        &self.parts
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn mode(&self) -> &OperatorMode<K> {
        &self.parts.mode
    }

    pub fn max_n(&self) -> usize {
        self.parts.max_n
    }

    pub fn alpha(&self, n: usize) -> Result<&K> {
        self.parts
            .alpha
            .get(n)
            .filter(|_| n <= self.max_n())
            .ok_or_else(|| bad_index("alpha", n, 0, self.max_n()))
    }

    pub fn beta(&self, n: usize) -> Result<&K> {
        if n == 0 || n > self.max_n() {
            return Err(bad_index("beta", n, 1, self.max_n()));
        }
        Ok(&self.parts.beta[n - 1])
    }

    pub fn h0(&self) -> &K {
        &self.parts.h0
    }

    /// Squared norm `h_n`.
    pub fn h(&self, n: usize) -> Result<&K> {
        self.norms
            .get(n)
            .ok_or_else(|| bad_index("h", n, 0, self.max_n()))
    }

    pub fn a(&self) -> &DensePoly<K> {
        &self.parts.a
    }

    pub fn b(&self, n: usize) -> Result<&RationalFunction<K>> {
        if n == 0 || n > self.max_n() {
            return Err(bad_index("B", n, 1, self.max_n()));
        }
        Ok(&self.parts.b[n - 1])
    }

    pub fn c(&self, n: usize) -> Result<&RationalFunction<K>> {
        if n == 0 || n > self.max_n() {
            return Err(bad_index("C", n, 1, self.max_n()));
        }
        Ok(&self.parts.c[n - 1])
    }

    /// Monic `P_n` for `0 <= n <= max_n + 1`; the extra degree is what the
    /// Christoffel-Darboux formula at `n = max_n` needs.
    pub fn p(&self, n: usize) -> Result<&DensePoly<K>> {
        self.polys
            .get(n)
            .ok_or_else(|| bad_index("P", n, 0, self.max_n() + 1))
    }

    pub fn moments(&self) -> &MomentTable<K> {
        &self.moments
    }

    /// `(f, g)` for the standard inner product.
    pub fn inner(&self, f: &DensePoly<K>, g: &DensePoly<K>) -> Result<K> {
        self.moments.inner(f, g)
    }

    /// `P_0..P_n` from the three-term recurrence.
    pub fn ttrr_generate(&self, n: usize) -> Result<Vec<DensePoly<K>>> {
        if n > self.max_n() {
            return Err(bad_index("ttrr_generate", n, 0, self.max_n()));
        }
        Ok(self.polys[..=n].to_vec())
    }

    /// `h_0..h_n`.
    pub fn norm_sequence(&self, n: usize) -> Result<Vec<K>> {
        if n > self.max_n() {
            return Err(bad_index("norm_sequence", n, 0, self.max_n()));
        }
        Ok(self.norms[..=n].to_vec())
    }

    /// Whether `A D P_n = B_n P_n + C_n P_{n-1}` holds exactly.
    pub fn structure_check(&self, n: usize) -> Result<bool> {
        if n == 0 || n > self.max_n() {
            return Err(bad_index("structure_check", n, 1, self.max_n()));
        }
        let dp = hahn_apply_poly(&self.polys[n], self.mode());
        let lhs = RationalFunction::from_poly(&self.parts.a * &dp);
        let rhs = &(self.b(n)? * &RationalFunction::from_poly(self.polys[n].clone()))
            + &(self.c(n)? * &RationalFunction::from_poly(self.polys[n - 1].clone()));
        Ok(lhs == rhs)
    }

    /// Lowering `(A D - B_n) P_n = C_n P_{n-1}` and, for `n >= 2`, raising
    /// `(B_{n-1} + C_{n-1}(x - alpha_{n-1})/beta_{n-1} - A D) P_{n-1}
    ///  = (C_{n-1}/beta_{n-1}) P_n`.
    pub fn psi_check(&self, n: usize) -> Result<bool> {
        if n == 0 || n > self.max_n() {
            return Err(bad_index("psi_check", n, 1, self.max_n()));
        }
        let rf = |p: &DensePoly<K>| RationalFunction::from_poly(p.clone());
        let a = rf(&self.parts.a);
        let pn = rf(&self.polys[n]);
        let pn1 = rf(&self.polys[n - 1]);
        let lowered =
            &(&a * &rf(&hahn_apply_poly(&self.polys[n], self.mode()))) - &(self.b(n)? * &pn);
        if lowered != self.c(n)? * &pn1 {
            return Ok(false);
        }
        if n < 2 {
            return Ok(true);
        }
        let beta = self.beta(n - 1)?.inv();
        let c1 = self.c(n - 1)?;
        let x_minus_alpha = rf(&DensePoly::linear(-self.alpha(n - 1)?.clone(), K::one()));
        let mult = self.b(n - 1)? + &(c1 * &x_minus_alpha).scale(&beta);
        let raised =
            &(&mult * &pn1) - &(&a * &rf(&hahn_apply_poly(&self.polys[n - 1], self.mode())));
        Ok(raised == (c1 * &pn).scale(&beta))
    }

    /// `mu_0..mu_k` from the Jacobi matrix, with Hankel positivity checked on
    /// every minor the table covers.
    pub fn moments_from_jacobi(&self, k: usize) -> Result<MomentTable<K>> {
        let cap = 2 * self.max_n() + 1;
        if k > cap {
            return Err(bad_index("moments_from_jacobi", k, 0, cap));
        }
        let table = jacobi_moments(&self.parts.alpha, &self.parts.beta, &self.parts.h0, k);
        table.hankel_minors(k / 2)?;
        Ok(table)
    }
}

fn generate_polys<K: Field>(alpha: &[K], beta: &[K], top: usize) -> Vec<DensePoly<K>> {
    let mut polys = vec![DensePoly::one()];
    let mut prev = DensePoly::zero();
    for n in 0..top {
        let cur = &polys[n];
        let shifted = cur * &DensePoly::linear(-alpha[n].clone(), K::one());
        let next = if n == 0 {
            shifted
        } else {
            &shifted - &prev.scale(&beta[n - 1])
        };
        prev = cur.clone();
        polys.push(next);
    }
    polys
}

/// `mu_k = h_0 (J^k)_{00}` for the monic Jacobi matrix (diagonal `alpha_n`,
/// off-diagonal products `beta_n`), computed by repeated matrix-vector
/// products on `e_0`.
fn jacobi_moments<K: Field>(alpha: &[K], beta: &[K], h0: &K, top: usize) -> MomentTable<K> {
    let size = top / 2 + 1;
    let mut v = vec![K::zero(); size];
    v[0] = K::one();
    let mut mu = Vec::with_capacity(top + 1);
    mu.push(h0.clone());
    for _ in 0..top {
        // (J v)_i = v_{i-1} + alpha_i v_i + beta_{i+1} v_{i+1}
        let mut next = vec![K::zero(); size];
        for i in 0..size {
            let mut acc = alpha[i].clone() * v[i].clone();
            if i > 0 {
                acc += &v[i - 1];
            }
            if i + 1 < size {
                acc += beta[i].clone() * v[i + 1].clone();
            }
            next[i] = acc;
        }
        v = next;
        mu.push(h0.clone() * v[0].clone());
    }
    MomentTable::new(mu)
}

/// Names accepted by [`builtin_family`].
pub const BUILTIN_FAMILIES: [&str; 3] = ["charlier", "hermite", "alsalamcarlitz1"];

/// One-line description of each built-in, for listings.
pub fn builtin_description(name: &str) -> Option<&'static str> {
    match name {
        "charlier" => Some("Charlier C_n(x; a), a > 0, forward difference; params: a (default 1)"),
        "hermite" => Some("Hermite, weight exp(-x^2)/sqrt(pi) normalised to h_0 = 1, derivative; no params"),
        "alsalamcarlitz1" => Some(
            "Al-Salam-Carlitz I U_n(x; a; q), a < 0, 0 < q < 1, q-difference; params: a q (default -1 1/2)",
        ),
        _ => None,
    }
}

/// A built-in family with `h_0 = 1`.
///
/// * `charlier(a)`: forward difference; `alpha_n = n + a`, `beta_n = n a`,
///   `A = 1`, `B_n = 0`, `C_n = n`.
/// * `hermite`: derivative; `alpha_n = 0`, `beta_n = n/2`, `C_n = n`.
/// * `alsalamcarlitz1(a, q)`: q-difference; `alpha_n = (1 + a) q^n`,
///   `beta_n = -a q^{n-1} (1 - q^n)`, `C_n = [n]_q`.
///
/// `mode` replaces the family's own operator; the structure relation is
/// rechecked under it, so only equivalent operators are accepted.
pub fn builtin_family<K: Field>(
    name: &str,
    params: &[K],
    mode: Option<OperatorMode<K>>,
    max_n: usize,
) -> Result<Family<K>> {
    let int = |n: usize| K::from_int(n as i64);
    let top = max_n + 1;
    let param = |i: usize, default: K| params.get(i).cloned().unwrap_or(default);
    let arity = |k: usize| -> Result<()> {
        if params.len() > k {
            return Err(Error::InvalidParameter(format!(
                "{name} takes at most {k} parameter(s), got {}",
                params.len()
            )));
        }
        Ok(())
    };
    let zero_b = vec![RationalFunction::zero(); max_n];

    let parts = match name {
        "charlier" => {
            arity(1)?;
            let a = param(0, K::one());
            if !a.is_positive() {
                return Err(Error::NotPositiveDefinite(format!(
                    "Charlier needs a > 0, got a = {a}"
                )));
            }
            FamilyParts {
                name: format!("charlier(a={a})"),
                mode: OperatorMode::forward_difference(),
                alpha: (0..top).map(|n| int(n) + a.clone()).collect(),
                beta: (1..top).map(|n| int(n) * a.clone()).collect(),
                h0: K::one(),
                a: DensePoly::one(),
                b: zero_b,
                c: (1..top)
                    .map(|n| RationalFunction::constant(int(n)))
                    .collect(),
                max_n,
            }
        }
        "hermite" => {
            arity(0)?;
            let half = K::from_frac(1, 2);
            FamilyParts {
                name: "hermite".into(),
                mode: OperatorMode::derivative(),
                alpha: vec![K::zero(); top],
                beta: (1..top).map(|n| int(n) * half.clone()).collect(),
                h0: K::one(),
                a: DensePoly::one(),
                b: zero_b,
                c: (1..top)
                    .map(|n| RationalFunction::constant(int(n)))
                    .collect(),
                max_n,
            }
        }
        "alsalamcarlitz1" => {
            arity(2)?;
            let a = param(0, -K::one());
            let q = param(1, K::from_frac(1, 2));
            let qmode = OperatorMode::q_difference(q.clone())?;
            if !a.is_negative() {
                return Err(Error::NotPositiveDefinite(format!(
                    "Al-Salam-Carlitz I needs a < 0, got a = {a}"
                )));
            }
            FamilyParts {
                name: format!("alsalamcarlitz1(a={a},q={q})"),
                mode: qmode,
                alpha: (0..top)
                    .map(|n| (K::one() + a.clone()) * q.powi(n as i64))
                    .collect(),
                beta: (1..top)
                    .map(|n| -a.clone() * q.powi(n as i64 - 1) * (K::one() - q.powi(n as i64)))
                    .collect(),
                h0: K::one(),
                a: DensePoly::one(),
                b: zero_b,
                c: (1..top)
                    .map(|n| RationalFunction::constant(q_number_at(n as i64, &q)))
                    .collect(),
                max_n,
            }
        }
        other => return Err(Error::UnknownFamily(other.to_owned())),
    };
    let parts = match mode {
        Some(m) => FamilyParts { mode: m, ..parts },
        None => parts,
    };
    Family::new(parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Poly, RatFunc, Rational};
    use num_traits::Zero;

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_frac(p, q)
    }

    fn poly(c: &[Rational]) -> Poly {
        Poly::new(c.to_vec())
    }

    fn charlier() -> Family<Rational> {
        builtin_family("charlier", &[r(1, 1)], None, 8).unwrap()
    }

    fn hermite() -> Family<Rational> {
        builtin_family("hermite", &[], None, 8).unwrap()
    }

    #[test]
    fn ttrr_examples() {
        assert_eq!(hermite().ttrr_generate(0).unwrap(), vec![Poly::one()]);
        let c = charlier().ttrr_generate(2).unwrap();
        assert_eq!(c[2], poly(&[r(1, 1), r(-3, 1), r(1, 1)]));
        let h = hermite().ttrr_generate(3).unwrap();
        assert_eq!(h[2], poly(&[r(-1, 2), r(0, 1), r(1, 1)]));
        assert_eq!(h[3], poly(&[r(0, 1), r(-3, 2), r(0, 1), r(1, 1)]));
        assert!(matches!(
            hermite().ttrr_generate(9),
            Err(Error::BadIndex(_))
        ));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(hermite().norm_sequence(0).unwrap(), vec![r(1, 1)]);
        assert_eq!(hermite().norm_sequence(2).unwrap()[2], r(1, 2));
        assert_eq!(charlier().norm_sequence(3).unwrap()[3], r(6, 1));
    }

    #[test]
    fn structure_and_psi_hold_for_builtins() {
        for fam in [
            charlier(),
            hermite(),
            builtin_family("alsalamcarlitz1", &[r(-1, 1), r(1, 2)], None, 8).unwrap(),
        ] {
            for n in 1..=8 {
                assert!(fam.structure_check(n).unwrap(), "{} n={n}", fam.name());
                assert!(fam.psi_check(n).unwrap(), "{} n={n}", fam.name());
            }
            assert!(fam.structure_check(0).is_err());
        }
    }

    #[test]
    fn corrupted_structure_detected() {
        let mut parts = charlier().parts().clone();
        parts.c[2] = RatFunc::constant(r(4, 1));
        assert_eq!(
            Family::new(parts).unwrap_err(),
            Error::StructureCheckFailed(3)
        );
    }

    #[test]
    fn moment_examples() {
        let h = hermite().moments_from_jacobi(5).unwrap();
        let mu = h.as_slice();
        assert_eq!(mu[0], r(1, 1));
        assert_eq!(mu[2], r(1, 2));
        assert_eq!(mu[4], r(3, 4));
        assert!(mu[1].is_zero() && mu[3].is_zero() && mu[5].is_zero());
        let c = charlier().moments_from_jacobi(2).unwrap();
        assert_eq!(c.as_slice()[1], r(1, 1));
        assert_eq!(c.as_slice()[2], r(2, 1));
        assert!(charlier().moments_from_jacobi(18).is_err());
    }

    #[test]
    fn charlier_moments_match_poisson_touchard() {
        // raw Poisson(1) moments are the Bell numbers
        let bell = [1, 1, 2, 5, 15, 52, 203, 877, 4140];
        let c = charlier();
        for (k, b) in bell.iter().enumerate() {
            assert_eq!(c.moments().as_slice()[k], r(*b, 1));
        }
    }

    #[test]
    fn hankel_minors_equal_norm_products() {
        let fam = builtin_family("alsalamcarlitz1", &[r(-1, 1), r(1, 2)], None, 6).unwrap();
        let minors = fam.moments().hankel_minors(6).unwrap();
        let mut prod = r(1, 1);
        for m in 0..=6 {
            prod *= fam.h(m).unwrap();
            assert_eq!(minors[m], prod);
        }
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            builtin_family::<Rational>("legendre", &[], None, 4),
            Err(Error::UnknownFamily(_))
        ));
        assert!(matches!(
            builtin_family("alsalamcarlitz1", &[r(1, 1), r(1, 2)], None, 4),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(matches!(
            builtin_family("charlier", &[r(-1, 1)], None, 4),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn mode_override_only_when_equivalent() {
        let fam = charlier();
        let hahn11 = OperatorMode::hahn(r(1, 1), r(1, 1)).unwrap();
        assert!(fam.with_mode(hahn11).is_ok());
        assert!(matches!(
            fam.with_mode(OperatorMode::derivative()),
            Err(Error::StructureCheckFailed(_))
        ));
    }

    #[test]
    fn non_positive_beta_rejected() {
        let mut parts = hermite().parts().clone();
        parts.beta[3] = r(0, 1);
        assert!(matches!(
            Family::new(parts),
            Err(Error::NotPositiveDefinite(_))
        ));
    }
}
