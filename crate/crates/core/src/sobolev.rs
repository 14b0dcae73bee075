//! The discrete Sobolev inner product
//! `(f, g)_S = (f, g) + M D^{(j)} f(c) D^{(j)} g(c)` and its monic
//! orthogonal polynomials `Q_n`.
//!
//! `Q_n` is built from the standard family by the kernel connection formula
//! `Q_n = P_n - M D^{(j)}P_n(c) / (1 + M K_{n-1}^{(j,j)}(c,c)) K_{n-1}^{(0,j)}(x,c)`
//! and independently by Gram-Schmidt on monomials, so the two can be
//! compared.

use std::sync::Arc;

use crate::arith::{DensePoly, Field};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::qcalc::{hahn_eval_poly_at, hahn_iterate_poly, OperatorMode};

/// Family plus the Sobolev parameters `M`, `j`, `c`.
#[derive(Clone, Debug)]
pub struct SobolevSpec<K> {
    family: Arc<Family<K>>,
    mass: K,
    j: u32,
    c: K,
}

impl<K: Field> SobolevSpec<K> {
    /// Requires `M > 0`.
    pub fn new(family: Arc<Family<K>>, mass: K, j: u32, c: K) -> Result<Self> {
        if !mass.is_positive() {
            return Err(Error::InvalidParameter(format!(
                "M must be positive, got {mass}"
            )));
        }
        Ok(Self { family, mass, j, c })
    }

    /// The `M = 0` limit, where `(., .)_S` is the standard product and
    /// `Q_n = P_n`.
    pub fn without_mass(family: Arc<Family<K>>, j: u32, c: K) -> Self {
        Self {
            family,
            mass: K::zero(),
            j,
            c,
        }
    }

    pub fn family(&self) -> &Family<K> {
        &self.family
    }

    pub fn family_arc(&self) -> &Arc<Family<K>> {
        &self.family
    }

    pub fn mode(&self) -> &OperatorMode<K> {
        self.family.mode()
    }

    pub fn mass(&self) -> &K {
        &self.mass
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn c(&self) -> &K {
        &self.c
    }

    pub fn max_n(&self) -> usize {
        self.family.max_n()
    }
}

/// Connection data for `n = 0..=max_n`. Entries for `n = 0` of the kernel
/// columns are zero (the kernels `K_{-1}` are empty sums).
#[derive(Clone, Debug, PartialEq)]
pub struct SobolevTable<K> {
    pub q: Vec<DensePoly<K>>,
    pub rho: Vec<K>,
    pub kjj: Vec<K>,
    pub k0j: Vec<DensePoly<K>>,
}

/// A [`SobolevSpec`] with its connection table computed.
#[derive(Clone, Debug)]
pub struct SobolevSystem<K> {
    spec: SobolevSpec<K>,
    table: SobolevTable<K>,
}

impl<K: Field> SobolevSystem<K> {
    pub fn new(spec: SobolevSpec<K>) -> Result<Self> {
        let fam = spec.family();
        let mode = spec.mode();
        let (j, c, mass) = (spec.j, &spec.c, &spec.mass);
        let top = fam.max_n();

        // D^{(j)} P_i(c) and D^{(j)} P_i as polynomials, i = 0..=max_n
        let mut djp_poly = Vec::with_capacity(top + 1);
        let mut djp_c = Vec::with_capacity(top + 1);
        for i in 0..=top {
            let d = hahn_iterate_poly(fam.p(i)?, j, mode);
            djp_c.push(d.eval(c));
            djp_poly.push(d);
        }

        let mut table = SobolevTable {
            q: vec![DensePoly::one()],
            rho: vec![if j == 0 { K::one() } else { K::zero() }],
            kjj: vec![K::zero()],
            k0j: vec![DensePoly::zero()],
        };
        let mut kjj = K::zero();
        let mut k0j = DensePoly::zero();
        for n in 1..=top {
            // K_{n-1} from K_{n-2} by adding the i = n-1 term
            let i = n - 1;
            let w = djp_c[i].clone() / fam.h(i)?.clone();
            kjj += w.clone() * djp_c[i].clone();
            k0j = &k0j + &fam.p(i)?.scale(&w);

            let denom = K::one() + mass.clone() * kjj.clone();
            if denom.is_zero() {
                return Err(Error::DegenerateDenominator(n));
            }
            if !denom.is_positive() {
                return Err(Error::NotPositiveDefinite(format!(
                    "1 + M K_{i}^(j,j)(c,c) = {denom} at n = {n}"
                )));
            }
            let rho = djp_c[n].clone() / denom;
            let qn = fam.p(n)? - &k0j.scale(&(mass.clone() * rho.clone()));
            let check = hahn_eval_poly_at(&qn, j, c, mode);
            if check != rho {
                return Err(Error::InternalIdentityViolation(format!(
                    "D^(j) Q_{n}(c) = {check} but rho = {rho}"
                )));
            }
            table.q.push(qn);
            table.rho.push(rho);
            table.kjj.push(kjj.clone());
            table.k0j.push(k0j.clone());
        }
        Ok(Self { spec, table })
    }

    pub fn spec(&self) -> &SobolevSpec<K> {
        &self.spec
    }

    pub fn family(&self) -> &Family<K> {
        self.spec.family()
    }

    pub fn mode(&self) -> &OperatorMode<K> {
        self.spec.mode()
    }

    pub fn table(&self) -> &SobolevTable<K> {
        &self.table
    }

    pub fn max_n(&self) -> usize {
        self.spec.max_n()
    }

    fn check_n(&self, what: &str, n: usize, lo: usize) -> Result<()> {
        if n < lo || n > self.max_n() {
            return Err(Error::BadIndex(format!(
                "{what}: n = {n} outside {lo}..={}",
                self.max_n()
            )));
        }
        Ok(())
    }

    /// `Q_n`.
    pub fn q(&self, n: usize) -> Result<&DensePoly<K>> {
        self.check_n("Q", n, 0)?;
        Ok(&self.table.q[n])
    }

    /// `rho_{n,j,c} = D^{(j)} Q_n(c)`.
    pub fn rho(&self, n: usize) -> Result<&K> {
        self.check_n("rho", n, 0)?;
        Ok(&self.table.rho[n])
    }

    /// `K_n^{(k,l)}(x, c) = sum_{i<=n} D^{(k)}P_i(x) D^{(l)}P_i(c) / h_i`,
    /// as a polynomial in `x`.
    pub fn kernel_mixed(&self, n: usize, k: u32, ell: u32) -> Result<DensePoly<K>> {
        self.check_n("kernel", n, 0)?;
        let fam = self.family();
        let mode = self.mode();
        let mut acc = DensePoly::zero();
        for i in 0..=n {
            let right = hahn_eval_poly_at(fam.p(i)?, ell, self.spec.c(), mode);
            if right.is_zero() {
                continue;
            }
            let left = hahn_iterate_poly(fam.p(i)?, k, mode);
            acc = &acc + &left.scale(&(right / fam.h(i)?.clone()));
        }
        Ok(acc)
    }

    /// `K_n^{(k,l)}(x0, c)`.
    pub fn kernel_mixed_at(&self, n: usize, k: u32, ell: u32, x0: &K) -> Result<K> {
        Ok(self.kernel_mixed(n, k, ell)?.eval(x0))
    }

    /// `(f, g)_S` with the integral part taken from the moment table.
    pub fn inner(&self, f: &DensePoly<K>, g: &DensePoly<K>) -> Result<K> {
        sobolev_inner(&self.spec, f, g)
    }

    /// `(Q_n, rho_{n,j,c})` from the connection formula.
    pub fn connection_qn(&self, n: usize) -> Result<(DensePoly<K>, K)> {
        self.check_n("connection_qn", n, 0)?;
        Ok((self.table.q[n].clone(), self.table.rho[n].clone()))
    }

    /// Monic `Q_n` by exact Gram-Schmidt on `1, x, ..., x^n` under `(., .)_S`.
    pub fn gram_oracle_qn(&self, n: usize) -> Result<DensePoly<K>> {
        gram_schmidt(&self.spec, n).map(|mut v| v.pop().expect("n + 1 vectors"))
    }

    /// `a_{n,k}` in `Q_n = sum_k a_{n,k} P_k`: `a_{n,n} = 1` and
    /// `a_{n,k} = -M rho_n D^{(j)}P_k(c) / h_k` below the diagonal.
    pub fn connection_coeffs(&self, n: usize) -> Result<Vec<K>> {
        self.check_n("connection_coeffs", n, 0)?;
        let fam = self.family();
        let scale = self.spec.mass.clone() * self.table.rho[n].clone();
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..n {
            let dk = hahn_eval_poly_at(fam.p(k)?, self.spec.j, self.spec.c(), self.mode());
            coeffs.push(-(scale.clone() * dk) / fam.h(k)?.clone());
        }
        coeffs.push(K::one());
        let mut sum = DensePoly::zero();
        for (k, a) in coeffs.iter().enumerate() {
            sum = &sum + &fam.p(k)?.scale(a);
        }
        if sum != self.table.q[n] {
            return Err(Error::InternalIdentityViolation(format!(
                "sum a_(n,k) P_k does not reproduce Q_{n}"
            )));
        }
        Ok(coeffs)
    }
}

/// `(f, g)_S = (f, g) + M D^{(j)}f(c) D^{(j)}g(c)`.
pub fn sobolev_inner<K: Field>(
    spec: &SobolevSpec<K>,
    f: &DensePoly<K>,
    g: &DensePoly<K>,
) -> Result<K> {
    let standard = spec.family().inner(f, g)?;
    if spec.mass.is_zero() {
        return Ok(standard);
    }
    let df = hahn_eval_poly_at(f, spec.j, &spec.c, spec.mode());
    let dg = hahn_eval_poly_at(g, spec.j, &spec.c, spec.mode());
    Ok(standard + spec.mass.clone() * df * dg)
}

/// Orthogonalises `1, x, ..., x^n` under `(., .)_S`; no pivoting, aborts on a
/// non-positive squared norm.
pub fn gram_schmidt<K: Field>(spec: &SobolevSpec<K>, n: usize) -> Result<Vec<DensePoly<K>>> {
    if n > spec.max_n() {
        return Err(Error::BadIndex(format!(
            "gram_oracle_qn: n = {n} outside 0..={}",
            spec.max_n()
        )));
    }
    let mut basis: Vec<DensePoly<K>> = Vec::with_capacity(n + 1);
    let mut norms: Vec<K> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let xk = DensePoly::monomial(K::one(), k);
        let mut e = xk.clone();
        for (b, nb) in basis.iter().zip(&norms) {
            let proj = sobolev_inner(spec, &xk, b)? / nb.clone();
            e = &e - &b.scale(&proj);
        }
        let nn = sobolev_inner(spec, &e, &e)?;
        if !nn.is_positive() {
            return Err(Error::NotPositiveDefinite(format!(
                "Gram-Schmidt norm of degree {k} is {nn}"
            )));
        }
        basis.push(e);
        norms.push(nn);
    }
    Ok(basis)
}
