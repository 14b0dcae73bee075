//! Ladder operators and the second-order holonomic equation for `Q_n`.
//!
//! Everything is expressed through the pairs `(f_i, g_i)`, `i = 1..4`, with
//! `r_c Q_n = f1 P_n + g1 P_{n-1}`, `r_c D Q_n = f2 P_n + g2 P_{n-1}`,
//! `r_c Q_{n-1} = f3 P_n + g3 P_{n-1}` and `r_c D Q_{n-1} = f4 P_n + g4 P_{n-1}`.
//! The determinants `phi^{i,j} = f_i g_j - f_j g_i` give
//!
//! ```text
//! (phi^{3,2} + phi^{1,3} D) Q_n     = phi^{1,2} Q_{n-1}
//! (phi^{1,4} - phi^{1,3} D) Q_{n-1} = phi^{3,4} Q_n
//! ```
//!
//! Two code paths build the pairs: the general Hahn formulas, and the
//! closed forms written out separately for `D_q`, `Delta` and `d/dx`.

use serde::Serialize;

use crate::arith::{DensePoly, Field, RationalFunction};
use crate::error::{Error, Result};
use crate::family::Family;
use crate::qcalc::{
    hahn_apply, hahn_apply_poly, hahn_iterate_poly, q_factorial_ratio, q_number, q_pochhammer,
    ModeKind, OperatorMode,
};
use crate::sobolev::SobolevSystem;

/// Which formulas build the lemma pairs and the sigma coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    /// General Hahn formulas, valid in every mode.
    Generic,
    /// Mode-specific closed forms; falls back to `Generic` for a general
    /// Hahn mode, which has no separate form.
    Specialised,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Form {
    Generic,
    QDiff,
    Delta,
    Deriv,
}

/// One lemma pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pair<K> {
    pub f: RationalFunction<K>,
    pub g: RationalFunction<K>,
}

/// Outcome of every exact check made while building [`LadderData`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LadderChecks {
    pub lemma1: bool,
    pub lemma2: bool,
    pub lemma3: bool,
    pub lemma4: bool,
    pub inversion: bool,
    pub eq_a: bool,
    pub eq_b: bool,
    pub lowering: bool,
    pub raising: bool,
    pub holonomic: bool,
    pub holonomic_normalised: bool,
}

impl LadderChecks {
    pub fn all(&self) -> bool {
        self.lemma1
            && self.lemma2
            && self.lemma3
            && self.lemma4
            && self.inversion
            && self.eq_a
            && self.eq_b
            && self.lowering
            && self.raising
            && self.holonomic
            && self.holonomic_normalised
    }
}

#[derive(Clone, Debug)]
pub struct LadderData<K> {
    pub n: usize,
    pub r_c: DensePoly<K>,
    pub f1: DensePoly<K>,
    pub g1: DensePoly<K>,
    pub f2: RationalFunction<K>,
    pub g2: RationalFunction<K>,
    pub f3: RationalFunction<K>,
    pub g3: RationalFunction<K>,
    pub f4: RationalFunction<K>,
    pub g4: RationalFunction<K>,
    phi: Vec<Vec<RationalFunction<K>>>,
    /// As the theorem writes them.
    pub sigma: [RationalFunction<K>; 3],
    /// Polynomials with common factors and content removed; the first
    /// nonzero one is monic.
    pub sigma_normalised: [DensePoly<K>; 3],
    pub checks: LadderChecks,
}

impl<K: Field> LadderData<K> {
    /// `phi^{i,j}` for `i, j` in `1..=4`.
    pub fn phi(&self, i: usize, j: usize) -> Result<&RationalFunction<K>> {
        if !(1..=4).contains(&i) || !(1..=4).contains(&j) {
            return Err(Error::BadIndex(format!(
                "phi index ({i}, {j}) outside 1..=4"
            )));
        }
        Ok(&self.phi[i - 1][j - 1])
    }
}

/// Builder for the ladder quantities of one Sobolev system.
#[derive(Clone, Debug)]
pub struct Ladder<'a, K> {
    sys: &'a SobolevSystem<K>,
    form: Form,
    qfr: Vec<K>,
}

fn rf<K: Field>(p: DensePoly<K>) -> RationalFunction<K> {
    RationalFunction::from_poly(p)
}

/// `x - a`
fn x_minus<K: Field>(a: K) -> DensePoly<K> {
    DensePoly::linear(-a, K::one())
}

fn inv_poly<K: Field>(p: &DensePoly<K>) -> RationalFunction<K> {
    RationalFunction::reciprocal_of(p).expect("nonzero linear factor")
}

fn det<K: Field>(a: &Pair<K>, b: &Pair<K>) -> RationalFunction<K> {
    &(&a.f * &b.g) - &(&b.f * &a.g)
}

fn factorial_ratio<K: Field>(j: u32, i: u32) -> K {
    ((i + 1)..=j).fold(K::one(), |acc, m| acc * K::from_int(i64::from(m)))
}

impl<'a, K: Field> Ladder<'a, K> {
    /// Uses the mode-specific closed forms where they exist.
    pub fn new(sys: &'a SobolevSystem<K>) -> Self {
        Self::with_path(sys, Path::Specialised)
    }

    pub fn with_path(sys: &'a SobolevSystem<K>, path: Path) -> Self {
        let mode = sys.mode();
        let form = match (path, mode.kind()) {
            (Path::Generic, _) | (Path::Specialised, ModeKind::Hahn) => Form::Generic,
            (Path::Specialised, ModeKind::QDifference) => Form::QDiff,
            (Path::Specialised, ModeKind::ForwardDifference) => Form::Delta,
            (Path::Specialised, ModeKind::Derivative) => Form::Deriv,
        };
        let j = sys.spec().j();
        let qfr = (0..=j)
            .map(|i| q_factorial_ratio(j, i, mode.q()).expect("i <= j"))
            .collect();
        Self { sys, form, qfr }
    }

    /// Replaces the factorial-ratio coefficients used by the general path
    /// (entry `i` multiplies `D^{(i)}P(c)`). Used to test that a wrong
    /// coefficient is caught.
    pub fn with_factorial_ratios(mut self, table: Vec<K>) -> Result<Self> {
        if table.len() != self.qfr.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} factorial ratios, got {}",
                self.qfr.len(),
                table.len()
            )));
        }
        self.qfr = table;
        Ok(self)
    }

    pub fn factorial_ratios(&self) -> &[K] {
        &self.qfr
    }

    pub fn system(&self) -> &SobolevSystem<K> {
        self.sys
    }

    pub fn path(&self) -> Path {
        match self.form {
            Form::Generic => Path::Generic,
            _ => Path::Specialised,
        }
    }

    fn mode(&self) -> &OperatorMode<K> {
        self.sys.mode()
    }

    fn fam(&self) -> &Family<K> {
        self.sys.family()
    }

    fn j(&self) -> u32 {
        self.sys.spec().j()
    }

    fn c(&self) -> &K {
        self.sys.spec().c()
    }

    fn need(&self, what: &str, n: usize, lo: usize) -> Result<()> {
        if n < lo || n > self.sys.max_n() {
            return Err(Error::BadIndex(format!(
                "{what} needs {lo} <= n <= {}, got {n}",
                self.sys.max_n()
            )));
        }
        Ok(())
    }

    /// `x - q^k c - w[k]_q`.
    fn lattice_factor(&self, k: i64) -> DensePoly<K> {
        let (qk, wk) = self.mode().lattice_shift(k);
        x_minus(qk * self.c().clone() + wk)
    }

    /// The `k`-th factor of `r_c` in the current form.
    fn factor(&self, k: u32) -> DensePoly<K> {
        let c = self.c().clone();
        match self.form {
            Form::Generic => self.lattice_factor(i64::from(k)),
            Form::QDiff => x_minus(self.mode().q().powi(i64::from(k)) * c),
            Form::Delta => x_minus(c + K::from_int(i64::from(k))),
            Form::Deriv => x_minus(c),
        }
    }

    /// `prod_{k=0}^{j} (x - q^k c - w[k]_q)`.
    pub fn r_c(&self) -> DensePoly<K> {
        (0..=self.j()).fold(DensePoly::one(), |acc, k| &acc * &self.factor(k))
    }

    fn coefficient(&self, i: u32) -> K {
        let j = self.j();
        match self.form {
            Form::Generic => self.qfr[i as usize].clone(),
            Form::QDiff => {
                let q = self.mode().q();
                q_pochhammer(q, q, j)
                    / (q_pochhammer(q, q, i) * (K::one() - q.clone()).powi(i64::from(j - i)))
            }
            Form::Delta | Form::Deriv => factorial_ratio(j, i),
        }
    }

    /// `sum_{i<=j} coef_i D^{(i)}p(c) prod_{k<i} factor_k`.
    fn taylor_sum(&self, p: &DensePoly<K>) -> DensePoly<K> {
        let mode = self.mode();
        let mut acc = DensePoly::zero();
        let mut partial = DensePoly::one();
        let mut dp = p.clone();
        for i in 0..=self.j() {
            let v = dp.eval(self.c());
            if !v.is_zero() {
                acc = &acc + &partial.scale(&(self.coefficient(i) * v));
            }
            partial = &partial * &self.factor(i);
            dp = hahn_apply_poly(&dp, mode);
        }
        acc
    }

    fn lemma1_raw(&self, n: usize) -> Result<(DensePoly<K>, DensePoly<K>)> {
        self.need("lemma 1", n, 1)?;
        let fam = self.fam();
        let w = self.sys.spec().mass().clone() * self.sys.rho(n)?.clone() / fam.h(n - 1)?.clone();
        let r = self.r_c();
        if w.is_zero() {
            return Ok((r, DensePoly::zero()));
        }
        let f1 = &r - &self.taylor_sum(fam.p(n - 1)?).scale(&w);
        let g1 = self.taylor_sum(fam.p(n)?).scale(&w);
        Ok((f1, g1))
    }

    fn lemma2_raw(&self, n: usize, f1: &DensePoly<K>, g1: &DensePoly<K>) -> Result<Pair<K>> {
        self.need("lemma 2", n, 2)?;
        let fam = self.fam();
        let mode = self.mode();
        let j = self.j();
        let a = rf(fam.a().clone());
        let a_inv = a.recip()?;
        let beta = fam.beta(n - 1)?.clone();
        let alpha = fam.alpha(n - 1)?.clone();
        let bn = fam.b(n)? * &a_inv;
        let cn = fam.c(n)? * &a_inv;
        let bm = fam.b(n - 1)? * &a_inv;
        let cm_beta = (fam.c(n - 1)? * &a_inv).scale(&beta.inv());
        let x_alpha = rf(x_minus(alpha));
        let (f1r, g1r) = (rf(f1.clone()), rf(g1.clone()));
        let df1 = rf(hahn_apply_poly(f1, mode));
        let dg1 = rf(hahn_apply_poly(g1, mode));
        let (f1s, g1s) = match self.form {
            Form::Deriv => (f1r.clone(), g1r.clone()),
            Form::Delta => {
                let one = K::one();
                (
                    f1r.compose_affine(&one, &one),
                    g1r.compose_affine(&one, &one),
                )
            }
            Form::QDiff => {
                let z = K::zero();
                (
                    f1r.compose_affine(mode.q(), &z),
                    g1r.compose_affine(mode.q(), &z),
                )
            }
            Form::Generic => (
                f1r.compose_affine(mode.q(), mode.omega()),
                g1r.compose_affine(mode.q(), mode.omega()),
            ),
        };
        // bracketed parts without the correction term
        let f_core = &(&df1 + &(&f1s * &bn)) - &(&g1s * &cm_beta);
        let g_core = &(&dg1 + &(&f1s * &cn)) + &(&g1s * &(&bm + &(&x_alpha * &cm_beta)));
        let c = self.c().clone();
        let jj = i64::from(j);
        let pair = match self.form {
            Form::Generic => {
                let qj1 = mode.q().powi(jj + 1);
                let last = self.lattice_factor(jj);
                let pre = &rf(last.clone()) * &inv_poly(&self.lattice_factor(-1).scale(&qj1));
                let corr = inv_poly(&last).scale(&q_number(jj + 1, mode));
                Pair {
                    f: &pre * &(&f_core - &(&corr * &f1r)),
                    g: &pre * &(&g_core - &(&corr * &g1r)),
                }
            }
            Form::QDiff => {
                let q = mode.q();
                let qj1 = q.powi(jj + 1);
                let last = x_minus(q.powi(jj) * c.clone());
                let lower = x_minus(q.powi(-1) * c).scale(&qj1);
                let pre = &rf(last.clone()) * &inv_poly(&lower);
                let qn = q_number(jj + 1, mode);
                Pair {
                    f: &(&pre * &f_core) - &(&inv_poly(&lower).scale(&qn) * &f1r),
                    g: &pre * &(&g_core - &(&inv_poly(&last).scale(&qn) * &g1r)),
                }
            }
            Form::Delta => {
                let lower = x_minus(c.clone() - K::one());
                let pre = &rf(x_minus(c + K::from_int(jj))) * &inv_poly(&lower);
                let corr = inv_poly(&lower).scale(&K::from_int(jj + 1));
                Pair {
                    f: &(&pre * &f_core) - &(&corr * &f1r),
                    g: &(&pre * &g_core) - &(&corr * &g1r),
                }
            }
            Form::Deriv => {
                let corr = inv_poly(&x_minus(c)).scale(&K::from_int(jj + 1));
                Pair {
                    f: &f_core - &(&corr * &f1r),
                    g: &g_core - &(&corr * &g1r),
                }
            }
        };
        Ok(pair)
    }

    /// `(f, g) -> (-g / beta_{n-1}, f + (x - alpha_{n-1}) g / beta_{n-1})`,
    /// i.e. rewriting `P_{n-2}` through the recurrence.
    fn step_down(&self, n: usize, prev: &Pair<K>) -> Result<Pair<K>> {
        let fam = self.fam();
        let binv = fam.beta(n - 1)?.inv();
        let x_alpha = rf(x_minus(fam.alpha(n - 1)?.clone()));
        Ok(Pair {
            f: -prev.g.scale(&binv),
            g: &prev.f + &(&x_alpha * &prev.g).scale(&binv),
        })
    }

    fn dq(&self, n: usize) -> Result<DensePoly<K>> {
        Ok(hahn_apply_poly(self.sys.q(n)?, self.mode()))
    }

    /// Checks `lhs = f P_n + g P_{n-1}`.
    fn holds(&self, n: usize, lhs: &DensePoly<K>, pair: &Pair<K>) -> Result<bool> {
        let fam = self.fam();
        let rhs = &(&pair.f * &rf(fam.p(n)?.clone())) + &(&pair.g * &rf(fam.p(n - 1)?.clone()));
        Ok(rhs == rf(lhs.clone()))
    }

    fn assert_holds(
        &self,
        which: &str,
        n: usize,
        lhs: &DensePoly<K>,
        pair: &Pair<K>,
    ) -> Result<()> {
        if self.holds(n, lhs, pair)? {
            Ok(())
        } else {
            Err(Error::InternalIdentityViolation(format!(
                "{which} identity fails at n = {n}"
            )))
        }
    }

    /// `(f1, g1)` with `r_c Q_n = f1 P_n + g1 P_{n-1}`; `n >= 1`.
    pub fn lemma1_fg(&self, n: usize) -> Result<(DensePoly<K>, DensePoly<K>)> {
        let (f1, g1) = self.lemma1_raw(n)?;
        let pair = Pair {
            f: rf(f1.clone()),
            g: rf(g1.clone()),
        };
        self.assert_holds("r_c Q_n", n, &(&self.r_c() * self.sys.q(n)?), &pair)?;
        Ok((f1, g1))
    }

    /// `(f2, g2)` with `r_c D Q_n = f2 P_n + g2 P_{n-1}`; `n >= 2`.
    pub fn lemma2_fg(&self, n: usize) -> Result<Pair<K>> {
        self.need("lemma 2", n, 2)?;
        let (f1, g1) = self.lemma1_raw(n)?;
        let pair = self.lemma2_raw(n, &f1, &g1)?;
        self.assert_holds("r_c D Q_n", n, &(&self.r_c() * &self.dq(n)?), &pair)?;
        Ok(pair)
    }

    /// `(f3, g3)` with `r_c Q_{n-1} = f3 P_n + g3 P_{n-1}`; `n >= 2`.
    pub fn lemma3_fg(&self, n: usize) -> Result<Pair<K>> {
        self.need("lemma 3", n, 2)?;
        let (f1, g1) = self.lemma1_raw(n - 1)?;
        let pair = self.step_down(
            n,
            &Pair {
                f: rf(f1),
                g: rf(g1),
            },
        )?;
        self.assert_holds("r_c Q_{n-1}", n, &(&self.r_c() * self.sys.q(n - 1)?), &pair)?;
        Ok(pair)
    }

    /// `(f4, g4)` with `r_c D Q_{n-1} = f4 P_n + g4 P_{n-1}`; `n >= 3`.
    pub fn lemma4_fg(&self, n: usize) -> Result<Pair<K>> {
        self.need("lemma 4", n, 3)?;
        let (f1, g1) = self.lemma1_raw(n - 1)?;
        let two = self.lemma2_raw(n - 1, &f1, &g1)?;
        let pair = self.step_down(n, &two)?;
        self.assert_holds("r_c D Q_{n-1}", n, &(&self.r_c() * &self.dq(n - 1)?), &pair)?;
        Ok(pair)
    }

    /// Solves the lemma 1 and lemma 3 relations for `(P_n, P_{n-1})`.
    pub fn invert_connection(&self, n: usize) -> Result<(DensePoly<K>, DensePoly<K>)> {
        self.need("connection inversion", n, 3)?;
        let (f1, g1) = self.lemma1_fg(n)?;
        let one = Pair {
            f: rf(f1),
            g: rf(g1),
        };
        let three = self.lemma3_fg(n)?;
        let (pn, pm) = self.cramer(n, &one, &three)?;
        if &pn != self.fam().p(n)? || &pm != self.fam().p(n - 1)? {
            return Err(Error::InternalIdentityViolation(format!(
                "connection inversion does not return P_{n}, P_{}",
                n - 1
            )));
        }
        Ok((pn, pm))
    }

    fn cramer(
        &self,
        n: usize,
        one: &Pair<K>,
        three: &Pair<K>,
    ) -> Result<(DensePoly<K>, DensePoly<K>)> {
        let phi13 = det(one, three);
        if phi13.is_zero() {
            return Err(Error::SingularConnection(format!(
                "phi^(1,3) vanishes identically at n = {n}"
            )));
        }
        let r = rf(self.r_c());
        let qn = rf(self.sys.q(n)?.clone());
        let qm = rf(self.sys.q(n - 1)?.clone());
        let scale = r.checked_div(&phi13)?;
        let pn = &scale * &(&(&three.g * &qn) - &(&one.g * &qm));
        let pm = &scale * &(&(&one.f * &qm) - &(&three.f * &qn));
        let as_poly = |f: RationalFunction<K>, which: usize| {
            f.to_poly().ok_or_else(|| {
                Error::InternalIdentityViolation(format!("recovered P_{which} is not a polynomial"))
            })
        };
        Ok((as_poly(pn, n)?, as_poly(pm, n - 1)?))
    }

    /// `D r_c = [j+1]_q r_c / (x - q^j c - w[j]_q)`.
    pub fn eq_a_holds(&self) -> bool {
        let mode = self.mode();
        let r = self.r_c();
        let jj = i64::from(self.j());
        let lhs = rf(hahn_apply_poly(&r, mode));
        let rhs = (&rf(r) * &inv_poly(&self.lattice_factor(jj))).scale(&q_number(jj + 1, mode));
        lhs == rhs
    }

    /// `r_c(qx + w) = q^{j+1} (x - q^{-1} c - w[-1]_q) / (x - q^j c - w[j]_q) r_c(x)`.
    pub fn eq_b_holds(&self) -> bool {
        let mode = self.mode();
        let r = self.r_c();
        let jj = i64::from(self.j());
        let lhs = r.compose_affine(mode.q(), mode.omega());
        let ratio = &rf(self.lattice_factor(-1)) * &inv_poly(&self.lattice_factor(jj));
        let rhs = (&ratio * &rf(r)).scale(&mode.q().powi(jj + 1));
        rf(lhs) == rhs
    }

    fn shifted(&self, f: &RationalFunction<K>) -> RationalFunction<K> {
        let mode = self.mode();
        match self.form {
            Form::Deriv => f.clone(),
            Form::Delta => f.compose_affine(&K::one(), &K::one()),
            Form::QDiff => f.compose_affine(mode.q(), &K::zero()),
            Form::Generic => f.compose_affine(mode.q(), mode.omega()),
        }
    }

    /// Raw `(sigma_1, sigma_2, sigma_3)` from the determinant table.
    fn sigma_from_phi(
        &self,
        n: usize,
        phi: &[Vec<RationalFunction<K>>],
    ) -> Result<[RationalFunction<K>; 3]> {
        let p = |i: usize, j: usize| &phi[i - 1][j - 1];
        let (p12, p13, p14, p32, p34) = (p(1, 2), p(1, 3), p(1, 4), p(3, 2), p(3, 4));
        if p12.is_zero() || p13.is_zero() {
            return Err(Error::SingularConnection(format!(
                "phi^(1,2) or phi^(1,3) vanishes identically at n = {n}"
            )));
        }
        let mode = self.mode();
        let d = |f: &RationalFunction<K>| hahn_apply(f, mode);
        let (d12, d13, d32) = (d(p12), d(p13), d(p32));
        let sigma = if self.form == Form::Deriv {
            let s1 = &(p13 * p13) * p12;
            let s2 = p13 * &(&(p12 * &(&(p32 + &d13) - p14)) - &(&d12 * p13));
            let s3 =
                &(p12 * &(&(p12 * p34) - &(p14 * p32))) + &(p13 * &(&(&d32 * p12) - &(&d12 * p32)));
            [s1, s2, s3]
        } else {
            let (s12, s13, s32) = (self.shifted(p12), self.shifted(p13), self.shifted(p32));
            let s1 = &(p13 * &s13) * p12;
            let s2 = p13 * &(&(&(p12 * &(&s32 + &d13)) - &(&s12 * p14)) - &(p13 * &d12));
            let s3 = &(&s12 * &(&(p12 * p34) - &(p14 * p32)))
                + &(p13 * &(&(p12 * &d32) - &(p32 * &d12)));
            [s1, s2, s3]
        };
        if sigma.iter().all(RationalFunction::is_zero) {
            return Err(Error::SingularConnection(format!(
                "all sigma vanish at n = {n}"
            )));
        }
        Ok(sigma)
    }

    /// All pairs, determinants and sigma coefficients for `n >= 3`, with
    /// every identity checked.
    pub fn data(&self, n: usize) -> Result<LadderData<K>> {
        self.need("ladder data", n, 3)?;
        let r = self.r_c();
        let (f1, g1) = self.lemma1_raw(n)?;
        let (f1m, g1m) = self.lemma1_raw(n - 1)?;
        let one = Pair {
            f: rf(f1.clone()),
            g: rf(g1.clone()),
        };
        let two = self.lemma2_raw(n, &f1, &g1)?;
        let three = self.step_down(
            n,
            &Pair {
                f: rf(f1m.clone()),
                g: rf(g1m.clone()),
            },
        )?;
        let four = self.step_down(n, &self.lemma2_raw(n - 1, &f1m, &g1m)?)?;

        let qn = self.sys.q(n)?;
        let qm = self.sys.q(n - 1)?;
        let dqn = self.dq(n)?;
        let dqm = self.dq(n - 1)?;
        let mut checks = LadderChecks {
            lemma1: self.holds(n, &(&r * qn), &one)?,
            lemma2: self.holds(n, &(&r * &dqn), &two)?,
            lemma3: self.holds(n, &(&r * qm), &three)?,
            lemma4: self.holds(n, &(&r * &dqm), &four)?,
            eq_a: self.eq_a_holds(),
            eq_b: self.eq_b_holds(),
            ..LadderChecks::default()
        };
        let (pn, pm) = self.cramer(n, &one, &three)?;
        checks.inversion = &pn == self.fam().p(n)? && &pm == self.fam().p(n - 1)?;

        let pairs = [&one, &two, &three, &four];
        let phi: Vec<Vec<_>> = pairs
            .iter()
            .map(|a| pairs.iter().map(|b| det(a, b)).collect())
            .collect();
        let p = |i: usize, j: usize| &phi[i - 1][j - 1];
        let (qn_r, qm_r) = (rf(qn.clone()), rf(qm.clone()));
        let (dqn_r, dqm_r) = (rf(dqn), rf(dqm));
        checks.lowering = &(p(3, 2) * &qn_r) + &(p(1, 3) * &dqn_r) == p(1, 2) * &qm_r;
        checks.raising = &(p(1, 4) * &qm_r) - &(p(1, 3) * &dqm_r) == p(3, 4) * &qn_r;

        let sigma = self.sigma_from_phi(n, &phi)?;
        checks.holonomic = holonomic_residual(&sigma, qn, self.mode()).is_zero();
        let sigma_normalised = normalise_sigma(&sigma);
        let as_rf = sigma_normalised.clone().map(rf);
        checks.holonomic_normalised = holonomic_residual(&as_rf, qn, self.mode()).is_zero();

        Ok(LadderData {
            n,
            r_c: r,
            f1,
            g1,
            f2: two.f,
            g2: two.g,
            f3: three.f,
            g3: three.g,
            f4: four.f,
            g4: four.g,
            phi,
            sigma,
            sigma_normalised,
            checks,
        })
    }

    /// True iff both ladder relations hold exactly.
    pub fn ladder_verify(&self, n: usize) -> Result<bool> {
        let d = self.data(n)?;
        Ok(d.checks.lowering && d.checks.raising)
    }

    pub fn holonomic_sigma(&self, n: usize) -> Result<[RationalFunction<K>; 3]> {
        Ok(self.data(n)?.sigma)
    }

    pub fn holonomic_verify(&self, n: usize) -> Result<bool> {
        Ok(self.data(n)?.checks.holonomic)
    }
}

/// `sigma_1 D^{(2)} Q + sigma_2 D Q + sigma_3 Q`.
pub fn holonomic_residual<K: Field>(
    sigma: &[RationalFunction<K>; 3],
    q: &DensePoly<K>,
    mode: &OperatorMode<K>,
) -> RationalFunction<K> {
    let d1 = hahn_iterate_poly(q, 1, mode);
    let d2 = hahn_apply_poly(&d1, mode);
    &(&(&sigma[0] * &rf(d2)) + &(&sigma[1] * &rf(d1))) + &(&sigma[2] * &rf(q.clone()))
}

/// Clears denominators, divides out the common polynomial factor and makes
/// the first nonzero coefficient function monic.
pub fn normalise_sigma<K: Field>(sigma: &[RationalFunction<K>; 3]) -> [DensePoly<K>; 3] {
    let mut lcm = DensePoly::one();
    for s in sigma {
        let g = DensePoly::gcd(&lcm, s.den());
        lcm = &lcm * &s.den().exact_div(&g).expect("gcd divides");
    }
    let polys: Vec<DensePoly<K>> = sigma
        .iter()
        .map(|s| {
            (s * &rf(lcm.clone()))
                .to_poly()
                .expect("lcm clears denominators")
        })
        .collect();
    let g = polys
        .iter()
        .fold(DensePoly::zero(), |acc, p| DensePoly::gcd(&acc, p));
    let mut out: Vec<DensePoly<K>> = polys
        .iter()
        .map(|p| {
            if g.is_zero() {
                p.clone()
            } else {
                p.exact_div(&g).expect("gcd divides")
            }
        })
        .collect();
    if let Some(lead) = out.iter().find_map(|p| p.leading().cloned()) {
        let s = lead.inv();
        out.iter_mut().for_each(|p| *p = p.scale(&s));
    }
    let [a, b, c]: [DensePoly<K>; 3] = out.try_into().expect("three entries");
    [a, b, c]
}

pub fn r_c_poly<K: Field>(sys: &SobolevSystem<K>) -> DensePoly<K> {
    Ladder::new(sys).r_c()
}

pub fn ladder_verify<K: Field>(sys: &SobolevSystem<K>, n: usize) -> Result<bool> {
    Ladder::new(sys).ladder_verify(n)
}

pub fn holonomic_sigma<K: Field>(
    sys: &SobolevSystem<K>,
    n: usize,
) -> Result<[RationalFunction<K>; 3]> {
    Ladder::new(sys).holonomic_sigma(n)
}

pub fn holonomic_verify<K: Field>(sys: &SobolevSystem<K>, n: usize) -> Result<bool> {
    Ladder::new(sys).holonomic_verify(n)
}
