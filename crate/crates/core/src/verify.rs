//! Exact verification suites. Each check names the identity it tests by
//! formula and records the case it ran on.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{DensePoly, Field, RationalFunction};
use crate::error::{Error, Result};
use crate::family::{builtin_family, Family, BUILTIN_FAMILIES};
use crate::ladder::{Ladder, LadderData, Path};
use crate::qcalc::{
    hahn_apply, hahn_iterate, leibniz_rhs, q_number_at, q_pochhammer, reciprocal_derivative,
    OperatorMode,
};
use crate::sobolev::{SobolevSpec, SobolevSystem};

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "SOBOLEV_LADDER_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Prop1,
    Gasper,
    Orthogonality,
    Oracle,
    Lemmas,
    Ladder,
    Holonomic,
    AppendixCoherence,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Prop1,
        Suite::Gasper,
        Suite::Orthogonality,
        Suite::Oracle,
        Suite::Lemmas,
        Suite::Ladder,
        Suite::Holonomic,
        Suite::AppendixCoherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Prop1 => "prop1",
            Suite::Gasper => "gasper",
            Suite::Orthogonality => "orthogonality",
            Suite::Oracle => "oracle",
            Suite::Lemmas => "lemmas",
            Suite::Ladder => "ladder",
            Suite::Holonomic => "holonomic",
            Suite::AppendixCoherence => "appendix-coherence",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub identity: String,
    pub case: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Skip {
    pub suite: Suite,
    pub reason: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    pub skipped: Vec<Skip>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// `(passed, total)` for one suite.
    pub fn tally(&self, suite: Suite) -> (usize, usize) {
        let of: Vec<_> = self.checks.iter().filter(|c| c.suite == suite).collect();
        (of.iter().filter(|c| c.passed).count(), of.len())
    }

    /// One line per suite that ran or was skipped.
    pub fn summary(&self) -> Vec<String> {
        let mut out = Vec::new();
        for s in Suite::ALL {
            let (ok, total) = self.tally(s);
            if total > 0 {
                let verdict = if ok == total { "PASS" } else { "FAIL" };
                out.push(format!("{verdict} {s}: {ok}/{total}"));
            }
            for sk in self.skipped.iter().filter(|k| k.suite == s) {
                out.push(format!("SKIP {s}: {}", sk.reason));
            }
        }
        out
    }
}

/// Inputs shared by all suites.
#[derive(Clone, Debug)]
pub struct VerifyConfig<K> {
    pub n_max: usize,
    pub seed: u64,
    /// Random inputs per mode for the operator-rule suite.
    pub samples: usize,
    pub modes: Vec<OperatorMode<K>>,
    pub gasper_qs: Vec<K>,
    pub families: Vec<Arc<Family<K>>>,
    pub js: Vec<u32>,
    pub cs: Vec<K>,
    pub masses: Vec<K>,
    pub threads: Option<usize>,
}

impl<K: Field> VerifyConfig<K> {
    /// Every built-in with default parameters, `j in {0,1,2}`,
    /// `c in {0, 1, 1/3}`, `M in {1, 1/2}`.
    pub fn standard(n_max: usize) -> Result<Self> {
        let families = BUILTIN_FAMILIES
            .iter()
            .map(|name| builtin_family(name, &[], None, n_max.max(1)).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::with_families(n_max, families))
    }

    pub fn with_families(n_max: usize, families: Vec<Arc<Family<K>>>) -> Self {
        let f = K::from_frac;
        Self {
            n_max,
            seed: 0x5eed,
            samples: 50,
            modes: vec![
                OperatorMode::hahn(f(1, 2), f(1, 3)).expect("valid"),
                OperatorMode::q_difference(f(2, 3)).expect("valid"),
                OperatorMode::forward_difference(),
                OperatorMode::derivative(),
            ],
            gasper_qs: vec![f(1, 2), f(2, 3), f(3, 4)],
            families,
            js: vec![0, 1, 2],
            cs: vec![K::zero(), K::one(), f(1, 3)],
            masses: vec![K::one(), f(1, 2)],
            threads: None,
        }
    }

    /// The Sobolev systems for every `(family, j, c, M)` combination.
    pub fn systems(&self) -> Result<Vec<Arc<SobolevSystem<K>>>> {
        let mut specs = Vec::new();
        for fam in &self.families {
            for &j in &self.js {
                for c in &self.cs {
                    for m in &self.masses {
                        specs.push(SobolevSpec::new(fam.clone(), m.clone(), j, c.clone())?);
                    }
                }
            }
        }
        specs
            .into_par_iter()
            .map(|s| SobolevSystem::new(s).map(Arc::new))
            .collect()
    }

    fn thread_count(&self) -> Option<usize> {
        let env = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok());
        match (self.threads, env) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
        .filter(|&t| t > 0)
    }
}

/// Label used in reports for one Sobolev system.
pub fn case_label<K: Field>(sys: &SobolevSystem<K>) -> String {
    let s = sys.spec();
    format!(
        "{} j={} c={} M={}",
        s.family().name(),
        s.j(),
        s.c(),
        s.mass()
    )
}

fn check(suite: Suite, identity: &str, case: String, outcome: Result<bool>) -> Check {
    match outcome {
        Ok(passed) => Check {
            suite,
            identity: identity.to_string(),
            case,
            passed,
            detail: None,
        },
        Err(e) => Check {
            suite,
            identity: identity.to_string(),
            case,
            passed: false,
            detail: Some(e.to_string()),
        },
    }
}

/// Runs the selected suites. Errors only when a configured case cannot be
/// set up (for instance a non-positive-definite Sobolev product).
pub fn run<K: Field>(config: &VerifyConfig<K>, suites: &[Suite]) -> Result<Report> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = config.thread_count() {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(config, suites))
}

fn run_in_pool<K: Field>(config: &VerifyConfig<K>, suites: &[Suite]) -> Result<Report> {
    let mut report = Report::default();
    let wants = |s: Suite| suites.contains(&s);
    if wants(Suite::Prop1) {
        report.checks.extend(prop1_suite(config));
    }
    if wants(Suite::Gasper) {
        report.checks.extend(gasper_suite(config));
    }
    if wants(Suite::Orthogonality) {
        report.checks.extend(orthogonality_suite(config));
    }
    let needs_systems = [
        Suite::Oracle,
        Suite::Lemmas,
        Suite::Ladder,
        Suite::Holonomic,
        Suite::AppendixCoherence,
    ]
    .into_iter()
    .any(wants);
    if !needs_systems {
        return Ok(report);
    }
    let systems = config.systems()?;
    if wants(Suite::Oracle) {
        report.checks.extend(oracle_suite(&systems, config.n_max));
    }
    if config.n_max < 3 {
        for s in [Suite::Ladder, Suite::Holonomic, Suite::AppendixCoherence] {
            if wants(s) {
                report.skipped.push(Skip {
                    suite: s,
                    reason: format!("needs n >= 3, n_max = {}", config.n_max),
                });
            }
        }
    }
    if wants(Suite::Lemmas) || wants(Suite::Ladder) || wants(Suite::Holonomic) {
        report
            .checks
            .extend(ladder_suites(&systems, config.n_max, suites));
    }
    if wants(Suite::AppendixCoherence) {
        report
            .checks
            .extend(coherence_suite(&systems, config.n_max.min(6)));
    }
    Ok(report)
}

fn random_coeff<K: Field>(rng: &mut ChaCha8Rng) -> K {
    K::from_frac(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

fn random_poly<K: Field>(rng: &mut ChaCha8Rng, max_deg: usize, min_deg: usize) -> DensePoly<K> {
    let deg = rng.gen_range(min_deg..=max_deg);
    let mut c: Vec<K> = (0..deg).map(|_| random_coeff(rng)).collect();
    let mut lead = random_coeff::<K>(rng);
    while lead.is_zero() {
        lead = random_coeff(rng);
    }
    c.push(lead);
    DensePoly::new(c)
}

/// Polynomial of degree <= 6, or a quotient with numerator degree <= 4 and
/// denominator degree 1 or 2.
fn random_input<K: Field>(rng: &mut ChaCha8Rng, rational: bool) -> RationalFunction<K> {
    if rational {
        RationalFunction::new(random_poly(rng, 4, 0), random_poly(rng, 2, 1))
            .expect("nonzero denominator")
    } else {
        RationalFunction::from_poly(random_poly(rng, 6, 0))
    }
}

fn shift<K: Field>(f: &RationalFunction<K>, mode: &OperatorMode<K>) -> RationalFunction<K> {
    f.compose_affine(mode.q(), mode.omega())
}

/// Linearity, product and quotient rules, Leibniz rule and the closed form
/// for `D^{(n)} 1/(beta - gamma x)`, on seeded random inputs.
pub fn prop1_suite<K: Field>(config: &VerifyConfig<K>) -> Vec<Check> {
    let jobs: Vec<(usize, usize)> = (0..config.modes.len())
        .flat_map(|m| (0..config.samples).map(move |s| (m, s)))
        .collect();
    jobs.into_par_iter()
        .flat_map_iter(|(m, s)| {
            let mode = &config.modes[m];
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ ((m as u64) << 32) ^ s as u64);
            let f = random_input::<K>(&mut rng, s % 2 == 1);
            let g = random_input::<K>(&mut rng, s % 3 == 2);
            let (a, b): (K, K) = (random_coeff(&mut rng), random_coeff(&mut rng));
            let case = format!("{} sample {s}", mode.kind().name());
            let d = |h: &RationalFunction<K>| hahn_apply(h, mode);
            let mut out = Vec::new();
            let push = |out: &mut Vec<Check>, id: &str, ok: bool| {
                out.push(check(Suite::Prop1, id, case.clone(), Ok(ok)));
            };

            let lin = d(&(&f.scale(&a) + &g.scale(&b))) == &d(&f).scale(&a) + &d(&g).scale(&b);
            push(&mut out, "D(a f + b g) = a Df + b Dg", lin);

            let prod = d(&(&f * &g)) == &(&shift(&f, mode) * &d(&g)) + &(&g * &d(&f));
            push(&mut out, "D(f g) = f(qx+w) Dg + g Df", prod);

            let quot = (|| -> Result<bool> {
                let lhs = d(&f.checked_div(&g)?);
                let num = &(&g * &d(&f)) - &(&f * &d(&g));
                let rhs = num.checked_div(&(&g * &shift(&g, mode)))?;
                Ok(lhs == rhs)
            })();
            out.push(check(
                Suite::Prop1,
                "D(f/g) = (g Df - f Dg) / (g g(qx+w))",
                case.clone(),
                quot,
            ));

            let fg = &f * &g;
            let leib =
                (0..=4u32).all(|n| hahn_iterate(&fg, n, mode) == leibniz_rhs(&f, &g, n, mode));
            push(&mut out, "Leibniz rule for D^(n)(f g), n <= 4", leib);

            let recip = (|| -> Result<bool> {
                let (beta, gamma): (K, K) = (random_coeff(&mut rng), random_coeff(&mut rng));
                if beta.is_zero() && gamma.is_zero() {
                    return Ok(true);
                }
                let base = RationalFunction::reciprocal_of(&DensePoly::linear(
                    beta.clone(),
                    -gamma.clone(),
                ))?;
                for n in 0..=4 {
                    if hahn_iterate(&base, n, mode)
                        != reciprocal_derivative(&beta, &gamma, n, mode)?
                    {
                        return Ok(false);
                    }
                }
                Ok(true)
            })();
            out.push(check(
                Suite::Prop1,
                "D^(n) 1/(beta - gamma x) closed form, n <= 4",
                case,
                recip,
            ));
            out
        })
        .collect()
}

/// `prod_{k=1}^{n} [k]_q = (q;q)_n / (1-q)^n`.
pub fn gasper_suite<K: Field>(config: &VerifyConfig<K>) -> Vec<Check> {
    let mut out = Vec::new();
    for q in &config.gasper_qs {
        for n in 0..=config.n_max.max(8) {
            let lhs = (1..=n as i64).fold(K::one(), |acc, k| acc * q_number_at(k, q));
            let rhs = q_pochhammer(q, q, n as u32) / (K::one() - q.clone()).powi(n as i64);
            out.push(check(
                Suite::Gasper,
                "prod [k]_q = (q;q)_n / (1-q)^n",
                format!("q={q} n={n}"),
                Ok(lhs == rhs),
            ));
        }
    }
    out
}

/// `(P_m, P_n) = h_n delta_{mn}` from the moments, and the
/// Christoffel-Darboux formula
/// `h_n (x - y) sum_{i<=n} P_i(x) P_i(y) / h_i = P_{n+1}(x) P_n(y) - P_n(x) P_{n+1}(y)`.
///
/// Both sides of the second identity are polynomials of degree at most
/// `n + 1` in `y`, so checking them as polynomials in `x` at `n + 2`
/// distinct values of `y` proves it.
pub fn orthogonality_suite<K: Field>(config: &VerifyConfig<K>) -> Vec<Check> {
    config
        .families
        .par_iter()
        .flat_map_iter(|fam| {
            let top = config.n_max.min(fam.max_n());
            let mut out = Vec::new();
            for m in 0..=top {
                for n in 0..=m {
                    let ok = (|| -> Result<bool> {
                        let ip = fam.inner(fam.p(m)?, fam.p(n)?)?;
                        let want = if m == n { fam.h(n)?.clone() } else { K::zero() };
                        Ok(ip == want)
                    })();
                    out.push(check(
                        Suite::Orthogonality,
                        "(P_m, P_n) = h_n delta_mn",
                        format!("{} m={m} n={n}", fam.name()),
                        ok,
                    ));
                }
            }
            for n in 0..=top {
                out.push(check(
                    Suite::Orthogonality,
                    "Christoffel-Darboux",
                    format!("{} n={n}", fam.name()),
                    christoffel_darboux(fam, n),
                ));
            }
            out
        })
        .collect()
}

fn christoffel_darboux<K: Field>(fam: &Family<K>, n: usize) -> Result<bool> {
    let x = DensePoly::x();
    for t in 0..(n + 2) as i64 {
        let y = K::from_frac(2 * t - 1, 3);
        let mut kernel = DensePoly::zero();
        for i in 0..=n {
            let p = fam.p(i)?;
            kernel = &kernel + &p.scale(&(p.eval(&y) / fam.h(i)?.clone()));
        }
        let xy = &x - &DensePoly::constant(y.clone());
        let lhs = (&xy * &kernel).scale(fam.h(n)?);
        let (pn, pn1) = (fam.p(n)?, fam.p(n + 1)?);
        let rhs = &pn1.scale(&pn.eval(&y)) - &pn.scale(&pn1.eval(&y));
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Connection formula against Gram-Schmidt on monomials.
pub fn oracle_suite<K: Field>(systems: &[Arc<SobolevSystem<K>>], n_max: usize) -> Vec<Check> {
    systems
        .par_iter()
        .flat_map_iter(|sys| {
            let label = case_label(sys);
            let top = n_max.min(sys.max_n());
            let gram = crate::sobolev::gram_schmidt(sys.spec(), top);
            (0..=top)
                .map(|n| {
                    let ok = match &gram {
                        Ok(g) => sys.q(n).map(|q| q == &g[n]),
                        Err(e) => Err(e.clone()),
                    };
                    check(
                        Suite::Oracle,
                        "connection Q_n = Gram-Schmidt Q_n",
                        format!("{label} n={n}"),
                        ok,
                    )
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn ladder_suites<K: Field>(
    systems: &[Arc<SobolevSystem<K>>],
    n_max: usize,
    suites: &[Suite],
) -> Vec<Check> {
    let jobs: Vec<(usize, usize)> = systems
        .iter()
        .enumerate()
        .flat_map(|(i, s)| (1..=n_max.min(s.max_n())).map(move |n| (i, n)))
        .collect();
    let lemmas = suites.contains(&Suite::Lemmas);
    let ladder = suites.contains(&Suite::Ladder);
    let holo = suites.contains(&Suite::Holonomic);
    jobs.into_par_iter()
        .flat_map_iter(|(i, n)| {
            let sys = &systems[i];
            let l = Ladder::new(sys);
            let case = format!("{} n={n}", case_label(sys));
            let mut out = Vec::new();
            if n < 3 {
                if lemmas {
                    out.push(check(
                        Suite::Lemmas,
                        "r_c Q_n = f1 P_n + g1 P_{n-1}",
                        case.clone(),
                        l.lemma1_fg(n).map(|_| true),
                    ));
                    if n == 2 {
                        out.push(check(
                            Suite::Lemmas,
                            "r_c D Q_n = f2 P_n + g2 P_{n-1}",
                            case.clone(),
                            l.lemma2_fg(n).map(|_| true),
                        ));
                        out.push(check(
                            Suite::Lemmas,
                            "r_c Q_{n-1} = f3 P_n + g3 P_{n-1}",
                            case,
                            l.lemma3_fg(n).map(|_| true),
                        ));
                    }
                }
                return out;
            }
            let data = l.data(n);
            let take = |f: fn(&LadderData<K>) -> bool| data.as_ref().map(f).map_err(Clone::clone);
            if lemmas {
                for (id, f) in lemma_checks::<K>() {
                    out.push(check(Suite::Lemmas, id, case.clone(), take(f)));
                }
            }
            if ladder {
                out.push(check(
                    Suite::Ladder,
                    "(phi32 + phi13 D) Q_n = phi12 Q_{n-1}",
                    case.clone(),
                    take(|d| d.checks.lowering),
                ));
                out.push(check(
                    Suite::Ladder,
                    "(phi14 - phi13 D) Q_{n-1} = phi34 Q_n",
                    case.clone(),
                    take(|d| d.checks.raising),
                ));
            }
            if holo {
                out.push(check(
                    Suite::Holonomic,
                    "sigma1 D^(2) Q_n + sigma2 D Q_n + sigma3 Q_n = 0",
                    case.clone(),
                    take(|d| d.checks.holonomic),
                ));
                out.push(check(
                    Suite::Holonomic,
                    "normalised sigma annihilate Q_n",
                    case,
                    take(|d| d.checks.holonomic_normalised),
                ));
            }
            out
        })
        .collect()
}

type DataCheck<K> = (&'static str, fn(&LadderData<K>) -> bool);

fn lemma_checks<K: Field>() -> [DataCheck<K>; 7] {
    [
        ("r_c Q_n = f1 P_n + g1 P_{n-1}", |d| d.checks.lemma1),
        ("r_c D Q_n = f2 P_n + g2 P_{n-1}", |d| d.checks.lemma2),
        ("r_c Q_{n-1} = f3 P_n + g3 P_{n-1}", |d| d.checks.lemma3),
        ("r_c D Q_{n-1} = f4 P_n + g4 P_{n-1}", |d| d.checks.lemma4),
        ("P_n, P_{n-1} recovered from Q_n, Q_{n-1}", |d| {
            d.checks.inversion
        }),
        ("D r_c = [j+1]_q r_c / (x - q^j c - w[j]_q)", |d| {
            d.checks.eq_a
        }),
        (
            "r_c(qx+w) = q^(j+1) (x - q^-1 c - w[-1]_q) / (x - q^j c - w[j]_q) r_c",
            |d| d.checks.eq_b,
        ),
    ]
}

/// Mode-specific closed forms against the general Hahn formulas.
pub fn coherence_suite<K: Field>(systems: &[Arc<SobolevSystem<K>>], n_top: usize) -> Vec<Check> {
    let jobs: Vec<(usize, usize)> = systems
        .iter()
        .enumerate()
        .filter(|(_, s)| Ladder::new(s).path() == Path::Specialised)
        .flat_map(|(i, s)| (3..=n_top.min(s.max_n())).map(move |n| (i, n)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, n)| {
            let sys = &systems[i];
            let ok = (|| -> Result<bool> {
                let a = Ladder::new(sys).data(n)?;
                let b = Ladder::with_path(sys, Path::Generic).data(n)?;
                Ok(a.r_c == b.r_c
                    && (&a.f1, &a.g1) == (&b.f1, &b.g1)
                    && (&a.f2, &a.g2) == (&b.f2, &b.g2)
                    && (&a.f3, &a.g3) == (&b.f3, &b.g3)
                    && (&a.f4, &a.g4) == (&b.f4, &b.g4)
                    && a.sigma == b.sigma)
            })();
            check(
                Suite::AppendixCoherence,
                &format!(
                    "{} closed forms = general Hahn forms",
                    sys.mode().kind().name()
                ),
                format!("{} n={n}", case_label(sys)),
                ok,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!(Suite::parse_list("all").unwrap().len(), 8);
        assert_eq!(
            Suite::parse_list("lemmas,ladder").unwrap(),
            vec![Suite::Lemmas, Suite::Ladder]
        );
        assert!(Suite::parse_list("bogus").is_err());
    }

    #[test]
    fn small_run_passes() {
        let mut cfg = VerifyConfig::<Rational>::standard(4).unwrap();
        cfg.samples = 4;
        cfg.threads = Some(2);
        let report = run(&cfg, &Suite::ALL).unwrap();
        assert!(
            report.passed(),
            "{:?}",
            report.failures().collect::<Vec<_>>()
        );
        assert!(report.skipped.is_empty());
        assert_eq!(report.summary().len(), 8);
    }

    #[test]
    fn holonomic_below_three_is_skipped() {
        let cfg = VerifyConfig::<Rational>::standard(2).unwrap();
        let report = run(&cfg, &[Suite::Holonomic]).unwrap();
        assert!(report.checks.is_empty());
        assert_eq!(report.skipped.len(), 1);
        assert!(report.passed());
    }
}
