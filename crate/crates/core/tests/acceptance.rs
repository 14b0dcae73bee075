//! Acceptance run: one line per criterion, nonzero exit if any fails.
//! Every comparison is exact equality of canonical forms.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sobolev_ladder::family::{builtin_family, Family, FamilyParts};
use sobolev_ladder::ladder::{holonomic_residual, Ladder, Path};
use sobolev_ladder::qcalc::{hahn_eval_poly_at, q_number_at, q_pochhammer};
use sobolev_ladder::sobolev::{SobolevSpec, SobolevSystem};
use sobolev_ladder::verify::{self, Report, Suite, VerifyConfig};
use sobolev_ladder::{Field, Poly, RatFunc, Rational};

const N_MAX: usize = 8;

fn r(p: i64, q: i64) -> Rational {
    Rational::from_frac(p, q)
}

struct Outcome {
    passed: bool,
    note: String,
}

fn report_outcome(report: &Report, budget: Option<Duration>, elapsed: Duration) -> Outcome {
    let failures: Vec<_> = report.failures().take(5).collect();
    let total = report.checks.len();
    let in_time = budget.map_or(true, |b| elapsed < b);
    let mut note = format!(
        "{} exact checks, {} failed, {:.1?}",
        total,
        report.failures().count(),
        elapsed
    );
    for f in failures {
        note.push_str(&format!(
            "\n      failed [{}] {} on {} {:?}",
            f.suite, f.identity, f.case, f.detail
        ));
    }
    if !in_time {
        note.push_str(&format!(" (over budget {budget:?})"));
    }
    Outcome {
        passed: total > 0 && report.passed() && in_time,
        note,
    }
}

fn standard_config() -> VerifyConfig<Rational> {
    VerifyConfig::standard(N_MAX).expect("built-ins are valid")
}

// ---------------------------------------------------------------- oracles

/// Closed-form moments of each built-in with default parameters.
fn oracle_moments(name: &str, count: usize) -> Vec<Rational> {
    match name {
        // Poisson(1): Bell numbers, via the Bell triangle
        "charlier" => {
            let mut out = vec![Rational::one()];
            let mut row = vec![num_bigint::BigInt::one()];
            while out.len() < count {
                let mut next = vec![row.last().unwrap().clone()];
                for v in &row {
                    let s = next.last().unwrap() + v;
                    next.push(s);
                }
                out.push(Rational::from_integer(next[0].clone()));
                row = next;
            }
            out.truncate(count);
            out
        }
        // exp(-x^2)/sqrt(pi): mu_{2k} = (2k-1)!! / 2^k, odd moments vanish
        "hermite" => (0..count)
            .map(|k| {
                if k % 2 == 1 {
                    return Rational::zero();
                }
                let half = k / 2;
                let dfact = (1..=half).fold(Rational::one(), |acc, i| acc * r(2 * i as i64 - 1, 1));
                dfact / Rational::from_int(2).powi(half as i64)
            })
            .collect(),
        // a = -1, q = 1/2: mu_n = sum_k [n k]_q a^k
        "alsalamcarlitz1" => {
            let (a, q) = (r(-1, 1), r(1, 2));
            (0..count)
                .map(|n| {
                    (0..=n)
                        .map(|k| {
                            let qq = |m: usize| {
                                (1..=m).fold(Rational::one(), |acc, i| {
                                    acc * (Rational::one() - q.powi(i as i64))
                                })
                            };
                            qq(n) / (qq(k) * qq(n - k)) * a.powi(k as i64)
                        })
                        .fold(Rational::zero(), |s, t| s + t)
                })
                .collect()
        }
        _ => unreachable!(),
    }
}

fn moment_inner(mu: &[Rational], f: &Poly, g: &Poly) -> Rational {
    let mut s = Rational::zero();
    for (i, a) in f.coeffs().iter().enumerate() {
        for (j, b) in g.coeffs().iter().enumerate() {
            s += a.clone() * b.clone() * mu[i + j].clone();
        }
    }
    s
}

/// Monic `Q_n` from the linear system `(Q_n, x^i)_S = 0`, `i < n`, with
/// closed-form moments; solved by fraction-exact Gaussian elimination.
fn solve_monic(mu: &[Rational], n: usize, sob: Option<(&SobolevSpec<Rational>,)>) -> Poly {
    let ip = |a: usize, b: usize| -> Rational {
        let (xa, xb) = (
            Poly::monomial(Rational::one(), a),
            Poly::monomial(Rational::one(), b),
        );
        let mut v = moment_inner(mu, &xa, &xb);
        if let Some((s,)) = sob {
            let da = hahn_eval_poly_at(&xa, s.j(), s.c(), s.mode());
            let db = hahn_eval_poly_at(&xb, s.j(), s.c(), s.mode());
            v += s.mass().clone() * da * db;
        }
        v
    };
    // rows i < n: sum_k c_k (x^k, x^i) = -(x^n, x^i)
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rational> = (0..n).map(|k| ip(k, i)).collect();
            row.push(-ip(n, i));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&i| !m[i][col].is_zero())
            .expect("nonsingular Gram matrix");
        m.swap(col, piv);
        let inv = Rational::one() / m[col][col].clone();
        for k in col..=n {
            m[col][k] *= inv.clone();
        }
        for i in 0..n {
            if i != col && !m[i][col].is_zero() {
                let f = m[i][col].clone();
                for k in col..=n {
                    let t = m[col][k].clone() * f.clone();
                    m[i][k] -= t;
                }
            }
        }
    }
    let mut coeffs: Vec<Rational> = m.iter().map(|row| row[n].clone()).collect();
    coeffs.push(Rational::one());
    Poly::new(coeffs)
}

// ---------------------------------------------------------------- criteria

fn criterion1() -> Outcome {
    let cfg = standard_config();
    let t = Instant::now();
    let report = verify::run(&cfg, &[Suite::Prop1]).unwrap();
    report_outcome(&report, Some(Duration::from_secs(30)), t.elapsed())
}

fn criterion2() -> Outcome {
    let t = Instant::now();
    let mut checks = 0;
    let mut bad = Vec::new();
    for q in [r(1, 2), r(2, 3), r(3, 4)] {
        for n in 0..=8i64 {
            // written out independently of the library
            let lhs = (1..=n).fold(Rational::one(), |acc, k| {
                let qk = q.powi(k);
                acc * ((Rational::one() - qk) / (Rational::one() - q.clone()))
            });
            let qq = (1..=n).fold(Rational::one(), |acc, k| {
                acc * (Rational::one() - q.powi(k))
            });
            let rhs = qq / (Rational::one() - q.clone()).powi(n);
            let lib_lhs = (1..=n).fold(Rational::one(), |acc, k| acc * q_number_at(k, &q));
            let lib_rhs = q_pochhammer(&q, &q, n as u32) / (Rational::one() - q.clone()).powi(n);
            checks += 1;
            if !(lhs == rhs && lib_lhs == lhs && lib_rhs == rhs) {
                bad.push(format!("q={q} n={n}"));
            }
        }
    }
    let report = verify::run(&standard_config(), &[Suite::Gasper]).unwrap();
    let mut o = report_outcome(&report, None, t.elapsed());
    o.passed &= bad.is_empty();
    o.note = format!("{checks} independent + {}; failures {:?}", o.note, bad);
    o
}

fn criterion3() -> Outcome {
    // max_n 9 so the Christoffel-Darboux check at n = 8 has P_9 and h_8 from a
    // family validated one step further
    let t = Instant::now();
    let fams: Vec<_> = ["charlier", "hermite", "alsalamcarlitz1"]
        .iter()
        .map(|n| Arc::new(builtin_family::<Rational>(n, &[], None, N_MAX + 1).unwrap()))
        .collect();
    let mut bad = Vec::new();
    let mut extra = 0;
    for fam in &fams {
        let name = fam.name().split('(').next().unwrap().to_string();
        let mu = oracle_moments(&name, 2 * N_MAX + 3);
        if fam.moments().as_slice()[..mu.len()] != mu[..] {
            bad.push(format!("{name}: Jacobi moments differ from closed form"));
        }
        for m in 0..=N_MAX {
            for n in 0..=N_MAX {
                extra += 1;
                let ip = moment_inner(&mu, fam.p(m).unwrap(), fam.p(n).unwrap());
                let want = if m == n {
                    fam.h(n).unwrap().clone()
                } else {
                    Rational::zero()
                };
                if ip != want {
                    bad.push(format!("{name} (P_{m}, P_{n})"));
                }
            }
        }
    }
    let mut cfg = VerifyConfig::with_families(N_MAX, fams);
    cfg.threads = None;
    let report = verify::run(&cfg, &[Suite::Orthogonality]).unwrap();
    let mut o = report_outcome(&report, Some(Duration::from_secs(10)), t.elapsed());
    o.passed &= bad.is_empty();
    o.note = format!(
        "{extra} closed-form-moment checks + {}; failures {:?}",
        o.note, bad
    );
    o
}

fn criterion4() -> Outcome {
    let t = Instant::now();
    let cfg = standard_config();
    let report = verify::run(&cfg, &[Suite::Oracle]).unwrap();
    let systems = cfg.systems().unwrap();
    let mut bad = Vec::new();
    let mut extra = 0;
    for sys in &systems {
        let name = sys.family().name().split('(').next().unwrap().to_string();
        let mu = oracle_moments(&name, 2 * N_MAX + 2);
        for n in 0..=N_MAX {
            extra += 1;
            if &solve_monic(&mu, n, Some((sys.spec(),))) != sys.q(n).unwrap() {
                bad.push(format!("{} n={n}", verify::case_label(sys)));
            }
        }
    }
    let fam = Arc::new(builtin_family::<Rational>("hermite", &[], None, N_MAX).unwrap());
    let fixture = SobolevSystem::new(SobolevSpec::new(fam, r(1, 1), 1, r(0, 1)).unwrap()).unwrap();
    let q3 = Poly::new(vec![r(0, 1), r(-1, 2), r(0, 1), r(1, 1)]);
    if fixture.q(3).unwrap() != &q3 || fixture.gram_oracle_qn(3).unwrap() != q3 {
        bad.push("Hermite j=1 c=0 M=1 fixture Q_3 = x^3 - x/2".into());
    }
    let mut o = report_outcome(&report, Some(Duration::from_secs(60)), t.elapsed());
    o.passed &= bad.is_empty() && systems.len() == 54;
    o.note = format!(
        "{} configurations; {extra} linear-solve checks + {}; failures {:?}",
        systems.len(),
        o.note,
        bad
    );
    o
}

fn criterion5() -> Outcome {
    let t = Instant::now();
    let report = verify::run(&standard_config(), &[Suite::Lemmas]).unwrap();
    report_outcome(&report, Some(Duration::from_secs(90)), t.elapsed())
}

fn criterion6() -> Outcome {
    let t = Instant::now();
    let report = verify::run(&standard_config(), &[Suite::Ladder, Suite::Holonomic]).unwrap();
    report_outcome(&report, Some(Duration::from_secs(120)), t.elapsed())
}

fn criterion7() -> Outcome {
    let t = Instant::now();
    let report = verify::run(&standard_config(), &[Suite::AppendixCoherence]).unwrap();
    let mut o = report_outcome(&report, None, t.elapsed());
    // 3 families x 18 configurations x n in 3..=6
    o.passed &= report.checks.len() == 54 * 4;
    o
}

/// Detection pipeline for a perturbed family: construction, the
/// orthogonality / oracle / lemma / ladder suites, and the closed-form
/// moments of the unperturbed family.
fn family_mutation_detected(parts: FamilyParts<Rational>, oracle_name: &str) -> (bool, String) {
    let fam = match Family::new(parts) {
        Err(e) => return (true, format!("rejected at construction: {e}")),
        Ok(f) => Arc::new(f),
    };
    let mu = oracle_moments(oracle_name, 2 * N_MAX + 2);
    if fam.moments().as_slice()[..mu.len()] != mu[..] {
        return (true, "moments differ from closed form".into());
    }
    let mut cfg = VerifyConfig::with_families(N_MAX, vec![fam]);
    cfg.js = vec![1];
    cfg.cs = vec![r(1, 3)];
    cfg.masses = vec![r(1, 1)];
    match verify::run(
        &cfg,
        &[
            Suite::Orthogonality,
            Suite::Oracle,
            Suite::Lemmas,
            Suite::Ladder,
        ],
    ) {
        Err(e) => (true, format!("setup failed: {e}")),
        Ok(rep) if !rep.passed() => (
            true,
            format!("{} suite checks failed", rep.failures().count()),
        ),
        Ok(_) => (false, "undetected".into()),
    }
}

fn criterion8() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let names = ["charlier", "hermite", "alsalamcarlitz1"];
    let mut lines = Vec::new();
    let mut all = true;
    for k in 0..10 {
        let name = names[rng.gen_range(0..3)];
        let (desc, detected, how) = match k % 3 {
            0 => {
                let base = builtin_family::<Rational>(name, &[], None, N_MAX).unwrap();
                let mut parts = base.parts().clone();
                let (which, idx) = if rng.gen_bool(0.5) {
                    let i = rng.gen_range(0..=N_MAX);
                    parts.alpha[i] += Rational::one();
                    ("alpha", i)
                } else {
                    let i = rng.gen_range(1..=N_MAX);
                    parts.beta[i - 1] += Rational::one();
                    ("beta", i)
                };
                let (d, how) = family_mutation_detected(parts, name);
                (format!("{name}: {which}_{idx} + 1"), d, how)
            }
            1 => {
                let j = rng.gen_range(0..=2u32);
                let c = [r(0, 1), r(1, 1), r(1, 3)][rng.gen_range(0..3)].clone();
                let fam = Arc::new(builtin_family::<Rational>(name, &[], None, N_MAX).unwrap());
                let sys = SobolevSystem::new(SobolevSpec::new(fam, r(1, 1), j, c.clone()).unwrap())
                    .unwrap();
                let l = Ladder::with_path(&sys, Path::Generic);
                let i = rng.gen_range(0..=j as usize);
                let mut table = l.factorial_ratios().to_vec();
                table[i] += Rational::one();
                let bad = l.with_factorial_ratios(table).unwrap();
                let failing = (1..=N_MAX).filter(|&n| bad.lemma1_fg(n).is_err()).count();
                (
                    format!("{name} j={j} c={c}: factorial ratio ({j},{i}) + 1"),
                    failing > 0,
                    format!("lemma 1 fails for {failing} of {N_MAX} degrees"),
                )
            }
            _ => {
                let fam = Arc::new(builtin_family::<Rational>(name, &[], None, N_MAX).unwrap());
                let j = rng.gen_range(0..=2u32);
                let sys = SobolevSystem::new(SobolevSpec::new(fam, r(1, 2), j, r(1, 3)).unwrap())
                    .unwrap();
                let n = rng.gen_range(3..=N_MAX);
                let d = Ladder::new(&sys).data(n).unwrap();
                let s = rng.gen_range(0..3);
                let mut sigma = d.sigma.clone();
                let num = sigma[s].num();
                let deg = num.degree().unwrap_or(0);
                let ci = rng.gen_range(0..=deg);
                let mut coeffs = num.coeffs().to_vec();
                coeffs.resize(deg + 1, Rational::zero());
                coeffs[ci] += Rational::one();
                sigma[s] = RatFunc::new(Poly::new(coeffs), sigma[s].den().clone()).unwrap();
                let clean = holonomic_residual(&d.sigma, sys.q(n).unwrap(), sys.mode()).is_zero();
                let dirty = holonomic_residual(&sigma, sys.q(n).unwrap(), sys.mode()).is_zero();
                (
                    format!("{name} j={j} n={n}: sigma{} coefficient x^{ci} + 1", s + 1),
                    clean && !dirty,
                    "holonomic residual nonzero".into(),
                )
            }
        };
        all &= detected;
        lines.push(format!(
            "\n      {} {desc}: {how}",
            if detected { "detected" } else { "MISSED" }
        ));
    }
    let elapsed = t.elapsed();
    Outcome {
        passed: all && elapsed < Duration::from_secs(60),
        note: format!("10 mutations, {elapsed:.1?}{}", lines.concat()),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        (
            "1 operator rules (linearity, product, quotient, Leibniz, reciprocal)",
            criterion1,
        ),
        ("2 product of q-numbers = (q;q)_n / (1-q)^n", criterion2),
        ("3 orthogonality and Christoffel-Darboux", criterion3),
        ("4 connection formula = moment oracle", criterion4),
        (
            "5 lemma identities, inversion, D r_c and r_c(qx+w)",
            criterion5,
        ),
        ("6 ladder and holonomic identities", criterion6),
        (
            "7 closed forms per operator = general Hahn forms",
            criterion7,
        ),
        ("8 mutation sensitivity", criterion8),
    ];
    let mut ok = true;
    for (name, f) in criteria {
        let o = f();
        ok &= o.passed;
        println!(
            "{} criterion {name}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.note
        );
    }
    if ok {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
