//! JSON wire format.
//!
//! Rationals are strings `"p/q"` (or `"p"`), polynomials are ascending
//! coefficient arrays of such strings, rational functions are
//! `{"num": [...], "den": [...]}`.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::arith::{DensePoly, Field, RationalFunction};
use crate::error::{Error, Result};
use crate::family::{builtin_family, Family, FamilyParts};
use crate::ladder::LadderData;
use crate::qcalc::{ModeKind, OperatorMode};
use crate::sobolev::{SobolevSpec, SobolevSystem};

pub fn rational_json<K: Field>(x: &K) -> Value {
    Value::String(x.to_string())
}

pub fn poly_json<K: Field>(p: &DensePoly<K>) -> Value {
    Value::Array(p.coeffs().iter().map(rational_json).collect())
}

pub fn ratfunc_json<K: Field>(f: &RationalFunction<K>) -> Value {
    json!({ "num": poly_json(f.num()), "den": poly_json(f.den()) })
}

pub fn mode_json<K: Field>(m: &OperatorMode<K>) -> Value {
    json!({ "kind": m.kind(), "q": rational_json(m.q()), "omega": rational_json(m.omega()) })
}

pub fn parse_rational<K: Field>(s: &str) -> Result<K> {
    K::parse_exact(s)
}

fn parse_all<K: Field>(v: &[String]) -> Result<Vec<K>> {
    v.iter().map(|s| K::parse_exact(s)).collect()
}

fn parse_poly<K: Field>(v: &[String]) -> Result<DensePoly<K>> {
    parse_all(v).map(DensePoly::new)
}

/// A rational-function entry in a family document: a constant, a
/// polynomial coefficient array, `[[num], [den]]` or `{"num", "den"}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum RatFuncDoc {
    Constant(String),
    Poly(Vec<String>),
    Pair(Vec<Vec<String>>),
    Parts { num: Vec<String>, den: Vec<String> },
}

impl RatFuncDoc {
    pub fn parse<K: Field>(&self) -> Result<RationalFunction<K>> {
        match self {
            RatFuncDoc::Constant(s) => Ok(RationalFunction::constant(K::parse_exact(s)?)),
            RatFuncDoc::Poly(c) => Ok(RationalFunction::from_poly(parse_poly(c)?)),
            RatFuncDoc::Pair(v) => match v.as_slice() {
                [num, den] => RationalFunction::new(parse_poly(num)?, parse_poly(den)?),
                _ => Err(Error::Parse("expected [[num...], [den...]]".into())),
            },
            RatFuncDoc::Parts { num, den } => {
                RationalFunction::new(parse_poly(num)?, parse_poly(den)?)
            }
        }
    }
}

/// `B` or `C`: one entry per `n = 1..=max_n`, or `{"const": entry}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum SequenceDoc {
    Const {
        #[serde(rename = "const")]
        value: RatFuncDoc,
    },
    PerN(Vec<RatFuncDoc>),
}

impl SequenceDoc {
    fn parse<K: Field>(&self, len: usize) -> Result<Vec<RationalFunction<K>>> {
        match self {
            SequenceDoc::Const { value } => Ok(vec![value.parse()?; len]),
            SequenceDoc::PerN(v) => v.iter().map(RatFuncDoc::parse).collect(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct ModeDoc {
    pub kind: ModeKind,
    #[serde(default)]
    pub q: Option<String>,
    #[serde(default, alias = "ω", alias = "w")]
    pub omega: Option<String>,
}

impl ModeDoc {
    pub fn parse<K: Field>(&self) -> Result<OperatorMode<K>> {
        let q = self.q.as_deref().map(K::parse_exact).transpose()?;
        let w = self.omega.as_deref().map(K::parse_exact).transpose()?;
        OperatorMode::from_parts(self.kind, q, w)
    }
}

/// A user-defined family. `beta[0]` is `beta_1`; `B` and `C` start at
/// `n = 1`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub name: String,
    pub mode: ModeDoc,
    pub alpha: Vec<String>,
    pub beta: Vec<String>,
    pub h0: String,
    #[serde(rename = "A")]
    pub a: Vec<String>,
    #[serde(rename = "B")]
    pub b: SequenceDoc,
    #[serde(rename = "C")]
    pub c: SequenceDoc,
    pub max_n: usize,
}

impl FamilyDoc {
    pub fn parts<K: Field>(&self) -> Result<FamilyParts<K>> {
        Ok(FamilyParts {
            name: self.name.clone(),
            mode: self.mode.parse()?,
            alpha: parse_all(&self.alpha)?,
            beta: parse_all(&self.beta)?,
            h0: K::parse_exact(&self.h0)?,
            a: parse_poly(&self.a)?,
            b: self.b.parse(self.max_n)?,
            c: self.c.parse(self.max_n)?,
            max_n: self.max_n,
        })
    }

    pub fn build<K: Field>(&self) -> Result<Family<K>> {
        Family::new(self.parts()?)
    }
}

#[derive(Clone, Debug, Deserialize)]
pub struct BuiltinDoc {
    pub builtin: String,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub max_n: Option<usize>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FamilyRef {
    Name(String),
    Builtin(BuiltinDoc),
    Inline(Box<FamilyDoc>),
}

/// `{family, M, j, c}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SobolevDoc {
    pub family: FamilyRef,
    #[serde(rename = "M")]
    pub mass: String,
    pub j: u32,
    pub c: String,
}

impl FamilyRef {
    /// Built-ins get `default_max_n` unless the document says otherwise.
    pub fn build<K: Field>(&self, default_max_n: usize) -> Result<Family<K>> {
        match self {
            FamilyRef::Name(name) => builtin_family(name, &[], None, default_max_n),
            FamilyRef::Builtin(b) => builtin_family(
                &b.builtin,
                &parse_all(&b.params)?,
                None,
                b.max_n.unwrap_or(default_max_n),
            ),
            FamilyRef::Inline(doc) => doc.build(),
        }
    }
}

impl SobolevDoc {
    pub fn spec<K: Field>(&self, default_max_n: usize) -> Result<SobolevSpec<K>> {
        let fam = Arc::new(self.family.build(default_max_n)?);
        SobolevSpec::new(
            fam,
            K::parse_exact(&self.mass)?,
            self.j,
            K::parse_exact(&self.c)?,
        )
    }
}

fn from_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_family_doc(text: &str) -> Result<FamilyDoc> {
    from_str(text)
}

pub fn parse_sobolev_doc(text: &str) -> Result<SobolevDoc> {
    from_str(text)
}

pub fn family_json<K: Field>(fam: &Family<K>) -> Value {
    let p = fam.parts();
    let n = fam.max_n();
    json!({
        "name": p.name,
        "mode": mode_json(&p.mode),
        "alpha": p.alpha.iter().take(n + 1).map(rational_json).collect::<Vec<_>>(),
        "beta": p.beta.iter().take(n).map(rational_json).collect::<Vec<_>>(),
        "h0": rational_json(&p.h0),
        "A": poly_json(&p.a),
        "B": p.b.iter().take(n).map(ratfunc_json).collect::<Vec<_>>(),
        "C": p.c.iter().take(n).map(ratfunc_json).collect::<Vec<_>>(),
        "max_n": n,
    })
}

/// One row of the compute table.
#[derive(Clone, Debug, PartialEq)]
pub struct ComputeRow<K> {
    pub n: usize,
    pub q: DensePoly<K>,
    pub p: DensePoly<K>,
    pub rho: K,
    pub kjj: K,
    pub k0j: DensePoly<K>,
    pub connection: Vec<K>,
}

pub fn compute_rows<K: Field>(sys: &SobolevSystem<K>, n: usize) -> Result<Vec<ComputeRow<K>>> {
    if n > sys.max_n() {
        return Err(Error::BadIndex(format!(
            "n = {n} exceeds max_n = {}",
            sys.max_n()
        )));
    }
    let t = sys.table();
    (0..=n)
        .map(|i| {
            Ok(ComputeRow {
                n: i,
                q: t.q[i].clone(),
                p: sys.family().p(i)?.clone(),
                rho: t.rho[i].clone(),
                kjj: t.kjj[i].clone(),
                k0j: t.k0j[i].clone(),
                connection: sys.connection_coeffs(i)?,
            })
        })
        .collect()
}

pub fn spec_json<K: Field>(sys: &SobolevSystem<K>) -> Value {
    let s = sys.spec();
    json!({
        "family": s.family().name(),
        "mode": mode_json(s.mode()),
        "M": rational_json(s.mass()),
        "j": s.j(),
        "c": rational_json(s.c()),
    })
}

/// `K_jj` and `K_0j` are the kernels `K_{n-1}` entering `Q_n`.
pub fn compute_json<K: Field>(sys: &SobolevSystem<K>, rows: &[ComputeRow<K>]) -> Value {
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "Q": poly_json(&r.q),
                "Q_pretty": r.q.to_pretty("x"),
                "P": poly_json(&r.p),
                "rho": rational_json(&r.rho),
                "K_jj": rational_json(&r.kjj),
                "K_0j": poly_json(&r.k0j),
                "connection": r.connection.iter().map(rational_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "spec": spec_json(sys), "rows": rows })
}

pub fn ladder_json<K: Field>(d: &LadderData<K>) -> Value {
    let mut phi = Map::new();
    for i in 1..=4 {
        for j in 1..=4 {
            let v = d.phi(i, j).expect("indices in range");
            phi.insert(format!("{i},{j}"), ratfunc_json(v));
        }
    }
    json!({
        "n": d.n,
        "r_c": poly_json(&d.r_c),
        "f1": poly_json(&d.f1),
        "g1": poly_json(&d.g1),
        "f2": ratfunc_json(&d.f2),
        "g2": ratfunc_json(&d.g2),
        "f3": ratfunc_json(&d.f3),
        "g3": ratfunc_json(&d.g3),
        "f4": ratfunc_json(&d.f4),
        "g4": ratfunc_json(&d.g4),
        "phi": phi,
        "sigma": sigma_json(d),
        "checks": d.checks,
    })
}

pub fn sigma_json<K: Field>(d: &LadderData<K>) -> Value {
    json!({
        "raw": d.sigma.iter().map(ratfunc_json).collect::<Vec<_>>(),
        "normalised": d.sigma_normalised.iter().map(poly_json).collect::<Vec<_>>(),
        "normalised_pretty": d.sigma_normalised.iter().map(|p| p.to_pretty("x")).collect::<Vec<_>>(),
    })
}

/// `{"spec": ..., "by_n": {"3": ..., "4": ...}}`.
pub fn keyed_by_n(sys_json: Value, entries: BTreeMap<usize, Value>) -> Value {
    let by_n: Map<String, Value> = entries
        .into_iter()
        .map(|(n, v)| (n.to_string(), v))
        .collect();
    json!({ "spec": sys_json, "by_n": by_n })
}

pub fn parse_poly_json<K: Field>(v: &Value) -> Result<DensePoly<K>> {
    let coeffs: Vec<String> =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    parse_poly(&coeffs)
}

pub fn parse_ratfunc_json<K: Field>(v: &Value) -> Result<RationalFunction<K>> {
    let doc: RatFuncDoc =
        serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    doc.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::Ladder;
    use crate::{Poly, RatFunc, Rational};

    fn r(p: i64, q: i64) -> Rational {
        Rational::from_frac(p, q)
    }

    #[test]
    fn scalar_and_poly_round_trip() {
        assert_eq!(rational_json(&r(-3, 6)), json!("-1/2"));
        assert_eq!(rational_json(&r(4, 1)), json!("4"));
        let p = Poly::new(vec![r(1, 3), r(0, 1), r(-7, 2)]);
        assert_eq!(poly_json(&p), json!(["1/3", "0", "-7/2"]));
        assert_eq!(parse_poly_json::<Rational>(&poly_json(&p)).unwrap(), p);
        let f = RatFunc::new(p.clone(), Poly::new(vec![r(2, 1), r(3, 1)])).unwrap();
        assert_eq!(
            parse_ratfunc_json::<Rational>(&ratfunc_json(&f)).unwrap(),
            f
        );
    }

    const CHARLIER: &str = r#"{
        "name": "charlier-by-hand",
        "mode": {"kind": "forward_difference"},
        "alpha": ["1", "2", "3", "4", "5"],
        "beta": ["1", "2", "3", "4"],
        "h0": "1",
        "A": ["1"],
        "B": {"const": "0"},
        "C": ["1", "2", [["3"], ["1"]], {"num": ["8"], "den": ["2"]}],
        "max_n": 4
    }"#;

    #[test]
    fn inline_family_matches_builtin() {
        let doc = parse_family_doc(CHARLIER).unwrap();
        let fam: Family<Rational> = doc.build().unwrap();
        let builtin = builtin_family::<Rational>("charlier", &[], None, 4).unwrap();
        for n in 0..=5 {
            assert_eq!(fam.p(n).unwrap(), builtin.p(n).unwrap());
        }
        let again: FamilyDoc = serde_json::from_value(family_json(&fam)).unwrap();
        assert_eq!(
            again.build::<Rational>().unwrap().p(4).unwrap(),
            fam.p(4).unwrap()
        );
    }

    #[test]
    fn corrupted_family_is_rejected() {
        let bad = CHARLIER.replace(r#"["1", "2", [["3"], ["1"]]"#, r#"["1", "2", "4""#);
        let doc = parse_family_doc(&bad).unwrap();
        assert_eq!(
            doc.build::<Rational>().unwrap_err(),
            Error::StructureCheckFailed(3)
        );
        assert!(matches!(
            parse_family_doc("{\"name\": 1}"),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn sobolev_documents() {
        for text in [
            r#"{"family": "hermite", "M": "1", "j": 1, "c": "0"}"#,
            r#"{"family": {"builtin": "hermite", "max_n": 5}, "M": "1", "j": 1, "c": "0"}"#,
        ] {
            let spec = parse_sobolev_doc(text)
                .unwrap()
                .spec::<Rational>(6)
                .unwrap();
            let sys = SobolevSystem::new(spec).unwrap();
            assert_eq!(sys.q(3).unwrap().to_pretty("x"), "x^3 - 1/2 x");
        }
        let text = format!(r#"{{"family": {CHARLIER}, "M": "1/2", "j": 0, "c": "1/3"}}"#);
        let spec = parse_sobolev_doc(&text)
            .unwrap()
            .spec::<Rational>(6)
            .unwrap();
        assert_eq!(spec.max_n(), 4);
        let zero = r#"{"family": "hermite", "M": "0/1", "j": 1, "c": "0"}"#;
        assert!(parse_sobolev_doc(zero)
            .unwrap()
            .spec::<Rational>(6)
            .is_err());
    }

    #[test]
    fn output_documents() {
        let doc =
            parse_sobolev_doc(r#"{"family": "hermite", "M": "1", "j": 1, "c": "0"}"#).unwrap();
        let sys = SobolevSystem::new(doc.spec::<Rational>(5).unwrap()).unwrap();
        let rows = compute_rows(&sys, 5).unwrap();
        let v = compute_json(&sys, &rows);
        assert_eq!(v["rows"][3]["Q_pretty"], json!("x^3 - 1/2 x"));
        assert_eq!(v["rows"][3]["rho"], json!("-1/2"));
        assert!(compute_rows(&sys, 6).is_err());

        let d = Ladder::new(&sys).data(3).unwrap();
        let lj = ladder_json(&d);
        assert_eq!(lj["checks"]["lowering"], json!(true));
        assert_eq!(lj["phi"]["1,3"]["num"], json!(["0", "0", "-1/2", "0", "1"]));
        let back = parse_ratfunc_json::<Rational>(&lj["sigma"]["raw"][0]).unwrap();
        assert_eq!(back, d.sigma[0]);
    }
}
