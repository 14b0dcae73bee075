use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sobolev_ladder::family::{builtin_description, builtin_family, Family, BUILTIN_FAMILIES};
use sobolev_ladder::io::{self, parse_family_doc, parse_sobolev_doc};
use sobolev_ladder::ladder::{Ladder, LadderData};
use sobolev_ladder::qcalc::{ModeKind, OperatorMode};
use sobolev_ladder::sobolev::{SobolevSpec, SobolevSystem};
use sobolev_ladder::verify::{self, Suite, VerifyConfig};
use sobolev_ladder::{Error, Field, Mode, Rational};

#[derive(Parser, Debug)]
#[command(
    name = "sobolev-ladder",
    version,
    about = "Exact Sobolev orthogonal polynomials, ladder operators and holonomic equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Q_n, rho_n and kernels from the connection formula.
    Compute(Common),
    /// Run exact verification suites.
    Verify(VerifyArgs),
    /// Lemma pairs, phi determinants and ladder checks.
    Ladder(Common),
    /// Coefficients of the second-order equation for Q_n.
    Holonomic(Common),
    /// List the built-in families.
    Families(OutputArgs),
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct FamilyArgs {
    /// Built-in family name.
    #[arg(long, conflicts_with = "spec")]
    family: Option<String>,
    /// JSON Sobolev spec `{family, M, j, c}` or a bare family document.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in parameter `a`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    a: Option<Rational>,
    /// Built-in parameter `q`.
    #[arg(long, value_parser = parse_rational)]
    q: Option<Rational>,
    /// Operator override: derivative, forward_difference, q_difference:Q or hahn:Q:W.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[command(flatten)]
    family: FamilyArgs,
    /// Point mass M > 0.
    #[arg(long = "M", alias = "mass", value_parser = parse_rational)]
    mass: Option<Rational>,
    /// Evaluation point c.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    c: Option<Rational>,
    /// Operator order j in the point term.
    #[arg(long)]
    j: Option<u32>,
    /// Largest degree.
    #[arg(long, visible_alias = "n-max", default_value_t = 8)]
    n: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Comma-separated suites or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, visible_alias = "n", default_value_t = 8)]
    n_max: usize,
    /// Restrict the point mass grid to one value.
    #[arg(long = "M", alias = "mass", value_parser = parse_rational)]
    mass: Option<Rational>,
    /// Restrict the evaluation point grid to one value.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    c: Option<Rational>,
    /// Restrict the order grid to one value.
    #[arg(long)]
    j: Option<u32>,
    /// Random inputs per mode for the operator-rule suite.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    /// Worker threads (also capped by SOBOLEV_LADDER_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    Rational::parse_exact(s).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    let mut it = s.split(':');
    let kind = it.next().unwrap_or_default();
    let rest: Vec<Rational> = it.map(parse_rational).collect::<Result<_, _>>()?;
    let kind = match kind {
        "hahn" => ModeKind::Hahn,
        "q_difference" | "q-difference" | "dq" => ModeKind::QDifference,
        "forward_difference" | "forward-difference" | "delta" => ModeKind::ForwardDifference,
        "derivative" | "d" => ModeKind::Derivative,
        other => return Err(format!("unknown mode '{other}'")),
    };
    OperatorMode::from_parts(kind, rest.first().cloned(), rest.get(1).cloned())
        .map_err(|e| e.to_string())
}

/// Exit status for an error: identity failures 1, mathematical domain
/// errors 3, everything else 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InternalIdentityViolation(_)) => 1,
        Some(e) if e.is_domain_error() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// `Ok(false)` when an identity check failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Families(out) => families(&out),
        Command::Compute(args) => compute(&args),
        Command::Ladder(args) => ladder(&args),
        Command::Holonomic(args) => holonomic(&args),
        Command::Verify(args) => verify_cmd(&args),
    }
}

fn emit(out: &OutputArgs, json: &Value, csv_rows: Option<Vec<Vec<String>>>) -> anyhow::Result<()> {
    let text = match out.format {
        Format::Json => serde_json::to_string_pretty(json)? + "\n",
        Format::Csv => {
            let rows = csv_rows.context("no CSV form for this output")?;
            let mut w = csv::WriterBuilder::new()
                .flexible(true)
                .from_writer(Vec::new());
            for r in rows {
                w.write_record(&r)?;
            }
            String::from_utf8(w.into_inner()?)?
        }
    };
    match &out.out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn builtin_params(args: &FamilyArgs) -> Vec<Rational> {
    match (&args.a, &args.q) {
        (Some(a), Some(q)) => vec![a.clone(), q.clone()],
        (Some(a), None) => vec![a.clone()],
        (None, Some(q)) => vec![Rational::from_int(-1), q.clone()],
        (None, None) => vec![],
    }
}

enum Loaded {
    Family(Family<Rational>),
    Sobolev(SobolevSpec<Rational>),
}

fn load(args: &FamilyArgs, max_n: usize) -> anyhow::Result<Loaded> {
    let loaded = match (&args.family, &args.spec) {
        (Some(name), _) => Loaded::Family(builtin_family(
            name,
            &builtin_params(args),
            None,
            max_n.max(1),
        )?),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let value: Value =
                serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
            if value.get("family").is_some() {
                Loaded::Sobolev(parse_sobolev_doc(&text)?.spec(max_n.max(1))?)
            } else {
                Loaded::Family(parse_family_doc(&text)?.build()?)
            }
        }
        (None, None) => bail!("one of --family or --spec is required"),
    };
    let Some(mode) = &args.mode else {
        return Ok(loaded);
    };
    Ok(match loaded {
        Loaded::Family(f) => Loaded::Family(f.with_mode(mode.clone())?),
        Loaded::Sobolev(s) => {
            let fam = Arc::new(s.family().with_mode(mode.clone())?);
            Loaded::Sobolev(SobolevSpec::new(
                fam,
                s.mass().clone(),
                s.j(),
                s.c().clone(),
            )?)
        }
    })
}

fn system(args: &Common) -> anyhow::Result<SobolevSystem<Rational>> {
    let spec = match load(&args.family, args.n)? {
        Loaded::Sobolev(s) => {
            let mass = args.mass.clone().unwrap_or_else(|| s.mass().clone());
            let c = args.c.clone().unwrap_or_else(|| s.c().clone());
            SobolevSpec::new(s.family_arc().clone(), mass, args.j.unwrap_or(s.j()), c)?
        }
        Loaded::Family(f) => {
            let mass = args.mass.clone().context("--M is required with --family")?;
            let c = args.c.clone().unwrap_or_else(|| Rational::from_int(0));
            SobolevSpec::new(Arc::new(f), mass, args.j.unwrap_or(0), c)?
        }
    };
    if args.n > spec.max_n() {
        return Err(Error::BadIndex(format!(
            "n = {} exceeds the family's max_n = {}",
            args.n,
            spec.max_n()
        ))
        .into());
    }
    Ok(SobolevSystem::new(spec)?)
}

fn families(out: &OutputArgs) -> anyhow::Result<bool> {
    let list: Vec<Value> = BUILTIN_FAMILIES
        .iter()
        .map(|n| json!({ "name": n, "description": builtin_description(n) }))
        .collect();
    let mut rows = vec![vec!["name".to_string(), "description".to_string()]];
    rows.extend(BUILTIN_FAMILIES.iter().map(|n| {
        vec![
            n.to_string(),
            builtin_description(n).unwrap_or_default().to_string(),
        ]
    }));
    emit(out, &Value::Array(list), Some(rows))?;
    Ok(true)
}

fn compute(args: &Common) -> anyhow::Result<bool> {
    let sys = system(args)?;
    let rows = io::compute_rows(&sys, args.n)?;
    let width = args.n + 1;
    let mut csv = vec![["n", "rho", "K_jj"]
        .iter()
        .map(|s| s.to_string())
        .chain((0..width).map(|i| format!("q_{i}")))
        .collect::<Vec<_>>()];
    for r in &rows {
        let mut line = vec![r.n.to_string(), r.rho.to_string(), r.kjj.to_string()];
        line.extend((0..width).map(|i| r.q.coeff(i).to_string()));
        csv.push(line);
    }
    emit(&args.output, &io::compute_json(&sys, &rows), Some(csv))?;
    Ok(true)
}

fn ladder_range(
    args: &Common,
    sys: &SobolevSystem<Rational>,
) -> anyhow::Result<Vec<LadderData<Rational>>> {
    if args.n < 3 {
        return Err(
            Error::BadIndex(format!("ladder quantities need n >= 3, got {}", args.n)).into(),
        );
    }
    let l = Ladder::new(sys);
    Ok((3..=args.n).map(|n| l.data(n)).collect::<Result<_, _>>()?)
}

const CHECK_NAMES: [&str; 11] = [
    "lemma1",
    "lemma2",
    "lemma3",
    "lemma4",
    "inversion",
    "eq_a",
    "eq_b",
    "lowering",
    "raising",
    "holonomic",
    "holonomic_normalised",
];

fn ladder(args: &Common) -> anyhow::Result<bool> {
    let sys = system(args)?;
    let data = ladder_range(args, &sys)?;
    let mut entries = BTreeMap::new();
    let mut csv = vec![std::iter::once("n")
        .chain(CHECK_NAMES)
        .map(String::from)
        .collect::<Vec<_>>()];
    for d in &data {
        entries.insert(d.n, io::ladder_json(d));
        let checks = serde_json::to_value(d.checks)?;
        let mut line = vec![d.n.to_string()];
        line.extend(CHECK_NAMES.iter().map(|k| checks[k].to_string()));
        csv.push(line);
    }
    let mut doc = io::keyed_by_n(io::spec_json(&sys), entries);
    doc["path"] = serde_json::to_value(Ladder::new(&sys).path())?;
    emit(&args.output, &doc, Some(csv))?;
    Ok(data.iter().all(|d| d.checks.all()))
}

fn holonomic(args: &Common) -> anyhow::Result<bool> {
    let sys = system(args)?;
    let data = ladder_range(args, &sys)?;
    let mut entries = BTreeMap::new();
    let mut csv = vec![vec![
        "n".to_string(),
        "sigma".to_string(),
        "coefficients...".to_string(),
    ]];
    for d in &data {
        let mut v = io::sigma_json(d);
        v["verified"] = json!(d.checks.holonomic && d.checks.holonomic_normalised);
        entries.insert(d.n, v);
        for (k, s) in d.sigma_normalised.iter().enumerate() {
            let mut line = vec![d.n.to_string(), format!("sigma{}", k + 1)];
            line.extend(s.coeffs().iter().map(ToString::to_string));
            csv.push(line);
        }
    }
    emit(
        &args.output,
        &io::keyed_by_n(io::spec_json(&sys), entries),
        Some(csv),
    )?;
    Ok(data
        .iter()
        .all(|d| d.checks.holonomic && d.checks.holonomic_normalised))
}

fn verify_cmd(args: &VerifyArgs) -> anyhow::Result<bool> {
    let suites = Suite::parse_list(&args.suite)?;
    let chosen = args.family.family.is_some() || args.family.spec.is_some();
    let mut cfg = if chosen {
        match load(&args.family, args.n_max)? {
            Loaded::Family(f) => VerifyConfig::with_families(args.n_max, vec![Arc::new(f)]),
            Loaded::Sobolev(s) => {
                let mut cfg = VerifyConfig::with_families(args.n_max, vec![s.family_arc().clone()]);
                cfg.js = vec![s.j()];
                cfg.cs = vec![s.c().clone()];
                cfg.masses = vec![s.mass().clone()];
                cfg
            }
        }
    } else {
        VerifyConfig::standard(args.n_max)?
    };
    if let Some(fam) = cfg.families.iter().find(|f| f.max_n() < args.n_max) {
        return Err(Error::BadIndex(format!(
            "n_max = {} exceeds max_n = {} of {}",
            args.n_max,
            fam.max_n(),
            fam.name()
        ))
        .into());
    }
    if let Some(m) = &args.mass {
        if *m <= Rational::from_int(0) {
            return Err(Error::InvalidParameter(format!("M must be positive, got {m}")).into());
        }
        cfg.masses = vec![m.clone()];
    }
    if let Some(c) = &args.c {
        cfg.cs = vec![c.clone()];
    }
    if let Some(j) = args.j {
        cfg.js = vec![j];
    }
    cfg.samples = args.samples;
    cfg.seed = args.seed;
    cfg.threads = args.threads;

    let report = verify::run(&cfg, &suites)?;
    for line in report.summary() {
        eprintln!("{line}");
    }
    for f in report.failures().take(20) {
        eprintln!(
            "  failed [{}] {} on {}{}",
            f.suite,
            f.identity,
            f.case,
            f.detail
                .as_deref()
                .map(|d| format!(": {d}"))
                .unwrap_or_default()
        );
    }
    let doc = json!({ "passed": report.passed(), "summary": report.summary(), "report": report });
    let mut csv = vec![["suite", "identity", "case", "passed", "detail"]
        .map(String::from)
        .to_vec()];
    for c in &report.checks {
        csv.push(vec![
            c.suite.to_string(),
            c.identity.clone(),
            c.case.clone(),
            c.passed.to_string(),
            c.detail.clone().unwrap_or_default(),
        ]);
    }
    for s in &report.skipped {
        csv.push(vec![
            s.suite.to_string(),
            String::new(),
            String::new(),
            "skipped".into(),
            s.reason.clone(),
        ]);
    }
    if args.output.out.is_some() || args.output.format == Format::Csv {
        emit(&args.output, &doc, Some(csv))?;
    }
    Ok(report.passed())
}
