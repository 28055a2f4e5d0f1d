//! `qig`: command-line front end for the divergence, metric and testing library.
//!
//! Every subcommand prints one JSON report (or a CSV table with `--csv`).
//! Exit codes: 0 success, 2 invalid input, 3 semantic divergence (an infinite
//! result under `--require-finite`, or a support violation).

use clap::{Args, Parser, Subcommand};
use qig::applications::{clausius_report, cramer_rao_quantum, km_information, km_perturbation, speed_limit, thermal_state, ThermalSpec};
use qig::classical::{self, ConvexGenerator};
use qig::httesting::{helstrom_povm, ncopy_discrimination, povm_error, simulate_ht};
use qig::io::{read_density, read_dist, read_hermitian, read_json, to_json_string, FamilyRecord, MatrixRecord, TrajectoryRecord};
use qig::qdivergences as qd;
use qig::qmetrics::{g_metric, GFunction};
use qig::{Error, ExtReal};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qig", version, about = "Classical and quantum information geometry")]
struct Cli {
    /// Emit a CSV table instead of JSON.
    #[arg(long, global = true)]
    csv: bool,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Exit with code 3 if any reported value is infinite.
    #[arg(long, global = true)]
    require_finite: bool,
    #[command(subcommand)]
    command: Command,
}

/// Two states, or two distributions with `--classical`.
#[derive(Args)]
struct Pair {
    #[arg(long = "rho", visible_alias = "p", value_name = "FILE")]
    first: PathBuf,
    #[arg(long = "sigma", visible_alias = "q", value_name = "FILE")]
    second: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Classical divergence: tv | kl | hellinger:<a> | renyi:<a> | f:<name>.
    ClassicalDiv {
        #[arg(long)]
        kind: String,
        #[arg(long, value_name = "FILE")]
        p: PathBuf,
        #[arg(long, value_name = "FILE")]
        q: PathBuf,
    },
    /// Quantum divergence: trace | fidelity | affinity | bures | relent | tsallis:<a> | renyi:<a>.
    QuantumDiv {
        #[arg(long)]
        kind: String,
        #[arg(long, value_name = "FILE")]
        rho: PathBuf,
        #[arg(long, value_name = "FILE")]
        sigma: PathBuf,
    },
    /// g-metric of a state family: qfi | rld | wyd:<a> | km.
    Metric {
        #[arg(long)]
        g: String,
        #[arg(long, value_name = "FILE")]
        family: PathBuf,
        /// Comma-separated parameter point; defaults to the file's theta0.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
    },
    /// Chernoff coefficient minimum, minimiser and information.
    Chernoff {
        #[arg(long)]
        classical: bool,
        #[command(flatten)]
        pair: Pair,
        /// Also report xi at this alpha.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Helstrom measurement, exact n-copy errors and an optional simulation.
    Ht {
        #[arg(long, value_name = "FILE")]
        rho: PathBuf,
        #[arg(long, value_name = "FILE")]
        sigma: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Prior weights `a,b` of rho and sigma.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.5", allow_hyphen_values = true)]
        priors: Vec<f64>,
        /// Number of Monte Carlo trials.
        #[arg(long, value_name = "TRIALS")]
        simulate: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Every audited inequality for a pair.
    Audit {
        #[arg(long)]
        classical: bool,
        #[command(flatten)]
        pair: Pair,
    },
    /// Quantum Cramer-Rao bound for a single-parameter family.
    EstimateBound {
        #[arg(long, value_name = "FILE")]
        family: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        nu: u64,
    },
    /// Metric speed limit along a trajectory file.
    SpeedLimit {
        #[arg(long, value_name = "FILE")]
        trajectory: PathBuf,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 201)]
        steps: usize,
    },
    /// Kubo-Mori information and the Clausius deviation expansion.
    Thermo {
        #[arg(long, value_name = "FILE")]
        hamiltonian: PathBuf,
        #[arg(long)]
        beta: f64,
        #[arg(long, value_name = "FILE")]
        perturbation: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Optional final state for the Clausius decomposition.
        #[arg(long, value_name = "FILE")]
        r#final: Option<PathBuf>,
    },
}

/// A report, with an optional per-row table used by `--csv`.
struct Report {
    json: Value,
    table: Option<(Vec<&'static str>, Vec<Vec<Value>>)>,
}

impl From<Value> for Report {
    fn from(json: Value) -> Self {
        Report { json, table: None }
    }
}

enum Failure {
    Lib(Error),
    Infinite,
    Write(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn to_value<T: serde::Serialize>(v: &T) -> Res<Value> {
    serde_json::to_value(v).map_err(|e| Failure::Lib(e.into()))
}

/// Splits `name:alpha`.
fn split_kind(kind: &str) -> Res<(&str, Option<f64>)> {
    match kind.split_once(':') {
        None => Ok((kind, None)),
        Some((name, a)) => {
            let a = a.parse().map_err(|_| Error::Parse(format!("bad parameter in kind {kind:?}")))?;
            Ok((name, Some(a)))
        }
    }
}

fn need_alpha(kind: &str, a: Option<f64>) -> Res<f64> {
    a.ok_or_else(|| Failure::Lib(Error::Parse(format!("kind {kind:?} needs a parameter, e.g. {kind}:0.5"))))
}

fn classical_div(kind: &str, p: &PathBuf, q: &PathBuf) -> Res<Report> {
    let (p, q) = (read_dist(p)?, read_dist(q)?);
    let value = match kind.split_once(':') {
        Some(("f", name)) => classical::f_divergence(&p, &q, &ConvexGenerator::from_name(name)?)?,
        _ => match split_kind(kind)? {
            ("tv", None) => ExtReal::Finite(classical::tv_distance(&p, &q)?),
            ("kl", None) => classical::kl_divergence(&p, &q)?,
            ("hellinger", a) => classical::hellinger_divergence(&p, &q, need_alpha(kind, a)?)?,
            ("renyi", a) => classical::renyi_divergence(&p, &q, need_alpha(kind, a)?)?,
            _ => return Err(Error::Parse(format!("unknown classical kind {kind:?}")).into()),
        },
    };
    Ok(json!({ "kind": kind, "value": to_value(&value)? }).into())
}

fn quantum_div(kind: &str, rho: &PathBuf, sigma: &PathBuf) -> Res<Report> {
    let (r, s) = (read_density(rho)?, read_density(sigma)?);
    let value = match split_kind(kind)? {
        ("trace", None) => ExtReal::Finite(qd::trace_distance(&r, &s)?),
        ("fidelity", None) => ExtReal::Finite(qd::fidelity(&r, &s)?),
        ("affinity", None) => ExtReal::Finite(qd::affinity(&r, &s)?),
        ("bures", None) => ExtReal::Finite(qd::bures_distance(&r, &s)?),
        ("relent", None) => qd::q_relative_entropy(&r, &s)?,
        ("tsallis", a) => qd::tsallis(&r, &s, need_alpha(kind, a)?)?,
        ("renyi", a) => qd::q_renyi(&r, &s, need_alpha(kind, a)?)?,
        _ => return Err(Error::Parse(format!("unknown quantum kind {kind:?}")).into()),
    };
    Ok(json!({ "kind": kind, "value": to_value(&value)? }).into())
}

fn metric(g: &str, family: &PathBuf, theta: Option<Vec<f64>>) -> Res<Report> {
    let g = GFunction::from_name(g)?;
    let rec: FamilyRecord = read_json(family)?;
    let fam = rec.to_family()?;
    let theta = theta.unwrap_or_else(|| rec.theta0().to_vec());
    if theta.len() != fam.params() {
        return Err(Error::LengthMismatch(theta.len(), fam.params()).into());
    }
    let m = g_metric(&fam, &theta, &g)?;
    let mut out = json!({ "g": g.tag().to_string(), "theta": theta, "metric": to_value(&m)? });
    if fam.params() == 1 {
        out["value"] = to_value(&m.scalar())?;
    }
    Ok(out.into())
}

fn chernoff(classical_inputs: bool, pair: &Pair, alpha: Option<f64>) -> Res<Report> {
    let rep = if classical_inputs {
        classical::chernoff(&read_dist(&pair.first)?, &read_dist(&pair.second)?, alpha)?
    } else {
        qd::q_chernoff(&read_density(&pair.first)?, &read_density(&pair.second)?, alpha)?
    };
    Ok(to_value(&rep)?.into())
}

fn ht(rho: &PathBuf, sigma: &PathBuf, n: usize, priors: &[f64], simulate: Option<u64>, seed: u64) -> Res<Report> {
    let (r, s) = (read_density(rho)?, read_density(sigma)?);
    let &[pr, ps] = priors else {
        return Err(Error::Parse(format!("--priors needs two values a,b, got {}", priors.len())).into());
    };
    let povm = helstrom_povm(&r, &s, pr, ps)?;
    let ncopy = ncopy_discrimination(&r, &s, pr, ps, n)?;
    let mut out = json!({
        "priors": [pr, ps],
        "helstrom_error": povm_error(&r, &s, &povm, pr, ps)?,
        "povm": povm.elements().iter().map(|e| MatrixRecord::from_mat(e.as_mat())).collect::<Vec<_>>(),
        "ncopy": to_value(&ncopy)?,
    });
    if let Some(trials) = simulate {
        out["simulation"] = to_value(&simulate_ht(&r, &s, &povm, pr, ps, trials, seed)?)?;
    }
    let rows = (0..ncopy.n.len())
        .map(|k| vec![json!(ncopy.n[k]), json!(ncopy.errors[k]), json!(ncopy.rates[k]), json!(ncopy.chernoff_bounds[k])])
        .collect();
    Ok(Report { json: out, table: Some((vec!["n", "error", "rate", "chernoff_bound"], rows)) })
}

fn audit(classical_inputs: bool, pair: &Pair) -> Res<Report> {
    let rep = if classical_inputs {
        classical::audit_classical(&read_dist(&pair.first)?, &read_dist(&pair.second)?)?
    } else {
        qd::audit_quantum(&read_density(&pair.first)?, &read_density(&pair.second)?)?
    };
    let rows = rep
        .entries
        .iter()
        .map(|e| {
            let v = to_value(e)?;
            Ok(vec![v["name"].clone(), v["lhs"].clone(), v["rhs"].clone(), v["pass"].clone()])
        })
        .collect::<Res<_>>()?;
    Ok(Report { json: to_value(&rep)?, table: Some((vec!["name", "lhs", "rhs", "pass"], rows)) })
}

fn estimate_bound(family: &PathBuf, theta: f64, nu: u64) -> Res<Report> {
    let fam = read_json::<FamilyRecord>(family)?.to_family()?;
    Ok(to_value(&cramer_rao_quantum(&fam, theta, nu)?)?.into())
}

fn speed(trajectory: &PathBuf, g: &str, steps: usize) -> Res<Report> {
    let rec: TrajectoryRecord = read_json(trajectory)?;
    let rep = speed_limit(&rec.family.to_family()?, rec.tau, &GFunction::from_name(g)?, steps)?;
    Ok(to_value(&rep)?.into())
}

fn thermo(hamiltonian: &PathBuf, beta: f64, perturbation: &PathBuf, lambda: f64, fin: Option<&PathBuf>) -> Res<Report> {
    let spec = ThermalSpec::new(read_hermitian(hamiltonian)?, beta, read_hermitian(perturbation)?)?;
    let mut out = json!({
        "beta": beta,
        "thermal_state": MatrixRecord::from_mat(thermal_state(&spec).as_mat()),
        "km_information": km_information(&spec)?,
        "expansion": to_value(&km_perturbation(&spec, lambda)?)?,
    });
    if let Some(path) = fin {
        out["clausius"] = to_value(&clausius_report(&spec, &read_density(path)?)?)?;
    }
    Ok(out.into())
}

fn run(cmd: &Command) -> Res<Report> {
    match cmd {
        Command::ClassicalDiv { kind, p, q } => classical_div(kind, p, q),
        Command::QuantumDiv { kind, rho, sigma } => quantum_div(kind, rho, sigma),
        Command::Metric { g, family, theta } => metric(g, family, theta.clone()),
        Command::Chernoff { classical, pair, alpha } => chernoff(*classical, pair, *alpha),
        Command::Ht { rho, sigma, n, priors, simulate, seed } => ht(rho, sigma, *n, priors, *simulate, *seed),
        Command::Audit { classical, pair } => audit(*classical, pair),
        Command::EstimateBound { family, theta, nu } => estimate_bound(family, *theta, *nu),
        Command::SpeedLimit { trajectory, g, steps } => speed(trajectory, g, *steps),
        Command::Thermo { hamiltonian, beta, perturbation, lambda, r#final } => {
            thermo(hamiltonian, *beta, perturbation, *lambda, r#final.as_ref())
        }
    }
}

fn has_infinite(v: &Value) -> bool {
    match v {
        Value::String(s) => s == "inf",
        Value::Array(a) => a.iter().any(has_infinite),
        Value::Object(o) => o.iter().any(|(k, v)| (k == "divergent" && v == &Value::Bool(true)) || has_infinite(v)),
        _ => false,
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.16e}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Dotted-path `key,value` rows for reports without a natural table.
fn flatten(prefix: &str, v: &Value, rows: &mut Vec<[String; 2]>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(o) => o.iter().for_each(|(k, v)| flatten(&join(k), v, rows)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, rows)),
        other => rows.push([prefix.to_string(), cell(other)]),
    }
}

fn render_csv(report: &Report) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Failure::Write(e.to_string());
    match &report.table {
        Some((header, rows)) => {
            w.write_record(header).map_err(err)?;
            for r in rows {
                w.write_record(r.iter().map(cell)).map_err(err)?;
            }
        }
        None => {
            let mut rows = Vec::new();
            flatten("", &report.json, &mut rows);
            w.write_record(["key", "value"]).map_err(err)?;
            for r in rows {
                w.write_record(&r).map_err(err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Failure::Write(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Write(e.to_string()))
}

fn emit(cli: &Cli, report: &Report) -> Res<()> {
    let text = if cli.csv { render_csv(report)? } else { to_json_string(&report.json)? + "\n" };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Write(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn fail(code: u8, kind: &str, message: String) -> ExitCode {
    let body = json!({ "error": message, "kind": kind });
    println!("{}", to_json_string(&body).unwrap_or_else(|_| body.to_string()));
    ExitCode::from(code)
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::NonHermitianInput(_) => "non_hermitian_input",
        Error::DomainError(_) => "domain_error",
        Error::SupportViolation(_) => "support_violation",
        Error::DimensionCap { .. } => "dimension_cap",
        Error::LengthMismatch(..) => "length_mismatch",
        Error::DimensionMismatch(..) => "dimension_mismatch",
        Error::GeneratorNotNormalised(_) => "generator_not_normalised",
        Error::AlphaOutOfRange { .. } => "alpha_out_of_range",
        Error::NonSmoothDivergence { .. } => "non_smooth_divergence",
        Error::NonMonotoneResult(_) => "non_monotone_result",
        Error::RegularisationFailure(_) => "regularisation_failure",
        Error::InvalidDistribution(_) => "invalid_distribution",
        Error::InvalidState(_) => "invalid_state",
        Error::InvalidPovm(_) => "invalid_povm",
        Error::InvalidChannel(_) => "invalid_channel",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{}", e.render());
            return fail(2, "usage", e.kind().to_string());
        }
    };
    let result = run(&cli.command).and_then(|report| {
        if cli.require_finite && has_infinite(&report.json) {
            return Err(Failure::Infinite);
        }
        emit(&cli, &report)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Infinite) => fail(3, "infinite_result", "an infinite value was reported under --require-finite".into()),
        Err(Failure::Lib(e @ Error::SupportViolation(_))) => fail(3, kind_of(&e), e.to_string()),
        Err(Failure::Lib(e)) => fail(2, kind_of(&e), e.to_string()),
        Err(Failure::Write(msg)) => fail(2, "io", msg),
    }
}
