//! `idemlab`: classify matrices against the commutator/difference classes,
//! construct certificates, verify them, and run truncation sweeps.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 input error, 3 decider
//! rejection, 4 verification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use idemlab::classify::{decide, ClassTag, MembershipReport};
use idemlab::compact::{sweep_to_json, truncation_residual_sweep, write_sweep_csv, CompactProfile, Decay};
use idemlab::construct::{
    coi_approximant, coi_pair_diag_balanced, coi_pair_nilpotent_order2, cop_pair, doi_approximant, dop_pair,
    CertificateKind, CertificatePair,
};
use idemlab::io::{matrix_from_json, matrix_to_json, MatrixParseError};
use idemlab::linalg::{norm2, ComplexMatrix};
use idemlab::{Error, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA: &str = "idemlab/1";
const PROFILE_ENV: &str = "IDEMLAB_TOL_PROFILE";

#[derive(Parser)]
#[command(
    name = "idemlab",
    version,
    about = "Commutators and differences of idempotents and projections",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(flatten)]
    tol: TolFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TolFlags {
    /// Eigenvalue clustering radius, relative to the matrix norm.
    #[arg(long, global = true)]
    tol_eig: Option<f64>,
    /// Relative singular-value threshold for rank and nullity.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Acceptable certificate residual.
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// Largest admissible condition number of a similarity.
    #[arg(long, global = true)]
    cond_cap: Option<f64>,
    /// Seed for randomized steps (recorded in every report).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Decide class membership and print one report per class.
    Classify {
        input: PathBuf,
        /// Classes to decide, comma separated (default: all).
        #[arg(long = "class", value_enum, value_delimiter = ',')]
        classes: Vec<ClassArg>,
    },
    /// Build a certificate pair and write left.json, right.json and summary.json.
    Construct {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Target accuracy for approximate certificates.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute residuals of a certificate pair from scratch.
    Verify {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
        #[arg(long, value_enum)]
        kind: PairKind,
        #[arg(long)]
        target: Option<PathBuf>,
        /// Accept a target residual below this bound instead of the residual tolerance.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Residuals of commutator approximants on truncations of growing size.
    Sweep {
        #[arg(long, value_enum, default_value_t = DecayArg::Geometric)]
        decay: DecayArg,
        /// Ratio for geometric decay, exponent for power decay.
        #[arg(long, default_value_t = 0.5)]
        rate: f64,
        #[arg(long)]
        unpaired: bool,
        #[arg(long, default_value_t = 0)]
        tail: usize,
        /// Comma separated dimensions; may be empty.
        #[arg(long, default_value = "4,8,16,32")]
        dims: String,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON output path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    All,
    Balanced,
    NegSimilar,
    Coi,
    Doi,
    ClosCoi,
    ClosDoi,
    Cop,
    Dop,
    ClosCop,
    ClosDop,
}

impl ClassArg {
    fn tags(self) -> Vec<ClassTag> {
        match self {
            ClassArg::All => ClassTag::ALL.to_vec(),
            ClassArg::Balanced => vec![ClassTag::Balanced],
            ClassArg::NegSimilar => vec![ClassTag::NegSimilar],
            ClassArg::Coi => vec![ClassTag::Coi],
            ClassArg::Doi => vec![ClassTag::Doi],
            ClassArg::ClosCoi => vec![ClassTag::ClosCoi],
            ClassArg::ClosDoi => vec![ClassTag::ClosDoi],
            ClassArg::Cop => vec![ClassTag::Cop],
            ClassArg::Dop => vec![ClassTag::Dop],
            ClassArg::ClosCop => vec![ClassTag::ClosCop],
            ClassArg::ClosDop => vec![ClassTag::ClosDop],
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Kind {
    CoiDiag,
    CoiNil2,
    CoiApprox,
    Coi,
    Doi,
    DoiApprox,
    Cop,
    Dop,
}

impl Kind {
    /// Decider that must accept the input before construction.
    fn decider(self) -> Option<ClassTag> {
        match self {
            Kind::CoiDiag => Some(ClassTag::Balanced),
            Kind::CoiNil2 => None,
            Kind::CoiApprox => Some(ClassTag::ClosCoi),
            Kind::Coi => Some(ClassTag::Coi),
            Kind::Doi => Some(ClassTag::Doi),
            Kind::DoiApprox => Some(ClassTag::ClosDoi),
            Kind::Cop => Some(ClassTag::Cop),
            Kind::Dop => Some(ClassTag::Dop),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PairKind {
    IdempotentCommutator,
    IdempotentDifference,
    ProjectionCommutator,
    ProjectionDifference,
}

impl PairKind {
    fn certificate_kind(self) -> CertificateKind {
        match self {
            PairKind::IdempotentCommutator => CertificateKind::IdempotentCommutator,
            PairKind::IdempotentDifference => CertificateKind::IdempotentDifference,
            PairKind::ProjectionCommutator => CertificateKind::ProjectionCommutator,
            PairKind::ProjectionDifference => CertificateKind::ProjectionDifference,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DecayArg {
    Geometric,
    Power,
}

/// A failure with its exit code and the JSON body printed for it.
struct Failure {
    code: u8,
    body: Value,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            body: json!({ "schema": SCHEMA, "error": "input", "message": message.into() }),
        }
    }

    fn numerical(err: Error) -> Self {
        Failure {
            code: 1,
            body: json!({ "schema": SCHEMA, "error": "numerical", "message": err.to_string() }),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidTolerance(_)
            | Error::NotSquare { .. }
            | Error::NonFinite { .. }
            | Error::DimensionMismatch(_) => Failure::input(err.to_string()),
            other => Failure::numerical(other),
        }
    }
}

fn resolve_tolerances(flags: &TolFlags) -> Result<Tolerances, Failure> {
    let mut tol = match std::env::var(PROFILE_ENV) {
        Ok(name) if !name.is_empty() => Tolerances::preset(&name)?,
        _ => Tolerances::default(),
    };
    if let Some(v) = flags.tol_eig {
        tol.eig_cluster = v;
    }
    if let Some(v) = flags.tol_rank {
        tol.rank_rel = v;
    }
    if let Some(v) = flags.tol_residual {
        tol.residual = v;
    }
    if let Some(v) = flags.cond_cap {
        tol.cond_cap = v;
    }
    tol.validate()?;
    Ok(tol)
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    matrix_from_json(&text).map_err(|e| match e {
        MatrixParseError::Syntax { line, column, message } => {
            let mut f = Failure::input(format!("{}:{line}:{column}: {message}", path.display()));
            f.body["line"] = json!(line);
            f.body["column"] = json!(column);
            f
        }
        MatrixParseError::Invalid(err) => Failure::input(format!("{}: {err}", path.display())),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn envelope(command: &str, tol: &Tolerances, seed: u64) -> Value {
    json!({ "schema": SCHEMA, "command": command, "tol_used": tol, "seeds": [seed] })
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn classify(input: &Path, classes: &[ClassArg], tol: &Tolerances, seed: u64) -> Result<Value, Failure> {
    let t = read_matrix(input)?;
    let mut tags: Vec<ClassTag> = if classes.is_empty() {
        ClassTag::ALL.to_vec()
    } else {
        classes.iter().flat_map(|c| c.tags()).collect()
    };
    let mut seen = Vec::new();
    tags.retain(|t| {
        let fresh = !seen.contains(t);
        seen.push(*t);
        fresh
    });
    let reports: Vec<MembershipReport> = tags.iter().map(|&tag| decide(tag, &t, tol)).collect::<Result<_, _>>()?;
    let mut out = envelope("classify", tol, seed);
    out["input"] = json!(input.display().to_string());
    out["reports"] = serde_json::to_value(reports).expect("reports serialize");
    Ok(out)
}

struct Built {
    pair: CertificatePair,
    cond: Option<f64>,
    attempts: Option<usize>,
    method: &'static str,
}

fn exact(pair: CertificatePair, method: &'static str) -> Built {
    Built {
        pair,
        cond: None,
        attempts: None,
        method,
    }
}

fn is_diagonal(t: &ComplexMatrix) -> bool {
    let mut off = t.clone();
    off.fill_diagonal(Default::default());
    norm2(&off) == 0.0
}

fn is_square_zero(t: &ComplexMatrix, tol: &Tolerances) -> bool {
    let s = norm2(t);
    s > 0.0 && norm2(&(t * t)) <= tol.residual * s * s
}

fn build(kind: Kind, t: &ComplexMatrix, eps: f64, tol: &Tolerances) -> idemlab::Result<Built> {
    let approx = |a: idemlab::construct::Approximant, method| Built {
        pair: a.pair,
        cond: Some(a.cond),
        attempts: Some(a.attempts),
        method,
    };
    Ok(match kind {
        Kind::CoiDiag => exact(coi_pair_diag_balanced(t, tol)?, "diagonal-pairs"),
        Kind::CoiNil2 => exact(coi_pair_nilpotent_order2(t, tol)?, "square-zero"),
        Kind::CoiApprox => approx(coi_approximant(t, eps, tol)?, "commutator-approximant"),
        Kind::Coi if is_diagonal(t) => exact(coi_pair_diag_balanced(t, tol)?, "diagonal-pairs"),
        Kind::Coi if is_square_zero(t, tol) => exact(coi_pair_nilpotent_order2(t, tol)?, "square-zero"),
        Kind::Coi => approx(coi_approximant(t, eps, tol)?, "commutator-approximant"),
        Kind::Doi | Kind::DoiApprox => approx(doi_approximant(t, eps, tol)?, "difference-approximant"),
        Kind::Cop => exact(cop_pair(t, tol)?, "projection-planes"),
        Kind::Dop => exact(dop_pair(t, tol)?, "projection-planes"),
    })
}

fn rejection(kind: Kind, report: Option<MembershipReport>, reason: String, tol: &Tolerances, seed: u64) -> Failure {
    let mut body = envelope("construct", tol, seed);
    body["kind"] = json!(kind);
    body["rejected"] = json!(true);
    body["reason"] = json!(reason);
    if let Some(r) = report {
        body["report"] = serde_json::to_value(r).expect("reports serialize");
    }
    Failure { code: 3, body }
}

fn construct(input: &Path, kind: Kind, eps: f64, out: &Path, tol: &Tolerances, seed: u64) -> Result<Value, Failure> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Failure::input(format!("--eps must be positive, got {eps}")));
    }
    let t = read_matrix(input)?;
    let report = match kind.decider() {
        Some(tag) => {
            let r = decide(tag, &t, tol)?;
            if !r.verdict {
                return Err(rejection(kind, Some(r), format!("{tag} decider rejects the input"), tol, seed));
            }
            Some(r)
        }
        None => None,
    };
    let built = match build(kind, &t, eps, tol) {
        Ok(b) => b,
        Err(
            err @ (Error::Precondition(_)
            | Error::RepeatedEntry { .. }
            | Error::Pairing { .. }
            | Error::NotNilpotentOrder2 { .. }
            | Error::NonIntegralTrace { .. }),
        ) => return Err(rejection(kind, report, err.to_string(), tol, seed)),
        Err(err) => return Err(err.into()),
    };
    fs::create_dir_all(out).map_err(|e| Failure::input(format!("{}: {e}", out.display())))?;
    write_file(&out.join("left.json"), &matrix_to_json(&built.pair.left))?;
    write_file(&out.join("right.json"), &matrix_to_json(&built.pair.right))?;
    let mut summary = envelope("construct", tol, seed);
    summary["input"] = json!(input.display().to_string());
    summary["kind"] = json!(kind);
    summary["certificate_kind"] = json!(built.pair.kind);
    summary["method"] = json!(built.method);
    summary["eps"] = json!(eps);
    summary["target_residual"] = json!(built.pair.target_residual);
    summary["structure_residual"] = json!(built.pair.structure_residual);
    summary["cond"] = json!(built.cond);
    summary["attempts"] = json!(built.attempts);
    write_file(&out.join("summary.json"), &serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    Ok(summary)
}

/// `‖M² − M‖ / max(1, ‖M‖²)`, plus `‖M − M*‖ / max(1, ‖M‖)` for projections.
fn structure_defects(m: &ComplexMatrix, projection: bool) -> (f64, Option<f64>) {
    let s = norm2(m);
    let idem = norm2(&(m * m - m)) / s.mul_add(s, 0.0).max(1.0);
    let herm = projection.then(|| norm2(&(m - m.adjoint())) / s.max(1.0));
    (idem, herm)
}

fn verify(
    left: &Path,
    right: &Path,
    kind: PairKind,
    target: Option<&Path>,
    eps: Option<f64>,
    tol: &Tolerances,
    seed: u64,
) -> Result<(Value, bool), Failure> {
    let e = read_matrix(left)?;
    let f = read_matrix(right)?;
    let t = target.map(read_matrix).transpose()?;
    let n = e.nrows();
    if f.nrows() != n || t.as_ref().is_some_and(|t| t.nrows() != n) {
        return Err(Failure::input("left, right and target must have the same dimension"));
    }
    let ck = kind.certificate_kind();
    let projection = ck.is_projection();
    let (le, lh) = structure_defects(&e, projection);
    let (re, rh) = structure_defects(&f, projection);
    let structure_ok = [Some(le), lh, Some(re), rh].into_iter().flatten().all(|d| d <= tol.residual);
    let combined = if ck.is_commutator() { &e * &f - &f * &e } else { &e - &f };
    let (target_residual, bound) = match &t {
        Some(t) => {
            let r = norm2(&(&combined - t));
            (Some(r), Some(eps.unwrap_or(tol.residual * norm2(t).max(1.0))))
        }
        None => (None, None),
    };
    let target_ok = match (target_residual, bound) {
        (Some(r), Some(b)) => r <= b,
        _ => true,
    };
    let pass = structure_ok && target_ok;
    let mut out = envelope("verify", tol, seed);
    out["kind"] = json!(ck);
    out["pass"] = json!(pass);
    out["left"] = json!({ "idempotent_defect": le, "hermitian_defect": lh });
    out["right"] = json!({ "idempotent_defect": re, "hermitian_defect": rh });
    out["target_residual"] = json!(target_residual);
    out["target_bound"] = json!(bound);
    Ok((out, pass))
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    decay: DecayArg,
    rate: f64,
    unpaired: bool,
    tail: usize,
    dims: &str,
    eps: f64,
    out: &Path,
    json_out: Option<&Path>,
    tol: &Tolerances,
    seed: u64,
) -> Result<Value, Failure> {
    let dims: Vec<usize> = dims
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::input(format!("bad dimension {s:?} in --dims"))))
        .collect::<Result<_, _>>()?;
    let profile = CompactProfile {
        decay: match decay {
            DecayArg::Geometric => Decay::Geometric(rate),
            DecayArg::Power => Decay::Power(rate),
        },
        paired: !unpaired,
        nilpotent_tail_dim: tail,
        seed,
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Failure::input(format!("--eps must be positive, got {eps}")));
    }
    let rows = truncation_residual_sweep(&profile, &dims, eps, tol).map_err(|e| match e {
        Error::Precondition(m) => Failure::input(m),
        other => Failure::from(other),
    })?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    write_file(out, &String::from_utf8(buf).expect("csv is utf-8"))?;
    if let Some(path) = json_out {
        write_file(path, &sweep_to_json(&rows))?;
    }
    let mut report = envelope("sweep", tol, seed);
    report["profile"] = serde_json::to_value(profile).expect("profile serializes");
    report["eps"] = json!(eps);
    report["rows"] = serde_json::to_value(&rows).expect("rows serialize");
    Ok(report)
}

fn run(cli: Cli) -> Result<(Value, u8), Failure> {
    let tol = resolve_tolerances(&cli.tol)?;
    let seed = cli.tol.seed;
    match cli.command {
        Command::Classify { input, classes } => Ok((classify(&input, &classes, &tol, seed)?, 0)),
        Command::Construct { input, kind, eps, out } => Ok((construct(&input, kind, eps, &out, &tol, seed)?, 0)),
        Command::Verify {
            left,
            right,
            kind,
            target,
            eps,
        } => {
            let (v, pass) = verify(&left, &right, kind, target.as_deref(), eps, &tol, seed)?;
            Ok((v, if pass { 0 } else { 4 }))
        }
        Command::Sweep {
            decay,
            rate,
            unpaired,
            tail,
            dims,
            eps,
            out,
            json,
        } => Ok((
            sweep(decay, rate, unpaired, tail, &dims, eps, &out, json.as_deref(), &tol, seed)?,
            0,
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((v, code)) => {
            print_json(&v);
            ExitCode::from(code)
        }
        Err(f) => {
            if let Some(msg) = f.body.get("message").and_then(Value::as_str) {
                eprintln!("error: {msg}");
            }
            print_json(&f.body);
            ExitCode::from(f.code)
        }
    }
}
