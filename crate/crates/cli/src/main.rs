use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use nsa_core::adjoint::{adjoint_equation, determining_system, formal_lagrangian, nsa_check, Substitution};
use nsa_core::calculus::{prolonged_action, Equation, PointSymmetry};
use nsa_core::catalog::{catalog_entries, verify_all, verify_entry, EntryReport};
use nsa_core::conslaw::{density_normalize, ibragimov_vector, localize_unchecked, verify_divergence};
use nsa_core::parallel::Strategy;
use nsa_core::parser::{self, parse_expr, parse_symmetry, print_document, Declaration, SourceDocument};
use nsa_core::Error;

#[derive(Parser)]
#[command(name = "nsa", version, about = "Nonlinear self-adjointness and conservation laws for evolution equations")]
struct Cli {
    /// Print a JSON object instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the adjoint equation of the equation in FILE.
    Adjoint { file: PathBuf },
    /// Check self-adjointness under v = PHI.
    CheckNsa {
        file: PathBuf,
        /// Substitution; defaults to the unnamed `phi` statement of FILE.
        #[arg(long)]
        phi: Option<String>,
    },
    /// Print the determining equations for an unknown phi(x,t,u).
    Determining { file: PathBuf },
    /// Build and verify the conserved vector of a symmetry.
    Conslaw {
        file: PathBuf,
        /// Name of a symmetry in FILE, or an inline `tau = ..; xi = ..; eta = ..`.
        #[arg(long)]
        symmetry: String,
        /// Eliminate v through v = PHI.
        #[arg(long)]
        phi: Option<String>,
        /// Move total x-derivatives out of the density.
        #[arg(long)]
        normalize: bool,
        /// Localize even when the substitution fails the self-adjointness check.
        #[arg(long)]
        force: bool,
    },
    /// Check that a point symmetry leaves the equation invariant.
    CheckSymmetry {
        file: PathBuf,
        #[arg(long)]
        symmetry: String,
    },
    /// Built-in catalog of classified equations and worked examples.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Print FILE in canonical form.
    Fmt { file: PathBuf },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Re-derive every claim of one entry, or of all entries.
    Verify { id: Option<String> },
    /// List entry ids.
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Verified,
    Refuted,
    Computed,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Verified => "verified",
            Status::Refuted => "refuted",
            Status::Computed => "computed",
        }
    }

    fn exit_code(self) -> u8 {
        match self {
            Status::Verified | Status::Computed => 0,
            Status::Refuted => 1,
        }
    }

    fn from_check(ok: bool) -> Self {
        if ok {
            Status::Verified
        } else {
            Status::Refuted
        }
    }
}

struct Outcome {
    status: Status,
    fields: Map<String, Value>,
    text: String,
    /// Whether text output ends with a `status:` line.
    status_line: bool,
}

impl Outcome {
    fn new(status: Status) -> Self {
        Outcome { status, fields: Map::new(), text: String::new(), status_line: true }
    }

    fn field(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.insert(key.to_string(), value.into());
    }

    fn line(&mut self, line: impl AsRef<str>) {
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_unsupported() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        if self.exit_code() == 3 {
            "unsupported"
        } else {
            "input"
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(out) => {
            let mut text = out.text;
            if cli.json {
                let mut obj = Map::new();
                obj.insert("status".into(), out.status.as_str().into());
                obj.extend(out.fields);
                text = format!("{}\n", Value::Object(obj));
            } else if out.status_line {
                writeln!(text, "status: {}", out.status.as_str()).unwrap();
            }
            // A closed pipe is not an error worth reporting.
            let _ = std::io::stdout().write_all(text.as_bytes());
            ExitCode::from(out.status.exit_code())
        }
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "status": "error", "kind": f.kind(), "error": f.message() }));
            } else {
                eprintln!("error: {}", f.message());
            }
            ExitCode::from(f.exit_code())
        }
    }
}

fn load(path: &PathBuf) -> Result<SourceDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let doc = parser::parse(&text)?;
    for w in &doc.warnings {
        eprintln!("warning: {}:{}:{}: {}", path.display(), w.line, w.col, w.message);
    }
    Ok(doc)
}

fn equation(doc: &SourceDocument) -> Result<Equation, Failure> {
    Ok(Equation::new(doc.equation_lhs()?.clone())?)
}

fn symmetry(doc: &SourceDocument, arg: &str) -> Result<PointSymmetry, Failure> {
    if arg.contains('=') {
        Ok(parse_symmetry(arg, &doc.context)?)
    } else {
        Ok(doc.symmetry(Some(arg))?.clone())
    }
}

fn substitution(doc: &SourceDocument, phi: Option<&str>) -> Result<Option<Substitution>, Failure> {
    let expr = match phi {
        Some(text) => Some(parse_expr(text, &doc.context)?),
        None => doc.substitutions().find(|(n, _)| n.is_none()).map(|(_, p)| p.clone()),
    };
    Ok(expr.map(Substitution::new).transpose()?)
}

fn run(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Adjoint { file } => {
            let doc = load(file)?;
            let eq = equation(&doc)?;
            let adj = adjoint_equation(&eq, &doc.context)?;
            let mut out = Outcome::new(Status::Computed);
            out.line(format!("L = {}", formal_lagrangian(&eq)));
            out.line(format!("F* = {adj}"));
            out.field("lagrangian", formal_lagrangian(&eq).to_string());
            out.field("adjoint", adj.to_string());
            Ok(out)
        }
        Command::CheckNsa { file, phi } => {
            let doc = load(file)?;
            let eq = equation(&doc)?;
            let sub = substitution(&doc, phi.as_deref())?
                .ok_or(Error::Missing { kind: "substitution", name: "(unnamed)".into() })?;
            let r = nsa_check(&eq, &sub, &doc.context)?;
            let mut out = Outcome::new(Status::from_check(r.holds));
            out.line(format!("phi = {sub}"));
            out.line(format!("lambda = {}", r.lambda));
            out.line(format!("residual = {}", r.residual));
            out.line(format!("classification: {} ({})", r.classification, r.dependence));
            out.field("phi", sub.to_string());
            out.field("lambda", r.lambda.to_string());
            out.field("residual", r.residual.to_string());
            out.field("classification", r.classification.as_str());
            out.field("dependence", r.dependence.to_string());
            Ok(out)
        }
        Command::Determining { file } => {
            let doc = load(file)?;
            let eq = equation(&doc)?;
            let unknown = doc
                .declarations
                .iter()
                .find_map(|d| match d {
                    Declaration::Unknown(n) => Some(n.as_str()),
                    _ => None,
                })
                .unwrap_or("phi");
            let system = determining_system(&eq, unknown, &doc.context)?;
            let mut out = Outcome::new(Status::Computed);
            for e in &system {
                out.line(format!("{e} = 0"));
            }
            out.field("unknown", unknown);
            out.field("equations", system.iter().map(|e| e.to_string()).collect::<Vec<_>>());
            Ok(out)
        }
        Command::Conslaw { file, symmetry: sym, phi, normalize, force } => {
            let doc = load(file)?;
            let ctx = &doc.context;
            let eq = equation(&doc)?;
            let x = symmetry(&doc, sym)?;
            let mut cv = ibragimov_vector(&eq, &x, ctx)?;
            let mut out = Outcome::new(Status::Computed);
            if let Some(text) = phi {
                let sub = Substitution::new(parse_expr(text, ctx)?)?;
                let r = nsa_check(&eq, &sub, ctx)?;
                if !r.holds {
                    if !force {
                        let mut out = Outcome::new(Status::Refuted);
                        out.line(format!(
                            "equation is not self-adjoint under phi = {sub}; use --force to localize anyway"
                        ));
                        out.line(format!("residual = {}", r.residual));
                        out.field("residual", r.residual.to_string());
                        return Ok(out);
                    }
                    eprintln!("warning: equation is not self-adjoint under phi = {sub}; localizing anyway");
                }
                cv = localize_unchecked(&cv, &sub, ctx)?;
                out.field("phi", sub.to_string());
            }
            if *normalize {
                cv = density_normalize(&cv, &eq, ctx)?;
            }
            let with_adjoint = cv.depends_on_v();
            let divergence = verify_divergence(&cv, &eq, with_adjoint, ctx)?;
            out.status = Status::from_check(divergence.is_zero());
            out.line(format!("C0 = {}", cv.c0));
            out.line(format!("C1 = {}", cv.c1));
            let transfer = match &cv.provenance.transfer {
                Some(t) => {
                    out.line(format!("transfer: h = {}, sign = {}", t.h, t.sign));
                    json!({ "h": t.h.to_string(), "sign": t.sign, "flux_unreduced": t.flux_unreduced.to_string() })
                }
                None => Value::Null,
            };
            let modulo = if with_adjoint { "equation and adjoint" } else { "equation" };
            out.line(format!("divergence modulo {modulo} = {divergence}"));
            out.field("c0", cv.c0.to_string());
            out.field("c1", cv.c1.to_string());
            out.field("transfer", transfer);
            out.field("divergence_residual", divergence.to_string());
            Ok(out)
        }
        Command::CheckSymmetry { file, symmetry: sym } => {
            let doc = load(file)?;
            let eq = equation(&doc)?;
            let x = symmetry(&doc, sym)?;
            let r = prolonged_action(&x, &eq, &doc.context)?;
            let mut out = Outcome::new(Status::from_check(r.is_zero()));
            out.line(format!("X = {x}"));
            out.line(format!("prolonged action on solutions = {r}"));
            out.field("symmetry", x.to_string());
            out.field("residual", r.to_string());
            Ok(out)
        }
        Command::Catalog { action: CatalogAction::List } => {
            let mut out = Outcome::new(Status::Computed);
            let mut entries = Vec::new();
            for e in catalog_entries() {
                out.line(format!("{:<5} {}", e.id, e.title));
                entries.push(json!({ "id": e.id, "title": e.title, "side_conditions": e.side_conditions }));
            }
            out.field("entries", entries);
            Ok(out)
        }
        Command::Catalog { action: CatalogAction::Verify { id } } => {
            let reports = match id {
                Some(id) => vec![verify_entry(id)?],
                None => verify_all(Strategy::Parallel),
            };
            let mut out = Outcome::new(Status::from_check(reports.iter().all(EntryReport::passed)));
            let mut text = String::new();
            for r in &reports {
                write!(text, "{r}").unwrap();
            }
            out.text = text;
            out.field("entries", reports.iter().map(report_json).collect::<Vec<_>>());
            Ok(out)
        }
        Command::Fmt { file } => {
            let doc = load(file)?;
            let mut out = Outcome::new(Status::Computed);
            let printed = print_document(&doc);
            out.text = printed.clone();
            out.status_line = false;
            out.field("text", printed);
            Ok(out)
        }
    }
}

fn report_json(r: &EntryReport) -> Value {
    let claims: Vec<Value> =
        r.claims.iter().map(|c| json!({ "name": c.name, "outcome": c.outcome.as_str(), "detail": c.detail })).collect();
    json!({ "id": r.id, "passed": r.passed(), "claims": claims })
}
