//! Command-line surface of the pipeline: classify and reduce germs, decide
//! equivalences, run the randomized lemma verifications, and solve/classify
//! Hamiltonian boundary value problems.
//!
//! Exit codes: 0 definitive answer, 1 failed verification trials,
//! 2 indeterminate classification, 3 input or precondition error. Machine
//! payloads go to stdout as JSON; diagnostics go to stderr, with verbosity
//! controlled by `LGC_LOG=error|info|debug`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use lgc_core::bvp::{
    continue_branches, diagram_csv, parse_system_toml, singular_points_json, solve_bvp,
};
use lgc_core::classify::{classify_split, ClassifyOptions};
use lgc_core::error::Error;
use lgc_core::jet::Jet;
use lgc_core::verify::{verify_hformula, verify_structure_independence, verify_switchon};

#[derive(Parser)]
#[command(name = "lgc", version, about = "Generating functions, catastrophe labels, and bifurcations of Hamiltonian boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the catastrophe type of a critical jet.
    Classify(ClassifyArgs),
    /// Decide stable or strict right equivalence of two jets.
    Equivalent(EquivalentArgs),
    /// Boundary value problems for symplectic maps.
    #[command(subcommand)]
    Bvp(BvpCommand),
    /// Randomized verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Jet file (JSON).
    #[arg(long)]
    jet: PathBuf,
}

#[derive(Args)]
struct EquivalentArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Stable right equivalence (quadratic signatures absorbed). Default.
    #[arg(long, conflicts_with = "strict")]
    stable: bool,
    /// Right equivalence in the same number of variables.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum BvpCommand {
    /// Solve the boundary value problem at a fixed parameter value.
    Solve(BvpArgs),
    /// Trace solution branches over the parameter box and classify folds.
    Diagram(BvpArgs),
}

#[derive(Args)]
struct BvpArgs {
    /// System specification (TOML).
    #[arg(long)]
    system: PathBuf,
    /// Output directory for the artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Parameter value for `solve` (comma-separated), defaults to zeros.
    #[arg(long)]
    mu: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of: hformula | switchon | structure-independence.
    #[arg(long)]
    lemma: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inject a structure with a nonzero fibre block into the switchon suite
    /// (must be rejected as out of hypothesis).
    #[arg(long)]
    adversarial_h22: bool,
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum LogLevel {
    Error,
    Info,
    Debug,
}

fn log_level() -> LogLevel {
    match std::env::var("LGC_LOG").as_deref() {
        Ok("debug") => LogLevel::Debug,
        Ok("info") => LogLevel::Info,
        _ => LogLevel::Error,
    }
}

fn info(msg: &str) {
    if log_level() >= LogLevel::Info {
        eprintln!("[info] {msg}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Indeterminate(reason) => {
                    // Payload stays machine readable on the indeterminate path.
                    println!(
                        "{}",
                        json!({ "class": "indeterminate", "reason": reason })
                    );
                    2
                }
                _ => 3,
            }
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Classify(args) => cmd_classify(&args),
        Command::Equivalent(args) => cmd_equivalent(&args),
        Command::Bvp(BvpCommand::Solve(args)) => cmd_bvp_solve(&args),
        Command::Bvp(BvpCommand::Diagram(args)) => cmd_bvp_diagram(&args),
        Command::Verify(args) => cmd_verify(&args),
    }
}

fn read_jet(path: &Path) -> Result<Jet, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("{} is not a jet: {e}", path.display())))
}

fn cmd_classify(args: &ClassifyArgs) -> Result<u8, Error> {
    let jet = read_jet(&args.jet)?;
    info(&format!(
        "classifying a jet in {} variables at degree {}",
        jet.nvars(),
        jet.degree()
    ));
    let (class, split) = classify_split(&jet, &ClassifyOptions::default())?;
    println!(
        "{}",
        json!({
            "class": class.label(),
            "corank": class.corank,
            "milnor": class.milnor,
            "signature": [split.signature.0, split.signature.1],
        })
    );
    Ok(0)
}

fn cmd_equivalent(args: &EquivalentArgs) -> Result<u8, Error> {
    let a = read_jet(&args.a)?;
    let b = read_jet(&args.b)?;
    let strict = args.strict;
    let verdict = if strict {
        lgc_core::classify::right_equivalent_same_vars(&a, &b)?
    } else {
        lgc_core::classify::stably_right_equivalent(&a, &b)?
    };
    let classes: Option<Vec<String>> = verdict
        .witness_class
        .map(|(ca, cb)| vec![ca.label(), cb.label()]);
    println!(
        "{}",
        json!({
            "equivalent": verdict.equivalent,
            "reason": format!("{:?}", verdict.reason),
            "mode": if strict { "strict" } else { "stable" },
            "classes": classes,
        })
    );
    if verdict.reason == lgc_core::classify::EquivalenceReason::Indeterminate {
        Ok(2)
    } else {
        Ok(0)
    }
}

fn parse_mu(arg: &Option<String>, nparams: usize) -> Result<Vec<f64>, Error> {
    match arg {
        None => Ok(vec![0.0; nparams]),
        Some(text) => {
            let mu: Vec<f64> = text
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("bad --mu entry {t:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            if mu.len() != nparams {
                return Err(Error::InvalidInput(format!(
                    "--mu needs {nparams} entries, got {}",
                    mu.len()
                )));
            }
            Ok(mu)
        }
    }
}

fn cmd_bvp_solve(args: &BvpArgs) -> Result<u8, Error> {
    let text = fs::read_to_string(&args.system)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.system.display())))?;
    let setup = parse_system_toml(&text)?;
    let mu = parse_mu(&args.mu, setup.spec.system.nparams)?;
    info(&format!("solving at mu = {mu:?} from {} seeds", setup.seeds.len()));
    let solutions = solve_bvp(&setup.spec, &setup.boundary, &mu, &setup.seeds)?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", args.out.display())))?;
    let payload = json!({
        "mu": mu,
        "solutions": solutions,
        "degenerate": solutions.iter().any(|s| s.is_degenerate()),
    });
    let path = args.out.join("solutions.json");
    fs::write(&path, serde_json::to_string_pretty(&payload).unwrap())
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    println!("{payload}");
    Ok(0)
}

fn cmd_bvp_diagram(args: &BvpArgs) -> Result<u8, Error> {
    let text = fs::read_to_string(&args.system)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", args.system.display())))?;
    let setup = parse_system_toml(&text)?;
    if setup.param_box.is_empty() {
        return Err(Error::InvalidInput(
            "continuation.param_box is required for diagrams".into(),
        ));
    }
    info(&format!(
        "continuation over {:?} from {} seeds",
        setup.param_box,
        setup.seeds.len()
    ));
    let diagram = continue_branches(
        &setup.spec,
        &setup.boundary,
        &setup.param_box,
        &setup.seeds,
        &setup.options,
    )?;
    fs::create_dir_all(&args.out)
        .map_err(|e| Error::InvalidInput(format!("cannot create {}: {e}", args.out.display())))?;
    let csv = diagram_csv(
        &diagram,
        setup.param_box.len(),
        2 * setup.spec.system.nvars,
    );
    let csv_path = args.out.join("diagram.csv");
    fs::write(&csv_path, csv)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", csv_path.display())))?;
    let json_path = args.out.join("singular_points.json");
    fs::write(&json_path, singular_points_json(&diagram)?)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", json_path.display())))?;
    let points: usize = diagram.branches.iter().map(|b| b.points.len()).sum();
    println!(
        "{}",
        json!({
            "branches": diagram.branches.len(),
            "points": points,
            "singular_points": diagram.singular_points.iter().map(|s| json!({
                "mu": s.mu,
                "z": s.z,
                "class": s.label,
                "condition": s.condition,
            })).collect::<Vec<_>>(),
        })
    );
    Ok(0)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8, Error> {
    let report = match args.lemma.as_str() {
        "hformula" => verify_hformula(args.trials, args.seed)?,
        "switchon" => verify_switchon(args.trials, args.seed, args.adversarial_h22)?,
        "structure-independence" => verify_structure_independence(args.trials, args.seed)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown lemma {other:?}: expected hformula | switchon | structure-independence"
            )))
        }
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    Ok(if report.all_pass { 0 } else { 1 })
}
