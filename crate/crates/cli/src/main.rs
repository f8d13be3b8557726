mod input;
mod manifest;
mod reproduce;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use noisecontent::compat::{
    is_joint_of, lp_compatible_polytope, sufficient_compatible_with, Status,
};
use noisecontent::noise::best_noise_decomposition;
use noisecontent::theory::validate_observable_tol;
use noisecontent::{Error, Observable};

use crate::input::{load_observable, LoadError};
use crate::manifest::RunManifest;
use crate::reproduce::Target;

pub const EXIT_OK: u8 = 0;
pub const EXIT_UNDECIDED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INVALID: u8 = 3;
pub const EXIT_INCOMPATIBLE: u8 = 4;

const CSV_HELP: &str = "\
CSV columns written by `reproduce`:
  reversed-threshold.csv  d,m,N,threshold,noise_sum,certified,expected,marginal_error
  squit.csv               alpha,beta,w_alpha,w_beta,lp_status,expected_compatible,agrees
  mub-sigma.csv           d,min_eigenvalue,trace,max_deviation,pass
  triple-witness.csv      case,i,j,k,rank,status
  ppovm-gap.csv           dim_a,dim_b,probs,lower_bound,exact_trivial_value
  doubly-reverse.csv      N,m,lambda,noise_sum,threshold,certified,expected,marginal_error

Empty marginal_error cells mean no joint observable was built (not certified,
or the product grid exceeds 100000 cells). Every run also writes
manifest.json with the command, seed, tolerances, version and output paths.

Exit codes: 0 success / compatible certified, 1 undecided, 2 usage or parse
error or unknown target, 3 invalid observable or state space mismatch,
4 incompatible certified.";

#[derive(Parser)]
#[command(name = "noisecontent", version, about = "Noise content and compatibility of observables", after_long_help = CSV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Tolerance for validation and marginal checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for the random constructions in `reproduce`.
    #[arg(long, global = true, default_value_t = 0xC0FFEE)]
    seed: u64,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce one of the worked examples and write CSV tables.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
    /// Noise content of an observable, with the trivial component and residual.
    Noise { file: PathBuf },
    /// Compatibility verdict for two or more observables.
    Compat {
        #[arg(num_args = 2.., required = true)]
        files: Vec<PathBuf>,
        /// Decide exactly with the polytope linear program.
        #[arg(long)]
        lp: bool,
        /// Mixing weights for the joint observable.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match &cli.command {
        Command::Reproduce { target } => reproduce::run(*target, &cli),
        Command::Noise { file } => cmd_noise(file, cli.tol),
        Command::Compat { files, lp, weights } => cmd_compat(files, *lp, weights.as_deref(), &cli),
    };
    ExitCode::from(code)
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

/// Loads and validates; on failure prints the reason and returns the exit code.
fn load_valid(path: &Path, tol: f64) -> Result<Observable, u8> {
    let a = load_observable(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        match e {
            LoadError::Io(_) | LoadError::Parse(_) => EXIT_USAGE,
        }
    })?;
    let report = validate_observable_tol(&a, tol);
    if !report.is_valid() {
        print_json(&serde_json::json!({
            "error": "invalid observable",
            "file": path.display().to_string(),
            "report": report,
        }));
        return Err(EXIT_INVALID);
    }
    Ok(a)
}

fn cmd_noise(file: &Path, tol: f64) -> u8 {
    let a = match load_valid(file, tol) {
        Ok(a) => a,
        Err(code) => return code,
    };
    match best_noise_decomposition(&a) {
        Ok(d) => {
            print_json(&d);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("{e}");
            EXIT_INVALID
        }
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::SpaceMismatch(_) | Error::OutcomeMismatch(_) | Error::InvalidPpovm(_) => {
            EXIT_INVALID
        }
        _ => EXIT_USAGE,
    }
}

fn cmd_compat(files: &[PathBuf], lp: bool, weights: Option<&[f64]>, cli: &Cli) -> u8 {
    let mut observables = Vec::with_capacity(files.len());
    for f in files {
        match load_valid(f, cli.tol) {
            Ok(a) => observables.push(a),
            Err(code) => return code,
        }
    }
    let result = if lp {
        lp_compatible_polytope(&observables)
    } else {
        sufficient_compatible_with(&observables, weights)
    };
    let verdict = match result {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{e}");
            return exit_for(&e);
        }
    };
    if let Some(g) = &verdict.witness {
        match is_joint_of(g, &observables, cli.tol) {
            Ok(true) => {}
            _ => {
                eprintln!(
                    "joint witness failed re-validation at tolerance {}",
                    cli.tol
                );
                return EXIT_UNDECIDED;
            }
        }
    }

    let mut outputs = vec![cli.out.join("verdict.json")];
    if verdict.witness.is_some() {
        outputs.push(cli.out.join("joint.json"));
    }
    let written = std::fs::create_dir_all(&cli.out)
        .and_then(|_| manifest::write_json(&outputs[0], &verdict))
        .and_then(|_| match &verdict.witness {
            Some(g) => manifest::write_json(&outputs[1], g),
            None => Ok(()),
        })
        .and_then(|_| {
            let m = RunManifest::new(
                format!("compat{}", if lp { " --lp" } else { "" }),
                cli.seed,
                cli.tol,
                files.iter().map(|f| f.display().to_string()).collect(),
                &outputs,
                true,
            );
            m.write(&cli.out)
        });
    if let Err(e) = written {
        eprintln!("writing {}: {e}", cli.out.display());
        return EXIT_USAGE;
    }
    print_json(&verdict);
    match verdict.status {
        Status::CompatibleCertified => EXIT_OK,
        Status::Undecided => EXIT_UNDECIDED,
        Status::IncompatibleCertified => EXIT_INCOMPATIBLE,
    }
}
