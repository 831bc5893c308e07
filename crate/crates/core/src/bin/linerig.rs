use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use linerig::analysis::{self, CertifyError, Ensure, RandomSpec, VerifyReport};
use linerig::characterize::{replay_certificate, GlobalCertificate};
use linerig::instance::Instance;

const EXIT_IO: u8 = 2;
const EXIT_VERDICT: u8 = 3;
const EXIT_DISAGREE: u8 = 4;

#[derive(Parser)]
#[command(name = "linerig", version, about = "Rigidity and global rigidity of frameworks on lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsureArg {
    Yes,
    No,
}

#[derive(Subcommand)]
enum Command {
    /// Run every decider on an instance.
    Analyze {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Write a certificate of global rigidity.
    Certify {
        path: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Re-read the written certificate and replay it.
        #[arg(long)]
        replay: bool,
    },
    /// Emit a random instance.
    Random {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        #[arg(long, short, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..))]
        d: u64,
        #[arg(long, env = "LINERIG_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        ensure: Option<EnsureArg>,
        /// Edge probability; random per attempt if omitted.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        max_attempts: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Cross-check deciders, exact rank and the numeric oracle.
    Verify {
        /// Instance file, or a directory of `.json` instances.
        path: PathBuf,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, env = "LINERIG_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<(u8, E)> for Failure {
    fn from((code, e): (u8, E)) -> Failure {
        Failure(code, e.to_string())
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let s = fs::read_to_string(path).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))?;
    Instance::from_json(&s).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, body: &str) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, format!("{body}\n")).map_err(|e| Failure(EXIT_IO, format!("{}: {e}", p.display()))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable")
}

fn instance_files(path: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(path)
        .map_err(|e| Failure(EXIT_IO, format!("{}: {e}", path.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn verify_line(path: &Path, r: &VerifyReport) -> String {
    let leg = match &r.oracle {
        analysis::OracleLeg::Skipped { reason } => format!("oracle skipped ({reason})"),
        analysis::OracleLeg::Ran { classes, .. } => format!("oracle classes {classes}"),
    };
    format!(
        "{}: rigid {} / rank {} [{}], global {:?}, {}",
        path.display(),
        r.combinatorial_rigid,
        r.rank.inf_rigid,
        if r.rigidity_agree { "agree" } else { "DISAGREE" },
        r.globally_rigid,
        leg
    )
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { path, json } => {
            let r = analysis::analyze(&load(&path)?);
            if json {
                println!("{}", to_json(&r));
            } else {
                print!("{}", r.to_text());
            }
            Ok(())
        }
        Command::Certify { path, output, replay } => {
            let inst = load(&path)?;
            let cert = analysis::certify(&inst).map_err(|e| match e {
                CertifyError::VerdictIsNo(_) => Failure(EXIT_VERDICT, e.to_string()),
                e => Failure(EXIT_IO, e.to_string()),
            })?;
            emit(output.as_deref(), &to_json(&cert))?;
            if replay {
                let back: GlobalCertificate = match &output {
                    Some(p) => {
                        let s = fs::read_to_string(p).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
                        serde_json::from_str(&s).map_err(|e| Failure(EXIT_IO, e.to_string()))?
                    }
                    None => cert,
                };
                replay_certificate(&inst.graph, &back).map_err(|e| Failure(EXIT_DISAGREE, format!("replay failed: {e}")))?;
                eprintln!("replay: ok");
            }
            Ok(())
        }
        Command::Random { n, k, d, seed, ensure, p, max_attempts, output } => {
            let spec = RandomSpec {
                ensure: ensure.map(|e| match e {
                    EnsureArg::Yes => Ensure::Yes,
                    EnsureArg::No => Ensure::No,
                }),
                edge_prob: p,
                max_attempts,
                ..RandomSpec::new(n as usize, k as usize, d as usize, seed)
            };
            let inst = analysis::random_instance(&spec).map_err(|e| Failure(EXIT_VERDICT, e.to_string()))?;
            emit(output.as_deref(), &inst.to_json())
        }
        Command::Verify { path, restarts, seed, json } => {
            let files = instance_files(&path)?;
            let results: Vec<Result<(PathBuf, VerifyReport), Failure>> = files
                .par_iter()
                .map(|f| {
                    let inst = load(f)?;
                    let r = analysis::verify(&inst, restarts, seed).map_err(|e| Failure(EXIT_IO, e.to_string()))?;
                    Ok((f.clone(), r))
                })
                .collect();
            let mut disagreements = 0;
            let mut reports = Vec::new();
            for res in results {
                let (f, r) = res?;
                if !r.rigidity_agree {
                    disagreements += 1;
                }
                if let Some(w) = r.warning() {
                    eprintln!("warning: {}: {w}", f.display());
                }
                if !json {
                    println!("{}", verify_line(&f, &r));
                }
                reports.push(serde_json::json!({ "file": f.display().to_string(), "report": r }));
            }
            if json {
                println!("{}", to_json(&reports));
            } else {
                println!("{} instance(s), {disagreements} rigidity disagreement(s)", reports.len());
            }
            if disagreements > 0 {
                return Err(Failure(EXIT_DISAGREE, format!("{disagreements} rigidity disagreement(s)")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
