use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isopair_cli::report::{analyze, compare, construct, validate, Config, Outcome};
use isopair_cli::{write_atomic, CliError};

#[derive(Parser)]
#[command(name = "isopair", version, about = "Analyze pairs of commuting isometries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Truncation degree (default 12 for BCL models; bidisc files carry their own).
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Tolerance for approximate checks.
    #[arg(long, global = true, env = "ISOPAIR_TOL", default_value_t = 1e-6)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a pair specification parses and builds.
    Validate { spec: PathBuf },
    /// Full report: wandering data, defect, analytic invariants.
    Analyze { spec: PathBuf },
    /// Decide unitary equivalence of two pairs.
    Compare { a: PathBuf, b: PathBuf },
    /// Emit a random BCL specification.
    Construct {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rank: Option<usize>,
    },
}

fn show(p: &PathBuf) -> String {
    p.display().to_string()
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Validate { spec } => {
            let config = Config::new("validate", vec![show(spec)], c.degree, c.tol, c.seed);
            Ok(validate(spec, &config))
        }
        Command::Analyze { spec } => {
            let config = Config::new("analyze", vec![show(spec)], c.degree, c.tol, c.seed);
            analyze(spec, &config)
        }
        Command::Compare { a, b } => {
            let config = Config::new("compare", vec![show(a), show(b)], c.degree, c.tol, c.seed);
            compare(a, b, &config)
        }
        Command::Construct { dim, rank } => {
            let config = Config::new("construct", vec![], c.degree, c.tol, c.seed);
            construct(*dim, *rank, &config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.clone();
    let result = run(cli).and_then(|outcome| {
        let text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize") + "\n";
        match &out {
            Some(path) => write_atomic(path, &text)?,
            None => print!("{text}"),
        }
        Ok(outcome.exit)
    });
    match result {
        Ok(code) => {
            match code {
                0 => {}
                1 => eprintln!("isopair: consistency checks failed, see the report"),
                _ => eprintln!("isopair: input rejected, see the report"),
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("isopair: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
