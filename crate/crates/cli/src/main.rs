use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

use commands::Report;

/// Embedded Bayesian networks: m-separation, independence oracles, E-tree
/// bases, structure recovery and the G_k family.
#[derive(Parser, Debug)]
#[command(name = "ebn", version)]
struct Cli {
    /// Tolerance for conditional-independence tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for randomized commands.
    #[arg(long, global = true, env = "EBN_SEED")]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Closure budget for `closure` and `derive`.
    #[arg(long, global = true, default_value_t = ebn::graphoid::DEFAULT_BUDGET)]
    limit: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Is the statement in M(G)?
    Msep {
        graph: PathBuf,
        statement: String,
        #[arg(long, default_value = "reachability")]
        engine: String,
    },
    /// Does the statement hold in the joint table?
    Ci { table: PathBuf, statement: String },
    /// Is the E-tree an I-map of the table?
    Imap {
        graph: PathBuf,
        table: PathBuf,
        /// Report every failing basis statement, not just the first.
        #[arg(long)]
        all: bool,
    },
    /// Print a basis of the graph's dependency model.
    Basis {
        graph: PathBuf,
        #[arg(long, default_value = "bt")]
        kind: String,
    },
    /// Learn an E-tree from a strictly positive table.
    Recover {
        table: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Print every independence query with its residual.
        #[arg(long)]
        log: bool,
    },
    /// Sample a table that the E-tree represents well.
    SampleTree {
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        domain: usize,
        #[arg(long, default_value_t = 2)]
        latent_domain: usize,
        #[arg(long, default_value_t = 0.05)]
        floor: f64,
        #[arg(long, default_value_t = 1e-3)]
        margin: f64,
        #[arg(long, default_value_t = 100)]
        retries: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the graph G_k.
    Gk {
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the hardness checks on G_k.
    GkVerify { k: usize },
    /// Close a statement file under an axiom set.
    Closure {
        statements: PathBuf,
        #[arg(long, default_value = "semi-graphoid")]
        axioms: String,
    },
    /// Derive a statement from a statement file.
    Derive {
        statements: PathBuf,
        target: String,
        #[arg(long, default_value = "semi-graphoid")]
        axioms: String,
    },
    /// Do two E-trees induce the same dependency model?
    Iso { first: PathBuf, second: PathBuf },
}

pub const EXIT_FALSE: u8 = 1;
pub const EXIT_FAIL: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(report) => {
            emit(&report, cli.format);
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn emit(report: &Report, format: Format) {
    match format {
        Format::Text => print!("{}", report.text),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report.json).expect("reports serialize")
        ),
    }
}
