use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use nszcap::theorems::SuiteConfig;
use nszcap_cli::{ChannelSource, CliError, Target, EXIT_INPUT, EXIT_OK};

/// Zero-error capacities of quantum channels with no-signalling assistance.
///
/// Exit codes: 0 ok, 1 input error, 2 solver failure, 3 verification failure.
#[derive(Parser)]
#[command(name = "nszcap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one capacity program and print the result as JSON.
    #[command(group(ArgGroup::new("source").required(true).args(["channel", "builtin"])))]
    Compute {
        /// Channel document (JSON).
        #[arg(long, value_name = "FILE")]
        channel: Option<PathBuf>,
        /// Built-in channel, e.g. `example4:0.75` or `prop11`.
        #[arg(long, value_name = "NAME[:PARAMS]")]
        builtin: Option<String>,
        /// upsilon, upsilon-hat, aram, upsilon-cq, upsilon-hat-cq, aram-cq or superdense-bound.
        #[arg(long, value_name = "Q")]
        quantity: Target,
        /// Include primal and dual witnesses.
        #[arg(long)]
        witness: bool,
    },
    /// Run the numerical checks on built-in and seeded random channels.
    Verify {
        /// Random channel seed (repeatable); defaults to 1, 2, 3.
        #[arg(long = "seed", value_name = "N")]
        seeds: Vec<u64>,
        /// Run a single check family.
        #[arg(long, value_name = "CHECK")]
        only: Option<String>,
        /// Override the tolerance of every check.
        #[arg(long, value_name = "T")]
        tolerance: Option<f64>,
        /// Largest Choi dimension handed to the solver.
        #[arg(long, value_name = "DIM", default_value_t = SuiteConfig::default().max_dim)]
        max_dim: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// List the built-in channels.
    Examples,
    /// Print the Kraus document of a built-in channel.
    Export {
        #[arg(long, value_name = "NAME[:PARAMS]")]
        builtin: String,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Compute { channel, builtin, quantity, witness } => {
            let source = match (channel, builtin) {
                (Some(path), _) => ChannelSource::File(path),
                (None, Some(spec)) => ChannelSource::Builtin(spec),
                (None, None) => unreachable!("clap requires a source"),
            };
            let doc = nszcap_cli::compute(&source, quantity, witness)?;
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            Ok(EXIT_OK)
        }
        Command::Verify { seeds, only, tolerance, max_dim, json } => {
            let mut config = SuiteConfig { only, tolerance, max_dim, ..Default::default() };
            if !seeds.is_empty() {
                config.seeds = seeds;
            }
            if tolerance.is_some_and(|t| t.is_nan() || t < 0.0) {
                return Err(CliError::Input("--tolerance must be nonnegative".into()));
            }
            let (report, code) = nszcap_cli::verify(&config)?;
            if json {
                let doc = nszcap_cli::report_document(&report);
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                println!("{report}");
            }
            Ok(code)
        }
        Command::Examples => {
            print!("{}", nszcap_cli::examples_listing());
            Ok(EXIT_OK)
        }
        Command::Export { builtin } => {
            println!("{}", nszcap_cli::export(&builtin)?.to_json());
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("nszcap: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
