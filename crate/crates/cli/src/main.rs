use std::path::PathBuf;
use std::process::ExitCode;

use canrt_cli::{cmd_check, cmd_explore, cmd_run, cmd_serve, cmd_traces, cmd_verify, CliError, ExploreFlags};
use canrt_core::explorer::DEFAULT_MAX_STATES;
use canrt_core::Policy;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "canrt", version, about = "Transparent BDI agent runtime and verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyKind {
    Fifo,
    Random,
}

impl PolicyKind {
    fn with_seed(self, seed: u64) -> Policy {
        match self {
            PolicyKind::Fifo => Policy::Fifo,
            PolicyKind::Random => Policy::Random(seed),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate an agent file.
    Check {
        file: PathBuf,
        /// Print the compiled full traces as well.
        #[arg(long)]
        dump_traces: bool,
    },
    /// Print every full trace, one per line with its length.
    Traces { file: PathBuf },
    /// Execute one run and print line-delimited JSON step records.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "fifo")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: u64,
    },
    /// Build the full transition system and export it.
    Explore {
        file: PathBuf,
        #[arg(long, value_name = "PATH")]
        dot: Option<PathBuf>,
        /// Writes PREFIX.sta, PREFIX.tra and PREFIX.lab.
        #[arg(long, value_name = "PREFIX")]
        explicit: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        #[arg(long, value_name = "FILE")]
        predicates: Option<PathBuf>,
        /// Use the original rules without event status tracking.
        #[arg(long)]
        legacy: bool,
    },
    /// Model check a property file against the agent.
    Verify {
        file: PathBuf,
        props: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
    },
    /// Start the simulation service.
    Serve {
        /// Agent to open a session for at startup.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, value_enum, default_value = "fifo")]
        policy: PolicyKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Append each session's journal to DIR/<id>.jsonl.
        #[arg(long, value_name = "DIR")]
        journal_dir: Option<PathBuf>,
    },
}

fn dispatch(command: Command) -> Result<String, CliError> {
    match command {
        Command::Check { file, dump_traces } => {
            let mut out = cmd_check(&file)?;
            if dump_traces {
                out.push_str(&cmd_traces(&file)?);
            }
            Ok(out)
        }
        Command::Traces { file } => cmd_traces(&file),
        Command::Run { file, policy, seed, max_steps } => cmd_run(&file, policy.with_seed(seed), max_steps),
        Command::Explore { file, dot, explicit, max_states, predicates, legacy } => cmd_explore(
            &file,
            &ExploreFlags {
                dot,
                explicit,
                max_states,
                predicates,
                legacy,
            },
        ),
        Command::Verify { file, props, max_states } => cmd_verify(&file, &props, max_states),
        Command::Serve { file, port, policy, seed, journal_dir } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Other(e.to_string()))?;
            rt.block_on(cmd_serve(file.as_deref(), port, policy.with_seed(seed), journal_dir))?;
            Ok(String::new())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(CliError::PropertyFailed(table)) => {
            print!("{table}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
