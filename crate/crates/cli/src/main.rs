use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use osfd_cli::bench::cmd_bench;
use osfd_cli::eval_fill::cmd_eval_fill;
use osfd_cli::run::cmd_run;
use osfd_cli::step::{cmd_step_init, cmd_step_next, cmd_step_tell};
use osfd_cli::CliResult;

/// Sequential designs that fill the output space of an expensive function.
#[derive(Parser)]
#[command(name = "osfd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full design from a config file and write the design CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare design methods across seeds and write a long-format results CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 20)]
        reps: u64,
        /// Comma-separated method names; defaults to every builtin method.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        methods: Option<Vec<String>>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the fill distance of a design file against a reference file.
    EvalFill {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Drive the ask/tell loop through a state file, one action per call.
    Step {
        #[arg(long)]
        state: PathBuf,
        #[command(subcommand)]
        action: StepAction,
    },
}

#[derive(Subcommand)]
enum StepAction {
    /// Create a fresh state file from a config file.
    Init {
        #[arg(long)]
        config: PathBuf,
    },
    /// Propose the next input and print it as space-separated decimals.
    Next,
    /// Record the observed output for the outstanding input.
    Tell {
        #[arg(required = true, allow_hyphen_values = true)]
        values: Vec<String>,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::Bench {
            config,
            reps,
            methods,
            out,
        } => {
            let methods = methods.unwrap_or_else(|| {
                osfd_cli::bench::MethodRegistry::builtin()
                    .names()
                    .into_iter()
                    .map(String::from)
                    .collect()
            });
            cmd_bench(&config, reps, &methods, &out)
        }
        Command::EvalFill { design, reference } => cmd_eval_fill(&design, &reference),
        Command::Step { state, action } => match action {
            StepAction::Init { config } => cmd_step_init(&state, &config),
            StepAction::Next => cmd_step_next(&state),
            StepAction::Tell { values } => cmd_step_tell(&state, &values),
        },
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
