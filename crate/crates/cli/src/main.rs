use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flashsac::envs::EnvKind;
use flashsac_cli::{cmd_eval, cmd_plot, cmd_train, parse_config, parse_overrides, CliError, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "flashsac", version, about = "Train, evaluate and plot soft actor-critic runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an agent; any config key can be overridden with `--key value`.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// Evaluate the deterministic policy stored in a checkpoint.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: EnvKind,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Plot evaluation return against environment steps.
    Plot {
        #[arg(required = true)]
        csvs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { config, overrides } => {
            let overrides = parse_overrides(&overrides)?;
            let config = parse_config(config.as_deref(), &overrides)?;
            let outcome = cmd_train(&config)?;
            if let Some(last) = outcome.rows.last() {
                println!(
                    "done: {} env steps, {} critic updates, final eval {:.2} ± {:.2}, metrics in {}",
                    last.env_step,
                    outcome.critic_updates,
                    last.eval_return_mean,
                    last.eval_return_std,
                    config.out_dir.display()
                );
            }
        }
        Command::Eval { checkpoint, env, episodes, seed } => {
            let (mean, std) = cmd_eval(&checkpoint, env, episodes, seed)?;
            println!("{mean:.4} ± {std:.4}");
        }
        Command::Plot { csvs, out } => {
            cmd_plot(&csvs, &out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
