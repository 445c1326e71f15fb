use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use martin_cli::{ConfigError, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "martincap", version, about = "Martin capacity experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in a JSON or TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Print the parameter schema of an experiment.
    Describe { name: String },
    /// List experiment names.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Describe { name } => match martin_cli::experiments::describe(&name) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::List => {
            for n in martin_cli::experiments::NAMES {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out, format } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            cfg.seed = seed.or(cfg.seed);
            cfg.out = out.or(cfg.out);
            cfg.format = format.unwrap_or(cfg.format);
            let record = match martin_cli::run(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(if e.downcast_ref::<ConfigError>().is_some() { 2 } else { 3 });
                }
            };
            if let Err(e) = martin_cli::emit(&record, cfg.format, cfg.out.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(3);
            }
            let verdict = match record.passed {
                Some(true) => "all asserted inequalities hold",
                Some(false) => "ASSERTED INEQUALITY FAILED",
                None => "no inequalities asserted",
            };
            eprintln!("{}: {} rows, {verdict}, {:.2}s", cfg.experiment, record.rows.len(), record.wall_clock_seconds);
            if record.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) }
        }
    }
}
