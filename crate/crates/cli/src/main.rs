use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gphl_cli::{load, output_dir, record_error, run_config, validate, Overrides};

#[derive(Parser)]
#[command(name = "gphl", version, about = "Run numerical experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment and write CSV + JSON results.
    Run(Target),
    /// Check the config and predict memory use without executing.
    Validate(Target),
}

#[derive(Args)]
struct Target {
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed_override: Option<u64>,
}

impl Target {
    fn overrides(&self) -> Overrides {
        Overrides {
            out_dir: self.out_dir.clone(),
            workers: self.workers,
            seed: self.seed_override,
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate(t) => {
            print!("{}", validate(&t.config, &t.overrides()));
            ExitCode::SUCCESS
        }
        Command::Run(t) => {
            let ov = t.overrides();
            let result = load(&t.config, &ov).and_then(|cfg| {
                let dir = output_dir(Some(&cfg), &ov);
                run_config(&cfg, &dir)
            });
            match result {
                Ok((csv, json)) => {
                    println!("{}", csv.display());
                    println!("{}", json.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}", e.to_json());
                    let cfg = load(&t.config, &ov).ok();
                    record_error(&output_dir(cfg.as_ref(), &ov), &e);
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
