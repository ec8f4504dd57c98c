use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use groupforge::experiment::{emit_dataset, run, ExperimentConfig, RunContext};
use groupforge::Error;

#[derive(Parser)]
#[command(
    name = "groupforge",
    version,
    about = "Class-balancing and worst-group accuracy experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the recipe described by a JSON config.
    Run {
        config: PathBuf,
        /// Output root; defaults to the config's `output_dir`, then `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent runs.
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write the generated training set as CSV.
        #[arg(long, alias = "emit")]
        emit_dataset: Option<PathBuf>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Divergence { .. } => 2,
        Error::Io(_) | Error::Csv(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Run {
        config,
        out,
        jobs,
        emit_dataset: emit,
    } = cli.command;

    let result = ExperimentConfig::load(&config).and_then(|cfg| {
        if let Some(path) = &emit {
            emit_dataset(&cfg, path)?;
            eprintln!("wrote {}", path.display());
        }
        let out = out
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        let mut ctx = RunContext::new(out);
        if let Some(j) = jobs {
            ctx = ctx.with_jobs(j);
        }
        run(&cfg, &ctx)
    });
    match result {
        Ok(output) => {
            for row in output.summary.iter().filter(|r| r.stat == "mean") {
                println!(
                    "{:<28} final_wga {:.4}  peak_wga {:.4}  final_avg {:.4}",
                    row.label, row.final_wga, row.peak_wga, row.final_avg_acc
                );
            }
            println!("results in {}", output.dir.display());
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
