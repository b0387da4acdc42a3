use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use quench_thermo_cli::{load, run};

/// Reproducible quench-thermodynamics experiments.
#[derive(Debug, Parser)]
#[command(name = "quench-thermo", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampler seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Built-in configuration: fig2, fig3-low, fig3-high, fig4, fig4a.
    #[arg(long)]
    preset: Option<String>,
    /// Only warnings and errors.
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = load(
        args.config.as_deref(),
        args.preset.as_deref(),
        args.out.as_deref(),
        args.seed,
    )
    .and_then(|cfg| {
        log::info!(
            "running {} into {}",
            cfg.experiment.name(),
            cfg.output_dir.display()
        );
        run(&cfg)
    });
    match result {
        Ok(manifest) => {
            if !args.quiet {
                println!(
                    "{} done in {:.2} s: {}",
                    manifest.experiment,
                    manifest.wall_time_s,
                    manifest.files.join(", ")
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
