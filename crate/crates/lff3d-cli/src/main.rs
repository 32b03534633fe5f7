use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lff3d-cli",
    version,
    about = "Deterministic formation-control scenario runner, verifier, and plot-data exporter"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write log.csv, summary.toml, and a config echo.
    Simulate {
        /// Scenario config file (TOML).
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in preset name instead of a config file.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the numerical verification suite and print one line per check.
    Verify {
        /// Multiply every check tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Seed for the sample generator.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Smaller sample counts for a fast smoke pass.
        #[arg(long)]
        quick: bool,
    },
    /// Project a tick log into per-panel CSVs and SVG charts.
    Plotdata {
        /// Path to a log.csv written by simulate.
        #[arg(long)]
        log: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate { config, preset, out } => {
            match lff3d_cli::simulate_command(config.as_deref(), preset.as_deref(), &out) {
                Ok(artifacts) => {
                    println!("log:     {}", artifacts.log_path.display());
                    println!("summary: {}", artifacts.summary_path.display());
                    println!("config:  {}", artifacts.config_path.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Verify { tol_scale, seed, quick } => {
            let (report, rendered) = lff3d_cli::verify_command(tol_scale, seed, quick);
            print!("{rendered}");
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Plotdata { log, out } => match lff3d_cli::plotdata_command(&log, &out) {
            Ok(paths) => {
                for path in paths {
                    println!("{}", path.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
