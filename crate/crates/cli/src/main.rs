use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use helmsrc_cli::commands::{peak_table, reconstruct, simulate};
use helmsrc_cli::experiments::render_report;
use helmsrc_cli::{run_experiment, CliError, CliResult, ExperimentConfig, ExperimentName, RunOptions};

/// Locate Helmholtz sources from Cauchy data on a closed surface.
#[derive(Parser)]
#[command(name = "helmsrc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radiate the configured sources, add noise and write the Cauchy data.
    Simulate {
        config: PathBuf,
        /// Override a config key, e.g. `--set noise.seed=3`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (defaults to `output_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Image a Cauchy data file and report the significant peaks.
    Reconstruct {
        config: PathBuf,
        /// Data file (defaults to `input.data` from the config).
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in experiment: table1, table2, table3, fig1 or fig2.
    Experiment {
        name: String,
        /// Number of noisy realizations (20 for tables, 1 for figures).
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Parent directory; results go to `<out>/<name>/`.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { config, overrides, out } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            for f in simulate(&cfg, &out)? {
                println!("wrote {}", out.join(f).display());
            }
            Ok(())
        }
        Command::Reconstruct { config, data, overrides, out } => {
            let cfg = ExperimentConfig::load(&config, &overrides)?;
            let data = data
                .or_else(|| cfg.input.as_ref().map(|i| PathBuf::from(&i.data)))
                .ok_or_else(|| CliError::Config("input.data: required unless --data is given".into()))?;
            let out = out.unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
            let rec = reconstruct(&cfg, &data, &out)?;
            print!("{}", peak_table(&rec));
            eprintln!("imaging took {:.3} s; results in {}", rec.result.elapsed().as_secs_f64(), out.display());
            Ok(())
        }
        Command::Experiment { name, seeds, overrides, out } => {
            let name: ExperimentName = name.parse()?;
            let start = Instant::now();
            let opts = RunOptions { seeds, overrides, ..Default::default() };
            let report = run_experiment(name, &opts, Some(&out))?;
            print!("{}", render_report(&report));
            eprintln!("{} finished in {:.1} s; results in {}", name.as_str(), start.elapsed().as_secs_f64(), out.join(name.as_str()).display());
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Acceptance(format!("{}: acceptance tolerances not met", name.as_str())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
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
