use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hmsos_core::harness::{
    self, convergence, load_dir, ExperimentConfig, Profile, Report, ReportFormat,
};
use hmsos_core::Error;

#[derive(Parser)]
#[command(name = "hmsos", version, about = "HMS / HMS-OS benchmark experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (algorithm, function, seed) cell of an experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides `parallelism` from the config.
        #[arg(long)]
        parallelism: Option<usize>,
        /// Supplies `dimension` and `runs` when the config omits them.
        #[arg(long, value_enum, default_value = "desk")]
        profile: ProfileArg,
    },
    /// Rebuild summary, rank and signed-rank tables from trace files.
    Report {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Output directory (defaults to the parent of the trace directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit convergence curves for one function.
    Convergence {
        #[arg(long)]
        function: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "results/traces")]
        traces: PathBuf,
        /// Comma-separated algorithm labels (default: all).
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            parallelism,
            profile,
        } => {
            let profile = match profile {
                ProfileArg::Desk => Profile::Desk,
                ProfileArg::Paper => Profile::Paper,
            };
            let mut cfg = match ExperimentConfig::load(&config, profile) {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(p) = parallelism {
                cfg.parallelism = p;
            }
            match harness::run_experiment(&cfg) {
                Ok(outcome) => {
                    for w in &outcome.report.warnings {
                        eprintln!("warning: {w}");
                    }
                    for p in &outcome.written {
                        println!("{}", p.display());
                    }
                    println!("{} cells, {} failed", outcome.cells, outcome.failed);
                    if outcome.failed > 0 {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Report {
            traces,
            format,
            out,
        } => {
            let out = out.unwrap_or_else(|| traces.parent().map(PathBuf::from).unwrap_or_default());
            let format = match format {
                FormatArg::Csv => ReportFormat::Csv,
                FormatArg::Json => ReportFormat::Json,
            };
            let result = load_dir(&traces)
                .and_then(|t| Report::from_traces(&t))
                .and_then(|r| r.write(&out, format).map(|paths| (r, paths)));
            match result {
                Ok((report, paths)) => {
                    for p in paths {
                        println!("{}", p.display());
                    }
                    let failed: usize = report.summary.iter().map(|c| c.failed).sum();
                    if failed > 0 {
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => exit_for(&e),
            }
        }
        Command::Convergence {
            function,
            out,
            traces,
            algorithms,
            grid,
        } => match load_dir(&traces) {
            Ok(t) => {
                let table = convergence(&t, &function, &algorithms, grid);
                for w in &table.warnings {
                    eprintln!("warning: {w}");
                }
                match table.write(&out) {
                    Ok(()) => {
                        println!("{}", out.display());
                        ExitCode::SUCCESS
                    }
                    Err(e) => exit_for(&e),
                }
            }
            Err(e) => exit_for(&e),
        },
    }
}
