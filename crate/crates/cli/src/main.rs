use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use grace_cli::bench::{self, DEFAULT_SIZES, MIN_TIMED_STEPS};
use grace_cli::run::{self, RunOptions};
use grace_cli::validate::{self, Sp4Field, ValidateOptions};
use grace_cli::{exit, io_error, CliError, THREADS_ENV};

#[derive(Parser)]
#[command(name = "grace", version, about = "Finite-difference micromagnetic LLG simulator")]
struct Cli {
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true, env = THREADS_ENV)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an input file
    Run {
        input: PathBuf,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Also write a magnetization snapshot at every output step
        #[arg(long)]
        snapshots: bool,
    },
    /// Time Euler steps of the cubic benchmark sample
    Bench {
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = MIN_TIMED_STEPS as u64,
              value_parser = clap::value_parser!(u64).range(MIN_TIMED_STEPS as u64..))]
        steps: u64,
        /// Also write the report as CSV to this file
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run standard problem #4 against the bundled reference curves
    Validate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        field: u8,
        /// 100×25×3 grid of 5×5×1 nm cells
        #[arg(long)]
        coarse: bool,
        #[arg(short, long, default_value = ".")]
        output: PathBuf,
        /// Time step in ns
        #[arg(long, default_value_t = validate::DEFAULT_DT * 1e9)]
        dt: f64,
    },
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Run {
            input,
            output,
            snapshots,
        } => {
            let summary = run::cmd_run(&RunOptions {
                input,
                output_dir: output,
                snapshots,
            })?;
            let m = summary.final_average;
            println!("wrote {} rows to {}", summary.rows, summary.trajectory.display());
            if !summary.snapshots.is_empty() {
                println!("wrote {} snapshots", summary.snapshots.len());
            }
            println!("gnuplot script: {}", summary.gnuplot.display());
            println!("final <M>/Ms: ({:.6}, {:.6}, {:.6})", m[0], m[1], m[2]);
            Ok(exit::SUCCESS)
        }
        Command::Bench { sizes, steps, csv } => {
            let report = bench::cmd_bench(&sizes, steps as usize)?;
            print!("{}", report.to_table());
            println!();
            print!("{}", report.to_csv());
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv()).map_err(|e| io_error(&path, e))?;
            }
            Ok(exit::SUCCESS)
        }
        Command::Validate {
            field,
            coarse,
            output,
            dt,
        } => {
            let field = Sp4Field::from_number(field).expect("clap restricts the range");
            let mut options = ValidateOptions::new(field, coarse, output);
            options.dt = dt * 1e-9;
            let report = validate::cmd_validate(&options)?;
            print!("{}", report.summary());
            Ok(if report.passed() {
                exit::SUCCESS
            } else {
                exit::CHECK_FAILED
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("grace: cannot start {n} threads: {e}");
        }
    }
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("grace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
