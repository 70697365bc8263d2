use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pfs_cli::commands::{self, Output, TransformMode, VerifyFlags};
use pfs_cli::document::CriterionDoc;
use pfs_cli::CliError;
use pfs_core::oracle::GeneratorConfig;
use pfs_core::Rational;

/// Preemptive parallel-machine scheduling with PFS-like schedules.
#[derive(Parser)]
#[command(name = "pfs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CriterionArgs {
    /// sum_cj, sum_wj_cj, sum_tj, sum_wj_tj, cmax, lmax or wulj; overrides the instance's criterion.
    #[arg(long)]
    criterion: Option<String>,
    /// Common due date for wulj.
    #[arg(long)]
    common_due: Option<Rational>,
}

impl CriterionArgs {
    fn parse(&self) -> Result<Option<CriterionDoc>, CliError> {
        match (&self.criterion, &self.common_due) {
            (Some(name), due) => Ok(Some(CriterionDoc::shortcut(name, due.clone())?)),
            (None, Some(_)) => Err(CliError::Usage("--common-due needs --criterion wulj".into())),
            (None, None) => Ok(None),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal PFS-like schedule for an instance.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        criterion: CriterionArgs,
        /// Fixed job order, e.g. 2,1,3, instead of the certified one.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check feasibility and, on request, structural properties.
    Verify {
        instance: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        non_delay: bool,
        #[arg(long)]
        vertical: bool,
        #[arg(long)]
        pfs: bool,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Rewrite a schedule.
    Transform {
        instance: PathBuf,
        schedule: PathBuf,
        #[command(subcommand)]
        mode: Mode,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Render a schedule as an SVG Gantt chart.
    Gantt {
        instance: PathBuf,
        schedule: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive reference optimum for small instances.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        criterion: CriterionArgs,
        /// Largest number of jobs to enumerate.
        #[arg(long)]
        oracle_cap: Option<usize>,
    },
    /// Random integer instance.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        max_value: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Co-sort releases and processing times.
        #[arg(long)]
        agreeable: bool,
        #[command(flatten)]
        criterion: CriterionArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Clone, Copy)]
enum Mode {
    /// Left-shift into a non-delay schedule.
    Normalize,
    /// Reassign machines so running jobs sit on M1, M2, ... in order.
    Vertical,
    /// Convert into a non-delay PFS-like schedule.
    Pfs,
    /// Swap the completion order of jobs j < k.
    Exchange { j: usize, k: usize },
}

fn run(cli: Cli) -> Result<(Output, Option<PathBuf>), CliError> {
    Ok(match cli.command {
        Command::Solve { instance, criterion, order, out } => {
            (commands::cmd_solve(&instance, criterion.parse()?.as_ref(), order.as_deref())?, out)
        }
        Command::Verify { instance, schedule, non_delay, vertical, pfs, json } => {
            let flags = VerifyFlags { non_delay, vertical, pfs, json };
            (commands::cmd_verify(&instance, &schedule, flags)?, None)
        }
        Command::Transform { instance, schedule, mode, criterion, out } => {
            let mode = match mode {
                Mode::Normalize => TransformMode::Normalize,
                Mode::Vertical => TransformMode::Vertical,
                Mode::Pfs => TransformMode::Pfs,
                Mode::Exchange { j, k } => TransformMode::Exchange(j, k),
            };
            (commands::cmd_transform(&instance, &schedule, mode, criterion.parse()?.as_ref())?, out)
        }
        Command::Gantt { instance, schedule, out } => (commands::cmd_gantt(&instance, &schedule)?, out),
        Command::Oracle { instance, criterion, oracle_cap } => {
            (commands::cmd_oracle(&instance, criterion.parse()?.as_ref(), oracle_cap)?, None)
        }
        Command::Generate { n, m, max_value, seed, agreeable, criterion, out } => {
            let config = GeneratorConfig { n, m, max_value, seed, agreeable };
            (commands::cmd_generate(&config, criterion.parse()?)?, out)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli).and_then(|(output, out)| {
        if let Some(path) = out {
            commands::write(&path, &output.stdout)?;
        } else {
            print!("{}", output.stdout);
        }
        Ok(output)
    });
    match result {
        Ok(output) => {
            eprint!("{}", output.stderr);
            let _ = std::io::stdout().flush();
            ExitCode::from(output.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
