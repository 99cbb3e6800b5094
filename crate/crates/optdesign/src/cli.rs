//! Argument parsing and the exit-code contract: 0 success, 2 validation
//! error, 3 non-convergence or inconclusive search, 1 example-suite mismatch.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::files::ModelFile;
use crate::job::{self, Command, Job, Outcome};
use crate::report::{write_json, write_text};
use crate::suite;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "OPTDESIGN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "optdesign", version, about = "phi_p-optimal approximate designs, certificates and admissibility audits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args)]
pub struct Io {
    /// Model-spec JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Directory for the JSON report and CSV traces; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Crit {
    /// D, A, E, T or p:<real>.
    #[arg(long, default_value = "D")]
    pub criterion: String,
    /// Slack in the normality inequality; certification uses twice this.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Compute an optimal design on the candidate grid.
    Solve {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        crit: Crit,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Starting design file instead of spread points.
        #[arg(long)]
        init_design: Option<PathBuf>,
        /// Also round the design to this many runs.
        #[arg(long)]
        round: Option<usize>,
    },
    /// Check the equivalence-theorem conditions for a design.
    Certify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        crit: Crit,
        #[arg(long)]
        design: PathBuf,
    },
    /// Supporting hyperplanes and length groups of a certified design.
    Geometry {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        crit: Crit,
        #[arg(long)]
        design: PathBuf,
    },
    /// Repeated lengths in the induced design space.
    Garza {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-9)]
        norm_tol: f64,
    },
    /// Search for a Loewner-dominating design.
    Audit {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        design: PathBuf,
        /// axis:<j> or linear:<a1>,<a2>; audits slice by slice.
        #[arg(long)]
        slice_map: Option<String>,
        /// Audit the two marginal designs instead.
        #[arg(long)]
        product: bool,
        /// Ascent steps per penalty level.
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Split a design into slices of a scalar map.
    Decompose {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        slice_map: String,
    },
    /// Run the bundled example suite against its stored values.
    Examples {
        /// Glob on example names, e.g. "linear2-*".
        #[arg(long)]
        filter: Option<String>,
        /// Suite file replacing the bundled one.
        #[arg(long)]
        suite: Option<PathBuf>,
    },
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

fn job(command: Command, io: &Io) -> Result<Job> {
    Ok(Job::new(command, ModelFile::read(&io.model)?))
}

fn with_crit(mut j: Job, c: &Crit) -> Job {
    j.criterion = Some(c.criterion.clone());
    j.tol = c.tol;
    j
}

/// Builds the job for a model command, `None` for `examples`.
pub fn build_job(cmd: &Cmd) -> Result<Option<(Job, Option<PathBuf>)>> {
    let (j, io) = match cmd {
        Cmd::Solve { io, crit, max_iters, seed, init_design, round } => {
            let mut j = with_crit(job(Command::Solve, io)?, crit);
            j.max_iters = *max_iters;
            j.seed = *seed;
            j.round = *round;
            j.init_design = init_design.as_deref().map(read_json).transpose()?;
            (j, io)
        }
        Cmd::Certify { io, crit, design } | Cmd::Geometry { io, crit, design } => {
            let command = if matches!(cmd, Cmd::Certify { .. }) { Command::Certify } else { Command::Geometry };
            let mut j = with_crit(job(command, io)?, crit);
            j.design = Some(read_json(design)?);
            (j, io)
        }
        Cmd::Garza { io, norm_tol } => {
            let mut j = job(Command::Garza, io)?;
            j.norm_tol = Some(*norm_tol);
            (j, io)
        }
        Cmd::Audit { io, design, slice_map, product, budget } => {
            let mut j = job(Command::Audit, io)?;
            j.design = Some(read_json(design)?);
            j.slice_map = slice_map.clone();
            j.product = *product;
            j.budget = *budget;
            (j, io)
        }
        Cmd::Decompose { io, design, slice_map } => {
            let mut j = job(Command::Decompose, io)?;
            j.design = Some(read_json(design)?);
            j.slice_map = Some(slice_map.clone());
            (j, io)
        }
        Cmd::Examples { .. } => return Ok(None),
    };
    Ok(Some((j, io.out.clone())))
}

fn emit(command: Command, out: &Option<PathBuf>, o: &Outcome) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            write_json(&dir.join(format!("{}.json", command.name())), &o.report)?;
            for (name, text) in &o.traces {
                write_text(&dir.join(name), text)?;
            }
        }
        None => println!("{}", serde_json::to_string_pretty(&o.report)?),
    }
    Ok(())
}

fn threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|n| *n > 0)
}

fn examples(filter: Option<&str>, suite_file: Option<&Path>) -> Result<i32> {
    let text = match suite_file {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?,
        None => suite::BUNDLED.to_string(),
    };
    let entries = suite::parse(&text)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads() {
        pool = pool.num_threads(n);
    }
    let rows = pool.build()?.install(|| suite::run_suite(&entries, filter));
    print!("{}", suite::table(&rows));
    Ok(if rows.iter().all(|r| r.passed) { 0 } else { 1 })
}

/// Runs one invocation and returns the process exit code.
pub fn main(cli: Cli) -> i32 {
    let result = match &cli.command {
        Cmd::Examples { filter, suite } => examples(filter.as_deref(), suite.as_deref()),
        cmd => build_job(cmd).and_then(|built| {
            let (j, out) = built.expect("model command");
            let o = job::run(&j)?;
            emit(j.command, &out, &o)?;
            for d in &o.diagnostics {
                eprintln!("optdesign: {d}");
            }
            Ok(o.status.exit_code())
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("optdesign: error: {e:#}");
        2
    })
}
