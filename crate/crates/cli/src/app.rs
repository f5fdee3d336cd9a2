//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use partsat::cnf::{eval_formula, Assignment, Lit, Var};
use partsat::itp::ItpSystem;
use partsat::oracle::{brute_force, MAX_BRUTE_VARS};
use partsat::reconcile::ReconcileResult;

use crate::record::{write_bench, write_runs, Verdict};
use crate::run::{bench, file_label, read_formula, run_one, sweep, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "partsat", version, about = "Partitioned SAT solving by interpolant reconciliation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one DIMACS file.
    Solve(SolveArgs),
    /// Solve one file for a range of partition counts and emit CSV.
    Sweep(SweepArgs),
    /// Solve every `.cnf` file in a directory and emit CSV.
    Bench(BenchArgs),
    /// Decide a small file by exhaustive enumeration.
    Brute(BruteArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Wall-clock budget per run, in seconds.
    #[arg(long, default_value_t = 3600.0, allow_negative_numbers = true)]
    pub timeout: f64,
    /// Seed for completing shared variables the global formula leaves free
    /// (they are set false without a seed).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Check the refutation of the global formula before answering UNSAT.
    #[arg(long)]
    pub check_proofs: bool,
    /// Solve the partitions of a round on multiple threads.
    #[arg(long)]
    pub parallel: bool,
}

impl Common {
    fn config(&self, system: ItpSystem) -> anyhow::Result<RunConfig> {
        if !(self.timeout.is_finite() && self.timeout >= 0.0) {
            bail!("invalid timeout {}", self.timeout);
        }
        Ok(RunConfig {
            system,
            timeout: Duration::from_secs_f64(self.timeout),
            seed: self.seed,
            parallel: self.parallel,
            check_proofs: self.check_proofs,
            keep_interpolants: false,
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// DIMACS file, or `-` for standard input.
    pub file: PathBuf,
    #[arg(short = 'k', long, default_value_t = 1)]
    pub partitions: usize,
    #[arg(long, default_value = "mcmillan")]
    pub itp: ItpSystem,
    #[command(flatten)]
    pub common: Common,
    /// Check a SAT model against the input before printing it.
    #[arg(long)]
    pub verify_model: bool,
    /// Print run statistics as comment lines.
    #[arg(long)]
    pub stats: bool,
    /// Write the interpolants in Graphviz format.
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub file: PathBuf,
    /// Partition counts as `A..B` (inclusive) or a single number.
    #[arg(short = 'k', long, value_parser = parse_range)]
    pub partitions: RangeInclusive<usize>,
    #[arg(long, default_value = "mcmillan")]
    pub itp: ItpSystem,
    #[command(flatten)]
    pub common: Common,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "OUT")]
    pub csv: Option<PathBuf>,
    /// Runs to execute concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    pub dir: PathBuf,
    /// Comma-separated partition counts.
    #[arg(short = 'k', long, value_delimiter = ',', default_value = "1")]
    pub partitions: Vec<usize>,
    /// Comma-separated interpolation systems.
    #[arg(long, value_delimiter = ',', default_value = "mcmillan")]
    pub itp: Vec<ItpSystem>,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_name = "OUT")]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct BruteArgs {
    pub file: PathBuf,
}

pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("invalid partition count `{}`", t));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (num(a)?, num(b.trim_start_matches('='))?),
        None => {
            let k = num(s)?;
            (k, k)
        }
    };
    if a < 1 || a > b {
        return Err(format!("invalid partition range `{}`", s));
    }
    Ok(a..=b)
}

fn write_model(out: &mut dyn Write, model: &Assignment, num_vars: u32) -> std::io::Result<()> {
    let lits: Vec<String> = (1..=num_vars)
        .map(|i| {
            let v = Var::new(i);
            Lit::new(v, model.get(v).unwrap_or(false)).to_dimacs().to_string()
        })
        .collect();
    for chunk in lits.chunks(16) {
        writeln!(out, "v {}", chunk.join(" "))?;
    }
    writeln!(out, "v 0")
}

fn open_output<'a>(path: &Option<PathBuf>, out: &'a mut dyn Write) -> anyhow::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(out),
    })
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let f = read_formula(&args.file)?;
    let cfg = RunConfig {
        keep_interpolants: args.dot.is_some(),
        ..args.common.config(args.itp)?
    };
    let (record, report) = run_one(&f, &file_label(&args.file), args.partitions, &cfg)?;
    if args.stats {
        writeln!(out, "c file {}", record.file)?;
        writeln!(out, "c vars {} clauses {}", f.num_vars, f.clauses.len())?;
        writeln!(out, "c partitions {} system {}", args.partitions, args.itp)?;
        if let Some(d) = &report.decomposition {
            writeln!(out, "c shared vars {}", d.shared_vars().len())?;
        }
        writeln!(out, "c rounds {}", report.rounds)?;
        writeln!(out, "c g clauses {}", report.g_clauses)?;
        writeln!(out, "c peak interpolant gates {}", report.peak_itp_nodes)?;
        for round in &report.round_stats {
            let failed = round.partitions.iter().filter(|p| p.failed).count();
            let slowest = round.partitions.iter().map(|p| p.seconds).fold(0.0, f64::max);
            writeln!(
                out,
                "c round {} refused {} g_clauses {} g_seconds {:.3} slowest_partition {:.3}",
                round.round, failed, round.g_clauses, round.g_seconds, slowest
            )?;
        }
        writeln!(out, "c seconds {:.3}", record.seconds)?;
    }
    if let Some(path) = &args.dot {
        let roots: Vec<_> = report.interpolants.iter().map(|i| i.interpolant).collect();
        std::fs::write(path, report.rbc.to_dot(&roots)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    match &report.result {
        ReconcileResult::Sat(model) => {
            if args.verify_model && eval_formula(&f, model) != Ok(true) {
                bail!("model verification failed");
            }
            writeln!(out, "s SATISFIABLE")?;
            write_model(out, model, f.num_vars)?;
        }
        ReconcileResult::Unsat => writeln!(out, "s UNSATISFIABLE")?,
        ReconcileResult::ResourcesExhausted(_) => writeln!(out, "s UNKNOWN")?,
    }
    Ok(record.verdict.exit_code())
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let f = read_formula(&args.file)?;
    let cfg = args.common.config(args.itp)?;
    let rows = sweep(&f, &file_label(&args.file), args.partitions.clone(), &cfg, args.jobs)?;
    write_runs(open_output(&args.csv, out)?, &rows)?;
    Ok(0)
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    if args.partitions.iter().any(|&k| k < 1) {
        bail!("partition counts start at 1");
    }
    let cfg = args.common.config(ItpSystem::McMillan)?;
    let rows = bench(&args.dir, &args.partitions, &args.itp, &cfg, args.jobs)?;
    write_bench(open_output(&args.csv, out)?, &rows)?;
    Ok(0)
}

fn cmd_brute(args: &BruteArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let f = read_formula(&args.file)?;
    if f.num_vars > MAX_BRUTE_VARS {
        bail!("{} variables exceed the enumeration limit of {}", f.num_vars, MAX_BRUTE_VARS);
    }
    Ok(match brute_force(&f) {
        Some(model) => {
            writeln!(out, "s SATISFIABLE")?;
            write_model(out, &model, f.num_vars)?;
            Verdict::Sat.exit_code()
        }
        None => {
            writeln!(out, "s UNSATISFIABLE")?;
            Verdict::Unsat.exit_code()
        }
    })
}

/// Runs the parsed command and returns the process exit status.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> anyhow::Result<i32> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Sweep(a) => cmd_sweep(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Brute(a) => cmd_brute(a, out),
    }
}
