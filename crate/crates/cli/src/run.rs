//! Single runs, partition sweeps and benchmark tables.

use std::fs::File;
use std::io::BufReader;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use partsat::cnf::{parse_dimacs, Formula};
use partsat::itp::ItpSystem;
use partsat::reconcile::{reconcile, Completion, ReconcileError, ReconcileOptions, ReconcileReport, ReconcileResult};
use rayon::prelude::*;

use crate::record::{millis, BenchRecord, RunRecord, Verdict};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: ItpSystem,
    pub timeout: Duration,
    /// Seeds random completion of unconstrained shared variables.
    pub seed: Option<u64>,
    pub parallel: bool,
    pub check_proofs: bool,
    pub keep_interpolants: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: ItpSystem::McMillan,
            timeout: Duration::from_secs(3600),
            seed: None,
            parallel: false,
            check_proofs: false,
            keep_interpolants: false,
        }
    }
}

impl RunConfig {
    pub fn options(&self) -> ReconcileOptions {
        ReconcileOptions {
            system: self.system,
            timeout: Some(self.timeout),
            completion: match self.seed {
                Some(seed) => Completion::Random { seed },
                None => Completion::False,
            },
            parallel: self.parallel,
            check_proofs: self.check_proofs,
            keep_interpolants: self.keep_interpolants,
            ..ReconcileOptions::default()
        }
    }
}

pub fn verdict_of(result: &ReconcileResult) -> Verdict {
    match result {
        ReconcileResult::Sat(_) => Verdict::Sat,
        ReconcileResult::Unsat => Verdict::Unsat,
        ReconcileResult::ResourcesExhausted(_) => Verdict::Unknown,
    }
}

pub fn read_formula(path: &Path) -> anyhow::Result<Formula> {
    if path.as_os_str() == "-" {
        return Ok(parse_dimacs(std::io::stdin().lock())?);
    }
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_dimacs(BufReader::new(file)).with_context(|| format!("cannot parse {}", path.display()))
}

pub fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Solves `f` with `k` partitions and summarizes the run.
pub fn run_one(f: &Formula, file: &str, k: usize, cfg: &RunConfig) -> Result<(RunRecord, ReconcileReport), ReconcileError> {
    let start = Instant::now();
    let report = reconcile(f, k, &cfg.options())?;
    let elapsed = start.elapsed().as_secs_f64();
    let verdict = verdict_of(&report.result);
    let seconds = if verdict == Verdict::Unknown {
        cfg.timeout.as_secs_f64()
    } else {
        elapsed
    };
    let record = RunRecord {
        file: file.to_string(),
        k: k.to_string(),
        system: cfg.system.name().to_string(),
        verdict,
        seconds: millis(seconds),
        rounds: report.rounds,
        g_clauses: report.g_clauses,
        itp_nodes: report.peak_itp_nodes,
    };
    Ok((record, report))
}

pub fn error_record(file: &str, k: &str, system: ItpSystem) -> RunRecord {
    RunRecord {
        file: file.to_string(),
        k: k.to_string(),
        system: system.name().to_string(),
        verdict: Verdict::Error,
        seconds: 0.0,
        rounds: 0,
        g_clauses: 0,
        itp_nodes: 0,
    }
}

fn pool(jobs: usize) -> anyhow::Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?)
}

fn check_k(f: &Formula, k: usize) -> anyhow::Result<()> {
    if k < 1 || (k > f.clauses.len() && !f.clauses.is_empty()) {
        bail!("cannot split {} clauses into {} partitions", f.clauses.len(), k);
    }
    Ok(())
}

/// One row per `k` in `ks`, in order.
pub fn sweep(
    f: &Formula,
    file: &str,
    ks: RangeInclusive<usize>,
    cfg: &RunConfig,
    jobs: usize,
) -> anyhow::Result<Vec<RunRecord>> {
    if *ks.start() < 1 {
        bail!("partition counts start at 1");
    }
    let ks: Vec<usize> = ks.collect();
    for &k in &ks {
        check_k(f, k)?;
    }
    let rows: Result<Vec<RunRecord>, ReconcileError> =
        pool(jobs)?.install(|| ks.par_iter().map(|&k| run_one(f, file, k, cfg).map(|r| r.0)).collect());
    Ok(rows?)
}

/// `.cnf` files directly inside `dir`, sorted by name.
pub fn bench_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("cannot read {}", dir.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "cnf") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Summary row for one (file, system) group: the fastest solved run, ties
/// going to the smaller `k`.
pub fn summarize(rows: &[RunRecord], budget: Duration) -> BenchRecord {
    let first = &rows[0];
    let best = rows
        .iter()
        .filter(|r| r.verdict.is_solved())
        .filter_map(|r| r.k.parse::<usize>().ok().map(|k| (r, k)))
        .min_by(|(a, ka), (b, kb)| a.seconds.total_cmp(&b.seconds).then(ka.cmp(kb)));
    let run = match best {
        Some((r, _)) => RunRecord { k: "*".into(), ..r.clone() },
        None => RunRecord {
            k: "*".into(),
            verdict: if rows.iter().all(|r| r.verdict == Verdict::Error) {
                Verdict::Error
            } else {
                Verdict::Unknown
            },
            seconds: millis(budget.as_secs_f64()),
            rounds: 0,
            g_clauses: 0,
            itp_nodes: 0,
            ..first.clone()
        },
    };
    BenchRecord {
        run,
        best_k: best.map(|(_, k)| k),
    }
}

/// Cross product of files, systems and partition counts. Each (file, system)
/// group is followed by its summary row.
pub fn bench(
    dir: &Path,
    ks: &[usize],
    systems: &[ItpSystem],
    base: &RunConfig,
    jobs: usize,
) -> anyhow::Result<Vec<BenchRecord>> {
    let files = bench_files(dir)?;
    let formulas: Vec<(String, Option<Formula>)> = files
        .iter()
        .map(|p| (file_label(p), read_formula(p).ok()))
        .collect();
    let tasks: Vec<(usize, ItpSystem, usize)> = (0..files.len())
        .flat_map(|fi| systems.iter().flat_map(move |&s| ks.iter().map(move |&k| (fi, s, k))))
        .collect();
    let rows: Vec<RunRecord> = pool(jobs)?.install(|| {
        tasks
            .par_iter()
            .map(|&(fi, system, k)| {
                let (name, f) = &formulas[fi];
                let cfg = RunConfig { system, ..base.clone() };
                match f {
                    Some(f) if check_k(f, k).is_ok() => match run_one(f, name, k, &cfg) {
                        Ok((r, _)) => r,
                        Err(_) => error_record(name, &k.to_string(), system),
                    },
                    _ => error_record(name, &k.to_string(), system),
                }
            })
            .collect()
    });
    let mut out = Vec::with_capacity(rows.len() + files.len() * systems.len());
    for group in rows.chunks(ks.len().max(1)) {
        out.extend(group.iter().map(|r| BenchRecord { run: r.clone(), best_k: None }));
        if !group.is_empty() {
            out.push(summarize(group, base.timeout));
        }
    }
    Ok(out)
}
