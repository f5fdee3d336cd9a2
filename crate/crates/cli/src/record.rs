//! Result rows and their CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const SWEEP_HEADER: &str = "file,k,system,verdict,seconds,rounds,g_clauses,itp_nodes";
pub const BENCH_HEADER: &str = "file,k,system,verdict,seconds,rounds,g_clauses,itp_nodes,best_k";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
    Error,
}

impl Verdict {
    /// SAT-competition exit status.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Sat => 10,
            Verdict::Unsat => 20,
            Verdict::Unknown => 0,
            Verdict::Error => 1,
        }
    }

    pub fn is_solved(self) -> bool {
        matches!(self, Verdict::Sat | Verdict::Unsat)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown => "UNKNOWN",
            Verdict::Error => "ERROR",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "SAT" => Ok(Verdict::Sat),
            "UNSAT" => Ok(Verdict::Unsat),
            "UNKNOWN" => Ok(Verdict::Unknown),
            "ERROR" => Ok(Verdict::Error),
            _ => Err(format!("unknown verdict `{}`", s)),
        }
    }
}

/// One solver run. `k` is `*` on bench summary rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub file: String,
    pub k: String,
    pub system: String,
    pub verdict: Verdict,
    #[serde(serialize_with = "three_decimals")]
    pub seconds: f64,
    pub rounds: u64,
    pub g_clauses: usize,
    pub itp_nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub run: RunRecord,
    pub best_k: Option<usize>,
}

fn three_decimals<S: serde::Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{:.3}", x))
}

/// Rounds to whole milliseconds.
pub fn millis(seconds: f64) -> f64 {
    (seconds * 1000.0).round() / 1000.0
}

pub fn write_runs<W: Write>(out: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(SWEEP_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_runs<R: Read>(input: R) -> csv::Result<Vec<RunRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn write_bench<W: Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BENCH_HEADER.split(','))?;
    for r in records {
        let run = &r.run;
        w.write_record([
            run.file.clone(),
            run.k.clone(),
            run.system.clone(),
            run.verdict.to_string(),
            format!("{:.3}", run.seconds),
            run.rounds.to_string(),
            run.g_clauses.to_string(),
            run.itp_nodes.to_string(),
            r.best_k.map(|k| k.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_bench<R: Read>(input: R) -> anyhow::Result<Vec<BenchRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        out.push(BenchRecord {
            run: RunRecord {
                file: field(0).to_string(),
                k: field(1).to_string(),
                system: field(2).to_string(),
                verdict: field(3).parse().map_err(anyhow::Error::msg)?,
                seconds: field(4).parse()?,
                rounds: field(5).parse()?,
                g_clauses: field(6).parse()?,
                itp_nodes: field(7).parse()?,
            },
            best_k: match field(8) {
                "" => None,
                k => Some(k.parse()?),
            },
        });
    }
    Ok(out)
}
