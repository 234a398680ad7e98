//! Command-line front end: `produce`, `preprocess`, `check` and `solve`.
//!
//! Every command that reaches a verdict prints a report (text or JSON) followed
//! by a single `ANSWER ...` line. Exit status is 0 for `yes`, 2 for `no` or
//! `maybe` and 1 for any error, including an oracle rejected in strict mode.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sortnet::checker::{generate_and_prune_checked_with, CheckConfig, Mode};
use sortnet::generate::Layer;
use sortnet::network::comparator_count;
use sortnet::oracle::{preprocess, read_oracle, write_oracle, OracleFile, OracleKind, OracleLevel};
use sortnet::search::produce_with;
use sortnet::Answer;

/// Sizes of optimal sorting networks for `n <= 10` channels, for reporting.
pub const KNOWN_OPTIMAL_SIZES: [usize; 11] = [0, 0, 1, 3, 5, 9, 12, 16, 19, 25, 29];

pub fn known_optimum(channels: usize) -> Option<usize> {
    KNOWN_OPTIMAL_SIZES.get(channels).copied()
}

#[derive(Debug, Parser)]
#[command(
    name = "sortnet",
    version,
    about = "Optimal-size sorting networks by generate-and-prune"
)]
pub struct Cli {
    /// Worker threads for pruning and validation; results do not depend on it
    #[arg(long, global = true, env = "SORTNET_THREADS")]
    pub threads: Option<usize>,
    /// Report format; the `ANSWER` line always follows it
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search for the optimal size and record the subsumptions used
    Produce(ProduceArgs),
    /// Reorder an oracle and collapse its subsumption chains
    Preprocess(PreprocessArgs),
    /// Replay the search using only a (reduced) oracle
    Check(CheckArgs),
    /// produce, preprocess and check in one run, comparing every layer
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct SizeArgs {
    /// Number of channels
    #[arg(short = 'n')]
    pub channels: usize,
    /// Largest network size to try (default: n(n-1)/2, always enough)
    #[arg(long)]
    pub max_size: Option<usize>,
}

impl SizeArgs {
    fn max_size(&self) -> usize {
        self.max_size
            .unwrap_or_else(|| comparator_count(self.channels))
    }
}

#[derive(Debug, Args)]
pub struct ProduceArgs {
    #[command(flatten)]
    pub size: SizeArgs,
    /// Where to write the raw oracle
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw oracle to read
    #[arg(required_unless_present = "oracle")]
    pub input: Option<PathBuf>,
    #[arg(long, conflicts_with = "input")]
    pub oracle: Option<PathBuf>,
    /// Where to write the reduced oracle
    #[arg(short = 'o', long = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub size: SizeArgs,
    /// Oracle to replay, usually the output of `preprocess`
    #[arg(long)]
    pub oracle: PathBuf,
    /// Abort on the first rejected oracle level (default)
    #[arg(long, conflicts_with = "lenient")]
    pub strict: bool,
    /// Keep the unpruned layer when an oracle level is rejected
    #[arg(long)]
    pub lenient: bool,
    /// Answer `maybe` once a generated layer exceeds this many networks
    #[arg(long)]
    pub max_layer: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub size: SizeArgs,
    /// Where to write the reduced oracle
    #[arg(short = 'o', long = "out")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, PartialEq, Eq)]
pub struct LevelReport {
    pub k: usize,
    pub generated: usize,
    pub kept: usize,
    pub witnesses: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejected: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub name: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub n: usize,
    pub levels: Vec<LevelReport>,
    pub phases: Vec<Phase>,
    pub answer: String,
    pub known_optimum: Option<usize>,
}

impl RunReport {
    fn new(n: usize) -> Self {
        RunReport {
            n,
            levels: Vec::new(),
            phases: Vec::new(),
            answer: String::new(),
            known_optimum: known_optimum(n),
        }
    }

    fn timed<T>(&mut self, name: &'static str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.phases.push(Phase {
            name,
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    fn write_text<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "channels: {}", self.n)?;
        for l in &self.levels {
            write!(
                out,
                "k={:<3} generated={:<8} kept={:<8} witnesses={}",
                l.k, l.generated, l.kept, l.witnesses
            )?;
            if let Some(why) = &l.rejected {
                write!(out, "  rejected: {why}")?;
            }
            writeln!(out)?;
        }
        for p in &self.phases {
            writeln!(out, "{}: {:.3}s", p.name, p.seconds)?;
        }
        if let Some(k) = self.known_optimum {
            writeln!(out, "known optimum: {k}")?;
        }
        Ok(())
    }
}

/// Verdict of a command; maps to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Yes,
    Undecided,
    Done,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Yes | Status::Done => 0,
            Status::Undecided => 2,
        }
    }

    fn of(answer: &Answer) -> Status {
        match answer {
            Answer::Yes { .. } => Status::Yes,
            _ => Status::Undecided,
        }
    }
}

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<Status> {
    if let Some(threads) = cli.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match &cli.command {
        Command::Produce(args) => cmd_produce(args, cli.report, out),
        Command::Preprocess(args) => cmd_preprocess(args, out),
        Command::Check(args) => cmd_check(args, cli.report, out),
        Command::Solve(args) => cmd_solve(args, cli.report, out),
    }
}

fn finish<W: Write>(report: &RunReport, format: ReportFormat, out: &mut W) -> Result<()> {
    match format {
        ReportFormat::Text => report.write_text(out)?,
        ReportFormat::Json => writeln!(out, "{}", serde_json::to_string(report)?)?,
    }
    writeln!(out, "{}", report.answer)?;
    Ok(())
}

fn produce_into(
    size: &SizeArgs,
    report: &mut RunReport,
    mut on_layer: impl FnMut(&Layer),
) -> Result<(Answer, Vec<OracleLevel>)> {
    let production = produce_with(size.channels, size.max_size(), |stats, layer| {
        report.levels.push(LevelReport {
            k: stats.size,
            generated: stats.generated,
            kept: stats.kept,
            witnesses: stats.witnesses,
            rejected: None,
        });
        on_layer(layer);
    })?;
    Ok((production.answer, production.oracle))
}

pub fn cmd_produce<W: Write>(
    args: &ProduceArgs,
    format: ReportFormat,
    out: &mut W,
) -> Result<Status> {
    let mut report = RunReport::new(args.size.channels);
    let (answer, oracle) = report.timed("produce", |r| produce_into(&args.size, r, |_| {}))?;
    if let Some(path) = &args.out {
        let file = OracleFile::new(args.size.channels, OracleKind::Raw, oracle);
        report.timed("write", |_| write_oracle(&file, path))?;
    }
    report.answer = answer.to_string();
    finish(&report, format, out)?;
    Ok(Status::of(&answer))
}

pub fn cmd_preprocess<W: Write>(args: &PreprocessArgs, out: &mut W) -> Result<Status> {
    let input = args
        .input
        .as_ref()
        .or(args.oracle.as_ref())
        .context("no input oracle given")?;
    let raw = read_oracle(input)?;
    let reduced = preprocess(&raw.levels)?;
    let file = OracleFile {
        header: raw.header.map(|h| sortnet::oracle::OracleHeader {
            kind: OracleKind::Reduced,
            ..h
        }),
        levels: reduced.into_iter().map(|l| l.into_level()).collect(),
    };
    write_oracle(&file, &args.out)?;
    let triples: usize = file.levels.iter().map(OracleLevel::len).sum();
    writeln!(
        out,
        "preprocessed {} levels, {triples} reduced triples -> {}",
        file.levels.len(),
        args.out.display()
    )?;
    Ok(Status::Done)
}

fn check_into(
    size: &SizeArgs,
    oracle: &[OracleLevel],
    config: CheckConfig,
    report: &mut RunReport,
    mut on_layer: impl FnMut(&Layer),
) -> Result<Answer> {
    let answer =
        generate_and_prune_checked_with(size.channels, size.max_size(), oracle, config, |lvl| {
            let witnesses = oracle
                .iter()
                .find(|l| l.size == lvl.size)
                .map_or(0, OracleLevel::len);
            report.levels.push(LevelReport {
                k: lvl.size,
                generated: lvl.generated,
                kept: lvl.layer.len(),
                witnesses,
                rejected: lvl.fault.map(|f| f.to_string()),
            });
            on_layer(lvl.layer);
        })?;
    Ok(answer)
}

pub fn cmd_check<W: Write>(args: &CheckArgs, format: ReportFormat, out: &mut W) -> Result<Status> {
    let mut report = RunReport::new(args.size.channels);
    let file = report.timed("read", |_| read_oracle(&args.oracle))?;
    if let Some(n) = file.channels() {
        if n != args.size.channels {
            bail!(
                "{} is an oracle for {n} channels, not {}",
                args.oracle.display(),
                args.size.channels
            );
        }
    }
    let config = CheckConfig {
        mode: if args.lenient {
            Mode::Lenient
        } else {
            Mode::Strict
        },
        max_layer: args.max_layer,
    };
    let answer = report.timed("check", |r| {
        check_into(&args.size, &file.levels, config, r, |_| {})
    })?;
    report.answer = answer.to_string();
    finish(&report, format, out)?;
    Ok(Status::of(&answer))
}

pub fn cmd_solve<W: Write>(args: &SolveArgs, format: ReportFormat, out: &mut W) -> Result<Status> {
    let mut report = RunReport::new(args.size.channels);
    let mut produced: Vec<Vec<sortnet::Network>> = Vec::new();
    let (produced_answer, raw) = report.timed("produce", |r| {
        produce_into(&args.size, r, |layer| {
            produced.push(layer.networks().to_vec())
        })
    })?;
    let producer_levels = std::mem::take(&mut report.levels);

    let reduced = report.timed("preprocess", |_| preprocess(&raw))?;
    let reduced: Vec<OracleLevel> = reduced.into_iter().map(|l| l.into_level()).collect();
    if let Some(path) = &args.out {
        let file = OracleFile::new(args.size.channels, OracleKind::Reduced, reduced.clone());
        write_oracle(&file, path)?;
    }

    let mut checked: Vec<Vec<sortnet::Network>> = Vec::new();
    let answer = report.timed("check", |r| {
        check_into(&args.size, &reduced, Mode::Strict.into(), r, |layer| {
            checked.push(layer.networks().to_vec())
        })
    })?;

    if checked.len() != produced.len() {
        bail!(
            "checker ran {} levels but the producer ran {}",
            checked.len(),
            produced.len()
        );
    }
    if let Some(k) = (0..checked.len()).find(|&i| checked[i] != produced[i]) {
        bail!("checker and producer layers differ at k={}", k + 1);
    }
    if answer != produced_answer {
        bail!("checker answered `{answer}` but the producer answered `{produced_answer}`");
    }
    // keep the producer's witness counts, the checker's layers are identical
    report.levels = producer_levels;
    report.answer = answer.to_string();
    finish(&report, format, out)?;
    Ok(Status::of(&answer))
}
