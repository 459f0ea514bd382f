//! `blockoff` command line: `detect` lists offload candidates, `search`
//! measures them and picks the fastest pattern.
//!
//! Exit codes: 0 success, 1 usage/input error, 2 baseline failed,
//! 3 no candidates found.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use blockoff::detector::{OffloadCandidate, Origin};
use blockoff::harness::{Executor, Profiles, Validator, DEFAULT_REPETITIONS};
use blockoff::interface::BindStatus;
use blockoff::pattern_db::PatternDb;
use blockoff::pipeline::{detect_all, parse_sources, run_search, PipelineError, SearchSetup};
use blockoff::search::SearchReport;
use blockoff::similarity::DEFAULT_THRESHOLD;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BASELINE_FAILED: i32 = 2;
pub const EXIT_NO_CANDIDATES: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "blockoff", version, about = "Find offloadable function blocks and keep the fastest replacement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List offload candidates.
    Detect(DetectArgs),
    /// Measure candidate patterns and select the fastest.
    Search(SearchArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Pattern database root (contains `patterns/`).
    #[arg(long, default_value = "./db")]
    pub db: PathBuf,
    /// Similarity threshold in [0, 1].
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub sigma: f64,
    #[arg(required = true)]
    pub sources: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub detect: DetectArgs,
    #[arg(long, default_value = "./profiles.json")]
    pub profiles: PathBuf,
    /// Timed runs per pattern.
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub reps: usize,
    /// Approve every interface change without asking.
    #[arg(long, conflicts_with = "assume_no")]
    pub assume_yes: bool,
    /// Decline every interface change without asking.
    #[arg(long)]
    pub assume_no: bool,
    #[arg(long, default_value = "./out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfirmMode {
    Interactive,
    AssumeYes,
    AssumeNo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sources: Vec<PathBuf>,
    pub db: PathBuf,
    pub profiles: PathBuf,
    pub sigma: f64,
    pub reps: usize,
    pub mode: ConfirmMode,
    pub out: PathBuf,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.sigma) {
            bail!("--sigma must be within [0, 1], got {}", self.sigma);
        }
        if self.reps < 1 {
            bail!("--reps must be at least 1");
        }
        Ok(())
    }
}

impl From<DetectArgs> for RunConfig {
    fn from(a: DetectArgs) -> Self {
        RunConfig {
            sources: a.sources,
            db: a.db,
            profiles: PathBuf::from("./profiles.json"),
            sigma: a.sigma,
            reps: DEFAULT_REPETITIONS,
            mode: ConfirmMode::Interactive,
            out: PathBuf::from("./out"),
        }
    }
}

impl From<SearchArgs> for RunConfig {
    fn from(a: SearchArgs) -> Self {
        let mode = if a.assume_yes {
            ConfirmMode::AssumeYes
        } else if a.assume_no {
            ConfirmMode::AssumeNo
        } else {
            ConfirmMode::Interactive
        };
        RunConfig { profiles: a.profiles, reps: a.reps, mode, out: a.out, ..RunConfig::from(a.detect) }
    }
}

/// Streams a command talks to; swapped for buffers in tests.
pub struct Io<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub stdin_is_tty: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Confirmation {
    pub candidate: usize,
    pub approved: bool,
    pub mode: ConfirmMode,
    /// True when an interactive prompt was impossible and the answer
    /// defaulted to "no".
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub defaulted: bool,
}

/// Asks whether an interface change may be applied.
pub fn confirm_interface_change(
    title: &str,
    notes: &[String],
    mode: ConfirmMode,
    input: &mut dyn BufRead,
    output: &mut dyn Write,
    is_tty: bool,
) -> (bool, bool) {
    match mode {
        ConfirmMode::AssumeYes => (true, false),
        ConfirmMode::AssumeNo => (false, false),
        ConfirmMode::Interactive if !is_tty => {
            let _ = writeln!(output, "warning: stdin is not a terminal; declining interface change for {title}");
            (false, true)
        }
        ConfirmMode::Interactive => {
            let _ = writeln!(output, "{title} needs an interface change:");
            for n in notes {
                let _ = writeln!(output, "  - {n}");
            }
            let _ = write!(output, "apply it? [y/N] ");
            let _ = output.flush();
            let mut line = String::new();
            let approved = input.read_line(&mut line).is_ok() && matches!(line.trim().to_ascii_lowercase().as_str(), "y" | "yes");
            (approved, false)
        }
    }
}

fn origin_text(o: &Origin) -> (&'static str, String) {
    match o {
        Origin::NameMatch => ("name", "-".into()),
        Origin::SimilarityMatch { score } => ("similarity", format!("{score:.3}")),
    }
}

fn status_text(s: BindStatus) -> &'static str {
    match s {
        BindStatus::AutoBind => "AutoBind",
        BindStatus::AutoBindWithCasts => "AutoBindWithCasts",
        BindStatus::ConfirmationRequired => "ConfirmationRequired",
        BindStatus::Incompatible => "Incompatible",
    }
}

fn candidate_row(c: &OffloadCandidate) -> String {
    let (origin, score) = origin_text(&c.origin);
    format!("{}\t{}:{}\t{}\t{}\t{}\t{}", c.index, c.file.display(), c.line, c.record, origin, score, status_text(c.binding.status))
}

struct Detected {
    db: PatternDb,
    units: Vec<blockoff::frontend::SourceUnit>,
    candidates: Vec<OffloadCandidate>,
    warnings: Vec<String>,
}

fn load_and_detect(cfg: &RunConfig, err: &mut dyn Write) -> Result<Detected> {
    cfg.validate()?;
    let db = PatternDb::load(&cfg.db).with_context(|| format!("loading pattern database {}", cfg.db.display()))?;
    let units = parse_sources(&cfg.sources)?;
    let detection = detect_all(&units, &db, cfg.sigma);
    let warnings: Vec<String> = detection.warnings.iter().map(|w| w.to_string()).collect();
    for w in &warnings {
        writeln!(err, "warning: {w}")?;
    }
    Ok(Detected { db, units, candidates: detection.candidates, warnings })
}

pub fn cmd_detect(cfg: &RunConfig, io: &mut Io<'_>) -> Result<i32> {
    let d = load_and_detect(cfg, io.err)?;
    if d.candidates.is_empty() {
        writeln!(io.out, "no candidates")?;
        return Ok(EXIT_NO_CANDIDATES);
    }
    writeln!(io.out, "index\tlocation\trecord\torigin\tscore\tbinding")?;
    for c in &d.candidates {
        writeln!(io.out, "{}", candidate_row(c))?;
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub sources: &'a [PathBuf],
    pub sigma: f64,
    pub repetitions: usize,
    pub candidates: &'a [OffloadCandidate],
    pub confirmations: &'a [Confirmation],
    pub warnings: &'a [String],
    #[serde(flatten)]
    pub search: &'a SearchReport,
    /// Directory holding the selected variant's sources.
    pub selected_dir: PathBuf,
}

/// Writes `value` as pretty JSON next to `path` and renames it into place.
pub fn write_json_atomic(path: &Path, value: &impl Serialize) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{}.tmp", path.file_name().and_then(|n| n.to_str()).unwrap_or("report")));
    let text = serde_json::to_string_pretty(value)?;
    fs::write(&tmp, text + "\n").with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn cmd_search(cfg: &RunConfig, io: &mut Io<'_>, exec: &dyn Executor) -> Result<i32> {
    let mut d = load_and_detect(cfg, io.err)?;
    let profiles = Profiles::load(&cfg.profiles)?;

    let mut confirmations = Vec::new();
    for c in d.candidates.iter_mut() {
        if c.binding.status != BindStatus::ConfirmationRequired {
            continue;
        }
        let title = format!("candidate {} ({} at {}:{})", c.index, c.record, c.file.display(), c.line);
        let (approved, defaulted) = confirm_interface_change(&title, &c.binding.notes, cfg.mode, io.input, io.err, io.stdin_is_tty);
        c.approved = approved;
        confirmations.push(Confirmation { candidate: c.index, approved, mode: cfg.mode, defaulted });
    }
    for c in &d.candidates {
        if !c.is_executable() {
            let why = if c.binding.status == BindStatus::Incompatible { "incompatible interface" } else { "interface change declined" };
            writeln!(io.err, "candidate {} ({}) excluded: {why}", c.index, c.record)?;
        }
    }

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let setup = SearchSetup { db: &d.db, profiles: &profiles, out_dir: &cfg.out, reps: cfg.reps, validator: Validator::match_baseline() };
    let err = &mut *io.err;
    let mut progress = |line: &str| {
        let _ = writeln!(err, "{line}");
    };
    let mut report = match run_search(&d.units, &d.candidates, &setup, exec, &mut progress) {
        Ok(r) => r,
        Err(PipelineError::Baseline(result)) => {
            writeln!(io.err, "error: the unmodified program fails under `cpu_baseline` ({:?})", result.status)?;
            writeln!(io.err, "{}", result.log.trim_end())?;
            return Ok(EXIT_BASELINE_FAILED);
        }
        Err(e) => return Err(e.into()),
    };
    if !confirmations.is_empty() && confirmations.iter().all(|c| !c.approved) {
        report.notes.push("every candidate needing an interface change was declined".into());
    }

    let full = Report {
        sources: &cfg.sources,
        sigma: cfg.sigma,
        repetitions: cfg.reps,
        candidates: &d.candidates,
        confirmations: &confirmations,
        warnings: &d.warnings,
        search: &report,
        selected_dir: cfg.out.join(report.selected.dir_name()),
    };
    let report_path = cfg.out.join("report.json");
    write_json_atomic(&report_path, &full)?;
    print_summary(io.out, &d.candidates, &report, &report_path)?;
    Ok(if d.candidates.is_empty() { EXIT_NO_CANDIDATES } else { EXIT_OK })
}

fn print_summary(out: &mut dyn Write, cands: &[OffloadCandidate], r: &SearchReport, report_path: &Path) -> Result<()> {
    if cands.is_empty() {
        writeln!(out, "no candidates")?;
    }
    for m in std::iter::once(&r.baseline).chain(&r.singles).chain(&r.combined) {
        let time = m.median_s.map_or_else(|| format!("{:?}", m.status), |t| format!("{t:.4} s"));
        let label = if m.pattern.is_empty() || !m.pattern.contains('1') { "baseline".to_string() } else { m.pattern.clone() };
        writeln!(out, "pattern {label}\t{time}")?;
    }
    let on = r.selected.on();
    if on.is_empty() {
        writeln!(out, "selected: baseline (nothing offloaded)")?;
    } else {
        let names: Vec<String> = on.iter().map(|&i| format!("#{i} {}", cands[i].record)).collect();
        writeln!(out, "selected: {} ({})", r.selected.bitstring(), names.join(", "))?;
    }
    writeln!(out, "speedup vs. all-CPU: {:.2}x", r.speedup)?;
    for n in &r.notes {
        writeln!(out, "note: {n}")?;
    }
    writeln!(out, "report: {}", report_path.display())?;
    Ok(())
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli, io: &mut Io<'_>, exec: &dyn Executor) -> i32 {
    let result = match cli.command {
        Command::Detect(a) => cmd_detect(&RunConfig::from(a), io),
        Command::Search(a) => cmd_search(&RunConfig::from(a), io, exec),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e:#}");
            EXIT_ERROR
        }
    }
}
