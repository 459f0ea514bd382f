//! Compiles, validates and times one variant directory under a backend
//! profile. The harness only reports; choosing between results is the
//! search's job.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use wait_timeout::ChildExt;

pub const DEFAULT_TIMEOUT_S: f64 = 60.0;
pub const DEFAULT_REPETITIONS: usize = 3;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
/// Name the compiled program gets inside its variant directory.
pub const BINARY_NAME: &str = "prog";

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendProfile {
    #[serde(skip)]
    pub name: String,
    pub compile_cmd: Vec<String>,
    pub run_cmd: Vec<String>,
    #[serde(default)]
    pub env: BTreeMap<String, String>,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
}

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Invalid { path: PathBuf, message: String },
    #[error("no backend profile named `{0}`")]
    Unknown(String),
}

fn count_token(argv: &[String], token: &str) -> usize {
    argv.iter().map(|a| a.matches(token).count()).sum()
}

impl BackendProfile {
    fn validate(&self) -> Result<(), String> {
        for token in ["{{src}}", "{{out}}"] {
            let n = count_token(&self.compile_cmd, token);
            if n != 1 {
                return Err(format!("profile `{}`: compile_cmd must contain {token} exactly once (found {n})", self.name));
            }
        }
        for token in ["{{src}}", "{{flags}}"] {
            if self.compile_cmd.iter().any(|a| a.contains(token) && a != token) {
                return Err(format!("profile `{}`: {token} must be a whole argument", self.name));
            }
        }
        let n = count_token(&self.run_cmd, "{{bin}}");
        if n != 1 {
            return Err(format!("profile `{}`: run_cmd must contain {{{{bin}}}} exactly once (found {n})", self.name));
        }
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(format!("profile `{}`: timeout_s must be positive", self.name));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }
}

/// All profiles from one `profiles.json`, plus the directory that
/// `{{profile_dir}}` expands to.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles {
    pub dir: PathBuf,
    pub profiles: BTreeMap<String, BackendProfile>,
}

impl Profiles {
    pub fn load(path: &Path) -> Result<Profiles, ProfileError> {
        let text = fs::read_to_string(path).map_err(|source| ProfileError::Io { path: path.to_path_buf(), source })?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let dir = if dir.as_os_str().is_empty() { PathBuf::from(".") } else { dir };
        let dir = dir.canonicalize().unwrap_or(dir);
        Profiles::parse(&text, dir).map_err(|message| ProfileError::Invalid { path: path.to_path_buf(), message })
    }

    pub fn parse(text: &str, dir: PathBuf) -> Result<Profiles, String> {
        let mut profiles: BTreeMap<String, BackendProfile> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        for (name, p) in profiles.iter_mut() {
            p.name = name.clone();
            p.validate()?;
        }
        Ok(Profiles { dir, profiles })
    }

    pub fn get(&self, name: &str) -> Result<&BackendProfile, ProfileError> {
        self.profiles.get(name).ok_or_else(|| ProfileError::Unknown(name.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Ok,
    CompileError,
    RunError,
    ValidationFail,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementResult {
    pub pattern: String,
    pub status: Status,
    pub times_s: Vec<f64>,
    pub median_s: Option<f64>,
    pub log: String,
}

impl MeasurementResult {
    pub fn ok(pattern: impl Into<String>, times_s: Vec<f64>) -> MeasurementResult {
        let median_s = median(&times_s);
        MeasurementResult { pattern: pattern.into(), status: Status::Ok, times_s, median_s, log: String::new() }
    }

    pub fn failed(pattern: impl Into<String>, status: Status, log: impl Into<String>) -> MeasurementResult {
        MeasurementResult { pattern: pattern.into(), status, times_s: Vec::new(), median_s: None, log: log.into() }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok && self.median_s.is_some()
    }
}

/// Middle element of the sorted times; the lower middle for even lengths.
pub fn median(times: &[f64]) -> Option<f64> {
    if times.is_empty() {
        return None;
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(sorted[(sorted.len() - 1) / 2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Code(i32),
    /// Terminated by a signal or otherwise without an exit code.
    Abnormal,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecOutput {
    pub exit: ExitKind,
    pub stdout: String,
    pub stderr: String,
    pub elapsed: Duration,
}

impl ExecOutput {
    pub fn success(&self) -> bool {
        self.exit == ExitKind::Code(0)
    }
}

/// Runs external commands. Swapped for a scripted stub in tests.
pub trait Executor {
    fn run(&self, argv: &[String], cwd: &Path, env: &BTreeMap<String, String>, timeout: Duration) -> std::io::Result<ExecOutput>;
}

/// Runs commands with `std::process`, killing them at the timeout.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProcessExecutor;

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> std::thread::JoinHandle<String> {
    std::thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

impl Executor for ProcessExecutor {
    fn run(&self, argv: &[String], cwd: &Path, env: &BTreeMap<String, String>, timeout: Duration) -> std::io::Result<ExecOutput> {
        let (program, args) = argv
            .split_first()
            .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"))?;
        let start = Instant::now();
        let mut child = Command::new(program)
            .args(args)
            .current_dir(cwd)
            .envs(env)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()?;
        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());
        let exit = match child.wait_timeout(timeout)? {
            Some(status) => status.code().map_or(ExitKind::Abnormal, ExitKind::Code),
            None => {
                let _ = child.kill();
                let _ = child.wait();
                ExitKind::TimedOut
            }
        };
        let elapsed = start.elapsed();
        let stdout = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        Ok(ExecOutput { exit, stdout, stderr, elapsed })
    }
}

/// Replays scripted outputs in order and records every command it was given.
#[derive(Debug, Clone, Default)]
pub struct StubExecutor {
    script: Arc<Mutex<std::collections::VecDeque<ExecOutput>>>,
    calls: Arc<Mutex<Vec<Vec<String>>>>,
}

impl StubExecutor {
    pub fn new(script: impl IntoIterator<Item = ExecOutput>) -> StubExecutor {
        StubExecutor { script: Arc::new(Mutex::new(script.into_iter().collect())), calls: Arc::default() }
    }

    pub fn exit(code: i32) -> ExecOutput {
        ExecOutput { exit: ExitKind::Code(code), stdout: String::new(), stderr: String::new(), elapsed: Duration::ZERO }
    }

    pub fn output(stdout: &str, secs: f64) -> ExecOutput {
        ExecOutput { exit: ExitKind::Code(0), stdout: stdout.into(), stderr: String::new(), elapsed: Duration::from_secs_f64(secs) }
    }

    pub fn calls(&self) -> Vec<Vec<String>> {
        self.calls.lock().unwrap().clone()
    }
}

impl Executor for StubExecutor {
    fn run(&self, argv: &[String], _cwd: &Path, _env: &BTreeMap<String, String>, _timeout: Duration) -> std::io::Result<ExecOutput> {
        self.calls.lock().unwrap().push(argv.to_vec());
        self.script
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| std::io::Error::other("stub executor script exhausted"))
    }
}

/// Checks program output against an expected text. Numbers compare with a
/// relative tolerance; everything else must match exactly, token by token
/// (whitespace runs are separators only).
#[derive(Debug, Clone, PartialEq)]
pub struct Validator {
    pub expected: Option<String>,
    pub tolerance: f64,
}

impl Default for Validator {
    fn default() -> Self {
        Validator::match_baseline()
    }
}

fn number_re() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?(?i:nan|inf(?:inity)?)").expect("valid regex")
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Piece<'a> {
    Text(&'a str),
    Num(f64),
}

fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut last = 0;
        for m in number_re().find_iter(word) {
            if m.start() > last {
                out.push(Piece::Text(&word[last..m.start()]));
            }
            match m.as_str().parse::<f64>() {
                Ok(v) => out.push(Piece::Num(v)),
                Err(_) => out.push(Piece::Text(m.as_str())),
            }
            last = m.end();
        }
        if last < word.len() {
            out.push(Piece::Text(&word[last..]));
        }
        out.push(Piece::Text(" "));
    }
    out
}

impl Validator {
    /// Expects whatever the baseline prints; filled in after the baseline run.
    pub fn match_baseline() -> Validator {
        Validator { expected: None, tolerance: DEFAULT_TOLERANCE }
    }

    pub fn expect(text: impl Into<String>) -> Validator {
        Validator { expected: Some(text.into()), tolerance: DEFAULT_TOLERANCE }
    }

    pub fn numbers_close(&self, a: f64, b: f64) -> bool {
        if a.is_nan() || b.is_nan() {
            return a.is_nan() && b.is_nan();
        }
        if a.is_infinite() || b.is_infinite() {
            return a == b;
        }
        (a - b).abs() <= self.tolerance * 1f64.max(a.abs()).max(b.abs())
    }

    /// `Ok` when `actual` matches; otherwise a description of the first
    /// difference. With no expectation set, anything passes.
    pub fn check(&self, actual: &str) -> Result<(), String> {
        let Some(expected) = &self.expected else { return Ok(()) };
        let (e, a) = (pieces(expected), pieces(actual));
        for (i, (x, y)) in e.iter().zip(&a).enumerate() {
            let same = match (x, y) {
                (Piece::Num(p), Piece::Num(q)) => self.numbers_close(*p, *q),
                (Piece::Text(p), Piece::Text(q)) => p == q,
                _ => false,
            };
            if !same {
                return Err(format!("output differs at token {i}: expected {x:?}, got {y:?}"));
            }
        }
        if e.len() != a.len() {
            return Err(format!("output has {} tokens, expected {}", a.len(), e.len()));
        }
        Ok(())
    }
}

/// One measurement job.
#[derive(Debug, Clone)]
pub struct MeasureRequest<'a> {
    pub pattern: &'a str,
    pub variant_dir: &'a Path,
    pub profile: &'a BackendProfile,
    /// Directory `{{profile_dir}}` expands to.
    pub profile_dir: &'a Path,
    pub link_flags: &'a [String],
}

fn expand(template: &[String], subst: &[(&str, &str)], lists: &[(&str, &[String])]) -> Vec<String> {
    let mut out = Vec::new();
    'arg: for arg in template {
        for (token, values) in lists {
            if arg == token {
                out.extend(values.iter().cloned());
                continue 'arg;
            }
        }
        let mut a = arg.clone();
        for (token, value) in subst {
            a = a.replace(token, value);
        }
        out.push(a);
    }
    out
}

fn c_sources(dir: &Path) -> std::io::Result<Vec<String>> {
    let mut srcs: Vec<String> = fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "c") && p.is_file())
        .map(|p| p.to_string_lossy().into_owned())
        .collect();
    srcs.sort();
    Ok(srcs)
}

/// Compile once, then run `reps` times, validating every run.
pub fn measure(req: &MeasureRequest<'_>, validator: &Validator, reps: usize, exec: &dyn Executor) -> MeasurementResult {
    let (result, _) = measure_capturing(req, validator, reps, exec);
    result
}

/// Like [`measure`], for unmodified sources; also returns the first run's
/// stdout so later variants can be checked against it.
pub fn measure_baseline(
    req: &MeasureRequest<'_>,
    validator: &Validator,
    reps: usize,
    exec: &dyn Executor,
) -> (MeasurementResult, Option<String>) {
    measure_capturing(req, validator, reps, exec)
}

fn measure_capturing(
    req: &MeasureRequest<'_>,
    validator: &Validator,
    reps: usize,
    exec: &dyn Executor,
) -> (MeasurementResult, Option<String>) {
    let pattern = req.pattern;
    let reps = reps.max(1);
    let dir = req.variant_dir.canonicalize().unwrap_or_else(|_| req.variant_dir.to_path_buf());
    let srcs = match c_sources(&dir) {
        Ok(s) => s,
        Err(e) => return (MeasurementResult::failed(pattern, Status::CompileError, format!("{}: {e}", dir.display())), None),
    };
    let bin = dir.join(BINARY_NAME).to_string_lossy().into_owned();
    let profile_dir = req.profile_dir.to_string_lossy().into_owned();
    let mut flags: Vec<String> = Vec::new();
    for f in req.link_flags {
        if !flags.contains(f) {
            flags.push(f.clone());
        }
    }
    let subst = [("{{out}}", bin.as_str()), ("{{bin}}", bin.as_str()), ("{{profile_dir}}", profile_dir.as_str())];
    let compile = expand(&req.profile.compile_cmd, &subst, &[("{{src}}", &srcs), ("{{flags}}", &flags)]);
    let run = expand(&req.profile.run_cmd, &subst, &[]);
    let timeout = req.profile.timeout();
    let env = &req.profile.env;

    let mut log = format!("$ {}\n", compile.join(" "));
    match exec.run(&compile, &dir, env, timeout) {
        Err(e) => {
            log.push_str(&format!("cannot run `{}`: {e}\n", compile.first().map(String::as_str).unwrap_or("")));
            return (MeasurementResult::failed(pattern, Status::CompileError, log), None);
        }
        Ok(out) if !out.success() => {
            log.push_str(&out.stderr);
            log.push_str(&match out.exit {
                ExitKind::TimedOut => format!("compile timed out after {}s\n", req.profile.timeout_s),
                ExitKind::Code(c) => format!("compiler exited with status {c}\n"),
                ExitKind::Abnormal => "compiler terminated abnormally\n".to_string(),
            });
            return (MeasurementResult::failed(pattern, Status::CompileError, log), None);
        }
        Ok(out) => log.push_str(&out.stderr),
    }

    let mut times = Vec::with_capacity(reps);
    let mut first_stdout = None;
    for rep in 0..reps {
        log.push_str(&format!("$ {}  # run {}\n", run.join(" "), rep + 1));
        let out = match exec.run(&run, &dir, env, timeout) {
            Ok(out) => out,
            Err(e) => {
                log.push_str(&format!("cannot run program: {e}\n"));
                return (MeasurementResult::failed(pattern, Status::RunError, log), first_stdout);
            }
        };
        match out.exit {
            ExitKind::TimedOut => {
                log.push_str(&format!("run exceeded {}s\n", req.profile.timeout_s));
                return (MeasurementResult::failed(pattern, Status::Timeout, log), first_stdout);
            }
            ExitKind::Code(0) => {}
            other => {
                log.push_str(&out.stderr);
                log.push_str(&format!("program failed: {other:?}\n"));
                return (MeasurementResult::failed(pattern, Status::RunError, log), first_stdout);
            }
        }
        if let Err(why) = validator.check(&out.stdout) {
            log.push_str(&format!("validation failed: {why}\n"));
            return (MeasurementResult::failed(pattern, Status::ValidationFail, log), first_stdout);
        }
        if first_stdout.is_none() {
            first_stdout = Some(out.stdout);
        }
        times.push(out.elapsed.as_secs_f64());
    }
    let mut result = MeasurementResult::ok(pattern, times);
    result.log = log;
    (result, first_stdout)
}
