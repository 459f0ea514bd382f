use std::fs;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::Value;

use blockoff::harness::{ExecOutput, StubExecutor};
use blockoff_cli::{run, Cli, Io, EXIT_BASELINE_FAILED, EXIT_ERROR, EXIT_NO_CANDIDATES, EXIT_OK};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").canonicalize().unwrap()
}

fn app(name: &str) -> String {
    fixtures().join("apps").join(name).display().to_string()
}

struct Outcome {
    code: i32,
    out: String,
    err: String,
}

fn blockoff(args: &[&str], script: Vec<ExecOutput>, stdin: &str, tty: bool) -> (Outcome, StubExecutor) {
    let cli = Cli::try_parse_from(std::iter::once("blockoff").chain(args.iter().copied())).unwrap();
    let stub = StubExecutor::new(script);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut input = stdin.as_bytes();
    let code = run(cli, &mut Io { input: &mut input, out: &mut out, err: &mut err, stdin_is_tty: tty }, &stub);
    let o = Outcome { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() };
    (o, stub)
}

fn timed(secs: f64) -> [ExecOutput; 2] {
    [StubExecutor::exit(0), StubExecutor::output("checksum=1.000000000000e+00\n", secs)]
}

fn search_args<'a>(out: &'a str, db: &'a str, profiles: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["search", "--db", db, "--profiles", profiles, "--out", out, "--reps", "1"];
    v.extend_from_slice(extra);
    v
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

/// A four1 call whose size argument is signed, so binding needs approval.
fn signed_size_app(dir: &Path) -> String {
    let src = dir.join("signed.c");
    fs::write(
        &src,
        "#include \"nrlib.h\"\n\nint main(void)\n{\n    double data[64];\n    long nn = 32;\n    four1(data, nn, 1);\n    return 0;\n}\n",
    )
    .unwrap();
    src.display().to_string()
}

#[test]
fn detect_lists_candidates() {
    let db = fixtures().join("db").display().to_string();
    let (o, stub) = blockoff(&["detect", "--db", &db, &app("fft_app.c"), &app("lu_app.c"), &app("fft_copied.c")], vec![], "", false);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    let lines: Vec<&str> = o.out.lines().collect();
    assert_eq!(lines[0], "index\tlocation\trecord\torigin\tscore\tbinding");
    assert_eq!(lines.len(), 4);
    let rows: Vec<Vec<&str>> = lines[1..].iter().map(|l| l.split('\t').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 6));
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), ["0", "1", "2"]);
    assert_eq!((rows[0][2], rows[0][3], rows[0][5]), ("fft2d", "name", "AutoBind"));
    assert_eq!((rows[1][2], rows[1][3], rows[1][4]), ("lu_solve", "name", "-"));
    assert_eq!((rows[2][2], rows[2][3], rows[2][4]), ("fft2d", "similarity", "1.000"));
    assert!(stub.calls().is_empty());
}

#[test]
fn detect_without_candidates_exits_3() {
    let db = fixtures().join("db").display().to_string();
    let (o, _) = blockoff(&["detect", "--db", &db, &app("quicksort.c")], vec![], "", false);
    assert_eq!(o.code, EXIT_NO_CANDIDATES);
    assert_eq!(o.out.trim(), "no candidates");
}

#[test]
fn search_without_candidates_still_writes_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (db, profiles) = (fixtures().join("db").display().to_string(), fixtures().join("profiles.json").display().to_string());
    let qs = app("quicksort.c");
    let mut args = search_args(out.to_str().unwrap(), &db, &profiles, &[]);
    args.push(&qs);
    let (o, stub) = blockoff(&args, timed(0.5).into(), "", false);
    assert_eq!(o.code, EXIT_NO_CANDIDATES, "{}", o.err);
    assert_eq!(stub.calls().len(), 2);
    let r = report(&out);
    assert_eq!(r["selected"], "");
    assert_eq!(r["measurements"], 1);
    assert_eq!(r["speedup"], 1.0);
    assert!(out.join("none/quicksort.c").is_file());
}

#[test]
fn malformed_database_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir_all(tmp.path().join("patterns")).unwrap();
    fs::write(tmp.path().join("patterns/bad.json"), r#"{"id": "x", "surprise": true}"#).unwrap();
    let db = tmp.path().display().to_string();
    let (o, _) = blockoff(&["detect", "--db", &db, &app("fft_app.c")], vec![], "", false);
    assert_eq!(o.code, EXIT_ERROR);
    assert!(o.err.contains("schema error"), "{}", o.err);
    assert!(o.err.contains("bad.json"), "{}", o.err);
}

#[test]
fn missing_source_exits_1() {
    let db = fixtures().join("db").display().to_string();
    let (o, _) = blockoff(&["detect", "--db", &db, "/nonexistent/x.c"], vec![], "", false);
    assert_eq!(o.code, EXIT_ERROR);
    assert!(o.err.starts_with("error:"));
}

#[test]
fn broken_baseline_exits_2_without_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (db, profiles) = (fixtures().join("db").display().to_string(), fixtures().join("profiles.json").display().to_string());
    let fft = app("fft_app.c");
    let mut args = search_args(out.to_str().unwrap(), &db, &profiles, &[]);
    args.push(&fft);
    let (o, stub) = blockoff(&args, vec![StubExecutor::exit(1)], "", false);
    assert_eq!(o.code, EXIT_BASELINE_FAILED);
    assert!(o.err.contains("CompileError"), "{}", o.err);
    assert_eq!(stub.calls().len(), 1);
    assert!(!out.join("report.json").exists());
}

#[test]
fn search_selects_faster_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (db, profiles) = (fixtures().join("db").display().to_string(), fixtures().join("profiles.json").display().to_string());
    let fft = app("fft_app.c");
    let mut args = search_args(out.to_str().unwrap(), &db, &profiles, &[]);
    args.push(&fft);
    let script = [timed(2.0), timed(0.5)].concat();
    let (o, stub) = blockoff(&args, script, "", false);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.out.contains("speedup vs. all-CPU: 4.00x"), "{}", o.out);
    let r = report(&out);
    assert_eq!(r["selected"], "1");
    assert_eq!(r["measurements"], 2);
    assert_eq!(r["selected_dir"], out.join("1").display().to_string());
    let offloaded = fs::read_to_string(out.join("1/fft_app.c")).unwrap();
    assert!(offloaded.contains("fastlib_fft("));
    // The second compile goes through the accelerator profile.
    assert!(stub.calls()[2].iter().any(|a| a.ends_with("fastlib.c")));
    assert!(!out.join(".report.json.tmp").exists());
}

#[test]
fn declined_interface_change_keeps_baseline() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (db, profiles) = (fixtures().join("db").display().to_string(), fixtures().join("profiles.json").display().to_string());
    let src = signed_size_app(tmp.path());
    let mut args = search_args(out.to_str().unwrap(), &db, &profiles, &["--assume-no"]);
    args.push(&src);
    let (o, stub) = blockoff(&args, timed(1.0).into(), "", false);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.err.contains("interface change declined"), "{}", o.err);
    assert_eq!(stub.calls().len(), 2);
    let r = report(&out);
    assert_eq!(r["selected"], "0");
    assert_eq!(r["speedup"], 1.0);
    assert_eq!(r["candidates"][0]["binding"]["status"], "ConfirmationRequired");
    assert_eq!(r["confirmations"][0]["approved"], false);
    assert_eq!(r["confirmations"][0]["mode"], "assume_no");
    assert!(r["notes"].as_array().unwrap().iter().any(|n| n.as_str().unwrap().contains("declined")));
}

#[test]
fn non_interactive_stdin_declines_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (db, profiles) = (fixtures().join("db").display().to_string(), fixtures().join("profiles.json").display().to_string());
    let src = signed_size_app(tmp.path());
    let mut args = search_args(out.to_str().unwrap(), &db, &profiles, &[]);
    args.push(&src);
    let (o, _) = blockoff(&args, timed(1.0).into(), "y\n", false);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.err.contains("not a terminal"), "{}", o.err);
    let r = report(&out);
    assert_eq!(r["confirmations"][0]["defaulted"], true);
    assert_eq!(r["selected"], "0");
}

#[test]
fn approved_interface_change_is_measured() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (db, profiles) = (fixtures().join("db").display().to_string(), fixtures().join("profiles.json").display().to_string());
    let src = signed_size_app(tmp.path());
    let mut args = search_args(out.to_str().unwrap(), &db, &profiles, &[]);
    args.push(&src);
    let script = [timed(1.0), timed(0.25)].concat();
    let (o, _) = blockoff(&args, script, "yes\n", true);
    assert_eq!(o.code, EXIT_OK, "{}", o.err);
    assert!(o.err.contains("apply it? [y/N]"));
    let r = report(&out);
    assert_eq!(r["selected"], "1");
    assert_eq!(r["candidates"][0]["approved"], true);
    let variant = fs::read_to_string(out.join("1/signed.c")).unwrap();
    assert!(variant.contains("fastlib_fft(data, (unsigned long)(nn), 1);"), "{variant}");
}
