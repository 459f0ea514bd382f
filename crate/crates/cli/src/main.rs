use std::io::{self, IsTerminal};

use clap::Parser;

use blockoff::harness::ProcessExecutor;
use blockoff_cli::{run, Cli, Io};

fn main() {
    let cli = Cli::parse();
    let stdin = io::stdin();
    let is_tty = stdin.is_terminal();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    let mut io = Io { input: &mut input, out: &mut out, err: &mut err, stdin_is_tty: is_tty };
    let code = run(cli, &mut io, &ProcessExecutor);
    std::process::exit(code);
}
