use std::io::{BufRead, IsTerminal, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use rg_cli::{CliError, Config, Format, Session, StatementReader};

/// Graph pattern and hybrid queries over relations with references.
#[derive(Parser, Debug)]
#[command(name = "rg", version)]
struct Args {
    /// Run the statements in FILE and exit.
    #[arg(long, env = "RG_SCRIPT")]
    script: Option<PathBuf>,
    /// Omit timings so that output is reproducible.
    #[arg(long, env = "RG_NO_TIMING", value_parser = clap::builder::BoolishValueParser::new())]
    no_timing: bool,
    #[arg(long, env = "RG_FORMAT", default_value = "csv", value_parser = ["csv", "tsv", "table"])]
    format: String,
    #[arg(long, env = "RG_TAU")]
    tau: Option<f64>,
    #[arg(long, env = "RG_CHUNK_SIZE")]
    chunk_size: Option<usize>,
    #[arg(long, env = "RG_BLOCK_SIZE")]
    block_size: Option<u32>,
    #[arg(long, env = "RG_SEGMENT_THRESHOLD")]
    segment_threshold: Option<u32>,
}

fn config(a: &Args) -> Result<Config, CliError> {
    let mut c = Config { format: a.format.parse::<Format>()?, timing: !a.no_timing, ..Config::default() };
    for (k, v) in [("tau", a.tau.map(|x| x.to_string())), ("chunk_size", a.chunk_size.map(|x| x.to_string()))] {
        if let Some(v) = v {
            c.set(k, &v)?;
        }
    }
    // the two sizes are checked together, so their flag order does not matter
    c.store.block_size = a.block_size.unwrap_or(c.store.block_size);
    c.store.segment_threshold = a.segment_threshold.unwrap_or(c.store.segment_threshold);
    c.store.validate().map_err(|e| CliError::User(e.to_string()))?;
    Ok(c)
}

/// Engine panics are invariant breaches: report them as internal errors.
fn guarded(s: &mut Session, stmt: &str) -> Result<String, CliError> {
    match catch_unwind(AssertUnwindSafe(|| s.run(stmt))) {
        Ok(r) => r,
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(CliError::Internal(msg.unwrap_or_else(|| "panic".into())))
        }
    }
}

fn batch(s: &mut Session, text: &str) -> ExitCode {
    let mut out = std::io::stdout().lock();
    for stmt in rg_cli::split_statements(text) {
        match guarded(s, &stmt) {
            Ok(o) => {
                let _ = out.write_all(o.as_bytes());
            }
            Err(e) => {
                let _ = out.flush();
                eprintln!("error: {e}");
                return ExitCode::from(e.exit_code() as u8);
            }
        }
    }
    ExitCode::SUCCESS
}

fn repl(s: &mut Session) -> ExitCode {
    let stdin = std::io::stdin();
    let interactive = stdin.is_terminal();
    let mut reader = StatementReader::default();
    let prompt = |pending: bool| {
        if interactive {
            print!("{}", if pending { "  ...> " } else { "rg> " });
            let _ = std::io::stdout().flush();
        }
    };
    prompt(false);
    let mut status = ExitCode::SUCCESS;
    let mut handle = |stmt: String, s: &mut Session| -> bool {
        if matches!(stmt.as_str(), ".quit" | ".exit") {
            return false;
        }
        match guarded(s, &stmt) {
            Ok(o) => print!("{o}"),
            Err(e) => {
                eprintln!("error: {e}");
                if !interactive {
                    status = ExitCode::from(e.exit_code() as u8);
                    return false;
                }
            }
        }
        true
    };
    for line in stdin.lock().lines() {
        let Ok(line) = line else { break };
        if let Some(stmt) = reader.push_line(&line) {
            if !handle(stmt, s) {
                return status;
            }
        }
        prompt(reader.is_pending());
    }
    if let Some(stmt) = reader.finish() {
        handle(stmt, s);
    }
    status
}

fn main() -> ExitCode {
    // bad flags are user errors like any other (clap would exit with 2)
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let cfg = match config(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let mut s = Session::new(cfg);
    match &args.script {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => batch(&mut s, &text),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                ExitCode::from(1)
            }
        },
        None => repl(&mut s),
    }
}
