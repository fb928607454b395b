mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Command, RunConfig};
use commands::{Fail, RunOutput};

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn resolve_threads(flag: Option<usize>, config: Option<usize>) -> Result<Option<usize>, Fail> {
    let n = match flag.or(config) {
        Some(n) => Some(n),
        None => match std::env::var("LATSPEC_THREADS") {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| Fail::Validation(format!("LATSPEC_THREADS is not a count: {s:?}")))?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Fail::Validation("thread count must be positive".into()));
    }
    Ok(n)
}

fn load_command(cli: Cli) -> Result<(Command, Option<usize>), Fail> {
    if let Some(path) = cli.config {
        if cli.command.is_some() {
            return Err(Fail::Validation("--config cannot be combined with a subcommand".into()));
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Fail::Validation(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Fail::Validation(format!("bad config {}: {e}", path.display())))?;
        let threads = resolve_threads(cli.threads, cfg.threads)?;
        return Ok((cfg.command, threads));
    }
    match cli.command {
        Some(c) => Ok((c, resolve_threads(cli.threads, None)?)),
        None => Err(Fail::Validation("a subcommand or --config is required".into())),
    }
}

fn dispatch(cmd: &Command) -> Result<RunOutput, Fail> {
    match cmd {
        Command::Green(a) => commands::green(a),
        Command::DetEval(a) => commands::det_eval(a),
        Command::TaylorCheck(a) => commands::taylor_check(a),
        Command::Eigs(a) => commands::eigs(a),
        Command::TraceCheck(a) => commands::trace_check(a),
        Command::BoundsReport(a) => commands::bounds_report(a),
        Command::BesselCheck(a) => commands::bessel_check(a),
        Command::Sweep(a) => commands::sweep(a),
    }
}

fn write_out(cmd: &Command, text: &str) -> Result<(), Fail> {
    match cmd.output() {
        Some(p) => std::fs::write(p, text).map_err(|e| Fail::Validation(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Fail::Validation(e.to_string())),
    }
}

fn run() -> Result<Vec<String>, Fail> {
    let (cmd, threads) = load_command(Cli::parse())?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Fail::Validation(e.to_string()))?;
    }
    let out = dispatch(&cmd)?;
    match &out.csv {
        Some(table) => write_out(&cmd, table)?,
        None => {
            let mut config = serde_json::to_value(&cmd).expect("config serializes");
            if let Some(obj) = config.as_object_mut() {
                obj.remove("command");
            }
            let doc = json!({
                "command": cmd.name(),
                "timestamp": chrono::Utc::now().to_rfc3339(),
                "config": config,
                "flags": out.flags,
                "report": out.report,
            });
            let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
            text.push('\n');
            write_out(&cmd, &text)?;
        }
    }
    Ok(out.flags)
}

fn main() -> ExitCode {
    match run() {
        Ok(flags) if flags.is_empty() => ExitCode::SUCCESS,
        Ok(flags) => {
            for f in &flags {
                eprintln!("latspec: warning: {f}");
            }
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Fail::Validation(msg)) => {
            eprintln!("latspec: error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Fail::Numerical(msg)) => {
            eprintln!("latspec: numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
