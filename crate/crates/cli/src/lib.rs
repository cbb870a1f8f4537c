//! Command-line front end: argument parsing, dispatch and reporting.
//!
//! [`run`] is the whole program; the binary only forwards `argv` and the
//! process environment to it and prints the result.

pub mod args;
pub mod commands;
pub mod report;

use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use pvlab_core::counting::DEFAULT_MEM_CAP;
use pvlab_core::LabError;
use serde_json::{json, Map, Value};

use args::{Cli, Format};
use commands::Context;
use report::{emit, error_json, to_json_string, Report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARAM: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Exit status plus the text destined for stdout and stderr.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// `1234`, `512K`, `64M`, `2G` (binary multiples).
pub fn parse_bytes(text: &str) -> Option<u64> {
    let t = text.trim();
    let (digits, mult) = match t.chars().last()? {
        'k' | 'K' => (&t[..t.len() - 1], 1u64 << 10),
        'm' | 'M' => (&t[..t.len() - 1], 1 << 20),
        'g' | 'G' => (&t[..t.len() - 1], 1 << 30),
        _ => (t, 1),
    };
    digits.parse::<u64>().ok()?.checked_mul(mult)
}

/// Runs with the process environment.
pub fn run(argv: &[String]) -> Outcome {
    run_with_env(argv, |k| std::env::var(k).ok())
}

/// `argv` excludes the program name. `env` resolves `PVLAB_THREADS` and
/// `PVLAB_MEM_CAP`; flags take precedence over it.
pub fn run_with_env(argv: &[String], env: impl Fn(&str) -> Option<String>) -> Outcome {
    let cli = match Cli::try_parse_from(std::iter::once("pvlab".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                };
            }
            let mut cfg = Map::new();
            cfg.insert("argv".into(), json!(argv));
            return Outcome {
                code: EXIT_PARAM,
                stdout: to_json_string(&error_json("usage", &text, &cfg)),
                stderr: text,
            };
        }
    };

    let mut config = Map::new();
    config.insert("argv".into(), json!(argv));
    config.insert("format".into(), json!(format!("{:?}", cli.format).to_lowercase()));
    config.insert("seed".into(), json!(cli.seed.to_string()));

    let resolved = resolve_budgets(&cli, &env);
    let (threads, mem_cap) = match resolved {
        Ok(v) => v,
        Err(msg) => return failure(cli.format, "parameter", &msg, EXIT_PARAM, &config),
    };
    config.insert("threads".into(), json!(threads.to_string()));
    config.insert("mem_cap_bytes".into(), json!(mem_cap.to_string()));
    config.insert("command".into(), json!(command_name(&cli)));

    let ctx = Context {
        seed: cli.seed,
        mem_cap,
        threads,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return failure(cli.format, "resource", &e.to_string(), EXIT_RESOURCE, &config),
    };
    let start = Instant::now();
    let result = pool.install(|| commands::dispatch(&cli.command, &ctx));
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(out) => {
            let rep = Report {
                command: command_name(&cli),
                config: config.clone(),
                results: out.results,
                flags: out.flags,
                seconds,
                extra_timing: out.extra_timing,
            };
            match emit(&rep, cli.format) {
                Ok(text) => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                Err(e) => failure(Format::Json, "format", &e.0, EXIT_PARAM, &config),
            }
        }
        Err(e) => {
            let (kind, code) = classify(&e);
            failure(cli.format, kind, &e.to_string(), code, &config)
        }
    }
}

fn resolve_budgets(cli: &Cli, env: &impl Fn(&str) -> Option<String>) -> Result<(usize, u64), String> {
    let threads = match cli.threads {
        Some(t) => t,
        None => match env("PVLAB_THREADS") {
            Some(v) => v
                .trim()
                .parse::<usize>()
                .map_err(|_| format!("PVLAB_THREADS must be a positive integer, got {v:?}"))?,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if threads == 0 {
        return Err("thread budget must be >= 1".into());
    }
    let mem_cap = match (&cli.mem_cap, env("PVLAB_MEM_CAP")) {
        (Some(flag), _) => parse_bytes(flag).ok_or_else(|| format!("--mem-cap: cannot parse {flag:?}"))?,
        (None, Some(v)) => parse_bytes(&v).ok_or_else(|| format!("PVLAB_MEM_CAP: cannot parse {v:?}"))?,
        (None, None) => DEFAULT_MEM_CAP,
    };
    Ok((threads, mem_cap))
}

fn classify(e: &LabError) -> (&'static str, i32) {
    match e {
        LabError::ResourceCap { .. } => ("resource", EXIT_RESOURCE),
        LabError::Unsupported(_) => ("unsupported", EXIT_PARAM),
        LabError::Divergent { .. } => ("divergent", EXIT_PARAM),
        LabError::Dimension { .. } | LabError::Parameter(_) => ("parameter", EXIT_PARAM),
    }
}

fn failure(format: Format, kind: &str, message: &str, code: i32, config: &Map<String, Value>) -> Outcome {
    let stdout = match format {
        Format::Text | Format::Csv => String::new(),
        Format::Json => to_json_string(&error_json(kind, message, config)),
    };
    Outcome {
        code,
        stdout,
        stderr: format!("pvlab: {message}\n"),
    }
}

fn command_name(cli: &Cli) -> String {
    use args::*;
    let name = match &cli.command {
        Command::Count(_) => "count",
        Command::Sums(SumsCommand::Moment(_)) => "sums moment",
        Command::Sums(SumsCommand::Probe(_)) => "sums probe",
        Command::Numerology(NumerologyCommand::Report(_)) => "numerology report",
        Command::Numerology(NumerologyCommand::Scan(_)) => "numerology scan",
        Command::Numerology(NumerologyCommand::Ball(_)) => "numerology ball",
        Command::Numerology(NumerologyCommand::Table) => "numerology table",
        Command::Transversality(TransversalityCommand::Conjecture(_)) => "transversality conjecture",
        Command::Transversality(TransversalityCommand::Appendix(_)) => "transversality appendix",
        Command::Transversality(TransversalityCommand::Bl(_)) => "transversality bl",
        Command::Transversality(TransversalityCommand::Squares(_)) => "transversality squares",
        Command::Report(ReportCommand::Bounds(_)) => "report bounds",
        Command::Report(ReportCommand::Validate(_)) => "report validate",
    };
    name.to_string()
}

/// Report JSON with the `timing` key removed, for determinism comparisons.
pub fn without_timing(stdout: &str) -> Option<Value> {
    let mut v: Value = serde_json::from_str(stdout).ok()?;
    v.as_object_mut()?.remove("timing");
    Some(v)
}
