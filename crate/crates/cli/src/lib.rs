//! Command-line front end for `twophoton-core`.
//!
//! Every subcommand reads a flat `key = value` configuration (file via
//! `--config`, overridden by `--<key> <value>` flags), prints a JSON report,
//! and optionally writes a CSV table. See [`config::CommandKind::keys`] for
//! the accepted keys.

pub mod commands;
pub mod config;
mod csvout;
pub mod error;
pub mod format;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

pub use commands::{execute, Artifacts};
pub use config::{CommandKind, RunConfig};
pub use error::CliError;
pub use report::ReportDocument;

/// A parsed command line.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: RunConfig,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub fn cli() -> Command {
    let mut cmd = Command::new("twophoton")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Photon-pair statistics: thermal versus two-mode squeezed emission")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("natural-units")
                .long("natural-units")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("Use ħ = c = k_B = 1"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .global(true)
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("Write the JSON report here instead of stdout"),
        )
        .arg(
            Arg::new("csv")
                .long("csv")
                .global(true)
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("Write the CSV table here (spectrum, formfactor, angular)"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help("Worker threads (results do not depend on this)"),
        );
    for kind in CommandKind::ALL {
        let mut sub = Command::new(kind.name()).about(kind.about()).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key = value file; flags override it"),
        );
        for key in kind.keys() {
            let help = if key.unit.is_empty() || key.unit == "1" {
                key.help.to_string()
            } else {
                format!("{} [{}]", key.help, key.unit)
            };
            sub = sub.arg(
                Arg::new(key.name)
                    .long(key.name)
                    .value_name("VALUE")
                    .help(help),
            );
        }
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn config_from(
    kind: CommandKind,
    global: &ArgMatches,
    sub: &ArgMatches,
) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::new(kind);
    if let Some(path) = sub.get_one::<PathBuf>("config") {
        config.merge_file(path)?;
    }
    for key in kind.keys() {
        if let Some(raw) = sub.get_one::<String>(key.name) {
            config.set(key.name, raw)?;
        }
    }
    if global.get_flag("natural-units") || sub.get_flag("natural-units") {
        config.natural_units = true;
    }
    Ok(config)
}

pub fn parse<I, T>(args: I) -> Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = cli().try_get_matches_from(args)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let kind = CommandKind::from_name(name).expect("subcommands come from CommandKind::ALL");
    let config = config_from(kind, &matches, sub)?;
    let path = |id: &str| {
        sub.get_one::<PathBuf>(id)
            .or(matches.get_one::<PathBuf>(id))
            .cloned()
    };
    Ok(Invocation {
        config,
        out: path("out"),
        csv: path("csv"),
        threads: sub
            .get_one::<usize>("threads")
            .or(matches.get_one::<usize>("threads"))
            .copied(),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

/// Run `execute`, on a pool of `threads` workers if given.
pub fn execute_with_threads(
    config: &RunConfig,
    threads: Option<usize>,
) -> Result<Artifacts, CliError> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::config("threads", e.to_string()))?
            .install(|| execute(config)),
        None => execute(config),
    }
}

/// Parse `args`, run the command and write its outputs.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let inv = parse(args)?;
    let artifacts = execute_with_threads(&inv.config, inv.threads)?;
    match (&inv.csv, &artifacts.csv) {
        (Some(path), Some(text)) => write_file(path, text)?,
        (Some(_), None) => {
            return Err(CliError::config(
                "csv",
                format!("`{}` produces no CSV table", inv.config.command),
            ))
        }
        _ => {}
    }
    if let Some((path, text)) = &artifacts.events {
        write_file(path, text)?;
    }
    let json = artifacts.report.to_json();
    match &inv.out {
        Some(path) => write_file(path, &json)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(json.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Output {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(())
}
