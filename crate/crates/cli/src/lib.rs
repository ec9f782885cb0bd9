//! Command-line front end for the `lightcone` library.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;

use clap::{error::ErrorKind, FromArgMatches, CommandFactory, parser::ValueSource};

use commands::Cli;
use config::ConfigFile;
use output::{CliError, Metadata, OutDir, EXIT_OK};

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to stderr as one JSON line.
pub fn run(argv: Vec<OsString>) -> i32 {
    match try_run(argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.code
        }
    }
}

fn parse(argv: &[OsString]) -> Result<(Cli, clap::ArgMatches), CliError> {
    let matches = Cli::command().try_get_matches_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            std::process::exit(if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 });
        }
        _ => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            CliError::usage(first.trim_start_matches("error: ").to_string())
        }
    })?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| CliError::usage(e.to_string()))?;
    Ok((cli, matches))
}

fn try_run(argv: Vec<OsString>) -> Result<(), CliError> {
    let (mut cli, _) = parse(&argv)?;
    if let Some(path) = cli.config.clone() {
        let cfg = ConfigFile::load(&path)?;
        if let Some(cmd) = &cfg.command {
            if cmd != cli.command.name() {
                return Err(CliError::usage(format!("config is for `{cmd}`, not `{}`", cli.command.name())));
            }
        }
        let (spliced, matches) = parse(&config::splice(&argv, &cfg.tokens))?;
        cli = spliced;
        if matches.value_source("out_dir") != Some(ValueSource::CommandLine) {
            if let Some(dir) = cfg.out_dir {
                cli.out_dir = dir.into();
            }
        }
        if cli.threads.is_none() {
            cli.threads = cfg.threads;
        }
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::validation("threads", e.to_string()))?;
    }
    let name = cli.command.name();
    let meta = Metadata::new(name, config::config_hash(&cli.command));
    let mut out = OutDir::create(&cli.out_dir, meta)?;
    let result = cli.command.run(&mut out);
    for path in out.written() {
        println!("wrote {}", path.display());
    }
    result
}
