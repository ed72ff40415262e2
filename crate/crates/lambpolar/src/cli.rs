//! Command-line front end. Subcommands and their `--key value` flags are
//! generated from the config schemas, so `--help` and the config file
//! accept exactly the same keys.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::commands;
use crate::config::{Config, Kind, Schema, SCHEMAS};
use crate::error::{AppError, Result};
use crate::run::write_run_manifest;

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn value_name(k: Kind) -> &'static str {
    match k {
        Kind::Text => "TEXT",
        Kind::Int => "N",
        Kind::Float => "X",
        Kind::FloatList => "X,..",
        Kind::TextList => "A,..",
        Kind::Bool => "BOOL",
    }
}

fn subcommand(s: &'static Schema) -> Command {
    let mut cmd = Command::new(s.command).about(s.about);
    cmd = cmd
        .arg(Arg::new("config").long("config").value_name("PATH").help("key = value settings file"))
        .arg(Arg::new("out").long("out").value_name("DIR").help("output directory (overrides out_dir)"))
        .arg(Arg::new("threads").long("threads").value_name("N").value_parser(clap::value_parser!(usize)).help(
            "worker threads (default: available parallelism); results do not depend on it",
        ));
    for k in s.keys {
        if k.name == "out_dir" {
            // Set with --out.
            continue;
        }
        let default = if k.default.is_empty() { String::new() } else { format!(" [default: {}]", k.default) };
        cmd = cmd.arg(
            Arg::new(k.name)
                .long(flag_name(k.name))
                .value_name(value_name(k.kind))
                .help(format!("{}{default}", k.doc))
                .action(ArgAction::Set),
        );
    }
    cmd
}

pub fn command() -> Command {
    let mut keys = String::from("Config keys per command (file `key = value`, or flag `--key-name value`):\n");
    for s in SCHEMAS {
        keys += &format!("  {}: {}\n", s.command, s.keys.iter().map(|k| k.name).collect::<Vec<_>>().join(", "));
    }
    Command::new("lambpolar")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Guided-wave polar group velocities, polar-image datasets and dual-branch CNN training")
        .after_help(keys)
        .subcommand_required(true)
        .subcommands(SCHEMAS.iter().map(|s| subcommand(s)))
}

/// Settings from `--config`, then command-line flags, then `--seed` and
/// `--out`.
fn resolve(schema: &'static Schema, m: &ArgMatches) -> Result<Config> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => Config::load(schema, &PathBuf::from(p))?,
        None => Config::new(schema),
    };
    for k in schema.keys {
        if let Ok(Some(v)) = m.try_get_one::<String>(k.name) {
            cfg.set(k.name, v)?;
        }
    }
    if let Some(o) = m.get_one::<String>("out") {
        cfg.set("out_dir", o)?;
    }
    Ok(cfg)
}

/// Run one parsed invocation, returning the files written.
pub fn dispatch(m: &ArgMatches) -> Result<Vec<PathBuf>> {
    let (name, sub) = m.subcommand().ok_or_else(|| AppError::Usage("no command given".into()))?;
    let schema = crate::config::schema(name).ok_or_else(|| AppError::Usage(format!("unknown command {name}")))?;
    let cfg = resolve(schema, sub)?;
    let threads = sub.get_one::<usize>("threads").copied().unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| AppError::Usage(format!("thread pool: {e}")))?;
    let n_threads = pool.current_num_threads();
    let mut outputs = pool.install(|| match name {
        "dispersion" => commands::dispersion(&cfg),
        "polar" => commands::polar(&cfg),
        "dataset" => commands::dataset(&cfg),
        "featurize" => commands::featurize(&cfg),
        "sensitivity" => commands::sensitivity(&cfg),
        "train" => commands::train(&cfg),
        "evaluate" => commands::evaluate_cmd(&cfg),
        "predict" => commands::predict_cmd(&cfg),
        _ => unreachable!("schema table and dispatch disagree on {name}"),
    })?;
    let dir = commands::out_dir(&cfg)?;
    outputs.push(write_run_manifest(&dir, &cfg, n_threads, &outputs)?);
    Ok(outputs)
}

/// Parse `args`, run, and map failures to `ERROR <code>: <message>` with
/// exit status 1 (2 for usage errors).
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let msg = e.kind().as_str().map(str::to_string).unwrap_or_else(|| e.to_string());
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            eprintln!("ERROR USAGE: {first}");
            return 2;
        }
    };
    match dispatch(&m) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("ERROR {}: {}", e.code(), e.to_string().replace('\n', " "));
            1
        }
    }
}
