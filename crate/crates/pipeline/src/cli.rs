//! `generate-terrain` command line.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags, unknown or
//! unsupported modules, malformed tokens or settings), 1 for failures while
//! running.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::engine::Engine;
use crate::error::PipelineError;
use crate::settings::{parse_cli_setting, read_settings_file};

#[derive(Debug, Parser)]
#[command(name = "generate-terrain", about = "Generate, analyse and export procedural terrains")]
pub struct CliArgs {
    /// Output root; every module writes into its own subdirectory.
    #[arg(long)]
    pub save_dir: PathBuf,

    /// General settings as key:value pairs.
    #[arg(long, num_args = 1..)]
    pub settings: Vec<String>,

    /// File with `key: value` settings and an optional `modules` list.
    #[arg(long)]
    pub settings_file: Option<PathBuf>,

    /// Module tokens, executed left to right.
    #[arg(long, alias = "module", num_args = 1.., allow_hyphen_values = false)]
    pub modules: Vec<String>,

    /// Seed for the engine random stream (random when omitted).
    #[arg(long)]
    pub rng_seed: Option<u64>,

    /// Directory used to resolve relative input paths.
    #[arg(long)]
    pub work_dir: Option<PathBuf>,
}

/// Drops launcher leftovers (`--`, `--background`, `--python <file>`) that
/// wrapper scripts may still pass.
pub fn strip_launcher_args(args: Vec<OsString>) -> Vec<OsString> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--") | Some("--background") => log::info!("ignoring launcher argument {a:?}"),
            Some("--python") => {
                let file = it.next();
                log::info!("ignoring launcher argument --python {file:?}");
            }
            _ => out.push(a),
        }
    }
    out
}

fn build_engine(args: &CliArgs) -> Result<(Engine, Vec<String>), PipelineError> {
    let mut engine = Engine::new(&args.save_dir);
    if let Some(dir) = &args.work_dir {
        engine = engine.with_work_dir(dir);
    }
    if let Some(seed) = args.rng_seed {
        engine = engine.with_rng_seed(seed);
    }
    let mut modules = Vec::new();
    if let Some(path) = &args.settings_file {
        let file = read_settings_file(path)?;
        modules = file.modules.clone();
        engine.settings.file = file.values;
    }
    for s in &args.settings {
        let (k, v) = parse_cli_setting(s)?;
        engine.settings.general.insert(k, v);
    }
    if !args.modules.is_empty() {
        if !modules.is_empty() {
            log::warn!("--modules overrides the module list from the settings file");
        }
        modules = args.modules.clone();
    }
    if modules.is_empty() {
        return Err(PipelineError::Structure("no modules given".into()));
    }
    Ok((engine, modules))
}

/// Parses `argv` and runs; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv = strip_launcher_args(argv.into_iter().map(Into::into).collect());
    let args = match CliArgs::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = build_engine(&args).and_then(|(engine, modules)| engine.run_tokens(&modules));
    match result {
        Ok(outcome) => {
            if outcome.exited {
                log::info!("stopped by Exit");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}
