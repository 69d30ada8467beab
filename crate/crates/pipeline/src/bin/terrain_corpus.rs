//! Runs the example corpus into a directory and prints the report.

use std::path::PathBuf;

use clap::Parser;
use terrain_pipeline::corpus::run_corpus;

#[derive(Parser)]
#[command(name = "terrain-corpus", about = "Run the example corpus")]
struct Args {
    /// Directory that receives every case's outputs.
    #[arg(long, default_value = "corpus_out")]
    root: PathBuf,
    /// Also print per-case timings.
    #[arg(long)]
    timings: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    if let Err(e) = std::fs::create_dir_all(&args.root) {
        eprintln!("error: cannot create {}: {e}", args.root.display());
        std::process::exit(1);
    }
    let report = run_corpus(&args.root);
    print!("{}", report.to_text());
    if args.timings {
        print!("{}", report.timings());
    }
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}
