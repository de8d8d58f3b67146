use std::path::PathBuf;
use std::process::ExitCode;

use anyladder_cli::checks;
use anyladder_cli::config::{resolve, Source};
use anyladder_cli::presets;
use anyladder_cli::run::run;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "anyladder", version, about = "Sweeps and checks for the non-reciprocal anyon-Hubbard ladder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML config file and write its CSV tables.
    Run {
        /// Preset name or path to a config file.
        target: String,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        jobs: Option<usize>,
        /// Dotted `key=value` override, e.g. `grid.jp.max=0.5`. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Recompute even if a cached result exists.
        #[arg(long)]
        no_cache: bool,
    },
    /// List built-in presets.
    ListPresets,
    /// Run the reference checks and print one line per check.
    Check {
        /// Only run the checks with these ids.
        #[arg(long = "only", value_name = "ID")]
        only: Vec<u8>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { target, out, jobs, overrides, no_cache } => {
            let result = resolve(&Source::parse(&target), &overrides, out.as_deref())
                .and_then(|cfg| run(&cfg, jobs, !no_cache));
            match result {
                Ok(outcome) => {
                    let how = if outcome.cached { "cached" } else { "computed" };
                    eprintln!("{how} {} ({} file(s))", outcome.key, outcome.files.len());
                    for f in &outcome.files {
                        println!("{}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::ListPresets => {
            for p in presets::all() {
                println!("{:<14} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Check { only } => {
            let mut failed = 0;
            for c in checks::all().iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
                let r = c.run();
                failed += usize::from(!r.passed);
                println!("{r}");
            }
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                eprintln!("{failed} check(s) failed");
                ExitCode::from(2)
            }
        }
    }
}
