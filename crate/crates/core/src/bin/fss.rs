use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fss_core::config::load_config;
use fss_core::runner::{run_with_threads, OUT_DIR_ENV};

/// Transfer-matrix simulator and inverse-design tool for multilayer
/// frequency-selective surfaces.
#[derive(Debug, Parser)]
#[command(name = "fss", version)]
struct Cli {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for written artifacts.
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome =
        load_config(&cli.config).and_then(|cfg| run_with_threads(&cfg, &cli.out_dir, cli.threads));
    match outcome {
        Ok(out) => {
            // A closed pipe downstream is not a run failure.
            let _ = writeln!(
                std::io::stdout().lock(),
                "{}",
                serde_json::to_string_pretty(&out.summary).unwrap()
            );
            if out.failures > 0 {
                eprintln!("fss: {} condition(s) failed; see summary", out.failures);
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("fss: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
