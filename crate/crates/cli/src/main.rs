use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qnoise_cli::{load_config, run, Mode};

/// Quantum-noise calculator for squeezed-light sources and Sagnac/Michelson
/// interferometers.
#[derive(Debug, Parser)]
#[command(name = "qnoise", version)]
struct Args {
    /// Workflow to run
    #[arg(value_enum)]
    mode: Mode,

    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,

    /// Output path prefix; `.csv` and `.svg` are appended
    #[arg(long)]
    out: Option<PathBuf>,

    /// Skip the SVG plot
    #[arg(long)]
    no_svg: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = load_config(&args.config, Some(args.mode)).and_then(|mut cfg| {
        if let Some(out) = args.out {
            cfg.output = out;
        }
        run(&cfg, !args.no_svg)
    });
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
