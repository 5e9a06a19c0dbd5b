use std::process::ExitCode;

use clap::Parser;
use wavebands_cli::{load_config, run, Cli, Status};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = load_config(&cli.config).map_err(Into::into).and_then(|config| {
        let out = cli.out.clone().unwrap_or_else(|| config.output_dir.clone());
        run(&cli.command, &config, &out)
    });
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            match outcome.status {
                Status::Ok => ExitCode::SUCCESS,
                Status::PropertyViolation => {
                    eprintln!("property violation: {}", outcome.summary);
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
