use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use rectify_nd::job::{exit_code_for, run, Command, JobSpec, RunOptions};
use rectify_nd::Error;

/// Certify or refute that an n-dimensional curve is a rectifying curve.
#[derive(Debug, Parser)]
#[command(name = "rectify-nd", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON job file.
    #[arg(long)]
    job: PathBuf,
    /// Directory for reports and CSV files (default: current directory).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    tol_certify: Option<f64>,
    #[arg(long)]
    tol_falsify: Option<f64>,
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("RECTIFY_ND_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidSpec(format!(
            "RECTIFY_ND_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidSpec(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| {
        let job = JobSpec::load(&cli.job)?;
        let stem = cli
            .job
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("job")
            .to_string();
        let opts = RunOptions {
            out_dir: cli.out_dir.clone(),
            tol_certify: cli.tol_certify,
            tol_falsify: cli.tol_falsify,
            base_dir: cli.job.parent().map(PathBuf::from),
        };
        run(&job, cli.command, &stem, &opts)
    });
    match result {
        Ok(outcome) => {
            println!("{}: {:?}", outcome.name, outcome.verdict);
            for path in &outcome.artifacts {
                println!("  wrote {}", path.display());
            }
            if let Some(entries) = &outcome.corpus {
                for e in entries {
                    let status = if e.passed { "ok" } else { "FAILED" };
                    match &e.error {
                        Some(err) => println!("  {status} {} ({err})", e.job),
                        None => println!("  {status} {} {:?}", e.job, e.verdict.unwrap()),
                    }
                }
            }
            ExitCode::from(outcome.verdict.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
