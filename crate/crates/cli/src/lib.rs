//! Front end for `wishart-risk`: argument parsing, validation and report
//! emission. Reports go to stdout unless `--output` names a file.

pub mod commands;
pub mod config;

use std::ffi::OsString;

pub use commands::execute;
pub use config::{parse_and_validate, RunConfig};

/// Exit status for malformed requests and out-of-domain arguments.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for non-positive-definite input and factorization breakdown.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(#[from] clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] wishart_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) if !e.use_stderr() => 0,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        }
    }
}

/// Runs the tool on `argv` and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_and_validate(argv).and_then(|cfg| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cfg.threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
        pool.install(|| execute(&cfg))
    });
    match result {
        Ok(()) => 0,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            CliError::Clap(e).exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
