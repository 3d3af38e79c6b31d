//! Command-line runner: flags and config files in, CSV and summary files out.
//!
//! Exit codes: 0 on success, 2 for bad flags or config, 3 for I/O failures,
//! 4 when a run breaks a structural invariant.

pub mod config;
pub mod run;

use std::ffi::OsString;
use std::fmt;

pub use config::{parse_config, RunConfig};
pub use run::run;

#[derive(Debug)]
pub enum Failure {
    Usage(clap::Error),
    Config(String),
    Io(String),
    Invariant(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(e) => e.exit_code(),
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
            Failure::Invariant(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) => write!(f, "{e}"),
            Failure::Config(m) => write!(f, "config: {m}"),
            Failure::Io(m) => write!(f, "i/o: {m}"),
            Failure::Invariant(m) => write!(f, "invariant breached: {m}"),
        }
    }
}

pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_config(args).and_then(|cfg| run(&cfg)) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("locadapt: {e}");
            e.code()
        }
    }
}
