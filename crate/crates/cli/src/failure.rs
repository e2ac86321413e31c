use std::fmt;
use std::io;
use std::path::Path;

/// Every error the binary can report, each with a fixed exit code.
#[derive(Debug)]
pub enum Failure {
    /// Reading an existing input or writing an output failed. Exit 1.
    Io(String),
    /// An input file could not be parsed. Exit 2.
    Parse(String),
    /// Bad flags, config values, missing inputs or unusable combinations. Exit 3.
    Config(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Config(_) => 3,
        }
    }

    pub fn reading(path: &Path, e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::NotFound {
            Failure::Config(format!("input file not found: {}", path.display()))
        } else {
            Failure::Io(format!("{}: {e}", path.display()))
        }
    }

    pub fn parse(path: &Path, e: impl fmt::Display) -> Self {
        Failure::Parse(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
        }
    }
}
