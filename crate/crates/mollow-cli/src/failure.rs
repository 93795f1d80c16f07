//! Failure classification and process exit codes.
//!
//! Every error the binary can hit falls into one of four classes, each with
//! its own exit code so scripts can tell them apart:
//!
//! | class      | exit | meaning                                              |
//! |------------|------|------------------------------------------------------|
//! | config     | 2    | the config file is unreadable, malformed, or invalid |
//! | validation | 3    | inputs parsed fine but describe an impossible run    |
//! | numeric    | 4    | the computation itself lost numerical integrity      |
//! | io         | 1    | writing results to disk failed                       |

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Problems with the config file itself: missing file, syntax errors,
    /// unknown keys, values that fail basic range checks.
    Config(String),
    /// Inputs that are well-formed but rejected by the physics layer
    /// (e.g. a pulse count that is not a multiple of the protocol block).
    Validation(String),
    /// Loss of numerical integrity during the computation.
    Numeric(String),
    /// Filesystem trouble while writing outputs.
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Numeric(m) => write!(f, "numeric error: {m}"),
            Failure::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

impl From<mollow::Error> for Failure {
    fn from(e: mollow::Error) -> Self {
        match e {
            mollow::Error::Parse(m) => Failure::Config(m),
            mollow::Error::InvalidInput(m) => Failure::Validation(m),
            mollow::Error::Numeric(m) => Failure::Numeric(m),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct_and_stable() {
        assert_eq!(Failure::Io(String::new()).exit_code(), 1);
        assert_eq!(Failure::Config(String::new()).exit_code(), 2);
        assert_eq!(Failure::Validation(String::new()).exit_code(), 3);
        assert_eq!(Failure::Numeric(String::new()).exit_code(), 4);
    }

    #[test]
    fn library_errors_map_onto_failure_classes() {
        let f: Failure = mollow::Error::parse("bad text").into();
        assert_eq!(f.exit_code(), 2);
        let f: Failure = mollow::Error::invalid("bad run").into();
        assert_eq!(f.exit_code(), 3);
        let f: Failure = mollow::Error::numeric("norm drift").into();
        assert_eq!(f.exit_code(), 4);
    }
}
