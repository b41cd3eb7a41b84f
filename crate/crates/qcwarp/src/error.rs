//! CLI error type with a fixed exit-code taxonomy.
//!
//! 0 success, 2 bad input (arguments, formats, specs), 3 I/O failure,
//! 4 numerical inadmissibility or solver failure, 5 fold (non-bijective map).
//! stderr lines carry the category token: `qcwarp: error[<category>]: ...`.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Input,
    Io,
    Numeric,
    Fold,
}

impl Category {
    pub fn token(self) -> &'static str {
        match self {
            Category::Input => "input",
            Category::Io => "io",
            Category::Numeric => "numeric",
            Category::Fold => "fold",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Category::Input => 2,
            Category::Io => 3,
            Category::Numeric => 4,
            Category::Fold => 5,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub category: Category,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Input,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            category: Category::Io,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.category.token(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<qcwarp_core::Error> for CliError {
    fn from(e: qcwarp_core::Error) -> Self {
        let category = match e.category() {
            "numeric" => Category::Numeric,
            "fold" => Category::Fold,
            _ => Category::Input,
        };
        CliError {
            category,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError {
            category: Category::Io,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError {
            category: Category::Input,
            message: format!("bad JSON: {e}"),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
