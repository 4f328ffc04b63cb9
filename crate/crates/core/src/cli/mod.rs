//! Configuration, experiment runners and reports.

mod commands;
mod config;
mod report;

pub use commands::{run, Command, RunOptions};
pub use config::Config;
pub use report::{Record, Report, Status};

use crate::error::Error;

/// Converts a serde_json error into a [`Error::Parse`] carrying a byte offset.
pub fn parse_error(text: &str, e: &serde_json::Error) -> Error {
    let offset = byte_offset(text, e.line(), e.column());
    Error::Parse {
        offset,
        message: e.to_string(),
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
