//! Output files: `#` metadata lines, CSV bodies and JSON summaries.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::config::Echo;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata lines opening every CSV the tool writes.
pub fn header(command: &str, echo: &Echo) -> String {
    let config = serde_json::to_string(echo).expect("config serializes");
    format!("# rotorgw {VERSION}\n# command: {command}\n# config: {config}\n")
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(text.as_bytes())?;
            w.flush()
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Pretty JSON to `path`, or to stderr when no path is given.
pub fn emit_summary<T: Serialize>(path: Option<&Path>, summary: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text),
        None => io::stderr().lock().write_all(text.as_bytes()),
    }
}
