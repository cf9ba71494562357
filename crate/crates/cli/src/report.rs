//! JSON output with a fixed float format.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::error::CliError;

/// Writes finite floats with 17 significant digits so they round-trip
/// exactly and print the same everywhere. Non-finite values become `null`
/// before reaching the formatter.
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `report` with sorted keys and a trailing newline.
pub fn render<T: Serialize>(report: &T) -> Result<Vec<u8>, CliError> {
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(report).map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FixedFloats);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes to `path`, or standard output when `path` is `None`.
pub fn write_report<T: Serialize>(report: &T, path: Option<&Path>) -> Result<(), CliError> {
    let bytes = render(report)?;
    match path {
        Some(p) => fs::write(p, &bytes).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(&bytes).and_then(|_| stdout.flush()).map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}
