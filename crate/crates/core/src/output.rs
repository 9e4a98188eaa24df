use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes `rows` as CSV with a header taken from the field names.
pub(crate) fn write_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}
