//! Output envelope, error objects and exit codes.
//!
//! Floats go through serde_json, which prints the shortest decimal string that
//! round-trips; CSV goes through the csv crate, which does the same. Output is
//! therefore a pure function of the arguments (and seed).

use std::io::{self, Write};

use serde::{Serialize, Serializer};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Successful run.
pub const EXIT_OK: i32 = 0;
/// Arguments violate the command schema.
pub const EXIT_USAGE: i32 = 2;
/// A module reported a numeric domain, resource or convergence failure.
pub const EXIT_DOMAIN: i32 = 3;
/// Writing the output failed.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Serialize)]
pub struct Envelope<'a, P: Serialize, R: Serialize> {
    pub command: &'a str,
    pub params: &'a P,
    pub result: &'a R,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<&'a str>,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
struct ErrorDocument<'a> {
    error: &'a ErrorBody,
    version: &'static str,
}

/// A failure on its way to becoming an error document and an exit code.
#[derive(Debug)]
pub struct Failure(pub ErrorBody);

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure(ErrorBody {
            kind: "usage",
            message: message.into(),
            exit_code: EXIT_USAGE,
        })
    }

    fn io(err: impl std::fmt::Display) -> Self {
        Failure(ErrorBody {
            kind: "io",
            message: err.to_string(),
            exit_code: EXIT_IO,
        })
    }
}

impl From<longrun::Error> for Failure {
    fn from(err: longrun::Error) -> Self {
        use longrun::Error as E;
        let (kind, exit_code) = match &err {
            // argument values outside a documented range are schema violations
            E::InvalidArgument(_) => ("invalid_argument", EXIT_USAGE),
            E::Domain(_) => ("domain", EXIT_DOMAIN),
            E::Resource { .. } => ("resource", EXIT_DOMAIN),
            E::NonConvergence { .. } => ("non_convergence", EXIT_DOMAIN),
            E::Divergence(_) => ("divergence", EXIT_DOMAIN),
            E::Output(_) => ("io", EXIT_IO),
        };
        Failure(ErrorBody {
            kind,
            message: err.to_string(),
            exit_code,
        })
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Failure::io(err)
    }
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Self {
        Failure::io(err)
    }
}

impl From<csv::Error> for Failure {
    fn from(err: csv::Error) -> Self {
        Failure::io(err)
    }
}

pub type Outcome = Result<(), Failure>;

/// Writes the envelope, or only the payload under `--quiet`.
pub fn emit<P: Serialize, R: Serialize>(
    out: &mut dyn Write,
    quiet: bool,
    envelope: &Envelope<'_, P, R>,
) -> Outcome {
    if quiet {
        serde_json::to_writer_pretty(&mut *out, envelope.result)?;
    } else {
        serde_json::to_writer_pretty(&mut *out, envelope)?;
    }
    out.write_all(b"\n")?;
    Ok(())
}

/// Error document on stdout (so a pipeline always receives one JSON
/// document) and a one-line message on stderr.
pub fn emit_error(body: &ErrorBody) {
    let doc = ErrorDocument {
        error: body,
        version: VERSION,
    };
    let mut stdout = io::stdout().lock();
    if let Ok(text) = serde_json::to_string_pretty(&doc) {
        let _ = writeln!(stdout, "{text}");
    }
    let _ = stdout.flush();
    eprintln!("longrun: {}", body.message);
}

/// Writes rows as CSV with a header line.
pub fn write_rows<T: Serialize>(out: &mut dyn Write, rows: &[T]) -> Outcome {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON has no infinities; they are written as the strings `"+inf"`/`"-inf"`,
/// matching how the library serialises extended reals.
pub fn optional_ext<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(x) => longrun::ExtReal::from_f64(*x).serialize(s),
    }
}
