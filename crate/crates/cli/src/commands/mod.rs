pub mod eval;
pub mod gt;
pub mod loss;
pub mod segment;
pub mod synth;

use std::path::Path;

use starlap::arrayio::{self, ArrayFile};
use starlap::groundtruth::LabelStack;
use starlap::Error;

/// CLI failure: message plus process exit code (1 input error, 2 constraint
/// failure).
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        let exit_code = match err {
            Error::ConstraintUnreachable { .. } => 2,
            _ => 1,
        };
        CliError {
            message: err.to_string(),
            exit_code,
        }
    }
}

/// Attaches the offending path to an error message.
pub fn with_path(path: &Path, err: Error) -> CliError {
    let mut cli: CliError = err.into();
    cli.message = format!("{}: {}", path.display(), cli.message);
    cli
}

pub fn usage(message: impl Into<String>) -> CliError {
    CliError {
        message: message.into(),
        exit_code: 1,
    }
}

pub fn read_array(path: &Path) -> CliResult<ArrayFile> {
    arrayio::read_array(path).map_err(|e| with_path(path, e))
}

pub fn write_array(path: &Path, array: &ArrayFile) -> CliResult {
    arrayio::write_array(path, array).map_err(|e| with_path(path, e))
}

/// Loads a label stack from a 2D label image or a 3D mask stack, warning on
/// dropped empty instances.
pub fn load_labels(path: &Path) -> CliResult<LabelStack> {
    let array = read_array(path)?;
    let loaded = arrayio::labels_from_array(&array).map_err(|e| with_path(path, e))?;
    for index in &loaded.dropped {
        eprintln!(
            "warning: {}: dropped empty instance slice {index}",
            path.display()
        );
    }
    Ok(loaded.stack)
}

/// Parses a comma-separated list of reals ("0.4,0.5,0.6").
pub fn parse_real_list(text: &str, what: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| usage(format!("invalid {what} entry {s:?}")))
        })
        .collect()
}
