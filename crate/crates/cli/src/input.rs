use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use vnlab_core::lattice::LatticeBox;
use vnlab_core::multishift::{CommutingTuple, WeightFamily};
use vnlab_core::poly::{AnyPoly, PolyJson};
use vnlab_core::Error;

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: io::Error },
    Input { path: Option<PathBuf>, source: Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Input { source, .. } => match source {
                Error::WeightsRejected(_)
                | Error::RuleDomainTooSmall(_)
                | Error::NotCommuting { .. }
                | Error::NonUnitaryWeights(_)
                | Error::PathDependence { .. }
                | Error::NotDiagonalRule(_) => 2,
                _ => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Input { path: Some(path), source } => write!(f, "{}: {source}", path.display()),
            CliError::Input { path: None, source } => write!(f, "{source}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(source: Error) -> Self {
        CliError::Input { path: None, source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

trait InFile<T> {
    fn in_file(self, path: &Path) -> CliResult<T>;
}

impl<T> InFile<T> for vnlab_core::Result<T> {
    fn in_file(self, path: &Path) -> CliResult<T> {
        self.map_err(|source| CliError::Input { path: Some(path.to_path_buf()), source })
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn weights(path: &Path) -> CliResult<WeightFamily> {
    WeightFamily::parse(&read(path)?).in_file(path)
}

pub fn polynomial(path: &Path) -> CliResult<AnyPoly> {
    PolyJson::parse(&read(path)?).in_file(path)
}

pub fn dense_tuple(path: &Path) -> CliResult<CommutingTuple> {
    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(CommutingTuple::parse_dense(&read(path)?).in_file(path)?.with_label(label))
}

pub fn lattice_box(sides: &[usize], arity: usize) -> CliResult<LatticeBox> {
    if sides.len() != arity {
        return Err(Error::ArityMismatch { expected: arity, got: sides.len() }.into());
    }
    Ok(LatticeBox::new(sides.to_vec())?)
}

/// Pretty JSON plus a trailing newline, to `output` or stdout.
pub fn emit(value: &impl serde::Serialize, output: Option<&Path>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    match output {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source }),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

pub fn emit_value(value: Value, output: Option<&Path>) -> CliResult<()> {
    emit(&value, output)
}
