//! Report files, exit codes and one-line diagnostics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    /// Machine-readable tag, e.g. `usage`, `resolution`, `numerical_acceptance`.
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, kind: "usage".into(), message: message.into() }
    }

    pub fn validation(kind: &str, message: impl Into<String>) -> Self {
        CliError { code: EXIT_VALIDATION, kind: kind.into(), message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::validation("io", format!("{}: {e}", path.display()))
    }

    /// Failed acceptance checks, listed by name.
    pub fn acceptance(failed: &[String]) -> Self {
        CliError { code: EXIT_NUMERICAL, kind: "numerical_acceptance".into(), message: failed.join("; ") }
    }

    /// `{"error":...,"exit_code":...,"message":...}` on a single line.
    pub fn json_line(&self) -> String {
        let v = serde_json::json!({ "error": self.kind, "exit_code": self.code, "message": self.message });
        v.to_string()
    }
}

impl From<lightcone::Error> for CliError {
    /// Under-resolution and focusing are numerical failures; everything else
    /// rejects the input.
    fn from(e: lightcone::Error) -> Self {
        let code = match e {
            lightcone::Error::Resolution(_) | lightcone::Error::Focusing { .. } => EXIT_NUMERICAL,
            _ => EXIT_VALIDATION,
        };
        CliError { code, kind: e.kind().into(), message: e.to_string() }
    }
}

/// The header every report carries. Only this block may differ between two runs
/// with the same parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub timestamp_unix: u64,
}

impl Metadata {
    pub fn new(command: &str, config_hash: String) -> Self {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Metadata { version: env!("CARGO_PKG_VERSION").into(), command: command.into(), config_hash, timestamp_unix }
    }
}

#[derive(Serialize)]
struct Envelope<'a, P: Serialize, R: Serialize> {
    metadata: &'a Metadata,
    parameters: &'a P,
    report: &'a R,
}

/// Output directory of one run.
#[derive(Debug, Clone)]
pub struct OutDir {
    root: PathBuf,
    pub metadata: Metadata,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path, metadata: Metadata) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutDir { root: root.to_path_buf(), metadata, written: Vec::new() })
    }

    /// Writes `{metadata, parameters, report}` as pretty JSON to `name`.
    pub fn report<P: Serialize, R: Serialize>(&mut self, name: &str, parameters: &P, report: &R) -> Result<PathBuf, CliError> {
        let env = Envelope { metadata: &self.metadata, parameters, report };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::validation("io", e.to_string()))?;
        text.push('\n');
        let path = self.root.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// Creates `name` and hands a buffered writer to `fill`.
    pub fn csv(&mut self, name: &str, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

/// Named pass/fail checks gathered while a command runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Verdicts {
    pub checks: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
}

impl Verdicts {
    pub fn push(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push(Verdict { name: name.into(), passed });
    }

    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect()
    }

    pub fn into_result(self) -> Result<(), CliError> {
        let failed = self.failed();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::acceptance(&failed))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_from_core_errors() {
        assert_eq!(CliError::from(lightcone::Error::Resolution("x".into())).code, EXIT_NUMERICAL);
        assert_eq!(CliError::from(lightcone::Error::Config("x".into())).code, EXIT_VALIDATION);
        let e = CliError::from(lightcone::Error::Domain("bad\nvalue".into()));
        assert_eq!(e.kind, "domain");
        let line = e.json_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["exit_code"], 1);
    }

    #[test]
    fn verdicts() {
        let mut v = Verdicts::default();
        v.push("a", true);
        assert!(v.clone().into_result().is_ok());
        v.push("b", false);
        let e = v.into_result().unwrap_err();
        assert_eq!((e.code, e.message.as_str()), (EXIT_NUMERICAL, "b"));
    }
}
