//! One line-oriented file per (algorithm, function, seed) cell.
//!
//! ```text
//! # hmsos-trace v1
//! # fingerprint=<sha256 of the canonical experiment config>
//! # algorithm=hms-os
//! # algorithm_index=0
//! # function=sphere
//! # function_index=0
//! # reference=hms-os
//! # dimension=10
//! # seed=1
//! # nfe_max=30000
//! # optimum_value=0e0
//! # status=ok
//! # final_error=1.2e-7
//! nfe,best_value
//! 50,3.1e3
//! ...
//! ```
//!
//! Reals are written in Rust's shortest round-trip form so reports computed
//! from the files match the in-memory values exactly. Failed cells carry
//! `status=failed` and an `error=` line instead of records.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::population::TraceRecord;

pub const MAGIC: &str = "# hmsos-trace v1";
pub const EXTENSION: &str = "trace";

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok { final_error: f64 },
    Failed { message: String },
}

/// A persisted cell: provenance header plus its convergence records.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub fingerprint: String,
    pub algorithm: String,
    pub algorithm_index: usize,
    pub function: String,
    pub function_index: usize,
    pub reference: Option<String>,
    pub dimension: usize,
    pub seed: u64,
    pub nfe_max: u64,
    pub optimum_value: f64,
    pub status: CellStatus,
    pub records: Vec<TraceRecord>,
}

impl TraceFile {
    pub fn file_name(&self) -> String {
        format!(
            "{}__{}__seed{}.{EXTENSION}",
            self.algorithm, self.function, self.seed
        )
    }

    pub fn final_error(&self) -> Option<f64> {
        match self.status {
            CellStatus::Ok { final_error } => Some(final_error),
            CellStatus::Failed { .. } => None,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "# fingerprint={}", self.fingerprint);
        let _ = writeln!(s, "# algorithm={}", self.algorithm);
        let _ = writeln!(s, "# algorithm_index={}", self.algorithm_index);
        let _ = writeln!(s, "# function={}", self.function);
        let _ = writeln!(s, "# function_index={}", self.function_index);
        if let Some(r) = &self.reference {
            let _ = writeln!(s, "# reference={r}");
        }
        let _ = writeln!(s, "# dimension={}", self.dimension);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# nfe_max={}", self.nfe_max);
        let _ = writeln!(s, "# optimum_value={:e}", self.optimum_value);
        match &self.status {
            CellStatus::Ok { final_error } => {
                let _ = writeln!(s, "# status=ok");
                let _ = writeln!(s, "# final_error={final_error:e}");
            }
            CellStatus::Failed { message } => {
                let _ = writeln!(s, "# status=failed");
                let _ = writeln!(s, "# error={}", message.replace('\n', " "));
            }
        }
        let _ = writeln!(s, "nfe,best_value");
        for r in &self.records {
            let _ = writeln!(s, "{},{:e}", r.nfe, r.best_value);
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Report(format!("malformed trace file: {msg}"));
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing header".into()));
        }
        let mut header = std::collections::BTreeMap::new();
        let mut records = Vec::new();
        let mut in_body = false;
        for line in lines {
            if let Some(kv) = line.strip_prefix("# ") {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| bad(format!("bad header line '{line}'")))?;
                header.insert(k.to_string(), v.to_string());
            } else if line == "nfe,best_value" {
                in_body = true;
            } else if in_body && !line.is_empty() {
                let (n, v) = line
                    .split_once(',')
                    .ok_or_else(|| bad(format!("bad record '{line}'")))?;
                records.push(TraceRecord {
                    nfe: n.parse().map_err(|_| bad(format!("bad nfe '{n}'")))?,
                    best_value: v.parse().map_err(|_| bad(format!("bad value '{v}'")))?,
                });
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| bad(format!("missing '{k}'")))
        };
        let num =
            |k: &str| -> Result<u64> { get(k)?.parse().map_err(|_| bad(format!("bad '{k}'"))) };
        let real =
            |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad '{k}'"))) };
        let status = match get("status")?.as_str() {
            "ok" => CellStatus::Ok {
                final_error: real("final_error")?,
            },
            "failed" => CellStatus::Failed {
                message: header.get("error").cloned().unwrap_or_default(),
            },
            other => return Err(bad(format!("unknown status '{other}'"))),
        };
        Ok(Self {
            fingerprint: get("fingerprint")?,
            algorithm: get("algorithm")?,
            algorithm_index: num("algorithm_index")? as usize,
            function: get("function")?,
            function_index: num("function_index")? as usize,
            reference: header.get("reference").cloned(),
            dimension: num("dimension")? as usize,
            seed: num("seed")?,
            nfe_max: num("nfe_max")?,
            optimum_value: real("optimum_value")?,
            status,
            records,
        })
    }

    /// Writes to `dir/<file_name>` through a temporary file and a rename.
    pub fn write_atomic(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.file_name());
        write_atomic(&path, self.render().as_bytes())?;
        Ok(path)
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?
        .to_string_lossy();
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Reads every `*.trace` file in `dir`, ordered by (function index,
/// algorithm index, seed).
pub fn load_dir(dir: &Path) -> Result<Vec<TraceFile>> {
    let mut traces = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(EXTENSION) {
            let text = fs::read_to_string(&path)?;
            traces.push(
                TraceFile::parse(&text)
                    .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?,
            );
        }
    }
    traces.sort_by(|a, b| {
        (a.function_index, a.algorithm_index, a.seed).cmp(&(
            b.function_index,
            b.algorithm_index,
            b.seed,
        ))
    });
    Ok(traces)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(status: CellStatus) -> TraceFile {
        TraceFile {
            fingerprint: "abc".into(),
            algorithm: "hms".into(),
            algorithm_index: 1,
            function: "sphere".into(),
            function_index: 0,
            reference: Some("hms-os".into()),
            dimension: 3,
            seed: 7,
            nfe_max: 300,
            optimum_value: 0.0,
            status,
            records: vec![
                TraceRecord {
                    nfe: 50,
                    best_value: 0.1 + 0.2,
                },
                TraceRecord {
                    nfe: 250,
                    best_value: 1.234_567_890_123e-17,
                },
            ],
        }
    }

    #[test]
    fn render_parse_is_exact() {
        let t = sample(CellStatus::Ok {
            final_error: 1.0 / 3.0,
        });
        assert_eq!(TraceFile::parse(&t.render()).unwrap(), t);
        let mut f = sample(CellStatus::Failed {
            message: "boom\nline".into(),
        });
        f.records.clear();
        let parsed = TraceFile::parse(&f.render()).unwrap();
        assert_eq!(
            parsed.status,
            CellStatus::Failed {
                message: "boom line".into()
            }
        );
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(TraceFile::parse("nfe,best_value\n1,2\n").is_err());
    }
}
